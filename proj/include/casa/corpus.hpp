// Copyright 2026 casa-sid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASA_CORPUS_HPP
#define CASA_CORPUS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "casa/audio_io.hpp"
#include "casa/common.hpp"

namespace casa {

enum class Emotion { kAngry, kHappy, kNeutral, kSad, kFearful, kDisgust };

constexpr std::array<Emotion, 6> kAllEmotions = {
    Emotion::kAngry, Emotion::kHappy, Emotion::kNeutral,
    Emotion::kSad,   Emotion::kFearful, Emotion::kDisgust};

const char* emotion_name(Emotion e);
Emotion emotion_from_name(const std::string& name);

struct ManifestEntry {
  std::string path;
  int speaker = 0;
  Emotion emotion = Emotion::kNeutral;
  std::string condition = "clean";  // "clean" or "noisy"
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  int num_speakers() const;
};

// CSV with header `path,speaker,emotion,condition`. Relative paths are
// resolved against the CSV's directory on load.
CorpusManifest read_manifest(const std::string& csv_path);
void write_manifest(const std::string& csv_path, const CorpusManifest& manifest);

// Checks speaker ids are dense 0..K-1 and every speaker has at least two
// entries per emotion present in the manifest.
void validate_manifest(const CorpusManifest& manifest);

struct SynthConfig {
  int n_speakers = 8;
  int utterances_per_emotion = 10;
  double utterance_s = 0.96;
  std::vector<Emotion> emotions{kAllEmotions.begin(), kAllEmotions.end()};
  std::uint64_t seed = 1;
};

// Deterministic synthetic stand-in corpus: each "speaker" is a distinct
// fundamental plus formant profile, each "emotion" a fixed pitch/energy/rate
// modulation of the base voice. Writes WAVs under out_dir and the manifest
// CSV next to them.
CorpusManifest synth_corpus(const std::string& out_dir, const SynthConfig& cfg);

// One synthetic utterance, without touching the filesystem.
AudioSignal synth_utterance(int speaker, Emotion emotion, int utt_index,
                            std::uint64_t seed, double duration_s = 0.96);

enum class NoiseKind { kWhite, kPink, kHum, kCafeteria };

// Seeded interference tracks used for mixtures and mask training.
AudioSignal make_noise(NoiseKind kind, std::size_t n_samples, std::uint64_t seed,
                       int sample_rate = kPipelineRate);

}  // namespace casa

#endif  // CASA_CORPUS_HPP
