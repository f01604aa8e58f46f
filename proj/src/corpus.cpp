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

#include "casa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "casa/dsp.hpp"

namespace casa {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

struct Resonator {
  double a1 = 0.0, a2 = 0.0, b0 = 1.0;
  double z1 = 0.0, z2 = 0.0;

  void tune(double freq_hz, double bw_hz, double fs) {
    const double r = std::exp(-kPi * bw_hz / fs);
    const double w = 2.0 * kPi * freq_hz / fs;
    a1 = -2.0 * r * std::cos(w);
    a2 = r * r;
    b0 = (1.0 - r * r) * std::sin(w);
    if (b0 < 1e-4) b0 = 1e-4;
  }

  double step(double x) {
    const double y = b0 * x - a1 * z1 - a2 * z2;
    z2 = z1;
    z1 = y;
    return y;
  }
};

struct EmotionProfile {
  double f0_scale;
  double f0_slope;    // relative drift start->end
  double energy;
  double rate;        // syllable rate multiplier
  double vibrato_hz;
  double vibrato_depth;
  double tremolo_hz;
  double tremolo_depth;
  double tilt;        // pre-emphasis strength, brightens > 0
};

EmotionProfile emotion_profile(Emotion e) {
  switch (e) {
    case Emotion::kAngry:
      return {1.30, 0.05, 1.60, 1.15, 0.0, 0.0, 0.0, 0.0, 0.55};
    case Emotion::kHappy:
      return {1.15, 0.20, 1.20, 1.05, 0.0, 0.0, 3.0, 0.10, 0.25};
    case Emotion::kNeutral:
      return {1.00, 0.00, 1.00, 1.00, 0.0, 0.0, 0.0, 0.0, 0.0};
    case Emotion::kSad:
      return {0.85, -0.12, 0.70, 0.85, 0.0, 0.0, 0.0, 0.0, -0.30};
    case Emotion::kFearful:
      return {1.10, 0.04, 0.90, 1.10, 6.5, 0.04, 6.0, 0.20, 0.10};
    case Emotion::kDisgust:
      return {0.92, -0.05, 0.85, 0.92, 0.0, 0.0, 35.0, 0.30, -0.10};
  }
  return {1, 0, 1, 1, 0, 0, 0, 0, 0};
}

// Canonical vowel formant targets (F1, F2) in Hz.
constexpr double kVowels[5][2] = {
    {730.0, 1090.0},  // a
    {530.0, 1840.0},  // e
    {390.0, 1990.0},  // i
    {570.0, 840.0},   // o
    {300.0, 870.0},   // u
};

std::string two_digit(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

const char* emotion_name(Emotion e) {
  switch (e) {
    case Emotion::kAngry: return "angry";
    case Emotion::kHappy: return "happy";
    case Emotion::kNeutral: return "neutral";
    case Emotion::kSad: return "sad";
    case Emotion::kFearful: return "fearful";
    case Emotion::kDisgust: return "disgust";
  }
  return "neutral";
}

Emotion emotion_from_name(const std::string& name) {
  for (Emotion e : kAllEmotions)
    if (name == emotion_name(e)) return e;
  throw ValidationError("unknown emotion label: " + name);
}

int CorpusManifest::num_speakers() const {
  int k = 0;
  for (const auto& e : entries) k = std::max(k, e.speaker + 1);
  return k;
}

CorpusManifest read_manifest(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw FormatError("read_manifest: cannot open " + csv_path);
  const auto base = std::filesystem::path(csv_path).parent_path();
  CorpusManifest m;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != "path,speaker,emotion,condition")
        throw FormatError("read_manifest: bad header in " + csv_path);
      continue;
    }
    std::stringstream ss(line);
    std::string path, speaker, emotion, condition;
    if (!std::getline(ss, path, ',') || !std::getline(ss, speaker, ',') ||
        !std::getline(ss, emotion, ',') || !std::getline(ss, condition))
      throw FormatError("read_manifest: bad row: " + line);
    ManifestEntry e;
    auto p = std::filesystem::path(path);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    e.speaker = std::stoi(speaker);
    e.emotion = emotion_from_name(emotion);
    e.condition = condition;
    if (e.condition != "clean" && e.condition != "noisy")
      throw ValidationError("read_manifest: condition must be clean|noisy: " + line);
    m.entries.push_back(std::move(e));
  }
  if (first) throw FormatError("read_manifest: empty file " + csv_path);
  return m;
}

void write_manifest(const std::string& csv_path, const CorpusManifest& manifest) {
  std::ofstream f(csv_path, std::ios::trunc);
  if (!f) throw FormatError("write_manifest: cannot open " + csv_path);
  f << "path,speaker,emotion,condition\n";
  const auto base = std::filesystem::path(csv_path).parent_path();
  for (const auto& e : manifest.entries) {
    std::string path = e.path;
    auto rel = std::filesystem::relative(e.path, base.empty() ? "." : base);
    if (!rel.empty()) path = rel.string();
    f << path << ',' << e.speaker << ',' << emotion_name(e.emotion) << ','
      << e.condition << '\n';
  }
}

void validate_manifest(const CorpusManifest& manifest) {
  if (manifest.entries.empty())
    throw ValidationError("manifest: no entries");
  const int k = manifest.num_speakers();
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  std::map<std::pair<int, int>, int> per_cell;
  std::map<int, bool> emotions_present;
  for (const auto& e : manifest.entries) {
    if (e.speaker < 0) throw ValidationError("manifest: negative speaker id");
    seen[static_cast<std::size_t>(e.speaker)] = true;
    per_cell[{e.speaker, static_cast<int>(e.emotion)}]++;
    emotions_present[static_cast<int>(e.emotion)] = true;
  }
  for (int s = 0; s < k; ++s)
    if (!seen[static_cast<std::size_t>(s)])
      throw ValidationError("manifest: speaker ids not dense 0..K-1");
  for (int s = 0; s < k; ++s)
    for (const auto& [emo, present] : emotions_present)
      if (present && per_cell[{s, emo}] < 2)
        throw ValidationError(
            "manifest: every speaker needs >= 2 entries per emotion");
}

AudioSignal synth_utterance(int speaker, Emotion emotion, int utt_index,
                            std::uint64_t seed, double duration_s) {
  const double fs = kPipelineRate;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
  // One RNG stream per (seed, speaker, emotion, utterance).
  Rng rng(seed * 0x100000001b3ULL ^ (static_cast<std::uint64_t>(speaker) << 40) ^
          (static_cast<std::uint64_t>(static_cast<int>(emotion)) << 32) ^
          static_cast<std::uint64_t>(utt_index + 1));

  const double f0_base = 107.0 + 13.0 * speaker;
  // Speaker identity: vocal-tract scaling, third formant and a fixed timbre
  // resonance. These stay put across emotions (which move pitch, energy,
  // rate and tilt), so they are the stable cues.
  const double vt1 = 1.0 + 0.10 * (((speaker * 3) % 8) - 3.5) / 3.5;
  const double vt2 = 1.0 + 0.12 * (((speaker * 5 + 2) % 8) - 3.5) / 3.5;
  const double f3 = 2350.0 + 140.0 * speaker;
  const double timbre_hz = 700.0 + 130.0 * ((speaker * 5 + 3) % 8);
  const double breath = 0.010 + 0.004 * ((speaker * 7) % 8);
  const double pulse_mix = 0.25 + 0.03 * ((speaker * 3 + 1) % 8);

  const EmotionProfile prof = emotion_profile(emotion);

  // Syllable plan: optional fricative onset burst, then a voiced vowel.
  const double syl_s = 0.24 / prof.rate;
  const double gap_s = 0.06;
  struct Syllable {
    std::size_t start, len;
    std::size_t burst_len;      // unvoiced onset portion
    double f1a, f2a, f1b, f2b;  // formant glide endpoints
    double burst_hz;            // fricative center frequency
  };
  std::vector<Syllable> syllables;
  std::size_t pos = static_cast<std::size_t>(0.02 * fs);
  while (pos + static_cast<std::size_t>(syl_s * fs) + 160 < n) {
    const auto& va = kVowels[rng.next_below(5)];
    const auto& vb = kVowels[rng.next_below(5)];
    Syllable s;
    s.start = pos;
    s.len = static_cast<std::size_t>(syl_s * fs);
    s.burst_len = rng.uniform() < 0.65
                      ? static_cast<std::size_t>(rng.uniform(0.035, 0.07) * fs)
                      : 0;
    s.f1a = va[0] * vt1;
    s.f2a = va[1] * vt2;
    s.f1b = vb[0] * vt1;
    s.f2b = vb[1] * vt2;
    s.burst_hz = rng.uniform(2400.0, 5600.0);
    syllables.push_back(s);
    pos += s.len + static_cast<std::size_t>(gap_s * fs * rng.uniform(0.7, 1.3));
  }

  AudioSignal sig;
  sig.sample_rate = kPipelineRate;
  sig.samples.assign(n, 0.0);

  Resonator r1, r2, r3, rt, rf;
  rt.tune(timbre_hz, 150.0, fs);
  double phase = 0.0;
  double lp = 0.0;  // leaky integrator for the glottal rolloff
  const double drift_amp = emotion == Emotion::kNeutral ? 0.015 : 0.05;
  const double drift_hz = rng.uniform(0.4, 0.9);
  const double drift_phase = rng.uniform(0.0, 2.0 * kPi);

  for (const auto& syl : syllables) {
    const double attack = 0.015 * fs;
    const double release = 0.030 * fs;
    rf.tune(syl.burst_hz, 900.0, fs);
    for (std::size_t j = 0; j < syl.len; ++j) {
      const std::size_t i = syl.start + j;
      const double t = static_cast<double>(i) / fs;
      const double u = static_cast<double>(j) / static_cast<double>(syl.len);

      double f0 = f0_base * prof.f0_scale;
      f0 *= 1.0 + prof.f0_slope * (t / duration_s - 0.5);
      f0 *= 1.0 + drift_amp * std::sin(2.0 * kPi * drift_hz * t + drift_phase);
      if (prof.vibrato_hz > 0.0)
        f0 *= 1.0 + prof.vibrato_depth * std::sin(2.0 * kPi * prof.vibrato_hz * t);

      double v = 0.0;
      if (j < syl.burst_len) {
        // Fricative onset: band-passed noise around the burst frequency.
        const double edge =
            std::min({1.0, static_cast<double>(j) / (0.004 * fs),
                      static_cast<double>(syl.burst_len - j) / (0.008 * fs)});
        v = 2.2 * edge * rf.step(rng.normal());
      } else {
        // Voiced part: pulse train with both a low-passed body and a raw
        // impulse component so the upper harmonics survive.
        phase += f0 / fs;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = 1.0;
        }
        lp = 0.98 * lp + pulse;
        double src = lp + pulse_mix * pulse + breath * rng.normal();

        const double f1 = syl.f1a + (syl.f1b - syl.f1a) * u;
        const double f2 = syl.f2a + (syl.f2b - syl.f2a) * u;
        if (j % 160 == 0 || j == syl.burst_len) {
          r1.tune(f1, 90.0, fs);
          r2.tune(f2, 140.0, fs);
          r3.tune(f3, 240.0, fs);
        }
        v = r1.step(src) + 0.7 * r2.step(src) + 0.5 * r3.step(src) +
            0.45 * rt.step(src);

        const std::size_t voiced = j - syl.burst_len;
        if (voiced < attack) v *= static_cast<double>(voiced) / attack;
      }
      double env = 1.0;
      if (syl.len - j < release)
        env = static_cast<double>(syl.len - j) / release;
      if (prof.tremolo_hz > 0.0)
        env *= 1.0 + prof.tremolo_depth * std::sin(2.0 * kPi * prof.tremolo_hz * t);

      sig.samples[i] = v * env;
    }
  }

  // Spectral tilt: first-difference pre-emphasis blended by |tilt|.
  if (prof.tilt != 0.0) {
    std::vector<double> shaped(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      const double hp = sig.samples[i] - 0.95 * sig.samples[i - 1];
      shaped[i] = prof.tilt > 0.0
                      ? (1.0 - prof.tilt) * sig.samples[i] + prof.tilt * 3.0 * hp
                      : sig.samples[i] + prof.tilt * 0.8 * hp;
    }
    sig.samples.swap(shaped);
  }

  // Normalize to an emotion-scaled RMS, then guard against clipping.
  double r = dsp::rms(sig.samples);
  const double target_rms = 0.08 * prof.energy;
  if (r > 1e-12) {
    const double g = target_rms / r;
    for (auto& v : sig.samples) v *= g;
  }
  double peak = 0.0;
  for (double v : sig.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.95) {
    const double g = 0.95 / peak;
    for (auto& v : sig.samples) v *= g;
  }
  return sig;
}

CorpusManifest synth_corpus(const std::string& out_dir, const SynthConfig& cfg) {
  if (cfg.n_speakers < 2)
    throw ValidationError("synth_corpus: need at least 2 speakers");
  std::filesystem::create_directories(out_dir);
  CorpusManifest m;
  for (int s = 0; s < cfg.n_speakers; ++s) {
    for (Emotion emo : cfg.emotions) {
      for (int u = 0; u < cfg.utterances_per_emotion; ++u) {
        AudioSignal sig = synth_utterance(s, emo, u, cfg.seed, cfg.utterance_s);
        std::string name = "spk" + two_digit(s) + "_" + emotion_name(emo) + "_" +
                           two_digit(u) + ".wav";
        std::string path = (std::filesystem::path(out_dir) / name).string();
        write_wav(path, sig);
        m.entries.push_back({path, s, emo, "clean"});
      }
    }
  }
  write_manifest((std::filesystem::path(out_dir) / "manifest.csv").string(), m);
  return m;
}

AudioSignal make_noise(NoiseKind kind, std::size_t n_samples, std::uint64_t seed,
                       int sample_rate) {
  Rng rng(seed ^ 0xabcdef1234567890ULL);
  AudioSignal sig;
  sig.sample_rate = sample_rate;
  sig.samples.assign(n_samples, 0.0);
  switch (kind) {
    case NoiseKind::kWhite: {
      for (auto& v : sig.samples) v = 0.1 * rng.normal();
      break;
    }
    case NoiseKind::kPink: {
      // Kellet three-pole pinking approximation.
      double b0 = 0, b1 = 0, b2 = 0;
      for (auto& v : sig.samples) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = 0.03 * (b0 + b1 + b2 + w * 0.1848);
      }
      break;
    }
    case NoiseKind::kHum: {
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        sig.samples[i] = 0.06 * std::sin(2.0 * kPi * 50.0 * t) +
                         0.03 * std::sin(2.0 * kPi * 150.0 * t) +
                         0.02 * std::sin(2.0 * kPi * 250.0 * t) +
                         0.01 * rng.normal();
      }
      break;
    }
    case NoiseKind::kCafeteria: {
      // Slowly gliding tones over a pink bed; nonstationary on purpose.
      double b0 = 0, b1 = 0, b2 = 0;
      struct Tone { double f, df, amp, phase; };
      std::vector<Tone> tones;
      for (int k = 0; k < 4; ++k)
        tones.push_back({rng.uniform(300.0, 3500.0), rng.uniform(-400.0, 400.0),
                         rng.uniform(0.02, 0.05), rng.uniform(0.0, 2.0 * kPi)});
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        double v = 0.015 * (b0 + b1 + b2 + w * 0.1848);
        for (auto& tone : tones) {
          tone.phase += 2.0 * kPi * (tone.f + tone.df * t) / sample_rate;
          v += tone.amp * std::sin(tone.phase);
        }
        sig.samples[i] = v;
      }
      break;
    }
  }
  return sig;
}

}  // namespace casa
