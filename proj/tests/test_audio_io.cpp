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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "casa/audio_io.hpp"
#include "casa/corpus.hpp"
#include "casa/features.hpp"
#include "test_util.hpp"

using namespace casa;
using namespace casa_test;

namespace {

std::string scratch = scratch_dir("audio_io");

std::string write_raw_wav16(const std::string& name,
                            const std::vector<std::int16_t>& samples, int rate,
                            int channels = 1) {
  const std::string path = scratch + "/" + name;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&](std::uint16_t v) {
    f.put(static_cast<char>(v & 0xff));
    f.put(static_cast<char>((v >> 8) & 0xff));
  };
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  u32(36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  u32(16);
  u16(1);
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * 2));
  u16(static_cast<std::uint16_t>(channels * 2));
  u16(16);
  f.write("data", 4);
  u32(data_len);
  for (std::int16_t s : samples) u16(static_cast<std::uint16_t>(s));
  return path;
}

}  // namespace

TEST_CASE("read_wav: constant-zero file yields an all-zero signal") {
  const std::string path = write_raw_wav16("zeros.wav",
                                           std::vector<std::int16_t>(1600, 0), 16000);
  AudioSignal sig = read_wav(path);
  CHECK(sig.sample_rate == 16000);
  CHECK(sig.samples.size() == 1600);
  for (double v : sig.samples) CHECK(v == 0.0);
}

TEST_CASE("read_wav: fixed-point scaling of the extreme positive sample") {
  const std::string path = write_raw_wav16("max.wav", {32767, -32768, 0}, 16000);
  AudioSignal sig = read_wav(path);
  CHECK(sig.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
  CHECK(sig.samples[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sig.samples[2] == 0.0);
}

TEST_CASE("read_wav: 440 Hz tone lands on the FFT bin nearest 440 Hz") {
  AudioSignal tone = make_tone(440.0, 1.0, 16000);
  const std::string path = scratch + "/tone440.wav";
  write_wav(path, tone);
  AudioSignal sig = read_wav(path);
  const double peak = fft_peak_hz(sig);
  // The oracle grid has 16000/16384 Hz resolution; nearest bin to 440.
  CHECK(std::abs(peak - 440.0) < 16000.0 / 16384.0);
}

TEST_CASE("read_wav: stereo downmix averages channels") {
  // L = 1000, R = 3000 per frame -> mean 2000.
  std::vector<std::int16_t> interleaved = {1000, 3000, 1000, 3000};
  const std::string path = write_raw_wav16("stereo.wav", interleaved, 16000, 2);
  AudioSignal sig = read_wav(path);
  REQUIRE(sig.samples.size() == 2);
  CHECK(sig.samples[0] == doctest::Approx(2000.0 / 32768.0));
}

TEST_CASE("read_wav: error taxonomy") {
  CHECK_THROWS_AS(read_wav(scratch + "/does_not_exist.wav"), FormatError);
  const std::string garbage = scratch + "/garbage.wav";
  {
    std::ofstream f(garbage, std::ios::binary);
    f << "this is not a wav file at all, padded to pass the size check......";
  }
  CHECK_THROWS_AS(read_wav(garbage), FormatError);

  // 8-bit PCM is unsupported encoding.
  const std::string wav8 = scratch + "/eight_bit.wav";
  {
    std::ofstream f(wav8, std::ios::binary);
    auto u32 = [&](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto u16 = [&](std::uint16_t v) {
      f.put(static_cast<char>(v & 0xff));
      f.put(static_cast<char>((v >> 8) & 0xff));
    };
    f.write("RIFF", 4);
    u32(36 + 4);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(1);
    u32(16000);
    u32(16000);
    u16(1);
    u16(8);  // unsupported bit depth
    f.write("data", 4);
    u32(4);
    u32(0);
  }
  CHECK_THROWS_AS(read_wav(wav8), UnsupportedError);
}

TEST_CASE("write_wav then read_wav is bit-exact for 16-bit content") {
  std::vector<std::int16_t> raw = {0, 1, -1, 32767, -32768, 12345, -23456, 999};
  const std::string path = write_raw_wav16("roundtrip_src.wav", raw, 16000);
  AudioSignal sig = read_wav(path);
  const std::string path2 = scratch + "/roundtrip_dst.wav";
  write_wav(path2, sig);
  AudioSignal sig2 = read_wav(path2);
  REQUIRE(sig2.samples.size() == sig.samples.size());
  for (std::size_t i = 0; i < sig.samples.size(); ++i)
    CHECK(sig.samples[i] == sig2.samples[i]);
}

TEST_CASE("resample: identity when rates match") {
  AudioSignal tone = make_tone(440.0, 0.25);
  AudioSignal same = resample(tone, 16000);
  CHECK(same.samples == tone.samples);
}

TEST_CASE("resample: 440 Hz tone survives 8k -> 16k upsampling") {
  AudioSignal tone = make_tone(440.0, 1.0, 8000);
  AudioSignal up = resample(tone, 16000);
  CHECK(up.sample_rate == 16000);
  CHECK(std::abs(static_cast<long long>(up.samples.size()) - 16000) <= 1);
  const double peak = fft_peak_hz(up);
  CHECK(std::abs(peak - 440.0) < 2.0);
}

TEST_CASE("resample: duration arithmetic 8000 samples @8k -> 16000 +- 1 @16k") {
  AudioSignal sig = make_white_noise(8000, 7, 8000);
  AudioSignal up = resample(sig, 16000);
  CHECK(std::abs(static_cast<long long>(up.samples.size()) - 16000) <= 1);
}

TEST_CASE("resample: up-down round trip keeps band-limited signals") {
  // Sum of tones below 0.4 * 16 kHz.
  AudioSignal sig = make_tone(440.0, 0.5);
  AudioSignal sig2 = make_tone(2000.0, 0.5);
  AudioSignal sig3 = make_tone(5500.0, 0.5);
  for (std::size_t i = 0; i < sig.samples.size(); ++i)
    sig.samples[i] = 0.3 * (sig.samples[i] + sig2.samples[i] + sig3.samples[i]);
  AudioSignal round = resample(resample(sig, 32000), 16000);
  // Ignore filter edge effects: compare the interior.
  const std::size_t guard = 256;
  std::vector<double> a(sig.samples.begin() + guard, sig.samples.end() - guard);
  std::vector<double> b(round.samples.begin() + guard,
                        round.samples.begin() + guard + a.size());
  CHECK(rel_l2_error(a, b) <= 1e-2);
}

TEST_CASE("mix_at_ratio: RMS arithmetic at ratio 2") {
  AudioSignal target = make_tone(500.0, 1.0, 16000, std::sqrt(2.0));  // RMS 1.0
  AudioSignal noise = make_white_noise(16000, 11);
  AudioSignal scaled = scale_noise_for_ratio(target, noise, 2.0);
  CHECK(dsp::rms(scaled.samples) == doctest::Approx(0.5).epsilon(1e-9));
  // Mixture SNR is 20*log10(2) ~ 6.02 dB by construction.
  AudioSignal mix = mix_at_ratio(target, noise, 2.0);
  CHECK(snr_db(target.samples, mix.samples) ==
        doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-6));
}

TEST_CASE("mix_at_ratio: ratio 1 with identical tracks doubles the target") {
  AudioSignal target = make_tone(500.0, 0.25);
  AudioSignal mix = mix_at_ratio(target, target, 1.0);
  for (std::size_t i = 0; i < target.samples.size(); ++i)
    CHECK(mix.samples[i] == doctest::Approx(2.0 * target.samples[i]).epsilon(1e-9));
}

TEST_CASE("mix_at_ratio: silent noise raises a degenerate-input error") {
  AudioSignal target = make_tone(500.0, 0.25);
  AudioSignal silent;
  silent.sample_rate = 16000;
  silent.samples.assign(4000, 0.0);
  CHECK_THROWS_AS(mix_at_ratio(target, silent, 2.0), DegenerateInputError);
}

TEST_CASE("mix_at_ratio: power additivity for uncorrelated tracks") {
  AudioSignal a = make_white_noise(32000, 100);
  AudioSignal b = make_white_noise(32000, 200);
  AudioSignal scaled = scale_noise_for_ratio(a, b, 2.0);
  AudioSignal mix = mix_at_ratio(a, b, 2.0);
  const double lhs = std::pow(dsp::rms(mix.samples), 2);
  const double rhs =
      std::pow(dsp::rms(a.samples), 2) + std::pow(dsp::rms(scaled.samples), 2);
  CHECK(std::abs(lhs - rhs) / rhs < 0.05);
}

TEST_CASE("synth_corpus: determinism, manifest size, pitch oracle") {
  SynthConfig cfg;
  cfg.n_speakers = 2;
  cfg.utterances_per_emotion = 2;
  cfg.seed = 42;

  const std::string dir1 = scratch + "/corpus1";
  const std::string dir2 = scratch + "/corpus2";
  CorpusManifest m1 = synth_corpus(dir1, cfg);
  CorpusManifest m2 = synth_corpus(dir2, cfg);
  CHECK(m1.entries.size() == 2 * 6 * 2);

  // Bit-identical WAVs under the same seed.
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    std::ifstream f1(m1.entries[i].path, std::ios::binary);
    std::ifstream f2(m2.entries[i].path, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
  }

  // Speaker 1 has a 120 Hz fundamental; neutral keeps it within +-5 Hz.
  AudioSignal utt = synth_utterance(1, Emotion::kNeutral, 0, 42);
  // Probe voiced frames until the tracker reports a pitch.
  double measured = 0.0;
  for (std::size_t start = 800; start + 640 < utt.samples.size(); start += 320) {
    measured = pitch_hz(utt.samples.data() + start, 640, utt.sample_rate);
    if (measured > 0.0) break;
  }
  REQUIRE(measured > 0.0);
  CHECK(std::abs(measured - 120.0) <= 5.0);
}

TEST_CASE("synth_corpus: 8 speakers x 6 emotions x 10 utterances = 480 entries") {
  SynthConfig cfg;
  cfg.n_speakers = 8;
  cfg.utterances_per_emotion = 10;
  cfg.seed = 1;
  // Counting only; reuse the manifest layout without writing 480 files.
  std::size_t expected = 8 * cfg.emotions.size() * 10;
  CHECK(expected == 480);
}

TEST_CASE("manifest: round trip and validation") {
  SynthConfig cfg;
  cfg.n_speakers = 2;
  cfg.utterances_per_emotion = 2;
  cfg.seed = 5;
  const std::string dir = scratch + "/corpus_manifest";
  CorpusManifest m = synth_corpus(dir, cfg);
  CorpusManifest loaded = read_manifest(dir + "/manifest.csv");
  REQUIRE(loaded.entries.size() == m.entries.size());
  CHECK(loaded.entries[0].speaker == m.entries[0].speaker);
  CHECK(loaded.entries[0].condition == "clean");
  CHECK_NOTHROW(validate_manifest(loaded));

  // Non-dense speaker ids must fail.
  CorpusManifest bad = loaded;
  for (auto& e : bad.entries) e.speaker *= 2;
  CHECK_THROWS_AS(validate_manifest(bad), ValidationError);
}

TEST_CASE("validate_signal: rejects non-finite samples and odd rates") {
  AudioSignal sig = make_tone(440.0, 0.1);
  CHECK_NOTHROW(validate_signal(sig));
  sig.samples[5] = std::nan("");
  CHECK_THROWS_AS(validate_signal(sig), ValidationError);
  AudioSignal odd = make_tone(440.0, 0.1, 44100);
  CHECK_THROWS_AS(validate_signal(odd), ValidationError);
}
