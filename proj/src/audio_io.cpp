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

#include "casa/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "casa/common.hpp"

namespace casa {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44) throw FormatError("read_wav: file too small: " + path);
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("read_wav: not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::uint32_t chunk_len = read_u32le(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size())
      throw FormatError("read_wav: truncated chunk in " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw FormatError("read_wav: short fmt chunk in " + path);
      format = read_u16le(bytes.data() + body);
      channels = read_u16le(bytes.data() + body + 2);
      rate = read_u32le(bytes.data() + body + 4);
      bits = read_u16le(bytes.data() + body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word aligned
  }

  if (format == 0 || data == nullptr)
    throw FormatError("read_wav: missing fmt or data chunk in " + path);
  if (format != 1) throw UnsupportedError("read_wav: only PCM supported: " + path);
  if (bits != 16)
    throw UnsupportedError("read_wav: only 16-bit PCM supported: " + path);
  if (channels != 1 && channels != 2)
    throw UnsupportedError("read_wav: only mono/stereo supported: " + path);
  if (rate == 0) throw FormatError("read_wav: zero sample rate in " + path);

  const std::size_t n_frames = data_len / (2 * channels);
  AudioSignal sig;
  sig.sample_rate = static_cast<int>(rate);
  sig.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + 2 * (i * channels + c);
      std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      acc += static_cast<double>(s);
    }
    sig.samples[i] = acc / (32768.0 * channels);
  }
  return sig;
}

void write_wav(const std::string& path, const AudioSignal& sig) {
  if (sig.sample_rate <= 0) throw ValidationError("write_wav: bad sample rate");
  std::vector<unsigned char> out;
  const std::uint32_t n = static_cast<std::uint32_t>(sig.samples.size());
  const std::uint32_t data_len = n * 2;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, 1);  // PCM
  put_u16le(out, 1);  // mono
  put_u32le(out, static_cast<std::uint32_t>(sig.sample_rate));
  put_u32le(out, static_cast<std::uint32_t>(sig.sample_rate) * 2);
  put_u16le(out, 2);   // block align
  put_u16le(out, 16);  // bits
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, data_len);
  for (double v : sig.samples) {
    double scaled = std::round(v * 32768.0);
    if (scaled > 32767.0) scaled = 32767.0;
    if (scaled < -32768.0) scaled = -32768.0;
    put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("write_wav: cannot open " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write_wav: write failed for " + path);
}

AudioSignal resample(const AudioSignal& sig, int target_rate) {
  if (target_rate <= 0) throw ValidationError("resample: target rate must be > 0");
  if (target_rate == sig.sample_rate) return sig;
  const std::size_t n_in = sig.samples.size();
  const double ratio = static_cast<double>(target_rate) / sig.sample_rate;
  const std::size_t n_out =
      static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * ratio));

  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples.assign(n_out, 0.0);
  if (n_in == 0) return out;

  // Blackman-windowed sinc, 32 zero crossings per side at the lower of the
  // two rates; cutoff slightly below Nyquist of the narrower band.
  const double cutoff = 0.45 * std::min(1.0, ratio);  // in input-rate cycles
  const int half_width = static_cast<int>(std::ceil(32.0 / std::min(1.0, ratio)));
  for (std::size_t m = 0; m < n_out; ++m) {
    const double center = static_cast<double>(m) / ratio;  // in input samples
    const int lo = static_cast<int>(std::floor(center)) - half_width + 1;
    const int hi = static_cast<int>(std::floor(center)) + half_width;
    double acc = 0.0;
    for (int k = std::max(lo, 0); k <= std::min<int>(hi, static_cast<int>(n_in) - 1);
         ++k) {
      const double t = (static_cast<double>(k) - center);
      double sinc = (std::abs(t) < 1e-12)
                        ? 2.0 * cutoff
                        : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
      const double u = t / half_width;  // in [-1, 1]
      const double win = 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(2.0 * kPi * u);
      acc += sig.samples[static_cast<std::size_t>(k)] * sinc * win;
    }
    out.samples[m] = acc;
  }
  return out;
}

AudioSignal scale_noise_for_ratio(const AudioSignal& target,
                                  const AudioSignal& noise, double ratio) {
  if (ratio <= 0.0) throw ValidationError("mix_at_ratio: ratio must be positive");
  if (target.sample_rate != noise.sample_rate)
    throw ValidationError("mix_at_ratio: sample rates differ");
  if (target.samples.empty())
    throw DegenerateInputError("mix_at_ratio: empty target");
  if (noise.samples.empty())
    throw DegenerateInputError("mix_at_ratio: empty noise");

  // Loop or crop the noise to the target length.
  AudioSignal out;
  out.sample_rate = target.sample_rate;
  out.samples.resize(target.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = noise.samples[i % noise.samples.size()];

  double rms_t = 0.0, rms_n = 0.0;
  for (double v : target.samples) rms_t += v * v;
  for (double v : out.samples) rms_n += v * v;
  rms_t = std::sqrt(rms_t / target.samples.size());
  rms_n = std::sqrt(rms_n / out.samples.size());
  if (rms_n <= 0.0)
    throw DegenerateInputError("mix_at_ratio: noise track is silent");

  const double scale = rms_t / (ratio * rms_n);
  for (auto& v : out.samples) v *= scale;
  return out;
}

AudioSignal mix_at_ratio(const AudioSignal& target, const AudioSignal& noise,
                         double ratio) {
  AudioSignal scaled = scale_noise_for_ratio(target, noise, ratio);
  AudioSignal out;
  out.sample_rate = target.sample_rate;
  out.samples.resize(target.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = target.samples[i] + scaled.samples[i];
  return out;
}

void validate_signal(const AudioSignal& sig) {
  if (sig.sample_rate != 8000 && sig.sample_rate != 16000)
    throw ValidationError("signal: pipeline entry rate must be 8 or 16 kHz");
  for (double v : sig.samples)
    if (!std::isfinite(v)) throw ValidationError("signal: non-finite sample");
}

}  // namespace casa
