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

#ifndef CASA_AUDIO_IO_HPP
#define CASA_AUDIO_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace casa {

// Time-domain carrier for the whole pipeline. Samples are dimensionless
// amplitudes, nominal range [-1, 1]; the internal pipeline rate is 16 kHz.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

constexpr int kPipelineRate = 16000;

// Reads a 16-bit PCM RIFF/WAVE file. Stereo is downmixed to mono by
// averaging; samples are scaled by 1/32768.
AudioSignal read_wav(const std::string& path);

// Writes mono 16-bit PCM. Values are clamped to [-1, 32767/32768] and
// rounded; read_wav(write_wav(x)) is bit-exact for 16-bit content.
void write_wav(const std::string& path, const AudioSignal& sig);

// Band-limited windowed-sinc resampling. Duration is preserved within one
// sample period of the target rate.
AudioSignal resample(const AudioSignal& sig, int target_rate);

// Loops/crops `noise` to the target length and rescales it so that
// RMS(target) / RMS(scaled noise) == ratio. Throws DegenerateInputError on
// silent noise. The mask trainer uses this to keep mixture components
// time-aligned with the mixtures it labels.
AudioSignal scale_noise_for_ratio(const AudioSignal& target,
                                  const AudioSignal& noise, double ratio);

// target + scale_noise_for_ratio(target, noise, ratio).
AudioSignal mix_at_ratio(const AudioSignal& target, const AudioSignal& noise,
                         double ratio);

// Asserts no NaN/Inf and a supported entry rate; throws ValidationError.
void validate_signal(const AudioSignal& sig);

}  // namespace casa

#endif  // CASA_AUDIO_IO_HPP
