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

#ifndef CASA_CONFIG_HPP
#define CASA_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "casa/corpus.hpp"
#include "casa/eval.hpp"
#include "casa/mask.hpp"
#include "casa/sid.hpp"

namespace casa {

// One declarative document for every module default. Parsed from a flat
// key = value file with dotted section keys; flags may override single keys.
struct PipelineConfig {
  std::uint64_t seed = 1;

  // audio
  double mix_ratio = 2.0;        // target:noise ratio for evaluation mixing
  bool ratio_is_power = false;   // printed 2:1 read as RMS amplitude by default

  // features
  double mel_divisor = 100.0;

  // corpus synthesis
  int corpus_speakers = 8;
  int corpus_utterances = 10;
  double corpus_duration_s = 0.96;

  MaskConfig mask;
  int mask_training_pairs = 16;  // 0 = use every manifest entry
  std::vector<NoiseKind> noise_kinds = {NoiseKind::kWhite, NoiseKind::kCafeteria,
                                        NoiseKind::kPink};

  TrainConfig sid;

  int eval_k_folds = 10;
  int eval_folds_evaluated = -1;
  std::string baseline_csv;

  // Effective amplitude ratio after the power/amplitude interpretation.
  double amplitude_ratio() const;

  void set(const std::string& key, const std::string& value);
  void validate() const;
};

PipelineConfig load_config(const std::string& path);
void apply_overrides(PipelineConfig& cfg,
                     const std::vector<std::string>& key_value_pairs);

NoiseKind noise_kind_from_name(const std::string& name);
const char* noise_kind_name(NoiseKind kind);

}  // namespace casa

#endif  // CASA_CONFIG_HPP
