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

#include "casa/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace casa {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config: expected boolean, got " + v);
}

}  // namespace

NoiseKind noise_kind_from_name(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "hum") return NoiseKind::kHum;
  if (name == "cafeteria") return NoiseKind::kCafeteria;
  throw ValidationError("config: unknown noise kind " + name);
}

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kHum: return "hum";
    case NoiseKind::kCafeteria: return "cafeteria";
  }
  return "white";
}

double PipelineConfig::amplitude_ratio() const {
  return ratio_is_power ? std::sqrt(mix_ratio) : mix_ratio;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "seed") {
      seed = std::stoull(value);
      mask.seed = seed;
      sid.seed = seed;
    } else if (key == "audio.mix_ratio") {
      mix_ratio = std::stod(value);
    } else if (key == "audio.ratio_is_power") {
      ratio_is_power = parse_bool(value);
    } else if (key == "features.mel_divisor") {
      mel_divisor = std::stod(value);
    } else if (key == "corpus.speakers") {
      corpus_speakers = std::stoi(value);
    } else if (key == "corpus.utterances") {
      corpus_utterances = std::stoi(value);
    } else if (key == "corpus.duration_s") {
      corpus_duration_s = std::stod(value);
    } else if (key == "mask.lc_db") {
      mask.lc_db = std::stod(value);
    } else if (key == "mask.hidden1") {
      mask.hidden1 = std::stoul(value);
    } else if (key == "mask.hidden2") {
      mask.hidden2 = std::stoul(value);
    } else if (key == "mask.rbm_epochs") {
      mask.rbm_epochs = std::stoi(value);
    } else if (key == "mask.rbm_lr") {
      mask.rbm_lr = std::stod(value);
    } else if (key == "mask.mlp_epochs") {
      mask.mlp_epochs = std::stoi(value);
    } else if (key == "mask.mlp_lr") {
      mask.mlp_lr = std::stod(value);
    } else if (key == "mask.batch") {
      mask.batch = std::stoul(value);
    } else if (key == "mask.svm_c") {
      mask.svm_c = std::stod(value);
    } else if (key == "mask.svm_epochs") {
      mask.svm_epochs = std::stoi(value);
    } else if (key == "mask.train_mix_ratio") {
      mask.train_mix_ratio = std::stod(value);
    } else if (key == "mask.training_pairs") {
      mask_training_pairs = std::stoi(value);
    } else if (key == "noise.kinds") {
      noise_kinds.clear();
      for (const auto& name : split_list(value))
        noise_kinds.push_back(noise_kind_from_name(name));
    } else if (key == "sid.epochs") {
      sid.epochs = std::stoi(value);
    } else if (key == "sid.lr") {
      sid.lr = std::stod(value);
    } else if (key == "sid.pad_ms") {
      sid.pad_ms = std::stod(value);
    } else if (key == "sid.batch") {
      sid.batch = std::stoul(value);
    } else if (key == "sid.widths") {
      sid.net.widths.clear();
      for (const auto& w : split_list(value)) sid.net.widths.push_back(std::stoul(w));
    } else if (key == "sid.convs_per_block") {
      sid.net.convs_per_block = std::stoi(value);
    } else if (key == "sid.fc_dim") {
      sid.net.fc_dim = std::stoul(value);
    } else if (key == "eval.k_folds") {
      eval_k_folds = std::stoi(value);
    } else if (key == "eval.folds_evaluated") {
      eval_folds_evaluated = std::stoi(value);
    } else if (key == "eval.baseline_csv") {
      baseline_csv = value;
    } else {
      throw ValidationError("config: unknown key " + key);
    }
  } catch (const std::invalid_argument&) {
    throw ValidationError("config: bad value for " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ValidationError("config: value out of range for " + key);
  }
}

void PipelineConfig::validate() const {
  if (mix_ratio <= 0.0) throw ValidationError("config: audio.mix_ratio must be > 0");
  if (mel_divisor <= 0.0)
    throw ValidationError("config: features.mel_divisor must be > 0");
  if (corpus_speakers < 2)
    throw ValidationError("config: corpus.speakers must be >= 2");
  if (corpus_utterances < 1)
    throw ValidationError("config: corpus.utterances must be >= 1");
  if (mask.hidden1 < 1 || mask.hidden2 < 1)
    throw ValidationError("config: mask hidden widths must be >= 1");
  if (mask.rbm_epochs < 0 || mask.mlp_epochs < 0 || mask.svm_epochs < 1)
    throw ValidationError("config: mask training epochs invalid");
  if (mask.train_mix_ratio <= 0.0)
    throw ValidationError("config: mask.train_mix_ratio must be > 0");
  if (sid.epochs < 1) throw ValidationError("config: sid.epochs must be >= 1");
  if (sid.lr <= 0.0) throw ValidationError("config: sid.lr must be > 0");
  if (sid.pad_ms <= 0.0) throw ValidationError("config: sid.pad_ms must be > 0");
  if (sid.batch < 1) throw ValidationError("config: sid.batch must be >= 1");
  if (sid.net.widths.size() != 5)
    throw ValidationError("config: sid.widths must list the 5 block widths");
  if (sid.net.convs_per_block < 1)
    throw ValidationError("config: sid.convs_per_block must be >= 1");
  if (eval_k_folds < 2) throw ValidationError("config: eval.k_folds must be >= 2");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("config: cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw FormatError("config: line " + std::to_string(lineno) +
                        " is not key = value");
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

void apply_overrides(PipelineConfig& cfg,
                     const std::vector<std::string>& key_value_pairs) {
  for (const auto& kv : key_value_pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ValidationError("override must be key=value: " + kv);
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
}

}  // namespace casa
