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

#ifndef CASA_EVAL_HPP
#define CASA_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "casa/corpus.hpp"
#include "casa/mask.hpp"
#include "casa/sid.hpp"

namespace casa {

// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = 0) : counts_(k, k, 0.0) {}

  void add(int truth, int predicted, std::size_t n = 1) {
    counts_(static_cast<std::size_t>(truth), static_cast<std::size_t>(predicted)) +=
        static_cast<double>(n);
  }
  std::size_t classes() const { return counts_.rows(); }
  std::size_t count(std::size_t truth, std::size_t predicted) const {
    return static_cast<std::size_t>(counts_(truth, predicted));
  }
  std::size_t total() const;
  std::size_t diagonal() const;
  const Matrix& counts() const { return counts_; }

 private:
  Matrix counts_;
};

// Percentage of correctly identified trials.
double sid_rate(std::size_t correct, std::size_t total);

// Published averages for the three corpora, kept as reference constants (the
// private dataset makes them non-reproducible here).
constexpr double kReportedAvgRavdess = 85.2;
constexpr double kReportedAvgSusas = 87.0;
constexpr double kReportedAvgEsd = 86.6;
constexpr double kReportedExp1Clean = 86.16;
constexpr double kReportedExp1Noisy = 83.48;
constexpr double kReportedExp2Clean = 87.03;
constexpr double kReportedExp2Noisy = 84.27;

// Two-sequence Student t with the pooled-SD form sqrt((SD1^2 + SD2^2)/2);
// sequences must have equal length >= 2, sample SD uses n-1.
double student_t(const std::vector<double>& x1, const std::vector<double>& x2);

// Tabulated one-sided critical value used for the significance calls.
constexpr double kCriticalT05 = 1.645;

struct PrfResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Macro-averaged one-vs-rest precision/recall/F1. Classes with no true
// instances are excluded (with a warning on stderr).
PrfResult precision_recall_f1(const ConfusionMatrix& cm);

// Deterministic stratified k-fold assignment: one fold id per manifest
// entry. Stratifies by (speaker, emotion) when every cell has >= k entries,
// otherwise relaxes to speaker-only with a warning.
std::vector<int> kfold_split(const CorpusManifest& manifest, int k,
                             std::uint64_t seed);

struct EvalConfig {
  int k_folds = 10;
  int folds_evaluated = -1;  // -1 = all folds; desk runs evaluate fewer
  double mix_ratio = 2.0;    // the 2:1 evaluation mixing ratio
  std::vector<NoiseKind> noise_kinds = {NoiseKind::kWhite, NoiseKind::kCafeteria,
                                        NoiseKind::kPink};
  std::uint64_t seed = 1;
  MaskConfig mask;
  TrainConfig sid;
  int mask_training_pairs = 16;
  const MaskModel* pretrained_mask = nullptr;  // skips mask training when set
  std::string baseline_csv;  // optional: baseline,emotion,fold,value rows
};

struct EvalReport {
  std::vector<std::string> emotions;  // category labels, fixed order
  std::vector<double> clean_rate;     // % per emotion
  std::vector<double> noisy_rate;     // without segregation
  std::vector<double> noisy_seg_rate; // with segregation
  double avg_clean = 0.0;
  double avg_noisy = 0.0;
  double avg_noisy_seg = 0.0;
  PrfResult metrics_clean;
  PrfResult metrics_noisy_seg;
  std::map<std::string, std::vector<double>> t_values;  // baseline -> per emotion
  std::vector<int> fold_assignment;
  std::vector<std::vector<double>> per_fold_clean_rates;  // [emotion][fold]
  int folds_evaluated = 0;
};

// Experiment-1/2-style protocol: per evaluated fold, train the classifier on
// the clean training split, then score the held-out split clean, mixed at
// mix_ratio, and mixed-then-segregated. Writes CSV/SVG/JSON artifacts into
// report_dir when non-empty.
EvalReport run_experiment(const CorpusManifest& manifest, const EvalConfig& cfg,
                          const std::string& report_dir = "");

void write_report_files(const EvalReport& report, const std::string& report_dir);

}  // namespace casa

#endif  // CASA_EVAL_HPP
