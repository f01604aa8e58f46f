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

#include "casa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "casa/export.hpp"

namespace casa {

namespace {

double sample_sd(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

struct BaselineTable {
  // name -> emotion -> fold sequence
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
};

BaselineTable read_baselines(const std::string& path) {
  BaselineTable table;
  std::ifstream f(path);
  if (!f) throw FormatError("baselines: cannot open " + path);
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "baseline,emotion,fold,value") continue;  // header optional
    }
    std::stringstream ss(line);
    std::string name, emotion, fold, value;
    if (!std::getline(ss, name, ',') || !std::getline(ss, emotion, ',') ||
        !std::getline(ss, fold, ',') || !std::getline(ss, value))
      throw FormatError("baselines: bad row: " + line);
    table.values[name][emotion].push_back(std::stod(value));
  }
  return table;
}

AudioSignal load_entry(const ManifestEntry& entry) {
  AudioSignal sig = read_wav(entry.path);
  if (sig.sample_rate != kPipelineRate) sig = resample(sig, kPipelineRate);
  return sig;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  double acc = 0.0;
  for (double v : counts_.data()) acc += v;
  return static_cast<std::size_t>(acc);
}

std::size_t ConfusionMatrix::diagonal() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < counts_.rows(); ++i) acc += counts_(i, i);
  return static_cast<std::size_t>(acc);
}

double sid_rate(std::size_t correct, std::size_t total) {
  if (total == 0) throw UndefinedMetricError("sid_rate: zero trials");
  if (correct > total) throw ValidationError("sid_rate: correct > total");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

double student_t(const std::vector<double>& x1, const std::vector<double>& x2) {
  if (x1.size() != x2.size())
    throw ValidationError("student_t: sequences must have equal length");
  if (x1.size() < 2)
    throw ValidationError("student_t: need at least 2 observations");
  const double sd1 = sample_sd(x1), sd2 = sample_sd(x2);
  const double pooled = std::sqrt((sd1 * sd1 + sd2 * sd2) / 2.0);
  if (pooled <= 0.0)
    throw UndefinedMetricError("student_t: both standard deviations are zero");
  double m1 = 0.0, m2 = 0.0;
  for (double v : x1) m1 += v;
  for (double v : x2) m2 += v;
  m1 /= static_cast<double>(x1.size());
  m2 /= static_cast<double>(x2.size());
  return (m1 - m2) / pooled;
}

PrfResult precision_recall_f1(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  double p_acc = 0.0, r_acc = 0.0, f_acc = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.count(c, c), fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.count(o, c);
      fn += cm.count(c, o);
    }
    if (tp + fn == 0) {
      std::cerr << "precision_recall_f1: class " << c
                << " has no true instances; excluded\n";
      continue;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = static_cast<double>(tp) / (tp + fn);
    const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    p_acc += p;
    r_acc += r;
    f_acc += f;
    ++used;
  }
  if (used == 0) throw UndefinedMetricError("precision_recall_f1: no usable class");
  return {p_acc / used, r_acc / used, f_acc / used};
}

std::vector<int> kfold_split(const CorpusManifest& manifest, int k,
                             std::uint64_t seed) {
  const std::size_t n = manifest.entries.size();
  if (k < 2) throw ValidationError("kfold: k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    throw ValidationError("kfold: fewer entries than folds");

  // Group indices by stratification cell.
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_cell;
  for (std::size_t i = 0; i < n; ++i)
    by_cell[{manifest.entries[i].speaker,
             static_cast<int>(manifest.entries[i].emotion)}]
        .push_back(i);

  bool cell_ok = true;
  for (const auto& [key, idx] : by_cell)
    if (idx.size() < static_cast<std::size_t>(k)) cell_ok = false;

  std::map<int, std::vector<std::size_t>> by_speaker;
  if (!cell_ok) {
    std::cerr << "kfold: some (speaker, emotion) cells have fewer than " << k
              << " entries; stratifying by speaker only\n";
    for (std::size_t i = 0; i < n; ++i)
      by_speaker[manifest.entries[i].speaker].push_back(i);
  }

  std::vector<int> folds(n, -1);
  Rng rng(seed ^ 0x5eedf01dULL);
  int next = 0;
  auto deal = [&](std::vector<std::size_t>& idx) {
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      folds[idx[j]] = next;
      next = (next + 1) % k;
    }
  };
  if (cell_ok) {
    for (auto& [key, idx] : by_cell) deal(idx);
  } else {
    for (auto& [key, idx] : by_speaker) deal(idx);
  }
  return folds;
}

EvalReport run_experiment(const CorpusManifest& manifest, const EvalConfig& cfg,
                          const std::string& report_dir) {
  validate_manifest(manifest);
  const int n_speakers = manifest.num_speakers();
  if (n_speakers < 2) throw DegenerateInputError("run_experiment: one speaker");

  EvalReport report;
  for (Emotion e : kAllEmotions) report.emotions.push_back(emotion_name(e));

  // Load every utterance once.
  std::vector<AudioSignal> signals(manifest.entries.size());
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    signals[i] = load_entry(manifest.entries[i]);

  report.fold_assignment = kfold_split(manifest, cfg.k_folds, cfg.seed);
  const int folds_to_run =
      cfg.folds_evaluated < 0 ? cfg.k_folds
                              : std::min(cfg.folds_evaluated, cfg.k_folds);
  report.folds_evaluated = folds_to_run;

  // Mask model: pretrained, or trained on out-of-corpus synthetic voices
  // mixed with the noise set at 0 dB (the evaluation corpus stays unseen,
  // mirroring the separate mask-training corpus of the original recipe).
  MaskModel trained_mask;
  const MaskModel* mask_model = cfg.pretrained_mask;
  if (mask_model == nullptr) {
    std::vector<std::pair<AudioSignal, AudioSignal>> pairs;
    Rng noise_rng(cfg.seed ^ 0x7a5e11ULL);
    for (int p = 0; p < cfg.mask_training_pairs; ++p) {
      AudioSignal voice =
          synth_utterance(100 + p % 6, kAllEmotions[p % kAllEmotions.size()],
                          p, cfg.seed ^ 0x915f00dULL);
      const NoiseKind kind = cfg.noise_kinds.empty()
                                 ? NoiseKind::kWhite
                                 : cfg.noise_kinds[p % cfg.noise_kinds.size()];
      AudioSignal noise = make_noise(kind, voice.samples.size(), noise_rng.fork(p));
      pairs.emplace_back(std::move(voice), std::move(noise));
    }
    MaskConfig mask_cfg = cfg.mask;
    mask_cfg.seed = cfg.seed;
    trained_mask = train_mask_model(pairs, mask_cfg);
    mask_model = &trained_mask;
  }

  // Per-emotion confusion matrices for the three conditions.
  std::vector<ConfusionMatrix> cm_clean(kAllEmotions.size(),
                                        ConfusionMatrix(n_speakers));
  std::vector<ConfusionMatrix> cm_noisy(kAllEmotions.size(),
                                        ConfusionMatrix(n_speakers));
  std::vector<ConfusionMatrix> cm_seg(kAllEmotions.size(),
                                      ConfusionMatrix(n_speakers));
  report.per_fold_clean_rates.assign(kAllEmotions.size(), {});

  Rng eval_noise_rng(cfg.seed ^ 0xe5a1ULL);
  for (int fold = 0; fold < folds_to_run; ++fold) {
    std::vector<SidSample> train_set;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      if (report.fold_assignment[i] == fold) {
        test_idx.push_back(i);
      } else {
        train_set.push_back({signals[i], manifest.entries[i].speaker});
      }
    }
    TrainConfig sid_cfg = cfg.sid;
    sid_cfg.seed = cfg.seed + static_cast<std::uint64_t>(fold) * 7919;
    SidTrainResult trained = train_sid(train_set, sid_cfg);

    std::vector<std::vector<std::size_t>> fold_correct(kAllEmotions.size());
    std::vector<std::vector<std::size_t>> fold_total(kAllEmotions.size());
    std::vector<std::size_t> correct_per_emotion(kAllEmotions.size(), 0);
    std::vector<std::size_t> total_per_emotion(kAllEmotions.size(), 0);

    for (std::size_t i : test_idx) {
      const auto& entry = manifest.entries[i];
      const std::size_t emo = static_cast<std::size_t>(entry.emotion);

      const Identification clean_id =
          identify(trained.net, signals[i], nullptr, cfg.sid.pad_ms);
      cm_clean[emo].add(entry.speaker, clean_id.speaker);
      total_per_emotion[emo] += 1;
      if (clean_id.speaker == entry.speaker) correct_per_emotion[emo] += 1;

      AudioSignal noisy = signals[i];
      if (!cfg.noise_kinds.empty()) {
        const NoiseKind kind = cfg.noise_kinds[i % cfg.noise_kinds.size()];
        AudioSignal noise =
            make_noise(kind, signals[i].samples.size(), eval_noise_rng.fork(i));
        noisy = mix_at_ratio(signals[i], noise, cfg.mix_ratio);
      }
      const Identification noisy_id =
          identify(trained.net, noisy, nullptr, cfg.sid.pad_ms);
      cm_noisy[emo].add(entry.speaker, noisy_id.speaker);
      const Identification seg_id =
          identify(trained.net, noisy, mask_model, cfg.sid.pad_ms);
      cm_seg[emo].add(entry.speaker, seg_id.speaker);
    }
    for (std::size_t emo = 0; emo < kAllEmotions.size(); ++emo) {
      if (total_per_emotion[emo] > 0)
        report.per_fold_clean_rates[emo].push_back(
            sid_rate(correct_per_emotion[emo], total_per_emotion[emo]));
    }
  }

  // Aggregate.
  std::size_t c_all = 0, c_tot = 0, n_all = 0, n_tot = 0, s_all = 0, s_tot = 0;
  for (std::size_t emo = 0; emo < kAllEmotions.size(); ++emo) {
    const auto& cc = cm_clean[emo];
    const auto& cn = cm_noisy[emo];
    const auto& cs = cm_seg[emo];
    report.clean_rate.push_back(cc.total() ? sid_rate(cc.diagonal(), cc.total())
                                           : 0.0);
    report.noisy_rate.push_back(cn.total() ? sid_rate(cn.diagonal(), cn.total())
                                           : 0.0);
    report.noisy_seg_rate.push_back(cs.total() ? sid_rate(cs.diagonal(), cs.total())
                                               : 0.0);
    c_all += cc.diagonal();
    c_tot += cc.total();
    n_all += cn.diagonal();
    n_tot += cn.total();
    s_all += cs.diagonal();
    s_tot += cs.total();
  }
  report.avg_clean = c_tot ? sid_rate(c_all, c_tot) : 0.0;
  report.avg_noisy = n_tot ? sid_rate(n_all, n_tot) : 0.0;
  report.avg_noisy_seg = s_tot ? sid_rate(s_all, s_tot) : 0.0;

  // Pool the per-emotion confusions for the Table-2-style metrics.
  ConfusionMatrix pooled_clean(static_cast<std::size_t>(n_speakers));
  ConfusionMatrix pooled_seg(static_cast<std::size_t>(n_speakers));
  for (std::size_t emo = 0; emo < kAllEmotions.size(); ++emo)
    for (std::size_t a = 0; a < static_cast<std::size_t>(n_speakers); ++a)
      for (std::size_t b = 0; b < static_cast<std::size_t>(n_speakers); ++b) {
        pooled_clean.add(static_cast<int>(a), static_cast<int>(b),
                         cm_clean[emo].count(a, b));
        pooled_seg.add(static_cast<int>(a), static_cast<int>(b),
                       cm_seg[emo].count(a, b));
      }
  report.metrics_clean = precision_recall_f1(pooled_clean);
  report.metrics_noisy_seg = precision_recall_f1(pooled_seg);

  // t tests against stored baseline fold sequences, when provided.
  if (!cfg.baseline_csv.empty()) {
    BaselineTable baselines = read_baselines(cfg.baseline_csv);
    for (const auto& [name, per_emotion] : baselines.values) {
      std::vector<double> ts;
      for (std::size_t emo = 0; emo < kAllEmotions.size(); ++emo) {
        const auto it = per_emotion.find(report.emotions[emo]);
        if (it == per_emotion.end() ||
            it->second.size() != report.per_fold_clean_rates[emo].size() ||
            it->second.size() < 2) {
          std::cerr << "t-test skipped for " << name << "/" << report.emotions[emo]
                    << " (sequence length mismatch)\n";
          ts.push_back(std::nan(""));
          continue;
        }
        ts.push_back(student_t(report.per_fold_clean_rates[emo], it->second));
      }
      report.t_values[name] = ts;
    }
  }

  if (!report_dir.empty()) write_report_files(report, report_dir);
  return report;
}

void write_report_files(const EvalReport& report, const std::string& report_dir) {
  std::filesystem::create_directories(report_dir);
  const auto dir = std::filesystem::path(report_dir);

  // Rates table.
  {
    std::ofstream f(dir / "sid_rates.csv", std::ios::trunc);
    f << "emotion,clean,noisy,noisy_segregated\n";
    for (std::size_t e = 0; e < report.emotions.size(); ++e)
      f << report.emotions[e] << ',' << report.clean_rate[e] << ','
        << report.noisy_rate[e] << ',' << report.noisy_seg_rate[e] << '\n';
    f << "average," << report.avg_clean << ',' << report.avg_noisy << ','
      << report.avg_noisy_seg << '\n';
  }

  // Table-2-style metrics.
  {
    std::ofstream f(dir / "table2_analogue.csv", std::ios::trunc);
    f << "condition,precision,recall,f1\n";
    f << "clean," << report.metrics_clean.precision << ','
      << report.metrics_clean.recall << ',' << report.metrics_clean.f1 << '\n';
    f << "noisy_segregated," << report.metrics_noisy_seg.precision << ','
      << report.metrics_noisy_seg.recall << ',' << report.metrics_noisy_seg.f1
      << '\n';
  }

  // Table-1-style t values.
  if (!report.t_values.empty()) {
    std::ofstream f(dir / "table1_analogue.csv", std::ios::trunc);
    f << "baseline";
    for (const auto& e : report.emotions) f << ',' << e;
    f << '\n';
    for (const auto& [name, ts] : report.t_values) {
      f << name;
      for (double t : ts) f << ',' << t;
      f << '\n';
    }
  }

  // Fold assignment.
  {
    std::ofstream f(dir / "folds.csv", std::ios::trunc);
    f << "entry,fold\n";
    for (std::size_t i = 0; i < report.fold_assignment.size(); ++i)
      f << i << ',' << report.fold_assignment[i] << '\n';
  }

  write_bar_chart_svg((dir / "fig2_analogue.svg").string(),
                      "Speaker identification rate, clean condition",
                      report.emotions, {{"clean", report.clean_rate}});
  write_bar_chart_svg(
      (dir / "fig3_analogue.svg").string(),
      "Noisy condition: segregation front end vs raw input", report.emotions,
      {{"noisy raw", report.noisy_rate},
       {"noisy segregated", report.noisy_seg_rate}});

  nlohmann::json j;
  j["average"] = {{"clean", report.avg_clean},
                  {"noisy", report.avg_noisy},
                  {"noisy_segregated", report.avg_noisy_seg}};
  nlohmann::json per_emotion;
  for (std::size_t e = 0; e < report.emotions.size(); ++e)
    per_emotion[report.emotions[e]] = {{"clean", report.clean_rate[e]},
                                       {"noisy", report.noisy_rate[e]},
                                       {"noisy_segregated", report.noisy_seg_rate[e]}};
  j["per_emotion"] = per_emotion;
  j["metrics"] = {{"clean",
                   {{"precision", report.metrics_clean.precision},
                    {"recall", report.metrics_clean.recall},
                    {"f1", report.metrics_clean.f1}}},
                  {"noisy_segregated",
                   {{"precision", report.metrics_noisy_seg.precision},
                    {"recall", report.metrics_noisy_seg.recall},
                    {"f1", report.metrics_noisy_seg.f1}}}};
  j["averaging"] = "macro";
  j["folds_evaluated"] = report.folds_evaluated;
  for (const auto& [name, ts] : report.t_values) j["t_values"][name] = ts;
  std::ofstream jf(dir / "summary.json", std::ios::trunc);
  jf << j.dump(2) << "\n";
}

}  // namespace casa
