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

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casa/config.hpp"
#include "casa/eval.hpp"
#include "casa/export.hpp"
#include "casa/model_io.hpp"

namespace {

using namespace casa;

AudioSignal load_pipeline_wav(const std::string& path) {
  AudioSignal sig = read_wav(path);
  validate_signal(sig);
  if (sig.sample_rate != kPipelineRate) sig = resample(sig, kPipelineRate);
  return sig;
}

std::vector<std::pair<AudioSignal, AudioSignal>> mask_training_pairs_from_manifest(
    const CorpusManifest& manifest, const PipelineConfig& cfg) {
  std::vector<std::pair<AudioSignal, AudioSignal>> pairs;
  std::size_t limit = manifest.entries.size();
  if (cfg.mask_training_pairs > 0)
    limit = std::min<std::size_t>(limit,
                                  static_cast<std::size_t>(cfg.mask_training_pairs));
  Rng noise_rng(cfg.seed ^ 0x6a5e77ULL);
  for (std::size_t i = 0; i < limit; ++i) {
    AudioSignal target = load_pipeline_wav(manifest.entries[i].path);
    const NoiseKind kind = cfg.noise_kinds.empty()
                               ? NoiseKind::kWhite
                               : cfg.noise_kinds[i % cfg.noise_kinds.size()];
    AudioSignal noise = make_noise(kind, target.samples.size(), noise_rng.fork(i));
    pairs.emplace_back(std::move(target), std::move(noise));
  }
  return pairs;
}

void emit_mask_artifacts(const TFMask& mask, const std::string& out_wav,
                         const std::string& csv_path, const std::string& png_path) {
  const std::string csv = csv_path.empty() ? out_wav + ".mask.csv" : csv_path;
  const std::string png = png_path.empty() ? out_wav + ".mask.png" : png_path;
  write_matrix_csv(csv, mask.values);
  write_png_gray(png, mask.values);
}

int run(int argc, char** argv) {
  CLI::App app{"CASA voice segregation and speaker identification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_flag = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "pipeline config file (key = value)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "seed override");
  app.add_option("--set", overrides, "config override key=value (repeatable)");

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "generate the synthetic corpus");
  synth->fallthrough();
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();

  // train-mask
  auto* tmask = app.add_subcommand("train-mask", "train the 18-channel mask model");
  tmask->fallthrough();
  std::string tmask_manifest, tmask_out;
  tmask->add_option("--manifest", tmask_manifest, "corpus manifest CSV")->required();
  tmask->add_option("--out", tmask_out, "output model file")->required();

  // train-sid
  auto* tsid = app.add_subcommand("train-sid", "train the spectrogram classifier");
  tsid->fallthrough();
  std::string tsid_manifest, tsid_out, tsid_mask, tsid_log;
  tsid->add_option("--manifest", tsid_manifest, "corpus manifest CSV")->required();
  tsid->add_option("--out", tsid_out, "output model file")->required();
  tsid->add_option("--mask", tsid_mask, "mask model for segregated training");
  tsid->add_option("--log", tsid_log, "training log CSV path");

  // segregate
  auto* seg = app.add_subcommand("segregate", "mask-based voice segregation");
  seg->fallthrough();
  std::string seg_in, seg_out, seg_model, seg_oracle, seg_target, seg_noise;
  std::string seg_mask_csv, seg_mask_png;
  seg->add_option("--in", seg_in, "input WAV")->required();
  seg->add_option("--out", seg_out, "output WAV")->required();
  seg->add_option("--model", seg_model, "trained mask model");
  seg->add_option("--oracle", seg_oracle, "oracle mask: ones|ibm");
  seg->add_option("--target", seg_target, "clean target WAV (oracle ibm)");
  seg->add_option("--noise", seg_noise, "noise WAV (oracle ibm)");
  seg->add_option("--mask-csv", seg_mask_csv, "mask CSV path");
  seg->add_option("--mask-png", seg_mask_png, "mask PNG path");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "run the experiment protocol");
  ev->fallthrough();
  std::string ev_manifest, ev_report, ev_mask;
  ev->add_option("--manifest", ev_manifest, "corpus manifest CSV")->required();
  ev->add_option("--report-dir", ev_report, "report output directory")->required();
  ev->add_option("--mask", ev_mask, "pretrained mask model");

  // inspect
  auto* insp = app.add_subcommand("inspect", "export a model bundle as JSON");
  insp->fallthrough();
  std::string insp_model, insp_out;
  bool insp_data = false;
  insp->add_option("--model", insp_model, "model file")->required();
  insp->add_option("--out", insp_out, "JSON output path")->required();
  insp->add_flag("--data", insp_data, "include raw tensor data");

  CLI11_PARSE(app, argc, argv);

  PipelineConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  apply_overrides(cfg, overrides);
  if (seed_opt->count() > 0) cfg.set("seed", std::to_string(seed_flag));
  cfg.validate();

  if (synth->parsed()) {
    SynthConfig scfg;
    scfg.n_speakers = cfg.corpus_speakers;
    scfg.utterances_per_emotion = cfg.corpus_utterances;
    scfg.utterance_s = cfg.corpus_duration_s;
    scfg.seed = cfg.seed;
    CorpusManifest manifest = synth_corpus(synth_out, scfg);
    std::cout << "wrote " << manifest.entries.size() << " utterances under "
              << synth_out << "\n";
    return 0;
  }

  if (tmask->parsed()) {
    CorpusManifest manifest = read_manifest(tmask_manifest);
    if (manifest.entries.empty())
      throw ValidationError("train-mask: manifest has no entries");
    auto pairs = mask_training_pairs_from_manifest(manifest, cfg);
    MaskConfig mask_cfg = cfg.mask;
    mask_cfg.seed = cfg.seed;
    MaskModel model = train_mask_model(pairs, mask_cfg);
    ModelBundle bundle;
    model.to_bundle(bundle, "mask");
    bundle.put_string("kind", "mask");
    bundle.put_int("seed", static_cast<std::int64_t>(cfg.seed));
    bundle.save(tmask_out);
    std::cout << "mask model written to " << tmask_out << "\n";
    return 0;
  }

  if (tsid->parsed()) {
    CorpusManifest manifest = read_manifest(tsid_manifest);
    validate_manifest(manifest);
    MaskModel mask_model;
    const MaskModel* segregator = nullptr;
    if (!tsid_mask.empty()) {
      mask_model = MaskModel::from_bundle(ModelBundle::load(tsid_mask), "mask");
      segregator = &mask_model;
    }
    std::vector<SidSample> samples;
    for (const auto& entry : manifest.entries)
      samples.push_back({load_pipeline_wav(entry.path), entry.speaker});
    TrainConfig sid_cfg = cfg.sid;
    sid_cfg.seed = cfg.seed;
    SidTrainResult result = train_sid(samples, sid_cfg, segregator);
    ModelBundle bundle;
    result.net.to_bundle(bundle, "sid");
    bundle.put_string("kind", "sid");
    bundle.put_int("seed", static_cast<std::int64_t>(cfg.seed));
    bundle.save(tsid_out);
    write_training_log_csv(tsid_log.empty() ? tsid_out + ".log.csv" : tsid_log,
                           result.log);
    std::cout << "sid model written to " << tsid_out << " (final train acc "
              << result.log.back().train_accuracy << ")\n";
    return 0;
  }

  if (seg->parsed()) {
    AudioSignal input = load_pipeline_wav(seg_in);
    const WptTree tree = build_tree();
    SubbandSet sub = analyze(input, tree);
    Cochleagram coch = cochleagram(sub);
    TFMask mask;
    if (!seg_model.empty()) {
      MaskModel model = MaskModel::from_bundle(ModelBundle::load(seg_model), "mask");
      mask = estimate_mask(model, input);
    } else if (seg_oracle == "ones") {
      mask.values = Matrix(coch.energies.rows(), coch.energies.cols(), 1.0);
    } else if (seg_oracle == "ibm") {
      if (seg_target.empty() || seg_noise.empty())
        throw ValidationError("segregate: oracle ibm needs --target and --noise");
      Cochleagram ct = cochleagram(analyze(load_pipeline_wav(seg_target), tree));
      Cochleagram cn = cochleagram(analyze(load_pipeline_wav(seg_noise), tree));
      mask = ideal_binary_mask(ct, cn, cfg.mask.lc_db);
    } else {
      throw ValidationError("segregate: need --model or --oracle ones|ibm");
    }
    AudioSignal out = apply_mask_and_resynthesize(coch, mask, tree);
    write_wav(seg_out, out);
    emit_mask_artifacts(mask, seg_out, seg_mask_csv, seg_mask_png);
    std::cout << "segregated signal written to " << seg_out << "\n";
    return 0;
  }

  if (ev->parsed()) {
    CorpusManifest manifest = read_manifest(ev_manifest);
    EvalConfig eval_cfg;
    eval_cfg.k_folds = cfg.eval_k_folds;
    eval_cfg.folds_evaluated = cfg.eval_folds_evaluated;
    eval_cfg.mix_ratio = cfg.amplitude_ratio();
    eval_cfg.noise_kinds = cfg.noise_kinds;
    eval_cfg.seed = cfg.seed;
    eval_cfg.mask = cfg.mask;
    eval_cfg.sid = cfg.sid;
    eval_cfg.mask_training_pairs = cfg.mask_training_pairs;
    eval_cfg.baseline_csv = cfg.baseline_csv;
    MaskModel mask_model;
    if (!ev_mask.empty()) {
      mask_model = MaskModel::from_bundle(ModelBundle::load(ev_mask), "mask");
      eval_cfg.pretrained_mask = &mask_model;
    }
    EvalReport report = run_experiment(manifest, eval_cfg, ev_report);
    std::cout << "clean " << report.avg_clean << "%  noisy " << report.avg_noisy
              << "%  noisy+segregation " << report.avg_noisy_seg
              << "%  (delta " << report.avg_noisy_seg - report.avg_noisy
              << " points); report in " << ev_report << "\n";
    return 0;
  }

  if (insp->parsed()) {
    ModelBundle::load(insp_model).export_json(insp_out, insp_data);
    std::cout << "model inspection written to " << insp_out << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const casa::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const casa::UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const casa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const casa::DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
