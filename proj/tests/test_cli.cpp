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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "casa/audio_io.hpp"
#include "casa/corpus.hpp"
#include "test_util.hpp"

using namespace casa;
using namespace casa_test;

namespace {

const std::string kBinary = CASA_SID_BINARY;
const std::string kWork = scratch_dir("cli");

// Runs the CLI; returns the exit code, captures stdout+stderr.
int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string log = kWork + "/cmd_output.txt";
  const std::string cmd = kBinary + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    *output = ss.str();
  }
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Small shared corpus for the training commands.
const std::string kCorpusDir = kWork + "/corpus";
const std::string kTinyOverrides =
    " --set corpus.speakers=2 --set corpus.utterances=2"
    " --set corpus.duration_s=0.45";
const std::string kTinyMask =
    " --set mask.hidden1=8 --set mask.hidden2=8 --set mask.rbm_epochs=2"
    " --set mask.mlp_epochs=2 --set mask.svm_epochs=40"
    " --set mask.training_pairs=2";
const std::string kTinySid =
    " --set sid.widths=2,2,2,2,2 --set sid.convs_per_block=1"
    " --set sid.fc_dim=8 --set sid.pad_ms=512";

bool ensure_corpus() {
  static bool made = [] {
    std::string out;
    const int rc =
        run_cli("synth-corpus --out " + kCorpusDir + kTinyOverrides + " --seed 9",
                &out);
    return rc == 0;
  }();
  return made;
}

}  // namespace

TEST_CASE("synth-corpus: writes WAVs plus manifest") {
  REQUIRE(ensure_corpus());
  CHECK(std::filesystem::exists(kCorpusDir + "/manifest.csv"));
  CorpusManifest m = read_manifest(kCorpusDir + "/manifest.csv");
  CHECK(m.entries.size() == 2 * 6 * 2);
  for (const auto& e : m.entries) CHECK(std::filesystem::exists(e.path));
}

TEST_CASE("segregate: all-ones oracle mask approximately reproduces the input") {
  AudioSignal clean = synth_utterance(0, Emotion::kNeutral, 0, 31, 0.45);
  const std::string in = kWork + "/seg_in.wav";
  const std::string out = kWork + "/seg_out.wav";
  write_wav(in, clean);
  std::string log;
  const int rc = run_cli("segregate --in " + in + " --out " + out +
                             " --oracle ones", &log);
  REQUIRE(rc == 0);
  AudioSignal input = read_wav(in);
  AudioSignal output = read_wav(out);
  REQUIRE(output.samples.size() == input.samples.size());
  CHECK(rel_l2_error(input.samples, output.samples) <= 1e-3);
  CHECK(std::filesystem::exists(out + ".mask.csv"));
  CHECK(std::filesystem::exists(out + ".mask.png"));
}

TEST_CASE("segregate: oracle IBM yields an SNR gain on a tone+noise mixture") {
  AudioSignal target = make_tone(1000.0, 1.0);
  AudioSignal noise = make_white_noise(16000, 5);
  AudioSignal scaled = scale_noise_for_ratio(target, noise, 1.0);
  AudioSignal mixture;
  mixture.sample_rate = 16000;
  mixture.samples.resize(target.samples.size());
  for (std::size_t i = 0; i < mixture.samples.size(); ++i)
    mixture.samples[i] = target.samples[i] + scaled.samples[i];

  const std::string t_path = kWork + "/ibm_target.wav";
  const std::string n_path = kWork + "/ibm_noise.wav";
  const std::string m_path = kWork + "/ibm_mixture.wav";
  const std::string o_path = kWork + "/ibm_out.wav";
  write_wav(t_path, target);
  write_wav(n_path, scaled);
  write_wav(m_path, mixture);

  const int rc = run_cli("segregate --in " + m_path + " --out " + o_path +
                         " --oracle ibm --target " + t_path + " --noise " + n_path);
  REQUIRE(rc == 0);

  AudioSignal ref = read_wav(t_path);
  AudioSignal mix_read = read_wav(m_path);
  AudioSignal out_read = read_wav(o_path);
  CHECK(snr_db(ref.samples, out_read.samples) >
        snr_db(ref.samples, mix_read.samples));
}

TEST_CASE("segregate: missing model file exits with code 2") {
  AudioSignal clean = synth_utterance(0, Emotion::kNeutral, 0, 31, 0.45);
  const std::string in = kWork + "/seg_in2.wav";
  write_wav(in, clean);
  std::string log;
  const int rc = run_cli("segregate --in " + in + " --out " + kWork +
                             "/never.wav --model " + kWork + "/missing.model",
                         &log);
  CHECK(rc == 2);
  CHECK(log.find("error:") != std::string::npos);
}

TEST_CASE("segregate: neither model nor oracle is a usage error") {
  AudioSignal clean = synth_utterance(1, Emotion::kHappy, 0, 31, 0.45);
  const std::string in = kWork + "/seg_in3.wav";
  write_wav(in, clean);
  const int rc =
      run_cli("segregate --in " + in + " --out " + kWork + "/never2.wav");
  CHECK(rc == 2);
}

TEST_CASE("train-mask: deterministic model bytes under a fixed seed") {
  REQUIRE(ensure_corpus());
  const std::string m1 = kWork + "/mask1.model";
  const std::string m2 = kWork + "/mask2.model";
  const std::string base = "train-mask --manifest " + kCorpusDir +
                           "/manifest.csv" + kTinyMask + " --seed 12 --out ";
  REQUIRE(run_cli(base + m1) == 0);
  REQUIRE(run_cli(base + m2) == 0);
  const std::string b1 = file_bytes(m1);
  CHECK(!b1.empty());
  CHECK(b1 == file_bytes(m2));
}

TEST_CASE("train-mask: empty manifest is a validation error") {
  const std::string empty = kWork + "/empty_manifest.csv";
  {
    std::ofstream f(empty);
    f << "path,speaker,emotion,condition\n";
  }
  std::string log;
  const int rc = run_cli(
      "train-mask --manifest " + empty + " --out " + kWork + "/x.model", &log);
  CHECK(rc == 2);
}

TEST_CASE("train-sid: training log has exactly the configured epoch rows") {
  REQUIRE(ensure_corpus());
  const std::string model = kWork + "/sid.model";
  const std::string log_csv = kWork + "/sid_log.csv";
  std::string out;
  const int rc = run_cli("train-sid --manifest " + kCorpusDir + "/manifest.csv" +
                             kTinySid +
                             " --set sid.epochs=3 --set sid.lr=0.001 --seed 4"
                             " --out " + model + " --log " + log_csv,
                         &out);
  REQUIRE(rc == 0);
  std::ifstream f(log_csv);
  std::string line;
  int rows = -1;  // header discounted
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  CHECK(std::filesystem::exists(model));
}

TEST_CASE("train-sid: toy two-speaker corpus reaches high training accuracy") {
  REQUIRE(ensure_corpus());
  const std::string model = kWork + "/sid_acc.model";
  std::string out;
  const int rc = run_cli("train-sid --manifest " + kCorpusDir + "/manifest.csv" +
                             " --set sid.widths=4,8,8,8,8"
                             " --set sid.convs_per_block=1 --set sid.fc_dim=16"
                             " --set sid.pad_ms=512"
                             " --set sid.epochs=200 --set sid.lr=0.002 --seed 6"
                             " --out " + model,
                         &out);
  REQUIRE(rc == 0);
  // Final training accuracy is printed by the command.
  const auto pos = out.find("final train acc ");
  REQUIRE(pos != std::string::npos);
  const double acc = std::stod(out.substr(pos + 16));
  CHECK(acc >= 0.95);
}

TEST_CASE("inspect: model bundle exports as JSON") {
  REQUIRE(ensure_corpus());
  const std::string model = kWork + "/mask1.model";
  if (!std::filesystem::exists(model)) {
    REQUIRE(run_cli("train-mask --manifest " + kCorpusDir + "/manifest.csv" +
                    kTinyMask + " --seed 12 --out " + model) == 0);
  }
  const std::string json_path = kWork + "/mask1.json";
  REQUIRE(run_cli("inspect --model " + model + " --out " + json_path) == 0);
  std::ifstream f(json_path);
  nlohmann::json j = nlohmann::json::parse(f);
  CHECK(j.contains("kind"));
  CHECK(j["kind"] == "mask");
}

TEST_CASE("evaluate: emits report artifacts with per-emotion JSON keys") {
  REQUIRE(ensure_corpus());
  const std::string mask_model = kWork + "/mask1.model";
  if (!std::filesystem::exists(mask_model)) {
    REQUIRE(run_cli("train-mask --manifest " + kCorpusDir + "/manifest.csv" +
                    kTinyMask + " --seed 12 --out " + mask_model) == 0);
  }
  const std::string report = kWork + "/report";
  std::string out;
  const int rc = run_cli(
      "evaluate --manifest " + kCorpusDir + "/manifest.csv" + kTinySid +
          " --set sid.epochs=2 --set sid.lr=0.001"
          " --set eval.k_folds=2 --set eval.folds_evaluated=1 --seed 2"
          " --mask " + mask_model + " --report-dir " + report,
      &out);
  REQUIRE(rc == 0);
  CHECK(out.find("delta") != std::string::npos);  // noisy-vs-clean delta reported
  for (const char* name :
       {"sid_rates.csv", "table2_analogue.csv", "folds.csv", "fig2_analogue.svg",
        "fig3_analogue.svg", "summary.json"})
    CHECK(std::filesystem::exists(std::filesystem::path(report) / name));
  std::ifstream jf(report + "/summary.json");
  nlohmann::json j = nlohmann::json::parse(jf);
  for (Emotion e : kAllEmotions) CHECK(j["per_emotion"].contains(emotion_name(e)));
}

TEST_CASE("config file: dotted keys parse; bad keys and values are rejected") {
  const std::string cfg_path = kWork + "/pipeline.cfg";
  {
    std::ofstream f(cfg_path);
    f << "# pipeline configuration\n";
    f << "seed = 77\n";
    f << "audio.mix_ratio = 2.0\n";
    f << "mask.lc_db = 0\n";
    f << "sid.widths = 2,2,2,2,2\n";
  }
  AudioSignal clean = synth_utterance(0, Emotion::kNeutral, 0, 31, 0.45);
  const std::string in = kWork + "/cfg_in.wav";
  write_wav(in, clean);
  CHECK(run_cli("--config " + cfg_path + " segregate --in " + in + " --out " +
                kWork + "/cfg_out.wav --oracle ones") == 0);

  const std::string bad_path = kWork + "/bad.cfg";
  {
    std::ofstream f(bad_path);
    f << "unknown.key = 3\n";
  }
  CHECK(run_cli("--config " + bad_path + " segregate --in " + in + " --out " +
                kWork + "/cfg_out2.wav --oracle ones") == 2);

  CHECK(run_cli("--set sid.epochs=0 segregate --in " + in + " --out " + kWork +
                "/cfg_out3.wav --oracle ones") == 2);
}
