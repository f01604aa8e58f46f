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

#include "casa/mask.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "casa/dsp.hpp"

namespace casa {

namespace {

// Assembles the 65-dim vector for (channel, frame) from the per-channel AMS
// block and the frame-global rows.
void fill_raw_row(double* row, const double* ams, const double* rasta,
                  const double* mfcc, double pitch, const MaskConfig& cfg) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < cfg.ams_dims; ++i) row[k++] = ams[i];
  for (std::size_t i = 0; i < cfg.rasta_dims; ++i) row[k++] = rasta[i];
  for (std::size_t i = 0; i < cfg.mfcc_dims; ++i) row[k++] = mfcc[i];
  row[k] = pitch;
}

std::vector<double> scaled_unit_interval(const std::vector<double>& v,
                                         const std::vector<double>& lo,
                                         const std::vector<double>& hi) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double span = hi[i] - lo[i];
    double x = span > 1e-12 ? (v[i] - lo[i]) / span : 0.5;
    out[i] = std::clamp(x, 0.0, 1.0);
  }
  return out;
}

std::vector<double> standardized(const std::vector<double>& v,
                                 const std::vector<double>& mean,
                                 const std::vector<double>& sd) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean[i]) / sd[i];
  return out;
}

void write_mlp(ModelBundle& bundle, const std::string& prefix, const Mlp& net) {
  bundle.put_int(prefix + ".layers", static_cast<std::int64_t>(net.layers.size()));
  bundle.put_int(prefix + ".head", static_cast<std::int64_t>(net.head));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l);
    bundle.put_matrix(lp + ".w", net.layers[l].w);
    bundle.put_vector(lp + ".b", net.layers[l].b);
    bundle.put_int(lp + ".act", static_cast<std::int64_t>(net.layers[l].act));
  }
}

Mlp read_mlp(const ModelBundle& bundle, const std::string& prefix) {
  Mlp net;
  const auto n = static_cast<std::size_t>(bundle.integer(prefix + ".layers"));
  net.head = static_cast<Head>(bundle.integer(prefix + ".head"));
  for (std::size_t l = 0; l < n; ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l);
    Mlp::Layer layer;
    layer.w = bundle.matrix(lp + ".w");
    layer.b = bundle.vector(lp + ".b");
    layer.act = static_cast<Activation>(bundle.integer(lp + ".act"));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace

RawFeatures extract_raw_features(const AudioSignal& mixture, const WptTree& tree,
                                 const MaskConfig& cfg) {
  SubbandSet sub = analyze(mixture, tree);
  Cochleagram coch = cochleagram(sub);
  const std::size_t T = coch.n_frames;
  const std::size_t channels = sub.bands.size();
  const double frame_rate = static_cast<double>(mixture.sample_rate) /
                            static_cast<double>(coch.hop);

  // Frame-global features are computed on the same padded sample grid the
  // subbands came from.
  const std::vector<double> padded = reflect_pad(mixture.samples, tree.pad_multiple);

  static const MelFilterbank mel_bank(512, kPipelineRate);
  Matrix mfcc_rows(T, cfg.mfcc_dims, 0.0);
  std::vector<std::vector<double>> frames(T);
  for (std::size_t t = 0; t < T; ++t) {
    frames[t].assign(padded.begin() + static_cast<std::ptrdiff_t>(t * coch.hop),
                     padded.begin() +
                         static_cast<std::ptrdiff_t>(t * coch.hop + coch.frame_len));
    auto ceps = mfcc_frame(frames[t].data(), frames[t].size(), mel_bank);
    for (std::size_t k = 0; k < cfg.mfcc_dims; ++k) mfcc_rows(t, k) = ceps[k];
  }
  Matrix rasta_rows = rasta_plp(frames);

  std::vector<double> pitch_rows(T, 0.0);
  const std::size_t pitch_win = std::min<std::size_t>(640, padded.size());
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t start = t * coch.hop;
    if (start + pitch_win > padded.size()) start = padded.size() - pitch_win;
    pitch_rows[t] = pitch_hz(padded.data() + start, pitch_win, mixture.sample_rate);
  }

  RawFeatures out;
  out.n_frames = T;
  out.per_channel.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<double> env(T);
    for (std::size_t t = 0; t < T; ++t) env[t] = coch.envelope(c, t);
    Matrix ams = ams_raw(env, frame_rate);
    Matrix feat(T, cfg.raw_dims(), 0.0);
    for (std::size_t t = 0; t < T; ++t)
      fill_raw_row(feat.row(t), ams.row(t), rasta_rows.row(t), mfcc_rows.row(t),
                   pitch_rows[t], cfg);
    out.per_channel[c] = std::move(feat);
  }
  return out;
}

TFMask ideal_binary_mask(const Cochleagram& target_coch,
                         const Cochleagram& noise_coch, double lc_db) {
  const auto& et = target_coch.energies;
  const auto& en = noise_coch.energies;
  if (et.rows() != en.rows() || et.cols() != en.cols())
    throw ShapeError("ideal_binary_mask: cochleagram dimensions differ");

  TFMask mask;
  mask.values = Matrix(et.rows(), et.cols(), 0.0);
  for (std::size_t c = 0; c < et.rows(); ++c) {
    for (std::size_t t = 0; t < et.cols(); ++t) {
      const double e_target = et(c, t);
      const double e_noise = en(c, t);
      double value = 0.0;
      if (e_noise <= 0.0) {
        value = e_target > 0.0 ? 1.0 : 0.0;
      } else if (e_target > 0.0) {
        const double lsnr_db = 10.0 * std::log10(e_target / e_noise);
        value = lsnr_db >= lc_db ? 1.0 : 0.0;
      }
      mask.values(c, t) = value;
    }
  }
  return mask;
}

MaskModel train_mask_model(
    const std::vector<std::pair<AudioSignal, AudioSignal>>& pairs,
    const MaskConfig& config) {
  if (pairs.empty()) throw DegenerateInputError("train_mask_model: no pairs");

  const WptTree tree = build_tree();
  const std::size_t channels = tree.leaves.size();

  // Gather features and labels over all training mixtures.
  std::vector<Matrix> feats(channels);     // per channel, rows accumulate
  std::vector<std::vector<int>> labels(channels);
  std::size_t total_frames = 0;
  std::vector<RawFeatures> raw_per_pair(pairs.size());
  std::vector<TFMask> ibm_per_pair(pairs.size());

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const AudioSignal& target = pairs[p].first;
    AudioSignal scaled_noise =
        scale_noise_for_ratio(target, pairs[p].second, config.train_mix_ratio);
    AudioSignal mixture;
    mixture.sample_rate = target.sample_rate;
    mixture.samples.resize(target.samples.size());
    for (std::size_t i = 0; i < mixture.samples.size(); ++i)
      mixture.samples[i] = target.samples[i] + scaled_noise.samples[i];

    raw_per_pair[p] = extract_raw_features(mixture, tree, config);
    const Cochleagram coch_t = cochleagram(analyze(target, tree));
    const Cochleagram coch_n = cochleagram(analyze(scaled_noise, tree));
    ibm_per_pair[p] = ideal_binary_mask(coch_t, coch_n, config.lc_db);
    total_frames += raw_per_pair[p].n_frames;
  }

  for (std::size_t c = 0; c < channels; ++c) {
    feats[c] = Matrix(total_frames, config.raw_dims(), 0.0);
    labels[c].resize(total_frames);
    std::size_t row = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& src = raw_per_pair[p].per_channel[c];
      for (std::size_t t = 0; t < raw_per_pair[p].n_frames; ++t, ++row) {
        std::copy(src.row(t), src.row(t) + config.raw_dims(), feats[c].row(row));
        labels[c][row] = ibm_per_pair[p].values(c, t) > 0.5 ? 1 : 0;
      }
    }
  }
  raw_per_pair.clear();
  ibm_per_pair.clear();

  MaskModel model;
  model.config = config;
  model.channels.resize(channels);

  // Independent seeds per channel; training order cannot matter.
  Rng seeder(config.seed);
  std::vector<std::uint64_t> channel_seeds(channels);
  for (std::size_t c = 0; c < channels; ++c) channel_seeds[c] = seeder.fork(c);

  parallel_for(channels, [&](std::size_t c) {
    ChannelClassifier& clf = model.channels[c];
    Matrix& x = feats[c];
    const std::vector<int>& y = labels[c];
    const std::size_t n = x.rows();
    Rng rng(channel_seeds[c]);

    // Decorrelate the AMS block. The projection is fit here and frozen.
    Matrix ams_block(n, config.ams_dims, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      std::copy(x.row(i), x.row(i) + config.ams_dims, ams_block.row(i));
    clf.ams_pca.fit(ams_block, config.ams_dims);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> raw_ams(x.row(i), x.row(i) + config.ams_dims);
      auto proj = clf.ams_pca.project(raw_ams);
      std::copy(proj.begin(), proj.end(), x.row(i));
    }

    bool has_pos = false, has_neg = false;
    for (int v : y) (v == 1 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
      std::cerr << "mask: channel " << c
                << " has one-class labels; using constant predictor\n";
      clf.constant = true;
      clf.constant_value = has_pos ? 1 : 0;
      return;
    }

    // Min-max scale the raw features into [0,1] for the RBM and MLP.
    clf.in_lo.assign(config.raw_dims(), 1e300);
    clf.in_hi.assign(config.raw_dims(), -1e300);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < config.raw_dims(); ++j) {
        clf.in_lo[j] = std::min(clf.in_lo[j], x(i, j));
        clf.in_hi[j] = std::max(clf.in_hi[j], x(i, j));
      }
    Matrix x01(n, config.raw_dims(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(x.row(i), x.row(i) + config.raw_dims());
      auto scaled = scaled_unit_interval(row, clf.in_lo, clf.in_hi);
      std::copy(scaled.begin(), scaled.end(), x01.row(i));
    }

    // Unsupervised pretraining of the first hidden layer.
    Rbm rbm = make_rbm(config.raw_dims(), config.hidden1, rng);
    const std::size_t batch = std::min<std::size_t>(config.batch, n);
    for (int epoch = 0; epoch < config.rbm_epochs; ++epoch) {
      for (std::size_t start = 0; start + batch <= n; start += batch) {
        Matrix mini(batch, config.raw_dims(), 0.0);
        for (std::size_t i = 0; i < batch; ++i)
          std::copy(x01.row(start + i), x01.row(start + i) + config.raw_dims(),
                    mini.row(i));
        rbm_cd1(rbm, mini, config.rbm_lr, rng);
      }
    }

    // RBM-initialized MLP with one extra ReLU layer and a logistic head.
    clf.mlp = init_mlp_from_rbms({rbm}, 1, rng);
    Mlp::Layer extra;
    extra.w = glorot_uniform(config.hidden2, config.hidden1, rng);
    extra.b.assign(config.hidden2, 0.0);
    extra.act = Activation::kRelu;
    Mlp::Layer out;
    out.w = glorot_uniform(1, config.hidden2, rng);
    out.b.assign(1, 0.0);
    out.act = Activation::kLinear;
    clf.mlp.layers.back() = std::move(extra);
    clf.mlp.layers.push_back(std::move(out));

    // Target-dominant frames are rare in many channels; oversample the
    // minority class to parity for the supervised stages.
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < n; ++i)
      (y[i] == 1 ? pos_idx : neg_idx).push_back(i);
    std::vector<std::size_t> balanced;
    const std::size_t per_class = std::max(pos_idx.size(), neg_idx.size());
    balanced.reserve(2 * per_class);
    for (std::size_t i = 0; i < per_class; ++i) {
      balanced.push_back(pos_idx[i % pos_idx.size()]);
      balanced.push_back(neg_idx[i % neg_idx.size()]);
    }

    // Fine-tune with binary cross-entropy over the balanced sample list.
    AdamState adam;
    adam.lr = config.mlp_lr;
    std::vector<std::size_t> order = balanced;
    for (int epoch = 0; epoch < config.mlp_epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t stop = std::min(order.size(), start + batch);
        MlpGradients grads = zero_gradients(clf.mlp);
        for (std::size_t i = start; i < stop; ++i) {
          std::vector<double> xi(x01.row(order[i]),
                                 x01.row(order[i]) + config.raw_dims());
          mlp_backprop(clf.mlp, xi, {static_cast<double>(y[order[i]])}, &grads);
        }
        scale(grads, 1.0 / static_cast<double>(stop - start));
        std::vector<std::vector<double>*> params;
        std::vector<const std::vector<double>*> gblocks;
        for (std::size_t l = 0; l < clf.mlp.layers.size(); ++l) {
          params.push_back(&clf.mlp.layers[l].w.data());
          params.push_back(&clf.mlp.layers[l].b);
          gblocks.push_back(&grads.dw[l].data());
          gblocks.push_back(&grads.db[l]);
        }
        adam_step(adam, params, gblocks);
      }
    }

    // Learned features: deepest hidden activations, concatenated with raw.
    const std::size_t svm_dim = config.raw_dims() + config.hidden2;
    Matrix svm_x(n, svm_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> xi(x01.row(i), x01.row(i) + config.raw_dims());
      auto acts = mlp_forward(clf.mlp, xi);
      const auto& hidden = acts[clf.mlp.layers.size() - 1];
      double* row = svm_x.row(i);
      std::copy(x.row(i), x.row(i) + config.raw_dims(), row);
      std::copy(hidden.begin(), hidden.end(), row + config.raw_dims());
    }

    clf.feat_mean.assign(svm_dim, 0.0);
    clf.feat_std.assign(svm_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < svm_dim; ++j) clf.feat_mean[j] += svm_x(i, j);
    for (auto& v : clf.feat_mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < svm_dim; ++j) {
        const double d = svm_x(i, j) - clf.feat_mean[j];
        clf.feat_std[j] += d * d;
      }
    for (auto& v : clf.feat_std)
      v = std::max(std::sqrt(v / static_cast<double>(n)), 1e-8);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < svm_dim; ++j)
        svm_x(i, j) = (svm_x(i, j) - clf.feat_mean[j]) / clf.feat_std[j];

    Matrix svm_bal(balanced.size(), svm_dim, 0.0);
    std::vector<int> y_bal(balanced.size());
    for (std::size_t i = 0; i < balanced.size(); ++i) {
      std::copy(svm_x.row(balanced[i]), svm_x.row(balanced[i]) + svm_dim,
                svm_bal.row(i));
      y_bal[i] = y[balanced[i]];
    }
    SvmTrainConfig svm_cfg;
    svm_cfg.epochs = config.svm_epochs;
    clf.svm = svm_train(svm_bal, y_bal, config.svm_c, svm_cfg);
  });

  return model;
}

TFMask estimate_mask(const MaskModel& model, const AudioSignal& mixture) {
  const WptTree tree = build_tree();
  const MaskConfig& cfg = model.config;
  RawFeatures raw = extract_raw_features(mixture, tree, cfg);
  const std::size_t channels = model.channels.size();
  const std::size_t T = raw.n_frames;

  TFMask mask;
  mask.values = Matrix(channels, T, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    const ChannelClassifier& clf = model.channels[c];
    const Matrix& feat = raw.per_channel[c];
    for (std::size_t t = 0; t < T; ++t) {
      if (clf.constant) {
        mask.values(c, t) = clf.constant_value;
        continue;
      }
      std::vector<double> row(feat.row(t), feat.row(t) + cfg.raw_dims());
      std::vector<double> raw_ams(row.begin(),
                                  row.begin() + static_cast<std::ptrdiff_t>(cfg.ams_dims));
      auto proj = clf.ams_pca.project(raw_ams);
      std::copy(proj.begin(), proj.end(), row.begin());

      auto x01 = scaled_unit_interval(row, clf.in_lo, clf.in_hi);
      auto acts = mlp_forward(clf.mlp, x01);
      const auto& hidden = acts[clf.mlp.layers.size() - 1];

      std::vector<double> svm_in;
      svm_in.reserve(row.size() + hidden.size());
      svm_in.insert(svm_in.end(), row.begin(), row.end());
      svm_in.insert(svm_in.end(), hidden.begin(), hidden.end());
      svm_in = standardized(svm_in, clf.feat_mean, clf.feat_std);
      mask.values(c, t) = svm_predict(clf.svm, svm_in);
    }
  }
  return mask;
}

HitFaResult hit_fa(const TFMask& estimated, const TFMask& truth) {
  if (estimated.values.rows() != truth.values.rows() ||
      estimated.values.cols() != truth.values.cols())
    throw ShapeError("hit_fa: mask dimensions differ");
  std::size_t pos = 0, neg = 0, hits = 0, fas = 0;
  for (std::size_t i = 0; i < truth.values.data().size(); ++i) {
    const bool t = truth.values.data()[i] > 0.5;
    const bool e = estimated.values.data()[i] > 0.5;
    if (t) {
      ++pos;
      if (e) ++hits;
    } else {
      ++neg;
      if (e) ++fas;
    }
  }
  if (pos == 0 || neg == 0)
    throw UndefinedMetricError("hit_fa: truth must contain both classes");
  HitFaResult r;
  r.hit = static_cast<double>(hits) / static_cast<double>(pos);
  r.fa = static_cast<double>(fas) / static_cast<double>(neg);
  r.hit_minus_fa = r.hit - r.fa;
  return r;
}

void MaskModel::to_bundle(ModelBundle& bundle, const std::string& prefix) const {
  bundle.put_int(prefix + ".channels", static_cast<std::int64_t>(channels.size()));
  bundle.put_scalar(prefix + ".lc_db", config.lc_db);
  bundle.put_int(prefix + ".hidden1", static_cast<std::int64_t>(config.hidden1));
  bundle.put_int(prefix + ".hidden2", static_cast<std::int64_t>(config.hidden2));
  bundle.put_scalar(prefix + ".train_mix_ratio", config.train_mix_ratio);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& clf = channels[c];
    std::string cp = prefix + ".ch" + (c < 10 ? "0" : "") + std::to_string(c);
    bundle.put_int(cp + ".constant", clf.constant ? clf.constant_value : -1);
    if (clf.constant) continue;
    bundle.put_vector(cp + ".pca.mean", clf.ams_pca.mean());
    bundle.put_matrix(cp + ".pca.components", clf.ams_pca.components());
    bundle.put_vector(cp + ".pca.eigenvalues", clf.ams_pca.eigenvalues());
    bundle.put_vector(cp + ".in_lo", clf.in_lo);
    bundle.put_vector(cp + ".in_hi", clf.in_hi);
    write_mlp(bundle, cp + ".mlp", clf.mlp);
    bundle.put_vector(cp + ".feat_mean", clf.feat_mean);
    bundle.put_vector(cp + ".feat_std", clf.feat_std);
    bundle.put_vector(cp + ".svm.w", clf.svm.w);
    bundle.put_scalar(cp + ".svm.b", clf.svm.b);
    bundle.put_scalar(cp + ".svm.c", clf.svm.c);
  }
}

MaskModel MaskModel::from_bundle(const ModelBundle& bundle,
                                 const std::string& prefix) {
  MaskModel model;
  const auto n = static_cast<std::size_t>(bundle.integer(prefix + ".channels"));
  model.config.lc_db = bundle.scalar(prefix + ".lc_db");
  model.config.hidden1 =
      static_cast<std::size_t>(bundle.integer(prefix + ".hidden1"));
  model.config.hidden2 =
      static_cast<std::size_t>(bundle.integer(prefix + ".hidden2"));
  model.config.train_mix_ratio = bundle.scalar(prefix + ".train_mix_ratio");
  model.channels.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto& clf = model.channels[c];
    std::string cp = prefix + ".ch" + (c < 10 ? "0" : "") + std::to_string(c);
    const auto constant = bundle.integer(cp + ".constant");
    if (constant >= 0) {
      clf.constant = true;
      clf.constant_value = static_cast<int>(constant);
      continue;
    }
    clf.ams_pca.set_state(bundle.vector(cp + ".pca.mean"),
                          bundle.matrix(cp + ".pca.components"),
                          bundle.vector(cp + ".pca.eigenvalues"));
    clf.in_lo = bundle.vector(cp + ".in_lo");
    clf.in_hi = bundle.vector(cp + ".in_hi");
    clf.mlp = read_mlp(bundle, cp + ".mlp");
    clf.feat_mean = bundle.vector(cp + ".feat_mean");
    clf.feat_std = bundle.vector(cp + ".feat_std");
    clf.svm.w = bundle.vector(cp + ".svm.w");
    clf.svm.b = bundle.scalar(cp + ".svm.b");
    clf.svm.c = bundle.scalar(cp + ".svm.c");
    clf.constant = false;
  }
  return model;
}

}  // namespace casa
