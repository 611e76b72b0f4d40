#include "satpower/learned.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "satpower/allocators.hpp"
#include "satpower/errors.hpp"
#include "satpower/rng.hpp"

namespace satpower {

namespace {

double logistic(double z) {
  if (z >= 0) {
    const double t = std::exp(-z);
    return 1.0 / (1.0 + t);
  }
  const double t = std::exp(z);
  return t / (1.0 + t);
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, const std::string& tag) {
  if (tag == "relu") return z.cwiseMax(0.0);
  if (tag == "logistic") return z.unaryExpr(&logistic);
  throw CorruptModelError("unknown activation tag: " + tag);
}

// Derivative expressed through the activated value.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& a, const std::string& tag) {
  if (tag == "relu") {
    return (a.array() > 0.0).cast<double>().matrix();
  }
  if (tag == "logistic") return (a.array() * (1.0 - a.array())).matrix();
  throw CorruptModelError("unknown activation tag: " + tag);
}

void check_model(const MlpModel& model) {
  const std::size_t layers = model.layer_sizes.size();
  if (layers < 2) throw CorruptModelError("model needs at least input and output layers");
  if (model.weights.size() != layers - 1 || model.biases.size() != layers - 1 ||
      model.activations.size() != layers - 1) {
    throw CorruptModelError("model layer counts are inconsistent");
  }
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    if (model.layer_sizes[l] <= 0 || model.layer_sizes[l + 1] <= 0) {
      throw CorruptModelError("model layer sizes must be positive");
    }
    if (model.weights[l].rows() != model.layer_sizes[l + 1] ||
        model.weights[l].cols() != model.layer_sizes[l] ||
        model.biases[l].size() != model.layer_sizes[l + 1]) {
      throw CorruptModelError("model weight shapes do not match the layer sizes");
    }
  }
}

// Activations of every layer, input included; one sample per row.
std::vector<Eigen::MatrixXd> forward_layers(const MlpModel& model, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    Eigen::MatrixXd z = acts.back() * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    acts.push_back(activate(z, model.activations[l]));
  }
  return acts;
}

// Platform-independent Fisher-Yates (std::shuffle is implementation-defined).
void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx, int begin,
                            int end) {
  Eigen::MatrixXd out(end - begin, m.cols());
  for (int i = begin; i < end; ++i) out.row(i - begin) = m.row(idx[i]);
  return out;
}

}  // namespace

MlpModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw InvalidConfigError("an MLP needs at least input and output layers");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw InvalidConfigError("layer sizes must be positive");
  }
  MlpModel model;
  model.layer_sizes = layer_sizes;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    model.activations.push_back(l + 2 < layer_sizes.size() ? "relu" : "logistic");
  }
  return model;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x) {
  return mlp_forward_batch(model, x.transpose()).row(0);
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
  check_model(model);
  if (x.cols() != model.layer_sizes.front()) {
    throw InvalidConfigError("input width does not match the model input layer");
  }
  return forward_layers(model, x).back();
}

Eigen::VectorXd channel_features(const ChannelMatrix& channel) {
  const Eigen::Index n_beams = channel.amplitude.rows();
  const Eigen::Index k_users = channel.amplitude.cols();
  Eigen::VectorXd features(n_beams * k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    for (Eigen::Index n = 0; n < n_beams; ++n) {
      features(k * n_beams + n) = channel.amplitude(n, k);
    }
  }
  return features;
}

Dataset build_dataset(const SystemParams& params, const DemandProfile& demands,
                      PrecoderMethod precoder, int n_train, int n_test, std::uint64_t seed) {
  if (n_train <= 0 || n_test <= 0) throw InvalidConfigError("sample counts must be positive");
  params.validate();
  const int total = n_train + n_test;
  const int d = params.n_beams * params.n_users;

  Dataset ds;
  ds.train_x.resize(n_train, d);
  ds.train_p.resize(n_train, params.n_users);
  ds.test_x.resize(n_test, d);
  ds.test_p.resize(n_test, params.n_users);

  for (int t = 0; t < total; ++t) {
    const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
    const UserLayout layout = generate_user_layout(params, mix_seed(trial_seed, 1));
    const ChannelMatrix channel = build_channel(params, layout, mix_seed(trial_seed, 2));
    const PrecodingMatrix w = precoder == PrecoderMethod::kZf
                                  ? zf_precoder(channel)
                                  : rzf_precoder(channel, params.noise_power_w,
                                                 params.max_power_w);
    const Eigen::MatrixXd mu = coupling_matrix(channel, w);
    const AllocationResult label = joint_optimize(mu, params.noise_power_w,
                                                  params.bandwidth_mhz, demands,
                                                  params.max_power_w);
    const Eigen::VectorXd x = channel_features(channel);
    if (t < n_train) {
      ds.train_x.row(t) = x.transpose();
      ds.train_p.row(t) = label.powers_w.transpose();
    } else {
      ds.test_x.row(t - n_train) = x.transpose();
      ds.test_p.row(t - n_train) = label.powers_w.transpose();
    }
  }
  return ds;
}

NormStats fit_normalization(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_p) {
  if (train_x.rows() == 0 || train_x.rows() != train_p.rows()) {
    throw InvalidConfigError("normalization needs a non-empty, aligned training split");
  }
  NormStats stats;
  stats.x_min = train_x.colwise().minCoeff();
  stats.x_max = train_x.colwise().maxCoeff();
  stats.p_min = train_p.colwise().minCoeff();
  stats.p_max = train_p.colwise().maxCoeff();
  const int flat_x = static_cast<int>((stats.x_max - stats.x_min).array().cwiseEqual(0.0).count());
  const int flat_p = static_cast<int>((stats.p_max - stats.p_min).array().cwiseEqual(0.0).count());
  if (flat_x > 0 || flat_p > 0) {
    std::cerr << "warning: " << flat_x << " feature and " << flat_p
              << " label coordinates have zero range; they will normalize to 0\n";
  }
  return stats;
}

namespace {

Eigen::MatrixXd minmax_map(const Eigen::MatrixXd& v, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
  if (v.cols() != lo.size()) throw InvalidConfigError("normalization stats width mismatch");
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double range = hi(c) - lo(c);
    if (range == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = (v.col(c).array() - lo(c)) / range;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd normalize_features(const Eigen::VectorXd& x, const NormStats& stats) {
  return minmax_map(x.transpose(), stats.x_min, stats.x_max).row(0);
}

Eigen::MatrixXd normalize_features_batch(const Eigen::MatrixXd& x, const NormStats& stats) {
  return minmax_map(x, stats.x_min, stats.x_max);
}

Eigen::MatrixXd normalize_labels_batch(const Eigen::MatrixXd& p, const NormStats& stats) {
  return minmax_map(p, stats.p_min, stats.p_max);
}

Eigen::VectorXd denormalize_labels(const Eigen::VectorXd& p_norm, const NormStats& stats) {
  if (p_norm.size() != stats.p_min.size()) {
    throw InvalidConfigError("normalization stats width mismatch");
  }
  return stats.p_min.array() + p_norm.array() * (stats.p_max - stats.p_min).array();
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.rows() == 0) {
    throw InvalidConfigError("loss operands must be non-empty and congruent");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

std::pair<double, Gradients> loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& target) {
  check_model(model);
  const std::vector<Eigen::MatrixXd> acts = forward_layers(model, x);
  const double loss = mse_loss(acts.back(), target);

  Gradients grads;
  grads.weights.resize(model.weights.size());
  grads.biases.resize(model.biases.size());

  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd d_act = 2.0 / n * (acts.back() - target);
  for (std::size_t l = model.weights.size(); l-- > 0;) {
    const Eigen::MatrixXd d_z =
        d_act.cwiseProduct(activation_grad(acts[l + 1], model.activations[l]));
    grads.weights[l] = d_z.transpose() * acts[l];
    grads.biases[l] = d_z.colwise().sum().transpose();
    if (l > 0) d_act = d_z * model.weights[l];
  }
  return {loss, std::move(grads)};
}

LossCurve train(MlpModel& model, const Eigen::MatrixXd& train_x_norm,
                const Eigen::MatrixXd& train_p_norm, const TrainOptions& options) {
  check_model(model);
  const int n = static_cast<int>(train_x_norm.rows());
  if (n == 0 || train_p_norm.rows() != n) {
    throw InvalidConfigError("training split is empty or misaligned");
  }
  if (train_x_norm.cols() != model.layer_sizes.front() ||
      train_p_norm.cols() != model.layer_sizes.back()) {
    throw InvalidConfigError("dataset widths do not match the model");
  }
  if (options.learning_rate <= 0 || options.batch_size <= 0 || options.max_epochs < 0 ||
      options.patience <= 0 || options.val_fraction < 0 || options.val_fraction >= 1) {
    throw InvalidConfigError("bad training options");
  }

  Rng rng(options.seed);
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  shuffle_indices(idx, rng);

  int n_val = static_cast<int>(options.val_fraction * n);
  if (options.val_fraction > 0 && n_val == 0 && n > 1) n_val = 1;
  const int n_fit = n - n_val;
  if (n_fit == 0) throw InvalidConfigError("validation split leaves no training samples");

  const Eigen::MatrixXd fit_x = gather_rows(train_x_norm, idx, 0, n_fit);
  const Eigen::MatrixXd fit_p = gather_rows(train_p_norm, idx, 0, n_fit);
  const Eigen::MatrixXd val_x = gather_rows(train_x_norm, idx, n_fit, n);
  const Eigen::MatrixXd val_p = gather_rows(train_p_norm, idx, n_fit, n);

  const auto epoch_mse = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& p) {
    return mse_loss(mlp_forward_batch(model, x), p);
  };
  const auto val_metric = [&] {
    return n_val > 0 ? epoch_mse(val_x, val_p) : epoch_mse(fit_x, fit_p);
  };

  LossCurve curve;
  curve.train_mse.push_back(epoch_mse(fit_x, fit_p));
  curve.val_mse.push_back(val_metric());

  // Adam state.
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    vw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    vb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  long step = 0;

  MlpModel best = model;
  double best_val = curve.val_mse[0];
  int best_epoch = 0;
  int stall = 0;

  std::vector<int> order(static_cast<std::size_t>(n_fit));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle_indices(order, rng);
    for (int begin = 0; begin < n_fit; begin += options.batch_size) {
      const int end = std::min(begin + options.batch_size, n_fit);
      const Eigen::MatrixXd bx = gather_rows(fit_x, order, begin, end);
      const Eigen::MatrixXd bp = gather_rows(fit_p, order, begin, end);
      auto [loss, grads] = loss_and_gradients(model, bx, bp);
      if (!std::isfinite(loss)) {
        throw TrainingDivergedError(
            "training loss became non-finite at epoch " + std::to_string(epoch), epoch);
      }
      ++step;
      const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mw[l] = beta1 * mw[l] + (1.0 - beta1) * grads.weights[l];
        vw[l] = beta2 * vw[l] + (1.0 - beta2) * grads.weights[l].cwiseAbs2();
        model.weights[l].array() -= options.learning_rate * (mw[l].array() / corr1) /
                                    ((vw[l].array() / corr2).sqrt() + eps);
        mb[l] = beta1 * mb[l] + (1.0 - beta1) * grads.biases[l];
        vb[l] = beta2 * vb[l] + (1.0 - beta2) * grads.biases[l].cwiseAbs2();
        model.biases[l].array() -= options.learning_rate * (mb[l].array() / corr1) /
                                   ((vb[l].array() / corr2).sqrt() + eps);
      }
    }

    const double tr = epoch_mse(fit_x, fit_p);
    const double va = val_metric();
    if (!std::isfinite(tr) || !std::isfinite(va)) {
      throw TrainingDivergedError(
          "epoch metric became non-finite at epoch " + std::to_string(epoch), epoch);
    }
    curve.train_mse.push_back(tr);
    curve.val_mse.push_back(va);

    if (va < best_val) {
      best_val = va;
      best = model;
      best_epoch = epoch;
      stall = 0;
    } else if (++stall >= options.patience) {
      break;
    }
  }

  model = std::move(best);
  curve.best_epoch = best_epoch;
  return curve;
}

Eigen::VectorXd predict_allocation(const MlpModel& model, const NormStats& stats,
                                   const Eigen::VectorXd& x, double max_power_w) {
  if (max_power_w <= 0) throw InvalidConfigError("max power must be positive");
  const Eigen::VectorXd x_in = normalize_features(x, stats);
  const Eigen::VectorXd p_norm = mlp_forward(model, x_in);
  const Eigen::VectorXd p_hat = denormalize_labels(p_norm, stats).cwiseMax(0.0);
  const double total = p_hat.sum();
  if (total <= 0) {
    std::cerr << "warning: predicted powers are all zero; falling back to equal power\n";
    return Eigen::VectorXd::Constant(p_hat.size(), max_power_w / p_hat.size());
  }
  return p_hat * (max_power_w / total);
}

void save_model(const std::string& path, const MlpModel& model, const NormStats& stats) {
  check_model(model);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out.precision(17);
  out << "satpower-mlp v1\n";
  out << "layers " << model.layer_sizes.size() << "\n";
  out << "sizes";
  for (int s : model.layer_sizes) out << ' ' << s;
  out << "\nactivations";
  for (const std::string& a : model.activations) out << ' ' << a;
  out << "\n";
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    out << "weights " << l << "\n";
    for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) {
        out << model.weights[l](r, c) << (c + 1 == model.weights[l].cols() ? '\n' : ' ');
      }
    }
    out << "bias " << l << "\n";
    for (Eigen::Index r = 0; r < model.biases[l].size(); ++r) {
      out << model.biases[l](r) << (r + 1 == model.biases[l].size() ? '\n' : ' ');
    }
  }
  const auto dump_vec = [&out](const char* tag, const Eigen::VectorXd& v) {
    out << tag << ' ' << v.size() << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i) << (i + 1 == v.size() ? '\n' : ' ');
  };
  dump_vec("xmin", stats.x_min);
  dump_vec("xmax", stats.x_max);
  dump_vec("pmin", stats.p_min);
  dump_vec("pmax", stats.p_max);
  if (!out) throw IoError("failed writing model file: " + path);
}

namespace {

void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want) {
    throw CorruptModelError("model file is truncated or malformed (expected '" + want + "')");
  }
}

template <typename T>
T read_value(std::istream& in) {
  T v;
  if (!(in >> v)) throw CorruptModelError("model file is truncated or malformed");
  return v;
}

Eigen::VectorXd read_tagged_vector(std::istream& in, const std::string& tag,
                                   Eigen::Index expected) {
  expect_token(in, tag);
  const auto size = read_value<Eigen::Index>(in);
  if (size != expected) throw CorruptModelError("model stats do not match the layer sizes");
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = read_value<double>(in);
  return v;
}

}  // namespace

std::pair<MlpModel, NormStats> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorruptModelError("cannot open model file: " + path);
  expect_token(in, "satpower-mlp");
  expect_token(in, "v1");
  expect_token(in, "layers");
  const auto layers = read_value<std::size_t>(in);
  if (layers < 2 || layers > 64) throw CorruptModelError("implausible layer count");
  MlpModel model;
  expect_token(in, "sizes");
  for (std::size_t i = 0; i < layers; ++i) {
    const int s = read_value<int>(in);
    if (s <= 0) throw CorruptModelError("layer sizes must be positive");
    model.layer_sizes.push_back(s);
  }
  expect_token(in, "activations");
  for (std::size_t i = 0; i + 1 < layers; ++i) {
    const auto tag = read_value<std::string>(in);
    if (tag != "relu" && tag != "logistic") {
      throw CorruptModelError("unknown activation tag: " + tag);
    }
    model.activations.push_back(tag);
  }
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    expect_token(in, "weights");
    if (read_value<std::size_t>(in) != l) throw CorruptModelError("weight blocks out of order");
    Eigen::MatrixXd w(model.layer_sizes[l + 1], model.layer_sizes[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_value<double>(in);
    }
    model.weights.push_back(std::move(w));
    expect_token(in, "bias");
    if (read_value<std::size_t>(in) != l) throw CorruptModelError("bias blocks out of order");
    Eigen::VectorXd b(model.layer_sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_value<double>(in);
    model.biases.push_back(std::move(b));
  }
  NormStats stats;
  stats.x_min = read_tagged_vector(in, "xmin", model.layer_sizes.front());
  stats.x_max = read_tagged_vector(in, "xmax", model.layer_sizes.front());
  stats.p_min = read_tagged_vector(in, "pmin", model.layer_sizes.back());
  stats.p_max = read_tagged_vector(in, "pmax", model.layer_sizes.back());
  check_model(model);
  return {std::move(model), std::move(stats)};
}

}  // namespace satpower
