#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "satpower/errors.hpp"
#include "satpower/learned.hpp"
#include "satpower/rng.hpp"

using namespace satpower;
using satpower::testing::pipeline_channel;

namespace {

MlpModel zeroed(std::vector<int> sizes) {
  MlpModel model = make_mlp(sizes, 1);
  for (auto& w : model.weights) w.setZero();
  for (auto& b : model.biases) b.setZero();
  return model;
}

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::string temp_path(const std::string& name) {
  return std::string("/tmp/satpower_test_") + name;
}

}  // namespace

TEST_SUITE("learned") {

TEST_CASE("all-zero weights output one half per coordinate") {
  const MlpModel model = zeroed({4, 3, 2});
  const Eigen::VectorXd y = mlp_forward(model, Eigen::VectorXd::Constant(4, 0.37));
  REQUIRE(y.size() == 2);
  CHECK(y(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("1-1-1 toy net matches the hand evaluation") {
  MlpModel model = zeroed({1, 1, 1});
  model.weights[0](0, 0) = 2.0;
  model.biases[0](0) = -1.0;
  model.weights[1](0, 0) = 1.0;
  REQUIRE(model.activations.size() == 2);
  CHECK(model.activations[0] == "relu");
  CHECK(model.activations[1] == "logistic");

  Eigen::VectorXd x(1);
  x << 2.0;  // relu(2*2 - 1) = 3 -> logistic(3)
  CHECK(mlp_forward(model, x)(0) == doctest::Approx(logistic(3.0)).epsilon(1e-14));
  x << -1.0;  // relu(-3) = 0 -> logistic(0)
  CHECK(mlp_forward(model, x)(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("outputs stay strictly inside the unit interval") {
  const MlpModel model = make_mlp({5, 8, 3}, 17);
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = rng.uniform(-20.0, 20.0);
    const Eigen::VectorXd y = mlp_forward(model, x);
    CHECK(y.minCoeff() > 0.0);
    CHECK(y.maxCoeff() < 1.0);
  }
  // batch forward agrees with the single-sample path
  Eigen::MatrixXd xb(4, 5);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) xb(r, c) = rng.uniform();
  }
  const Eigen::MatrixXd yb = mlp_forward_batch(model, xb);
  for (int r = 0; r < 4; ++r) {
    CHECK((yb.row(r).transpose() - mlp_forward(model, xb.row(r))).cwiseAbs().maxCoeff() <=
          1e-14);
  }
}

TEST_CASE("backpropagation matches central finite differences") {
  const std::vector<int> sizes{3, 4, 2};
  MlpModel model = make_mlp(sizes, 23);
  Rng rng(24);
  Eigen::MatrixXd x(4, 3), target(4, 2);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) x(r, c) = rng.uniform();
    for (int c = 0; c < 2; ++c) target(r, c) = rng.uniform();
  }
  const auto [loss, grads] = loss_and_gradients(model, x, target);
  CHECK(loss == doctest::Approx(mse_loss(mlp_forward_batch(model, x), target)).epsilon(1e-12));

  const double h = 1e-6;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < grads.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < grads.weights[l].cols(); ++c) {
        const double saved = model.weights[l](r, c);
        model.weights[l](r, c) = saved + h;
        const double up = mse_loss(mlp_forward_batch(model, x), target);
        model.weights[l](r, c) = saved - h;
        const double down = mse_loss(mlp_forward_batch(model, x), target);
        model.weights[l](r, c) = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = grads.weights[l](r, c);
        CHECK(std::abs(fd - an) <= 1e-5 * std::max({std::abs(fd), std::abs(an), 1e-8}));
      }
    }
    for (Eigen::Index r = 0; r < grads.biases[l].size(); ++r) {
      const double saved = model.biases[l](r);
      model.biases[l](r) = saved + h;
      const double up = mse_loss(mlp_forward_batch(model, x), target);
      model.biases[l](r) = saved - h;
      const double down = mse_loss(mlp_forward_batch(model, x), target);
      model.biases[l](r) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads.biases[l](r);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
}

TEST_CASE("min-max normalization hits the endpoints and round-trips") {
  Eigen::MatrixXd train_x(3, 2), train_p(3, 2);
  train_x << 1.0, 10.0, 3.0, 30.0, 2.0, 20.0;
  train_p << 0.0, 5.0, 4.0, 15.0, 2.0, 10.0;
  const NormStats stats = fit_normalization(train_x, train_p);
  CHECK((normalize_features(stats.x_min, stats) - Eigen::VectorXd::Zero(2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((normalize_features(stats.x_max, stats) - Eigen::VectorXd::Ones(2))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
  const Eigen::VectorXd mid = 0.5 * (stats.x_min + stats.x_max);
  CHECK((normalize_features(mid, stats) - Eigen::VectorXd::Constant(2, 0.5))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);

  const Eigen::MatrixXd p_norm = normalize_labels_batch(train_p, stats);
  for (int r = 0; r < 3; ++r) {
    const Eigen::VectorXd back = denormalize_labels(p_norm.row(r), stats);
    CHECK((back.transpose() - train_p.row(r)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero-range coordinates normalize to zero") {
  Eigen::MatrixXd train_x(2, 2), train_p(2, 1);
  train_x << 5.0, 1.0, 5.0, 3.0;  // first column constant
  train_p << 1.0, 2.0;
  const NormStats stats = fit_normalization(train_x, train_p);
  Eigen::VectorXd x(2);
  x << 5.0, 2.0;
  const Eigen::VectorXd xn = normalize_features(x, stats);
  CHECK(xn(0) == 0.0);
  CHECK(xn(1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("prediction rescales proportionally to the full budget") {
  // Output biases pin the forward pass at [0.25, 0.75]; with unit label
  // ranges the denormalized vector is [1, 3] / 4, i.e. the spec's [1, 3]
  // example up to scale, so Pmax = 8 must land on [2, 6].
  MlpModel model = zeroed({2, 2});
  model.biases[0](0) = std::log(0.25 / 0.75);
  model.biases[0](1) = std::log(0.75 / 0.25);
  NormStats stats;
  stats.x_min = Eigen::VectorXd::Zero(2);
  stats.x_max = Eigen::VectorXd::Ones(2);
  stats.p_min = Eigen::VectorXd::Zero(2);
  stats.p_max = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd x(2);
  x << 0.3, 0.6;
  const Eigen::VectorXd p = predict_allocation(model, stats, x, 8.0);
  CHECK(p(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(p.sum() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("prediction falls back to equal power when denormalized to zero") {
  MlpModel model = zeroed({2, 2});
  NormStats stats;
  stats.x_min = Eigen::VectorXd::Zero(2);
  stats.x_max = Eigen::VectorXd::Ones(2);
  stats.p_min = Eigen::VectorXd::Zero(2);
  stats.p_max = Eigen::VectorXd::Zero(2);  // every label coordinate collapses
  const Eigen::VectorXd p = predict_allocation(model, stats, Eigen::VectorXd::Zero(2), 8.0);
  CHECK(p(0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("channel features are the flattened magnitudes, phase-free") {
  SystemParams params;
  const ChannelMatrix chan = pipeline_channel(params, 51);
  const Eigen::VectorXd x = channel_features(chan);
  REQUIRE(x.size() == 49);
  for (int k = 0; k < 7; ++k) {
    for (int n = 0; n < 7; ++n) CHECK(x(k * 7 + n) == chan.amplitude(n, k));
  }
  ChannelMatrix rephased = chan;
  rephased.phase_rad.array() += 1.23;
  for (int k = 0; k < 7; ++k) {
    rephased.h.col(k) = chan.amplitude.col(k) * std::polar(1.0, rephased.phase_rad(k));
  }
  CHECK((channel_features(rephased) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("datasets are deterministic with budget-bounded labels") {
  SystemParams params;
  const DemandProfile demands = DemandProfile::uniform(7, 500.0, 500.0);
  const Dataset a = build_dataset(params, demands, PrecoderMethod::kRzf, 6, 3, 91);
  const Dataset b = build_dataset(params, demands, PrecoderMethod::kRzf, 6, 3, 91);
  CHECK((a.train_x - b.train_x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.train_p - b.train_p).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.test_x - b.test_x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.train_x.rows() == 6);
  REQUIRE(a.train_x.cols() == 49);
  REQUIRE(a.test_p.rows() == 3);
  for (int r = 0; r < 6; ++r) {
    CHECK(a.train_p.row(r).sum() <= params.max_power_w * (1.0 + 1e-9));
    CHECK(a.train_p.row(r).minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(build_dataset(params, demands, PrecoderMethod::kRzf, 0, 3, 91),
                  InvalidConfigError);
}

TEST_CASE("mse loss is the mean squared error norm over samples") {
  Eigen::MatrixXd pred(2, 2), target(2, 2);
  pred << 1.0, 2.0, 0.0, 0.0;
  target << 0.0, 0.0, 0.0, 0.0;
  CHECK(mse_loss(pred, target) == doctest::Approx(2.5).epsilon(1e-15));  // (5 + 0) / 2
  CHECK(mse_loss(target, target) == 0.0);
}

TEST_CASE("training cuts the small-fixture loss at least fivefold") {
  SystemParams params;
  const DemandProfile demands = DemandProfile::uniform(7, 500.0, 500.0);
  const Dataset ds = build_dataset(params, demands, PrecoderMethod::kRzf, 256, 8, 13);
  const NormStats stats = fit_normalization(ds.train_x, ds.train_p);
  const Eigen::MatrixXd xn = normalize_features_batch(ds.train_x, stats);
  const Eigen::MatrixXd pn = normalize_labels_batch(ds.train_p, stats);

  MlpModel model = make_mlp({49, 32, 16, 7}, 29);
  TrainOptions options;
  options.learning_rate = 3e-3;
  options.batch_size = 32;
  options.max_epochs = 400;
  options.patience = 60;
  options.val_fraction = 0.2;
  options.seed = 30;
  const LossCurve curve = train(model, xn, pn, options);
  REQUIRE(curve.train_mse.size() >= 2);
  const double start = curve.train_mse.front();
  const double end = mse_loss(mlp_forward_batch(model, xn), pn);
  CHECK(start >= 5.0 * end);
  CHECK(curve.best_epoch >= 1);
  CHECK(curve.val_mse.size() == curve.train_mse.size());
}

TEST_CASE("model files round-trip bit-exactly and reject corruption") {
  const MlpModel model = make_mlp({6, 5, 3}, 37);
  NormStats stats;
  Rng rng(38);
  stats.x_min = Eigen::VectorXd::Zero(6);
  stats.x_max = Eigen::VectorXd::Ones(6);
  stats.p_min = Eigen::VectorXd::Zero(3);
  stats.p_max = Eigen::VectorXd::Ones(3);
  for (int i = 0; i < 6; ++i) stats.x_max(i) = 1.0 + rng.uniform();

  const std::string path = temp_path("model.txt");
  save_model(path, model, stats);
  const auto [loaded, loaded_stats] = load_model(path);
  REQUIRE(loaded.layer_sizes == model.layer_sizes);
  CHECK(loaded.activations == model.activations);
  CHECK((loaded_stats.x_max - stats.x_max).cwiseAbs().maxCoeff() == 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(6);
    for (int i = 0; i < 6; ++i) x(i) = rng.uniform(-2.0, 2.0);
    CHECK((mlp_forward(loaded, x) - mlp_forward(model, x)).cwiseAbs().maxCoeff() == 0.0);
  }

  // Truncation and garbage headers must both surface as corruption.
  std::ifstream in(path);
  std::string full((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const std::string trunc_path = temp_path("model_trunc.txt");
  std::ofstream(trunc_path) << full.substr(0, full.size() / 2);
  CHECK_THROWS_AS(load_model(trunc_path), CorruptModelError);
  const std::string junk_path = temp_path("model_junk.txt");
  std::ofstream(junk_path) << "not-a-model v9\n";
  CHECK_THROWS_AS(load_model(junk_path), CorruptModelError);
  CHECK_THROWS_AS(load_model(temp_path("missing_model.txt")), CorruptModelError);
  std::remove(path.c_str());
  std::remove(trunc_path.c_str());
  std::remove(junk_path.c_str());
}

}  // TEST_SUITE
