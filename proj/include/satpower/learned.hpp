#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "satpower/config.hpp"
#include "satpower/link_metrics.hpp"
#include "satpower/precoding.hpp"
#include "satpower/scenario.hpp"

namespace satpower {

/// Fully connected network; weights[l] maps layer l to layer l+1.
struct MlpModel {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;       // layer_sizes[l+1] x layer_sizes[l]
  std::vector<Eigen::VectorXd> biases;
  std::vector<std::string> activations;       // per non-input layer: relu | logistic
};

/// Fan-in-scaled uniform weights, zero biases, relu hidden / logistic output.
MlpModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x);

/// One sample per row.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x);

/// Min-max ranges fitted on the training split only.
struct NormStats {
  Eigen::VectorXd x_min, x_max;  // features, length K*N
  Eigen::VectorXd p_min, p_max;  // label powers, length K
};

struct Dataset {
  Eigen::MatrixXd train_x, train_p;  // one sample per row
  Eigen::MatrixXd test_x, test_p;
};

/// Channel magnitudes flattened user-major: entry k*N + n is |H(n, k)|.
Eigen::VectorXd channel_features(const ChannelMatrix& channel);

/// Fresh layout + channel per trial; labels are joint_optimize powers under
/// the given precoder.  Deterministic for a fixed seed.
Dataset build_dataset(const SystemParams& params, const DemandProfile& demands,
                      PrecoderMethod precoder, int n_train, int n_test, std::uint64_t seed);

NormStats fit_normalization(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_p);

/// Coordinates with zero range map to 0 (a warning is emitted when fitting).
Eigen::VectorXd normalize_features(const Eigen::VectorXd& x, const NormStats& stats);
Eigen::MatrixXd normalize_features_batch(const Eigen::MatrixXd& x, const NormStats& stats);
Eigen::MatrixXd normalize_labels_batch(const Eigen::MatrixXd& p, const NormStats& stats);
Eigen::VectorXd denormalize_labels(const Eigen::VectorXd& p_norm, const NormStats& stats);

struct TrainOptions {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 200;
  int patience = 10;          // epochs without validation improvement
  double val_fraction = 0.1;  // carved off the training split
  std::uint64_t seed = 1;
};

struct LossCurve {
  std::vector<double> train_mse;  // entry 0 is the untrained model
  std::vector<double> val_mse;
  int best_epoch = 0;
};

/// Mean over samples of the squared error norm, E||pred - target||^2.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

std::pair<double, Gradients> loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& target);

/// Mini-batch Adam with early stopping on validation MSE; the model is left
/// at the best validation epoch.  Throws TrainingDivergedError on non-finite
/// loss.
LossCurve train(MlpModel& model, const Eigen::MatrixXd& train_x_norm,
                const Eigen::MatrixXd& train_p_norm, const TrainOptions& options);

/// normalize -> forward -> denormalize -> rescale so the sum is exactly Pmax.
/// Falls back to equal power (with a warning) if the net predicts all zeros.
Eigen::VectorXd predict_allocation(const MlpModel& model, const NormStats& stats,
                                   const Eigen::VectorXd& x, double max_power_w);

/// Versioned text format holding dimensions, weights, biases, activation
/// tags, and the normalization stats; round-trips bit-exactly.
void save_model(const std::string& path, const MlpModel& model, const NormStats& stats);
std::pair<MlpModel, NormStats> load_model(const std::string& path);

}  // namespace satpower
