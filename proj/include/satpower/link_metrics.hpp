#pragma once

#include <Eigen/Dense>
#include <vector>

namespace satpower {

/// Absolute slack, in Mbps, used whenever achieved rate is compared against a
/// demand that an equality-constrained solve met only to solver tolerance.
inline constexpr double kDemandTolMbps = 1e-6;

/// Per-user throughput demands and the equivalent SINR targets.
struct DemandProfile {
  Eigen::VectorXd xi_mbps;
  Eigen::VectorXd alpha;  // 2^(xi/B) - 1, kept consistent with xi_mbps

  static DemandProfile uniform(int n_users, double xi_mbps, double bandwidth_mhz);
  static DemandProfile from_xi(Eigen::VectorXd xi_mbps, double bandwidth_mhz);
};

double sinr(int k, const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu, double noise_w);

double rate_mbps(int k, const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                 double noise_w, double bandwidth_mhz);

Eigen::VectorXd all_rates_mbps(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                               double noise_w, double bandwidth_mhz);

/// Users whose achieved rate is within tol_mbps of their demand or better.
std::vector<int> satisfied_set(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                               double noise_w, double bandwidth_mhz,
                               const DemandProfile& demands, double tol_mbps = kDemandTolMbps);

double sum_throughput_mbps(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                           double noise_w, double bandwidth_mhz);

}  // namespace satpower
