#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

#include "satpower/link_metrics.hpp"

namespace satpower {

/// Verdict of the all-users admission test plus the minimal-power solution.
struct FeasibilityReport {
  double spectral_radius = 0.0;  // Perron root of R*Q
  double required_power_w = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::optional<Eigen::VectorXd> minimal_powers_w;  // present iff spectral_radius < 1
  double power_lower_bound_w = 0.0;
};

/// Elementwise SINR target alpha_k = 2^(xi_k / B) - 1.
Eigen::VectorXd qos_to_sinr_targets(const Eigen::VectorXd& xi_mbps, double bandwidth_mhz);

struct TargetSystem {
  Eigen::MatrixXd r;   // diagonal, r_kk = alpha_k / ((alpha_k + 1) mu_kk)
  Eigen::VectorXd nu;  // nu_k = alpha_k * sigma^2 / ((alpha_k + 1) mu_kk)
};

/// Builds the linear system whose fixed point p = R*Q*p + nu meets every SINR
/// target with equality.  Throws DegenerateChannelError when some mu_kk == 0.
TargetSystem build_r_nu(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& mu, double noise_w);

/// Perron root of an entrywise nonnegative matrix by power iteration
/// (relative tolerance 1e-10, at most 1e5 iterations).
double spectral_radius(const Eigen::MatrixXd& m);

/// Evaluates the two admission conditions: spectral radius below one and the
/// minimal total power 1^T (I - RQ)^-1 nu within budget.
FeasibilityReport check_feasibility(const Eigen::MatrixXd& r, const Eigen::MatrixXd& qmat,
                                    const Eigen::VectorXd& nu, double max_power_w);

/// Lower bound on the total power needed for full satisfaction:
/// 1^T nu / ||I - RQ||_2.
double power_lower_bound(const Eigen::MatrixXd& r, const Eigen::MatrixXd& qmat,
                         const Eigen::VectorXd& nu);

/// Convenience wrapper: demands + coupling straight to a report.
FeasibilityReport analyze_feasibility(const Eigen::MatrixXd& mu, const DemandProfile& demands,
                                      double noise_w, double max_power_w);

}  // namespace satpower
