#include "satpower/feasibility.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "satpower/errors.hpp"

namespace satpower {

namespace {
// Radii in [1 - kRadiusMargin, 1) are treated as infeasible: the required
// power diverges and the linear solve turns ill-conditioned.
constexpr double kRadiusMargin = 1e-10;
constexpr double kPowerIterTol = 1e-10;
constexpr int kPowerIterMax = 100000;
}  // namespace

Eigen::VectorXd qos_to_sinr_targets(const Eigen::VectorXd& xi_mbps, double bandwidth_mhz) {
  if (bandwidth_mhz <= 0) throw InvalidConfigError("bandwidth must be positive");
  return xi_mbps.unaryExpr([bandwidth_mhz](double xi) { return std::exp2(xi / bandwidth_mhz) - 1.0; });
}

TargetSystem build_r_nu(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& mu, double noise_w) {
  const Eigen::Index k_users = alpha.size();
  if (mu.rows() != k_users || mu.cols() != k_users) {
    throw InvalidConfigError("coupling matrix does not match target count");
  }
  TargetSystem sys;
  sys.r = Eigen::MatrixXd::Zero(k_users, k_users);
  sys.nu.resize(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    if (mu(k, k) <= 0) {
      throw DegenerateChannelError("direct gain mu_kk is zero for user " + std::to_string(k));
    }
    const double scale = alpha(k) / ((alpha(k) + 1.0) * mu(k, k));
    sys.r(k, k) = scale;
    sys.nu(k) = scale * noise_w;
  }
  return sys;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidConfigError("spectral radius needs a square matrix");
  if ((m.array() < 0).any()) {
    throw InvalidConfigError("power iteration is only valid for nonnegative matrices");
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  double estimate = 0.0;
  for (int it = 0; it < kPowerIterMax; ++it) {
    Eigen::VectorXd mv = m * v;
    const double norm = mv.norm();
    if (norm == 0.0) return 0.0;  // v reached the null space: no positive eigenvalue left
    const double next = norm / v.norm();
    mv /= norm;
    if (it > 0 && std::abs(next - estimate) <= kPowerIterTol * std::max(1.0, next)) {
      return next;
    }
    estimate = next;
    v = std::move(mv);
  }
  std::ostringstream msg;
  msg << "power iteration did not converge within " << kPowerIterMax
      << " iterations; last estimate " << estimate;
  throw NumericError(msg.str());
}

FeasibilityReport check_feasibility(const Eigen::MatrixXd& r, const Eigen::MatrixXd& qmat,
                                    const Eigen::VectorXd& nu, double max_power_w) {
  const Eigen::Index k_users = nu.size();
  if (r.rows() != k_users || qmat.rows() != k_users) {
    throw InvalidConfigError("feasibility inputs have inconsistent shapes");
  }
  const Eigen::MatrixXd rq = r * qmat;

  FeasibilityReport report;
  report.spectral_radius = spectral_radius(rq);
  report.power_lower_bound_w = power_lower_bound(r, qmat, nu);

  if (report.spectral_radius < 1.0 - kRadiusMargin) {
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(k_users, k_users) - rq;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd p = lu.solve(nu);
    const double residual = (system * p - nu).norm();
    if (!p.allFinite() || residual > 1e-8 * std::max(1.0, nu.norm())) {
      throw NumericError("minimal-power solve failed despite spectral radius " +
                         std::to_string(report.spectral_radius));
    }
    p = p.cwiseMax(0.0);  // clip solver dust; exact solution is nonnegative
    report.required_power_w = p.sum();
    report.minimal_powers_w = std::move(p);
    report.feasible = report.required_power_w <= max_power_w;
  }
  return report;
}

double power_lower_bound(const Eigen::MatrixXd& r, const Eigen::MatrixXd& qmat,
                         const Eigen::VectorXd& nu) {
  const Eigen::Index k_users = nu.size();
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(k_users, k_users) - r * qmat;
  const double norm2 = system.jacobiSvd().singularValues()(0);
  if (norm2 == 0.0) return 0.0;
  return nu.sum() / norm2;
}

FeasibilityReport analyze_feasibility(const Eigen::MatrixXd& mu, const DemandProfile& demands,
                                      double noise_w, double max_power_w) {
  const TargetSystem sys = build_r_nu(demands.alpha, mu, noise_w);
  return check_feasibility(sys.r, mu, sys.nu, max_power_w);
}

}  // namespace satpower
