#include "satpower/link_metrics.hpp"

#include <cmath>

#include "satpower/errors.hpp"

namespace satpower {

DemandProfile DemandProfile::uniform(int n_users, double xi_mbps, double bandwidth_mhz) {
  return from_xi(Eigen::VectorXd::Constant(n_users, xi_mbps), bandwidth_mhz);
}

DemandProfile DemandProfile::from_xi(Eigen::VectorXd xi_mbps, double bandwidth_mhz) {
  if (bandwidth_mhz <= 0) throw InvalidConfigError("bandwidth must be positive");
  if ((xi_mbps.array() < 0).any()) throw InvalidConfigError("demands must be nonnegative");
  DemandProfile d;
  d.alpha = xi_mbps.unaryExpr(
      [bandwidth_mhz](double xi) { return std::exp2(xi / bandwidth_mhz) - 1.0; });
  d.xi_mbps = std::move(xi_mbps);
  return d;
}

double sinr(int k, const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu, double noise_w) {
  double interference = 0.0;
  for (Eigen::Index l = 0; l < powers_w.size(); ++l) {
    if (l != k) interference += powers_w(l) * mu(k, l);
  }
  return powers_w(k) * mu(k, k) / (interference + noise_w);
}

double rate_mbps(int k, const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                 double noise_w, double bandwidth_mhz) {
  return bandwidth_mhz * std::log2(1.0 + sinr(k, powers_w, mu, noise_w));
}

Eigen::VectorXd all_rates_mbps(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                               double noise_w, double bandwidth_mhz) {
  Eigen::VectorXd rates(powers_w.size());
  for (Eigen::Index k = 0; k < powers_w.size(); ++k) {
    rates(k) = rate_mbps(static_cast<int>(k), powers_w, mu, noise_w, bandwidth_mhz);
  }
  return rates;
}

std::vector<int> satisfied_set(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                               double noise_w, double bandwidth_mhz,
                               const DemandProfile& demands, double tol_mbps) {
  std::vector<int> satisfied;
  for (Eigen::Index k = 0; k < powers_w.size(); ++k) {
    const double r = rate_mbps(static_cast<int>(k), powers_w, mu, noise_w, bandwidth_mhz);
    if (r >= demands.xi_mbps(k) - tol_mbps) satisfied.push_back(static_cast<int>(k));
  }
  return satisfied;
}

double sum_throughput_mbps(const Eigen::VectorXd& powers_w, const Eigen::MatrixXd& mu,
                           double noise_w, double bandwidth_mhz) {
  return all_rates_mbps(powers_w, mu, noise_w, bandwidth_mhz).sum();
}

}  // namespace satpower
