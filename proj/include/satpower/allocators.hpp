#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "satpower/link_metrics.hpp"

namespace satpower {

enum class Method { kJointOpt, kSatisSetOpt, kSumOpt, kEqualPower, kLearned };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct TraceEntry {
  int n = 0;
  int q_size = 0;
  double sum_rate_mbps = 0.0;
};

struct AllocationResult {
  Eigen::VectorXd powers_w;
  std::vector<int> satisfied;   // demand-satisfied set Q, ascending
  Eigen::VectorXd rates_mbps;   // empty until finalize_result
  int iterations = 0;           // completed set-expansion iterations
  std::vector<TraceEntry> trace;
  Method method = Method::kJointOpt;
  double wall_time_ms = 0.0;
};

/// Closed-form water-filling: p_k = max(0, level - 1/g_k) with the level
/// chosen so the powers sum to the budget.  Ties keep index order.
Eigen::VectorXd waterfill(const Eigen::VectorXd& effective_gains, double max_power_w);

/// Unconstrained sum-rate maximization by iterated water-filling with
/// interference held fixed between rounds.
Eigen::VectorXd sum_rate_allocate(const Eigen::MatrixXd& mu, double noise_w, double max_power_w);

/// Equality-constrained reallocation: users in q_fixed are pinned to their
/// exact demands, the leftover budget is water-filled over everyone else.
/// Throws ReallocationInfeasibleError when the pinned demands cannot be met.
Eigen::VectorXd demand_constrained_reallocate(const Eigen::MatrixXd& mu, double noise_w,
                                              double bandwidth_mhz, const DemandProfile& demands,
                                              const std::vector<int>& q_fixed, double max_power_w);

/// Algorithm that grows the satisfied set from the unconstrained optimum,
/// or hands every user their minimal power plus water-filled surplus when
/// the full demand set is admissible.
AllocationResult joint_optimize(const Eigen::MatrixXd& mu, double noise_w, double bandwidth_mhz,
                                const DemandProfile& demands, double max_power_w);

/// Same set-expansion loop, but leftover power is split equally among the
/// users outside the set (and among all users once the set is full).
AllocationResult satisset_optimize(const Eigen::MatrixXd& mu, double noise_w, double bandwidth_mhz,
                                   const DemandProfile& demands, double max_power_w);

/// Benchmark: pure sum-rate maximization, demands ignored.
AllocationResult sum_opt(const Eigen::MatrixXd& mu, double noise_w, double max_power_w);

/// Benchmark: uniform split of the budget.
AllocationResult equal_power(int n_users, double max_power_w);

/// Fills rates and the demand-satisfied set for a result whose powers are set.
void finalize_result(AllocationResult& result, const Eigen::MatrixXd& mu, double noise_w,
                     double bandwidth_mhz, const DemandProfile& demands,
                     double tol_mbps = kDemandTolMbps);

}  // namespace satpower
