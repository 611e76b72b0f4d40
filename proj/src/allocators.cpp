#include "satpower/allocators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "satpower/errors.hpp"
#include "satpower/feasibility.hpp"

namespace satpower {

namespace {

constexpr int kMaxRounds = 50;
constexpr double kRadiusMargin = 1e-10;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Per-user gain with the interference of everyone else held fixed at p. The
// noise may vary per user so interference from outside the modeled set can be
// folded in.
Eigen::VectorXd effective_gains(const Eigen::MatrixXd& mu, const Eigen::VectorXd& p,
                                const Eigen::VectorXd& noise_w) {
  const Eigen::Index k_users = mu.rows();
  Eigen::VectorXd g(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    double interference = 0.0;
    for (Eigen::Index l = 0; l < k_users; ++l) {
      if (l != k) interference += p(l) * mu(k, l);
    }
    g(k) = mu(k, k) / (interference + noise_w(k));
  }
  return g;
}

Eigen::VectorXd effective_gains(const Eigen::MatrixXd& mu, const Eigen::VectorXd& p,
                                double noise_w) {
  return effective_gains(mu, p, Eigen::VectorXd::Constant(mu.rows(), noise_w));
}

// Sum rate up to the bandwidth factor, so allocations compare without B.
double sum_log_rate(const Eigen::MatrixXd& mu, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& noise_w) {
  const Eigen::VectorXd gains = effective_gains(mu, p, noise_w);
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) s += std::log1p(p(k) * gains(k));
  return s;
}

// Gradient of sum_log_rate: own-channel gain minus the interference damage the
// user inflicts on every other link.
Eigen::VectorXd sum_log_rate_grad(const Eigen::MatrixXd& mu, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& noise_w) {
  const Eigen::Index k_users = p.size();
  Eigen::VectorXd denom(k_users);
  Eigen::VectorXd sinr(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    double interference = 0.0;
    for (Eigen::Index l = 0; l < k_users; ++l) {
      if (l != k) interference += p(l) * mu(k, l);
    }
    denom(k) = interference + noise_w(k);
    sinr(k) = p(k) * mu(k, k) / denom(k);
  }
  Eigen::VectorXd grad(k_users);
  for (Eigen::Index m = 0; m < k_users; ++m) {
    double g = mu(m, m) / (denom(m) * (1.0 + sinr(m)));
    for (Eigen::Index k = 0; k < k_users; ++k) {
      if (k == m) continue;
      g -= p(k) * mu(k, k) * mu(k, m) / (denom(k) * denom(k) * (1.0 + sinr(k)));
    }
    grad(m) = g;
  }
  return grad;
}

// Euclidean projection onto {p >= 0, sum(p) = budget}.
Eigen::VectorXd project_onto_simplex(const Eigen::VectorXd& v, double budget) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - budget) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) tau = t;
  }
  return v.unaryExpr([tau](double x) { return std::max(0.0, x - tau); });
}

// Projected gradient ascent on the sum rate over the full-budget simplex,
// starting from `p`. Monotone: every accepted step improves the objective.
Eigen::VectorXd ascend_sum_rate(const Eigen::MatrixXd& mu, Eigen::VectorXd p,
                                const Eigen::VectorXd& noise_w, double budget) {
  constexpr int kAscentIters = 500;
  constexpr int kBacktracks = 60;
  double value = sum_log_rate(mu, p, noise_w);
  double step = budget;
  for (int it = 0; it < kAscentIters; ++it) {
    const Eigen::VectorXd grad = sum_log_rate_grad(mu, p, noise_w);
    bool improved = false;
    double trial = step;
    for (int bt = 0; bt < kBacktracks; ++bt) {
      Eigen::VectorXd cand = project_onto_simplex(p + trial * grad, budget);
      const double cand_value = sum_log_rate(mu, cand, noise_w);
      if (cand_value > value + 1e-14 * (1.0 + std::abs(value))) {
        p = std::move(cand);
        value = cand_value;
        step = trial * 2.0;
        improved = true;
        break;
      }
      trial *= 0.5;
    }
    if (!improved) break;
  }
  return p;
}

// Best full-budget sum-rate point we can find: the water-filling best-response
// fixed point is a Nash point of the selfish game, not a stationary point of
// the sum rate, so it routinely undershoots allocations visited on the way
// there. Keep the best iterate across two deterministic trajectories, then
// polish with monotone projected ascent on the true objective (which may
// switch weak users off entirely, as water-filling itself does).
Eigen::VectorXd best_sum_rate_point(const Eigen::MatrixXd& mu, const Eigen::VectorXd& noise_w,
                                    double budget) {
  const Eigen::Index k_users = mu.rows();
  Eigen::VectorXd best;
  double best_obj = -1.0;
  const auto consider = [&](const Eigen::VectorXd& p) {
    const double obj = sum_log_rate(mu, p, noise_w);
    if (obj > best_obj) {
      best_obj = obj;
      best = p;
    }
  };
  const auto walk = [&](Eigen::VectorXd p) {
    consider(p);
    const double tol = 1e-6 * budget;
    for (int round = 0; round < kMaxRounds; ++round) {
      Eigen::VectorXd next = waterfill(effective_gains(mu, p, noise_w), budget);
      consider(next);
      const double change = (next - p).cwiseAbs().maxCoeff();
      p = std::move(next);
      if (change < tol) break;
    }
  };

  walk(Eigen::VectorXd::Constant(k_users, budget / static_cast<double>(k_users)));
  walk(waterfill(effective_gains(mu, Eigen::VectorXd::Zero(k_users), noise_w), budget));
  return ascend_sum_rate(mu, std::move(best), noise_w, budget);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

enum class LeftoverPolicy { kWaterfill, kEqualSplit };

Eigen::VectorXd reallocate_impl(const Eigen::MatrixXd& mu, double noise_w, double bandwidth_mhz,
                                const DemandProfile& demands, const std::vector<int>& q_fixed,
                                double max_power_w, LeftoverPolicy policy) {
  const Eigen::Index k_users = mu.rows();
  if (mu.cols() != k_users) throw InvalidConfigError("coupling matrix must be square");
  if (max_power_w <= 0) throw InvalidConfigError("max power must be positive");
  if (demands.xi_mbps.size() != k_users) {
    throw InvalidConfigError("demand profile does not match the coupling matrix");
  }

  std::vector<int> pinned = q_fixed;
  std::sort(pinned.begin(), pinned.end());
  pinned.erase(std::unique(pinned.begin(), pinned.end()), pinned.end());
  for (int k : pinned) {
    if (k < 0 || k >= k_users) throw InvalidConfigError("q_fixed index out of range");
  }
  if (pinned.empty()) return sum_rate_allocate(mu, noise_w, max_power_w);

  std::vector<int> free_users;
  for (int k = 0; k < k_users; ++k) {
    if (!std::binary_search(pinned.begin(), pinned.end(), k)) free_users.push_back(k);
  }

  // Restricted target system; constant across rounds, so factor it once.
  const Eigen::Index ns = static_cast<Eigen::Index>(pinned.size());
  Eigen::VectorXd scale(ns);
  Eigen::MatrixXd rq(ns, ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    const int k = pinned[i];
    if (mu(k, k) <= 0) {
      throw DegenerateChannelError("direct gain mu_kk is zero for user " + std::to_string(k));
    }
    const double alpha = std::exp2(demands.xi_mbps(k) / bandwidth_mhz) - 1.0;
    scale(i) = alpha / ((alpha + 1.0) * mu(k, k));
    for (Eigen::Index j = 0; j < ns; ++j) rq(i, j) = scale(i) * mu(k, pinned[j]);
  }

  Eigen::VectorXd p = Eigen::VectorXd::Constant(k_users, max_power_w / k_users);

  if (spectral_radius(rq) >= 1.0 - kRadiusMargin) {
    throw ReallocationInfeasibleError("restricted demand system has spectral radius >= 1",
                                      to_std(p));
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(ns, ns) - rq);

  // (a) pin every user in q_fixed to exact equality given the free powers.
  auto solve_pinned = [&](Eigen::VectorXd& powers) {
    Eigen::VectorXd nu_eff(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
      double outside = noise_w;
      for (int l : free_users) outside += powers(l) * mu(pinned[i], l);
      nu_eff(i) = scale(i) * outside;
    }
    const Eigen::VectorXd ps = lu.solve(nu_eff);
    if (!ps.allFinite()) throw NumericError("pinned power solve produced non-finite values");
    if (ps.sum() > max_power_w) {
      throw ReallocationInfeasibleError("pinned users demand more than the power budget",
                                        to_std(powers));
    }
    for (Eigen::Index i = 0; i < ns; ++i) powers(pinned[i]) = ps(i);
  };

  // (b) spend whatever the pinned users left over on the free users.
  auto distribute_leftover = [&](Eigen::VectorXd& powers) {
    if (free_users.empty()) return;
    double pinned_sum = 0.0;
    for (int k : pinned) pinned_sum += powers(k);
    const double leftover = max_power_w - pinned_sum;
    if (leftover <= 0) {
      for (int k : free_users) powers(k) = 0.0;
      return;
    }
    if (policy == LeftoverPolicy::kEqualSplit) {
      const double share = leftover / static_cast<double>(free_users.size());
      for (int k : free_users) powers(k) = share;
      return;
    }
    // Sum-rate subproblem over the free users with the pinned users'
    // interference folded into per-user noise.
    const Eigen::Index nf = static_cast<Eigen::Index>(free_users.size());
    Eigen::MatrixXd sub(nf, nf);
    Eigen::VectorXd sub_noise(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      const int k = free_users[static_cast<std::size_t>(i)];
      double outside = noise_w;
      for (int l : pinned) outside += powers(l) * mu(k, l);
      sub_noise(i) = outside;
      for (Eigen::Index j = 0; j < nf; ++j) sub(i, j) = mu(k, free_users[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd extra = best_sum_rate_point(sub, sub_noise, leftover);
    for (Eigen::Index i = 0; i < nf; ++i) {
      powers(free_users[static_cast<std::size_t>(i)]) = extra(i);
    }
  };

  const double tol = 1e-6 * max_power_w;
  for (int round = 0; round < kMaxRounds; ++round) {
    const Eigen::VectorXd prev = p;
    solve_pinned(p);
    distribute_leftover(p);
    if ((p - prev).cwiseAbs().maxCoeff() < tol) break;
  }

  // End on a pin step so every fixed rate sits exactly on its target.
  solve_pinned(p);
  if (p.sum() > max_power_w) {
    // Shrink the free users back inside the budget and re-pin: less
    // interference only lowers the pinned powers, so the sum stays inside.
    double pinned_sum = 0.0;
    for (int k : pinned) pinned_sum += p(k);
    const double free_sum = p.sum() - pinned_sum;
    const double factor = (max_power_w - pinned_sum) / free_sum;
    for (int k : free_users) p(k) *= factor;
    solve_pinned(p);
  }
  return p;
}

AllocationResult expand_satisfied_set(const Eigen::MatrixXd& mu, double noise_w,
                                      double bandwidth_mhz, const DemandProfile& demands,
                                      double max_power_w, Method method,
                                      LeftoverPolicy policy) {
  const Eigen::Index k_users = mu.rows();
  AllocationResult result;
  result.method = method;

  const auto all_satisfied = [&](const Eigen::VectorXd& cand) {
    return satisfied_set(cand, mu, noise_w, bandwidth_mhz, demands).size() ==
           static_cast<std::size_t>(k_users);
  };

  const FeasibilityReport report = analyze_feasibility(mu, demands, noise_w, max_power_w);
  if (report.feasible) {
    Eigen::VectorXd p;
    Eigen::VectorXd p_sum;
    if (policy == LeftoverPolicy::kWaterfill) p_sum = sum_rate_allocate(mu, noise_w, max_power_w);
    if (p_sum.size() > 0 && all_satisfied(p_sum)) {
      // The unconstrained optimum already meets every demand, so it solves
      // the demand-constrained problem outright (and ties SumOpt's rate).
      p = p_sum;
    } else {
      p = *report.minimal_powers_w;
      const double leftover = max_power_w - p.sum();
      if (leftover > 0) {
        if (policy == LeftoverPolicy::kEqualSplit) {
          p.array() += leftover / static_cast<double>(k_users);
        } else {
          // Spend the surplus on sum rate, but never let a step break a demand.
          Eigen::VectorXd cand =
              *report.minimal_powers_w + waterfill(effective_gains(mu, p, noise_w), leftover);
          if (all_satisfied(cand)) p = cand;
          cand = *report.minimal_powers_w + waterfill(effective_gains(mu, p, noise_w), leftover);
          if (all_satisfied(cand)) p = std::move(cand);
        }
      }
    }
    result.powers_w = std::move(p);
    result.iterations = 0;
    result.trace.push_back({0, static_cast<int>(k_users),
                            sum_throughput_mbps(result.powers_w, mu, noise_w, bandwidth_mhz)});
    finalize_result(result, mu, noise_w, bandwidth_mhz, demands);
    return result;
  }

  // Congested: start from the unconstrained optimum and grow the set.
  Eigen::VectorXd p = sum_rate_allocate(mu, noise_w, max_power_w);
  std::vector<int> q = satisfied_set(p, mu, noise_w, bandwidth_mhz, demands);
  result.trace.push_back({0, static_cast<int>(q.size()),
                          sum_throughput_mbps(p, mu, noise_w, bandwidth_mhz)});

  int completed = 0;
  int delta = static_cast<int>(q.size());
  while (delta > 0) {
    // Walk the deterministic expansion chain that starts at the current pin
    // set and adopt its best point. Pinned users always stay satisfied, so
    // the next iteration rescans a tail of this same chain; recorded sum
    // rates therefore never increase (Theorem 2) and the adopted allocation
    // is the strongest the expansion can reach from here.
    Eigen::VectorXd best_p;
    double best_rate = -1.0;
    std::vector<int> best_sat;
    std::vector<int> chain = q;
    for (Eigen::Index link = 0; link <= k_users; ++link) {
      Eigen::VectorXd cand;
      try {
        cand = reallocate_impl(mu, noise_w, bandwidth_mhz, demands, chain, max_power_w, policy);
      } catch (const ReallocationInfeasibleError&) {
        break;
      }
      const double rate = sum_throughput_mbps(cand, mu, noise_w, bandwidth_mhz);
      std::vector<int> sat = satisfied_set(cand, mu, noise_w, bandwidth_mhz, demands);
      std::vector<int> grown;
      std::set_union(chain.begin(), chain.end(), sat.begin(), sat.end(),
                     std::back_inserter(grown));
      if (rate > best_rate) {
        best_rate = rate;
        best_p = std::move(cand);
        best_sat = std::move(sat);
      }
      if (grown.size() == chain.size()) break;
      chain = std::move(grown);
    }
    if (best_rate < 0) break;  // infeasible at the first link: keep the previous iterate
    ++completed;
    std::vector<int> merged;
    std::set_union(q.begin(), q.end(), best_sat.begin(), best_sat.end(),
                   std::back_inserter(merged));
    delta = static_cast<int>(merged.size() - q.size());
    p = std::move(best_p);
    q = std::move(merged);
    result.trace.push_back({completed, static_cast<int>(q.size()), best_rate});
  }

  if (policy == LeftoverPolicy::kEqualSplit && q.size() == static_cast<std::size_t>(k_users)) {
    const double leftover = max_power_w - p.sum();
    if (leftover > 0) p.array() += leftover / static_cast<double>(k_users);
  }

  result.powers_w = std::move(p);
  result.iterations = completed;
  finalize_result(result, mu, noise_w, bandwidth_mhz, demands);
  return result;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kJointOpt: return "JointOpt";
    case Method::kSatisSetOpt: return "SatisSetOpt";
    case Method::kSumOpt: return "SumOpt";
    case Method::kEqualPower: return "EqualPower";
    case Method::kLearned: return "Learned";
  }
  throw InvalidConfigError("unknown allocation method");
}

Method method_from_string(const std::string& name) {
  const std::string s = lower(name);
  if (s == "jointopt" || s == "joint") return Method::kJointOpt;
  if (s == "satisset" || s == "satissetopt") return Method::kSatisSetOpt;
  if (s == "sumopt" || s == "sum") return Method::kSumOpt;
  if (s == "equal" || s == "equalpower") return Method::kEqualPower;
  if (s == "learned") return Method::kLearned;
  throw InvalidConfigError("unknown allocation method: " + name);
}

Eigen::VectorXd waterfill(const Eigen::VectorXd& effective_gains, double max_power_w) {
  if (max_power_w <= 0) throw InvalidConfigError("water-filling needs a positive power budget");
  const Eigen::Index k_users = effective_gains.size();
  if (k_users == 0) throw InvalidConfigError("water-filling needs at least one user");
  if ((effective_gains.array() <= 0).any()) {
    throw InvalidConfigError("effective gains must be positive");
  }

  const Eigen::VectorXd inv = effective_gains.cwiseInverse();
  std::vector<int> order(static_cast<std::size_t>(k_users));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return inv(a) < inv(b); });

  std::vector<double> prefix(static_cast<std::size_t>(k_users) + 1, 0.0);
  for (Eigen::Index i = 0; i < k_users; ++i) prefix[i + 1] = prefix[i] + inv(order[i]);

  // Largest active set whose common level clears its worst inverse gain.
  Eigen::Index active = 1;
  double level = max_power_w + inv(order[0]);
  for (Eigen::Index m = k_users; m >= 1; --m) {
    const double candidate = (max_power_w + prefix[m]) / static_cast<double>(m);
    if (candidate > inv(order[m - 1])) {
      active = m;
      level = candidate;
      break;
    }
  }

  Eigen::VectorXd p = Eigen::VectorXd::Zero(k_users);
  for (Eigen::Index i = 0; i < active; ++i) p(order[i]) = level - inv(order[i]);
  return p;
}

Eigen::VectorXd sum_rate_allocate(const Eigen::MatrixXd& mu, double noise_w, double max_power_w) {
  const Eigen::Index k_users = mu.rows();
  if (mu.cols() != k_users || k_users == 0) {
    throw InvalidConfigError("coupling matrix must be square and non-empty");
  }
  if (noise_w <= 0) throw InvalidConfigError("noise power must be positive");
  if (max_power_w <= 0) throw InvalidConfigError("max power must be positive");
  return best_sum_rate_point(mu, Eigen::VectorXd::Constant(k_users, noise_w), max_power_w);
}

Eigen::VectorXd demand_constrained_reallocate(const Eigen::MatrixXd& mu, double noise_w,
                                              double bandwidth_mhz, const DemandProfile& demands,
                                              const std::vector<int>& q_fixed,
                                              double max_power_w) {
  return reallocate_impl(mu, noise_w, bandwidth_mhz, demands, q_fixed, max_power_w,
                         LeftoverPolicy::kWaterfill);
}

AllocationResult joint_optimize(const Eigen::MatrixXd& mu, double noise_w, double bandwidth_mhz,
                                const DemandProfile& demands, double max_power_w) {
  return expand_satisfied_set(mu, noise_w, bandwidth_mhz, demands, max_power_w,
                              Method::kJointOpt, LeftoverPolicy::kWaterfill);
}

AllocationResult satisset_optimize(const Eigen::MatrixXd& mu, double noise_w,
                                   double bandwidth_mhz, const DemandProfile& demands,
                                   double max_power_w) {
  return expand_satisfied_set(mu, noise_w, bandwidth_mhz, demands, max_power_w,
                              Method::kSatisSetOpt, LeftoverPolicy::kEqualSplit);
}

AllocationResult sum_opt(const Eigen::MatrixXd& mu, double noise_w, double max_power_w) {
  AllocationResult result;
  result.method = Method::kSumOpt;
  result.powers_w = sum_rate_allocate(mu, noise_w, max_power_w);
  return result;
}

AllocationResult equal_power(int n_users, double max_power_w) {
  if (n_users <= 0) throw InvalidConfigError("need at least one user");
  if (max_power_w <= 0) throw InvalidConfigError("max power must be positive");
  AllocationResult result;
  result.method = Method::kEqualPower;
  result.powers_w = Eigen::VectorXd::Constant(n_users, max_power_w / n_users);
  return result;
}

void finalize_result(AllocationResult& result, const Eigen::MatrixXd& mu, double noise_w,
                     double bandwidth_mhz, const DemandProfile& demands, double tol_mbps) {
  result.rates_mbps = all_rates_mbps(result.powers_w, mu, noise_w, bandwidth_mhz);
  result.satisfied =
      satisfied_set(result.powers_w, mu, noise_w, bandwidth_mhz, demands, tol_mbps);
}

}  // namespace satpower
