#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "satpower/errors.hpp"
#include "satpower/feasibility.hpp"
#include "satpower/rng.hpp"

using namespace satpower;
using satpower::testing::pipeline_coupling;

TEST_SUITE("feasibility") {

TEST_CASE("qos targets match the closed form") {
  Eigen::VectorXd xi(3);
  xi << 500.0, 250.0, 0.0;
  const Eigen::VectorXd alpha = qos_to_sinr_targets(xi, 500.0);
  CHECK(alpha(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(alpha(1) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(alpha(2) == 0.0);
  CHECK_THROWS_AS(qos_to_sinr_targets(xi, 0.0), InvalidConfigError);
}

TEST_CASE("r and nu substitute straight into theorem 1") {
  Eigen::MatrixXd mu(2, 2);
  mu << 1.0, 0.1, 0.1, 1.0;
  const Eigen::VectorXd alpha = Eigen::VectorXd::Ones(2);
  const TargetSystem sys = build_r_nu(alpha, mu, 1.0);
  CHECK(sys.r(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sys.r(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sys.r(0, 1) == 0.0);
  CHECK(sys.nu(0) == doctest::Approx(0.5).epsilon(1e-15));

  const Eigen::MatrixXd rq = sys.r * mu;
  CHECK(rq(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rq(0, 1) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(rq(1, 0) == doctest::Approx(0.05).epsilon(1e-15));

  Eigen::VectorXd off = alpha;
  off(0) = 0.0;
  const TargetSystem z = build_r_nu(off, mu, 1.0);
  CHECK(z.r.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.nu(0) == 0.0);

  Eigen::MatrixXd degenerate = mu;
  degenerate(1, 1) = 0.0;
  CHECK_THROWS_AS(build_r_nu(alpha, degenerate, 1.0), DegenerateChannelError);
}

TEST_CASE("spectral radius: diagonal, symmetric pair, eigensolver oracle") {
  Eigen::VectorXd d(3);
  d << 0.3, 0.9, 0.1;
  CHECK(spectral_radius(Eigen::MatrixXd(d.asDiagonal())) == doctest::Approx(0.9).epsilon(1e-10));

  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.05, 0.05, 0.5;
  CHECK(spectral_radius(m) == doctest::Approx(0.55).epsilon(1e-10));

  Rng rng(5);
  Eigen::MatrixXd big(5, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) big(r, c) = rng.uniform();
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(big);
  const double oracle = solver.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(spectral_radius(big) == doctest::Approx(oracle).epsilon(1e-8));

  Eigen::MatrixXd neg(2, 2);
  neg << 1.0, -0.1, 0.0, 1.0;
  CHECK_THROWS_AS(spectral_radius(neg), InvalidConfigError);
}

TEST_CASE("scalar case: geometric series with corollary equality") {
  Eigen::MatrixXd mu(1, 1);
  mu << 1.0;
  const DemandProfile demands = DemandProfile::uniform(1, 500.0, 500.0);  // alpha = 1
  const FeasibilityReport hi = analyze_feasibility(mu, demands, 1.0, 1.1);
  CHECK(hi.spectral_radius == doctest::Approx(0.5).epsilon(1e-10));
  REQUIRE(hi.minimal_powers_w.has_value());
  CHECK((*hi.minimal_powers_w)(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hi.required_power_w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hi.feasible);
  CHECK(hi.power_lower_bound_w == doctest::Approx(hi.required_power_w).epsilon(1e-9));

  const FeasibilityReport lo = analyze_feasibility(mu, demands, 1.0, 0.9);
  CHECK_FALSE(lo.feasible);
  CHECK(lo.minimal_powers_w.has_value());  // radius < 1, only the budget fails
}

TEST_CASE("two-user hand instance: minimal powers, required power, bound") {
  Eigen::MatrixXd mu(2, 2);
  mu << 1.0, 0.1, 0.1, 1.0;
  const DemandProfile demands = DemandProfile::uniform(2, 500.0, 500.0);
  const FeasibilityReport rep = analyze_feasibility(mu, demands, 1.0, 10.0);
  CHECK(rep.spectral_radius == doctest::Approx(0.55).epsilon(1e-10));
  REQUIRE(rep.minimal_powers_w.has_value());
  CHECK((*rep.minimal_powers_w)(0) == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
  CHECK((*rep.minimal_powers_w)(1) == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
  CHECK(rep.required_power_w == doctest::Approx(20.0 / 9.0).epsilon(1e-12));
  CHECK(rep.required_power_w ==
        doctest::Approx(rep.minimal_powers_w->sum()).epsilon(1e-9));
  CHECK(rep.power_lower_bound_w == doctest::Approx(1.0 / 0.55).epsilon(1e-9));
  CHECK(rep.power_lower_bound_w <= rep.required_power_w);
  CHECK(rep.feasible);

  // Independent fixed-point oracle p <- RQ p + nu.
  const TargetSystem sys = build_r_nu(demands.alpha, mu, 1.0);
  const Eigen::MatrixXd rq = sys.r * mu;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  for (int t = 0; t < 300; ++t) p = rq * p + sys.nu;
  CHECK((p - *rep.minimal_powers_w).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("radius at one is infeasible with no minimal powers") {
  Eigen::MatrixXd mu(2, 2);
  mu << 1.0, 1.0, 1.0, 1.0;  // RQ = [[.5,.5],[.5,.5]], radius exactly 1
  const DemandProfile demands = DemandProfile::uniform(2, 500.0, 500.0);
  const FeasibilityReport rep = analyze_feasibility(mu, demands, 1.0, 100.0);
  CHECK(rep.spectral_radius >= 1.0 - 1e-10);
  CHECK_FALSE(rep.feasible);
  CHECK_FALSE(rep.minimal_powers_w.has_value());
  CHECK(std::isinf(rep.required_power_w));
}

TEST_CASE("oracle equivalence and demand exactness on pipeline instances") {
  SystemParams params;
  int feasible_count = 0;
  for (int i = 0; i < 60; ++i) {
    const PrecoderMethod prec = (i % 2 == 0) ? PrecoderMethod::kZf : PrecoderMethod::kRzf;
    const Eigen::MatrixXd mu = pipeline_coupling(params, 400 + i, prec);
    const double xi = (i % 4 < 2) ? 250.0 : 500.0;
    const DemandProfile demands = DemandProfile::uniform(7, xi, params.bandwidth_mhz);
    const FeasibilityReport rep =
        analyze_feasibility(mu, demands, params.noise_power_w, params.max_power_w);

    const TargetSystem sys = build_r_nu(demands.alpha, mu, params.noise_power_w);
    const Eigen::MatrixXd rq = sys.r * mu;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(7);
    bool converged = false;  // step below 1e-8 within the iteration budget
    for (int t = 0; t < 10000; ++t) {
      const Eigen::VectorXd next = rq * p + sys.nu;
      const double step = (next - p).cwiseAbs().maxCoeff();
      p = next;
      if (step <= 1e-8) converged = true;
      // once detected, keep contracting so p is the fixed point itself
      if (step <= 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff())) break;
      if (!p.allFinite() || p.cwiseAbs().maxCoeff() > 1e12) break;
    }
    CHECK(converged == (rep.spectral_radius < 1.0));
    if (!converged) continue;

    REQUIRE(rep.minimal_powers_w.has_value());
    CHECK((p - *rep.minimal_powers_w).cwiseAbs().maxCoeff() <=
          1e-8 * std::max(1.0, rep.minimal_powers_w->cwiseAbs().maxCoeff()));
    const Eigen::VectorXd rates =
        all_rates_mbps(*rep.minimal_powers_w, mu, params.noise_power_w, params.bandwidth_mhz);
    for (int k = 0; k < 7; ++k) CHECK(std::abs(rates(k) - xi) <= 1e-6);
    CHECK(rep.power_lower_bound_w <= rep.required_power_w * (1.0 + 1e-12));
    if (rep.feasible) ++feasible_count;
  }
  CHECK(feasible_count > 0);  // the sweep must exercise the feasible branch
}

TEST_CASE("raising a demand never lowers the radius or required power") {
  SystemParams params;
  const Eigen::MatrixXd mu = pipeline_coupling(params, 500, PrecoderMethod::kRzf);
  Eigen::VectorXd xi = Eigen::VectorXd::Constant(7, 200.0);
  double prev_radius = 0.0;
  double prev_required = 0.0;
  for (int step = 0; step < 6; ++step) {
    xi(3) = 200.0 + 100.0 * step;
    const DemandProfile demands = DemandProfile::from_xi(xi, params.bandwidth_mhz);
    const FeasibilityReport rep = analyze_feasibility(mu, demands, 1.0, params.max_power_w);
    CHECK(rep.spectral_radius >= prev_radius - 1e-12);
    if (rep.minimal_powers_w.has_value()) {
      CHECK(rep.required_power_w >= prev_required - 1e-9);
      prev_required = rep.required_power_w;
    }
    prev_radius = rep.spectral_radius;
  }
}

}  // TEST_SUITE
