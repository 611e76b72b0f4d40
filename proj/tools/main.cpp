#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "satpower/allocators.hpp"
#include "satpower/config.hpp"
#include "satpower/errors.hpp"
#include "satpower/feasibility.hpp"
#include "satpower/harness.hpp"
#include "satpower/io.hpp"
#include "satpower/learned.hpp"
#include "satpower/link_metrics.hpp"
#include "satpower/precoding.hpp"
#include "satpower/rng.hpp"
#include "satpower/scenario.hpp"

namespace {

using namespace satpower;

SystemParams load_or_default(const std::string& path) {
  if (path.empty()) return SystemParams{};
  return load_params(path);
}

DemandProfile demands_from_list(const std::vector<double>& xi, int n_users,
                                double bandwidth_mhz) {
  if (xi.size() == 1) return DemandProfile::uniform(n_users, xi[0], bandwidth_mhz);
  if (static_cast<int>(xi.size()) != n_users) {
    throw InvalidConfigError("demand list must have one entry or one entry per user");
  }
  Eigen::VectorXd v(n_users);
  for (int k = 0; k < n_users; ++k) v(k) = xi[k];
  return DemandProfile::from_xi(std::move(v), bandwidth_mhz);
}

void print_vector(const char* name, const Eigen::VectorXd& v) {
  std::printf("%s", name);
  for (Eigen::Index i = 0; i < v.size(); ++i) std::printf(" %.10g", v(i));
  std::printf("\n");
}

void print_allocation(const AllocationResult& result) {
  std::printf("method %s\n", to_string(result.method).c_str());
  std::printf("iterations %d\n", result.iterations);
  std::printf("q_size %zu\n", result.satisfied.size());
  std::printf("satisfied");
  for (int k : result.satisfied) std::printf(" %d", k);
  std::printf("\n");
  print_vector("powers_w", result.powers_w);
  print_vector("rates_mbps", result.rates_mbps);
  std::printf("sum_power_w %.10g\n", result.powers_w.sum());
  std::printf("sum_rate_mbps %.10g\n", result.rates_mbps.sum());
  std::printf("wall_time_ms %.6f\n", result.wall_time_ms);
}

std::pair<UserLayout, ChannelMatrix> realize(const SystemParams& params, std::uint64_t seed) {
  UserLayout layout = generate_user_layout(params, mix_seed(seed, 1));
  ChannelMatrix channel = build_channel(params, layout, mix_seed(seed, 2));
  return {std::move(layout), std::move(channel)};
}

PrecodingMatrix make_precoder(const ChannelMatrix& channel, PrecoderMethod method,
                              const SystemParams& params) {
  return method == PrecoderMethod::kZf
             ? zf_precoder(channel)
             : rzf_precoder(channel, params.noise_power_w, params.max_power_w);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names, bool have_model) {
  std::vector<Method> methods;
  for (const std::string& name : names) {
    if (name == "all") {
      methods.insert(methods.end(), {Method::kJointOpt, Method::kSatisSetOpt, Method::kSumOpt,
                                     Method::kEqualPower});
      if (have_model) methods.push_back(Method::kLearned);
    } else {
      methods.push_back(method_from_string(name));
    }
  }
  return methods;
}

// Paired per-trial invariants; returns the number of violations found.
int verify_campaign(const CampaignResult& result, const SystemParams& params) {
  int violations = 0;
  for (const TrialRecord& rec : result.records) {
    if (rec.q_size < 0 || rec.q_size > params.n_users) {
      std::fprintf(stderr, "invariant violation: trial %d has |Q| = %d\n", rec.trial,
                   rec.q_size);
      ++violations;
    }
    if (rec.congested != (rec.q_size < params.n_users)) {
      std::fprintf(stderr, "invariant violation: trial %d congestion flag mismatch\n",
                   rec.trial);
      ++violations;
    }
  }

  std::map<std::tuple<int, int, double>, const TrialRecord*> joint, sum;
  for (const TrialRecord& rec : result.records) {
    if (rec.failed) continue;
    const auto key = std::make_tuple(rec.trial, static_cast<int>(rec.precoder), rec.xi_mbps);
    if (rec.method == Method::kJointOpt) joint[key] = &rec;
    if (rec.method == Method::kSumOpt) sum[key] = &rec;
  }
  for (const auto& [key, j] : joint) {
    const auto it = sum.find(key);
    if (it == sum.end()) continue;
    const TrialRecord* s = it->second;
    if (j->q_size < s->q_size) {
      std::fprintf(stderr,
                   "invariant violation: trial %d xi %g: |Q|(JointOpt)=%d < |Q|(SumOpt)=%d\n",
                   j->trial, j->xi_mbps, j->q_size, s->q_size);
      ++violations;
    }
    if (s->sum_mbps < j->sum_mbps * (1.0 - 1e-9)) {
      std::fprintf(stderr,
                   "invariant violation: trial %d xi %g: sum rate SumOpt %.6f < JointOpt %.6f\n",
                   j->trial, j->xi_mbps, s->sum_mbps, j->sum_mbps);
      ++violations;
    }
  }
  return violations;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"downlink power allocation for a multi-beam GEO satellite"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "system parameter file (INI)")->capture_default_str();

  // scenario dump
  auto* scenario_cmd = app.add_subcommand("scenario", "channel generation");
  scenario_cmd->require_subcommand(1);
  auto* dump_cmd = scenario_cmd->add_subcommand("dump", "write one channel realization as CSV");
  std::uint64_t dump_seed = 0;
  bool dump_seed_set = false;
  std::string dump_out = "channel.csv";
  std::string dump_layout_out;
  dump_cmd->add_option("--seed", dump_seed, "trial seed (default: rng_seed from config)")
      ->each([&](const std::string&) { dump_seed_set = true; });
  dump_cmd->add_option("--out", dump_out, "channel CSV path")->capture_default_str();
  dump_cmd->add_option("--layout-out", dump_layout_out, "optional layout CSV path");

  // precode
  auto* precode_cmd = app.add_subcommand("precode", "compute the coupling matrix");
  std::string precode_method = "rzf";
  std::string precode_channel = "channel.csv";
  std::string precode_out = "coupling.csv";
  precode_cmd->add_option("--method", precode_method, "zf|rzf")->capture_default_str();
  precode_cmd->add_option("--channel", precode_channel, "channel CSV path")
      ->capture_default_str();
  precode_cmd->add_option("--out", precode_out, "coupling CSV path")->capture_default_str();

  // feasibility
  auto* feas_cmd = app.add_subcommand("feasibility", "Theorem-1 admission test");
  std::string feas_coupling = "coupling.csv";
  std::vector<double> feas_xi{500.0};
  bool feas_json = false;
  feas_cmd->add_option("--coupling", feas_coupling, "coupling CSV path")->capture_default_str();
  feas_cmd->add_option("--xi", feas_xi, "demand(s) in Mbps, one value or one per user")
      ->delimiter(',')
      ->capture_default_str();
  feas_cmd->add_flag("--json", feas_json, "print the report as JSON");

  // allocate
  auto* alloc_cmd = app.add_subcommand("allocate", "run one allocator on a fresh channel");
  std::string alloc_method = "jointopt";
  std::string alloc_precoder = "rzf";
  std::vector<double> alloc_xi{500.0};
  std::uint64_t alloc_seed = 0;
  bool alloc_seed_set = false;
  std::string alloc_trace_out;
  alloc_cmd->add_option("--method", alloc_method, "jointopt|satisset|sumopt|equal")
      ->capture_default_str();
  alloc_cmd->add_option("--precoder", alloc_precoder, "zf|rzf")->capture_default_str();
  alloc_cmd->add_option("--xi", alloc_xi, "demand(s) in Mbps")->delimiter(',')
      ->capture_default_str();
  alloc_cmd->add_option("--seed", alloc_seed, "trial seed (default: rng_seed from config)")
      ->each([&](const std::string&) { alloc_seed_set = true; });
  alloc_cmd->add_option("--trace-out", alloc_trace_out, "write the iteration trace as CSV");

  // train
  auto* train_cmd = app.add_subcommand("train", "build a dataset and train the surrogate");
  int train_samples = 25000;
  int train_test = 10000;
  std::string train_precoder = "rzf";
  std::vector<double> train_xi{500.0};
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  int train_epochs = 200;
  std::string train_out = "model.txt";
  std::string train_curve_out;
  train_cmd->add_option("--samples", train_samples, "training trials")->capture_default_str();
  train_cmd->add_option("--test", train_test, "test trials")->capture_default_str();
  train_cmd->add_option("--precoder", train_precoder, "zf|rzf")->capture_default_str();
  train_cmd->add_option("--xi", train_xi, "demand(s) in Mbps")->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--seed", train_seed, "dataset/init seed")
      ->each([&](const std::string&) { train_seed_set = true; });
  train_cmd->add_option("--epochs", train_epochs, "max training epochs")->capture_default_str();
  train_cmd->add_option("--out", train_out, "model file path")->capture_default_str();
  train_cmd->add_option("--curve-out", train_curve_out, "per-epoch MSE CSV path");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict powers for a dumped channel");
  std::string predict_model = "model.txt";
  std::string predict_channel = "channel.csv";
  predict_cmd->add_option("--model", predict_model, "model file path")->capture_default_str();
  predict_cmd->add_option("--channel", predict_channel, "channel CSV path")
      ->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo metrics campaign");
  int bench_trials = 500;
  std::vector<double> bench_xi{100, 250, 400, 500, 650, 800};
  std::vector<std::string> bench_methods{"all"};
  std::vector<std::string> bench_precoders{"rzf"};
  std::string bench_out = "results.csv";
  std::uint64_t bench_seed = 0;
  bool bench_seed_set = false;
  bool bench_zero_time = false;
  std::string bench_model;
  bench_cmd->add_option("--trials", bench_trials, "trials per sweep point")
      ->capture_default_str();
  bench_cmd->add_option("--xi", bench_xi, "demand sweep in Mbps")->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--methods", bench_methods, "all or a comma list")->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--precoder", bench_precoders, "zf,rzf")->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "metrics CSV path")->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "base seed (default: rng_seed from config)")
      ->each([&](const std::string&) { bench_seed_set = true; });
  bench_cmd->add_flag("--zero-time", bench_zero_time,
                      "write 0 in time_ms for byte-reproducible output");
  bench_cmd->add_option("--model", bench_model, "trained model for the learned method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const SystemParams params = load_or_default(config_path);
    params.validate();

    if (dump_cmd->parsed()) {
      const std::uint64_t seed = dump_seed_set ? dump_seed : params.rng_seed;
      const auto [layout, channel] = realize(params, seed);
      write_channel_csv(channel, dump_out);
      if (!dump_layout_out.empty()) write_layout_csv(layout, dump_layout_out);
      std::printf("wrote %s (%d beams x %d users, seed %llu)\n", dump_out.c_str(),
                  params.n_beams, params.n_users, static_cast<unsigned long long>(seed));
    } else if (precode_cmd->parsed()) {
      const ChannelMatrix channel = read_channel_csv(precode_channel);
      const PrecodingMatrix w =
          make_precoder(channel, precoder_from_string(precode_method), params);
      write_coupling_csv(coupling_matrix(channel, w), precode_out);
      std::printf("wrote %s\n", precode_out.c_str());
    } else if (feas_cmd->parsed()) {
      const Eigen::MatrixXd mu = read_coupling_csv(feas_coupling);
      const DemandProfile demands =
          demands_from_list(feas_xi, static_cast<int>(mu.rows()), params.bandwidth_mhz);
      const FeasibilityReport report =
          analyze_feasibility(mu, demands, params.noise_power_w, params.max_power_w);
      if (feas_json) {
        nlohmann::json j;
        j["spectral_radius"] = report.spectral_radius;
        j["feasible"] = report.feasible;
        j["required_power_w"] = report.required_power_w;
        j["power_lower_bound_w"] = report.power_lower_bound_w;
        j["max_power_w"] = params.max_power_w;
        if (report.minimal_powers_w) {
          j["minimal_powers_w"] = std::vector<double>(
              report.minimal_powers_w->data(),
              report.minimal_powers_w->data() + report.minimal_powers_w->size());
        }
        std::printf("%s\n", j.dump(2).c_str());
      } else {
        std::printf("spectral_radius %.10g\n", report.spectral_radius);
        std::printf("feasible %s\n", report.feasible ? "true" : "false");
        std::printf("required_power_w %.10g\n", report.required_power_w);
        std::printf("power_lower_bound_w %.10g\n", report.power_lower_bound_w);
        std::printf("max_power_w %.10g\n", params.max_power_w);
        if (report.minimal_powers_w) print_vector("minimal_powers_w", *report.minimal_powers_w);
      }
    } else if (alloc_cmd->parsed()) {
      const std::uint64_t seed = alloc_seed_set ? alloc_seed : params.rng_seed;
      const auto [layout, channel] = realize(params, seed);
      const PrecodingMatrix w =
          make_precoder(channel, precoder_from_string(alloc_precoder), params);
      const Eigen::MatrixXd mu = coupling_matrix(channel, w);
      const DemandProfile demands =
          demands_from_list(alloc_xi, params.n_users, params.bandwidth_mhz);

      AllocationResult result;
      const Method method = method_from_string(alloc_method);
      const auto t0 = std::chrono::steady_clock::now();
      switch (method) {
        case Method::kJointOpt:
          result = joint_optimize(mu, params.noise_power_w, params.bandwidth_mhz, demands,
                                  params.max_power_w);
          break;
        case Method::kSatisSetOpt:
          result = satisset_optimize(mu, params.noise_power_w, params.bandwidth_mhz, demands,
                                     params.max_power_w);
          break;
        case Method::kSumOpt:
          result = sum_opt(mu, params.noise_power_w, params.max_power_w);
          break;
        case Method::kEqualPower:
          result = equal_power(params.n_users, params.max_power_w);
          break;
        case Method::kLearned:
          throw InvalidConfigError("use 'predict' for the learned allocator");
      }
      if (result.rates_mbps.size() == 0) {
        finalize_result(result, mu, params.noise_power_w, params.bandwidth_mhz, demands);
      }
      const auto t1 = std::chrono::steady_clock::now();
      result.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      print_allocation(result);
      if (!alloc_trace_out.empty()) emit_trace_csv(result.trace, alloc_trace_out);
    } else if (train_cmd->parsed()) {
      const std::uint64_t seed = train_seed_set ? train_seed : params.rng_seed;
      const DemandProfile demands =
          demands_from_list(train_xi, params.n_users, params.bandwidth_mhz);
      const PrecoderMethod precoder = precoder_from_string(train_precoder);
      std::printf("building dataset: %d train + %d test trials\n", train_samples, train_test);
      const Dataset ds =
          build_dataset(params, demands, precoder, train_samples, train_test, seed);
      const NormStats stats = fit_normalization(ds.train_x, ds.train_p);

      MlpModel model = make_mlp({params.n_beams * params.n_users, 128, 64, params.n_users},
                                mix_seed(seed, 3));
      TrainOptions options;
      options.max_epochs = train_epochs;
      options.seed = mix_seed(seed, 4);
      const LossCurve curve = train(model, normalize_features_batch(ds.train_x, stats),
                                    normalize_labels_batch(ds.train_p, stats), options);

      const double test_mse = mse_loss(
          mlp_forward_batch(model, normalize_features_batch(ds.test_x, stats)),
          normalize_labels_batch(ds.test_p, stats));
      std::printf("epochs %zu best_epoch %d\n", curve.train_mse.size() - 1, curve.best_epoch);
      std::printf("train_mse_first %.6e train_mse_last %.6e\n", curve.train_mse.front(),
                  curve.train_mse.back());
      std::printf("test_mse %.6e\n", test_mse);
      save_model(train_out, model, stats);
      std::printf("wrote %s\n", train_out.c_str());
      if (!train_curve_out.empty()) {
        std::ofstream out(train_curve_out);
        if (!out) throw IoError("cannot open CSV for writing: " + train_curve_out);
        out << "epoch,train_mse,val_mse\n";
        for (std::size_t e = 0; e < curve.train_mse.size(); ++e) {
          out << e << ',' << curve.train_mse[e] << ',' << curve.val_mse[e] << '\n';
        }
      }
    } else if (predict_cmd->parsed()) {
      const auto [model, stats] = load_model(predict_model);
      const ChannelMatrix channel = read_channel_csv(predict_channel);
      const Eigen::VectorXd powers =
          predict_allocation(model, stats, channel_features(channel), params.max_power_w);
      print_vector("powers_w", powers);
      std::printf("sum_power_w %.10g\n", powers.sum());
    } else if (bench_cmd->parsed()) {
      CampaignConfig config;
      config.params = params;
      config.n_trials = bench_trials;
      config.xi_sweep_mbps = bench_xi;
      config.precoders.clear();
      for (const std::string& name : bench_precoders) {
        config.precoders.push_back(precoder_from_string(name));
      }
      config.base_seed = bench_seed_set ? bench_seed : params.rng_seed;

      MlpModel model;
      NormStats stats;
      if (!bench_model.empty()) {
        std::tie(model, stats) = load_model(bench_model);
        config.model = &model;
        config.stats = &stats;
      }
      config.methods = parse_methods(bench_methods, !bench_model.empty());

      const CampaignResult result = run_campaign(config);
      emit_csv(result.table, bench_out, bench_zero_time);
      std::printf("wrote %s (%zu rows, %zu trial records)\n", bench_out.c_str(),
                  result.table.rows.size(), result.records.size());
      const int violations = verify_campaign(result, params);
      if (violations > 0) {
        std::fprintf(stderr, "%d invariant violation(s)\n", violations);
        return 1;
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
