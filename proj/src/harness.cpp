#include "satpower/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "satpower/errors.hpp"
#include "satpower/rng.hpp"

namespace satpower {

namespace {

struct TrialChannel {
  ChannelMatrix channel;
  Eigen::MatrixXd mu;
};

TrialChannel realize_channel(const SystemParams& params, std::uint64_t seed,
                             PrecoderMethod precoder) {
  TrialChannel tc;
  const UserLayout layout = generate_user_layout(params, mix_seed(seed, 1));
  tc.channel = build_channel(params, layout, mix_seed(seed, 2));
  const PrecodingMatrix w =
      precoder == PrecoderMethod::kZf
          ? zf_precoder(tc.channel)
          : rzf_precoder(tc.channel, params.noise_power_w, params.max_power_w);
  tc.mu = coupling_matrix(tc.channel, w);
  return tc;
}

TrialRecord allocate_on(const SystemParams& params, const TrialChannel& tc, int trial,
                        std::uint64_t seed, Method method, PrecoderMethod precoder,
                        double xi_mbps, const MlpModel* model, const NormStats* stats) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = seed;
  rec.method = method;
  rec.precoder = precoder;
  rec.xi_mbps = xi_mbps;

  const DemandProfile demands =
      DemandProfile::uniform(params.n_users, xi_mbps, params.bandwidth_mhz);
  try {
    AllocationResult result;
    const auto t0 = std::chrono::steady_clock::now();
    switch (method) {
      case Method::kJointOpt:
        result = joint_optimize(tc.mu, params.noise_power_w, params.bandwidth_mhz, demands,
                                params.max_power_w);
        break;
      case Method::kSatisSetOpt:
        result = satisset_optimize(tc.mu, params.noise_power_w, params.bandwidth_mhz, demands,
                                   params.max_power_w);
        break;
      case Method::kSumOpt:
        result = sum_opt(tc.mu, params.noise_power_w, params.max_power_w);
        break;
      case Method::kEqualPower:
        result = equal_power(params.n_users, params.max_power_w);
        break;
      case Method::kLearned: {
        if (model == nullptr || stats == nullptr) {
          throw InvalidConfigError("the learned method needs a trained model");
        }
        result.method = Method::kLearned;
        result.powers_w =
            predict_allocation(*model, *stats, channel_features(tc.channel),
                               params.max_power_w);
        break;
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    result.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (result.rates_mbps.size() == 0) {
      finalize_result(result, tc.mu, params.noise_power_w, params.bandwidth_mhz, demands);
    }
    rec.q_size = static_cast<int>(result.satisfied.size());
    rec.sum_mbps = result.rates_mbps.sum();
    rec.time_ms = result.wall_time_ms;
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.congested = rec.q_size < params.n_users;
  return rec;
}

}  // namespace

TrialRecord run_trial(const SystemParams& params, std::uint64_t seed, Method method,
                      PrecoderMethod precoder, double xi_mbps, const MlpModel* model,
                      const NormStats* stats) {
  params.validate();
  const TrialChannel tc = realize_channel(params, seed, precoder);
  return allocate_on(params, tc, 0, seed, method, precoder, xi_mbps, model, stats);
}

CampaignResult run_campaign(const CampaignConfig& config) {
  config.params.validate();
  if (config.n_trials < 1) throw InvalidConfigError("need at least one trial");
  if (config.xi_sweep_mbps.empty() || config.methods.empty() || config.precoders.empty()) {
    throw InvalidConfigError("campaign sweep, methods, and precoders must be non-empty");
  }
  const bool wants_learned =
      std::find(config.methods.begin(), config.methods.end(), Method::kLearned) !=
      config.methods.end();
  if (wants_learned && (config.model == nullptr || config.stats == nullptr)) {
    throw InvalidConfigError("the learned method needs a trained model");
  }

  CampaignResult out;
  for (int t = 0; t < config.n_trials; ++t) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(t);
    for (PrecoderMethod precoder : config.precoders) {
      const TrialChannel tc = realize_channel(config.params, seed, precoder);
      for (double xi : config.xi_sweep_mbps) {
        for (Method method : config.methods) {
          out.records.push_back(allocate_on(config.params, tc, t, seed, method, precoder, xi,
                                            config.model, config.stats));
        }
      }
    }
  }

  for (Method method : config.methods) {
    for (PrecoderMethod precoder : config.precoders) {
      for (double xi : config.xi_sweep_mbps) {
        MetricsRow row;
        row.method = method;
        row.precoder = precoder;
        row.xi_mbps = xi;
        for (const TrialRecord& rec : out.records) {
          if (rec.method != method || rec.precoder != precoder || rec.xi_mbps != xi) continue;
          ++row.n_trials;
          if (rec.failed) ++row.n_failed;
          row.congestion_prob += rec.congested ? 1.0 : 0.0;
          row.satisfaction_prob += static_cast<double>(rec.q_size);
          row.sum_mbps += rec.sum_mbps;
          row.time_ms += rec.time_ms;
        }
        const double n = static_cast<double>(row.n_trials);
        row.congestion_prob /= n;
        row.satisfaction_prob /= n * config.params.n_users;
        row.sum_mbps /= n;
        row.time_ms /= n;
        out.table.rows.push_back(row);
      }
    }
  }
  return out;
}

void emit_csv(const MetricsTable& table, const std::string& path, bool zero_time) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open CSV for writing: " + path);
  out << "method,precoder,xi_mbps,congestion_prob,satisfaction_prob,sum_mbps,time_ms\n";
  char line[256];
  for (const MetricsRow& row : table.rows) {
    std::snprintf(line, sizeof(line), "%s,%s,%g,%.6f,%.6f,%.6f,%.6f\n",
                  to_string(row.method).c_str(), to_string(row.precoder).c_str(), row.xi_mbps,
                  row.congestion_prob, row.satisfaction_prob, row.sum_mbps,
                  zero_time ? 0.0 : row.time_ms);
    out << line;
  }
  if (!out) throw IoError("failed writing CSV: " + path);
}

void emit_trace_csv(const std::vector<TraceEntry>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open CSV for writing: " + path);
  out << "n,q_size,sum_rate_mbps\n";
  char line[128];
  for (const TraceEntry& e : trace) {
    std::snprintf(line, sizeof(line), "%d,%d,%.6f\n", e.n, e.q_size, e.sum_rate_mbps);
    out << line;
  }
  if (!out) throw IoError("failed writing CSV: " + path);
}

}  // namespace satpower
