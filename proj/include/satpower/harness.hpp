#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satpower/allocators.hpp"
#include "satpower/config.hpp"
#include "satpower/learned.hpp"
#include "satpower/precoding.hpp"

namespace satpower {

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  Method method = Method::kJointOpt;
  PrecoderMethod precoder = PrecoderMethod::kZf;
  double xi_mbps = 0.0;
  int q_size = 0;
  bool congested = false;  // q_size < K
  double sum_mbps = 0.0;
  double time_ms = 0.0;
  bool failed = false;  // allocator threw; kept in the denominator
  std::string error;
};

struct MetricsRow {
  Method method = Method::kJointOpt;
  PrecoderMethod precoder = PrecoderMethod::kZf;
  double xi_mbps = 0.0;
  double congestion_prob = 0.0;
  double satisfaction_prob = 0.0;  // mean |Q| / K
  double sum_mbps = 0.0;
  double time_ms = 0.0;
  int n_trials = 0;
  int n_failed = 0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
};

struct CampaignConfig {
  SystemParams params;
  int n_trials = 500;
  std::vector<double> xi_sweep_mbps{100, 250, 400, 500, 650, 800};
  std::vector<Method> methods{Method::kJointOpt, Method::kSatisSetOpt, Method::kSumOpt,
                              Method::kEqualPower};
  std::vector<PrecoderMethod> precoders{PrecoderMethod::kRzf};
  std::uint64_t base_seed = 1;
  const MlpModel* model = nullptr;  // required when methods contains kLearned
  const NormStats* stats = nullptr;
};

struct CampaignResult {
  MetricsTable table;
  std::vector<TrialRecord> records;
};

/// One layout + channel + precoder + allocation; the wall clock runs around
/// the allocator call only.
TrialRecord run_trial(const SystemParams& params, std::uint64_t seed, Method method,
                      PrecoderMethod precoder, double xi_mbps, const MlpModel* model = nullptr,
                      const NormStats* stats = nullptr);

/// Paired Monte Carlo sweep: every method and demand level sees the same
/// channel within a trial; trial seeds are base_seed + trial index.
CampaignResult run_campaign(const CampaignConfig& config);

/// Fixed column order: method, precoder, xi_mbps, congestion_prob,
/// satisfaction_prob, sum_mbps, time_ms.  Probabilities use 6 decimals.
/// zero_time writes 0 in time_ms so repeated runs are byte-identical.
void emit_csv(const MetricsTable& table, const std::string& path, bool zero_time = false);

void emit_trace_csv(const std::vector<TraceEntry>& trace, const std::string& path);

}  // namespace satpower
