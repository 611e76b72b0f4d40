#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "satpower/config.hpp"
#include "satpower/precoding.hpp"
#include "satpower/rng.hpp"
#include "satpower/scenario.hpp"

namespace satpower::testing {

// One coupling matrix from the real layout -> channel -> precoder pipeline.
inline Eigen::MatrixXd pipeline_coupling(const SystemParams& params, std::uint64_t seed,
                                         PrecoderMethod method) {
  const UserLayout layout = generate_user_layout(params, mix_seed(seed, 1));
  const ChannelMatrix channel = build_channel(params, layout, mix_seed(seed, 2));
  const PrecodingMatrix w = method == PrecoderMethod::kZf
                                ? zf_precoder(channel)
                                : rzf_precoder(channel, params.noise_power_w, params.max_power_w);
  return coupling_matrix(channel, w);
}

inline ChannelMatrix pipeline_channel(const SystemParams& params, std::uint64_t seed) {
  const UserLayout layout = generate_user_layout(params, mix_seed(seed, 1));
  return build_channel(params, layout, mix_seed(seed, 2));
}

}  // namespace satpower::testing
