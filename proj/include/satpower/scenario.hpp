#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "satpower/config.hpp"

namespace satpower {

/// User drop geometry: angular offsets to every beam boresight plus slant range.
struct UserLayout {
  Eigen::MatrixXd offset_deg;  // K x N, offset from user k to boresight of beam n
  Eigen::VectorXd slant_km;    // K, satellite-to-user distance
};

/// Propagation matrix of the forward link.  Column k is the channel of user k.
struct ChannelMatrix {
  Eigen::MatrixXcd h;         // N x K, h = amplitude .* exp(j*phase) per column
  Eigen::MatrixXd amplitude;  // N x K, nonnegative
  Eigen::VectorXd phase_rad;  // K, one residual payload phase per user
};

/// Boresight directions of a hexagonal beam grid, in an angular plane at the
/// satellite (degrees off nadir along two axes).  Beam 0 is the nadir beam,
/// beams 1..6 the first ring, then outward ring by ring.
std::vector<Eigen::Vector2d> beam_centers_deg(const SystemParams& params);

/// Gaussian beam pattern: peak gain at boresight, exactly half power at the
/// 3 dB half-width.  The beam index is part of the interface so a measured
/// per-beam pattern can slot in; the parametric model is beam-independent.
double beam_gain(const SystemParams& params, int beam, double offset_deg);

/// Spherical-Earth slant range for a given off-nadir angle at a GEO satellite.
double slant_range_km(const SystemParams& params, double offnadir_deg);

/// Drops one user uniformly at random inside each beam's 3 dB footprint.
UserLayout generate_user_layout(const SystemParams& params, std::uint64_t seed);

/// Link-budget amplitudes (noise-normalized) and random payload phases.
ChannelMatrix build_channel(const SystemParams& params, const UserLayout& layout,
                            std::uint64_t seed);

}  // namespace satpower
