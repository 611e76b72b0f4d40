#include "satpower/scenario.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "satpower/errors.hpp"
#include "satpower/rng.hpp"

namespace satpower {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
}  // namespace

std::vector<Eigen::Vector2d> beam_centers_deg(const SystemParams& params) {
  const double s = params.beam_center_spacing_deg;
  std::vector<Eigen::Vector2d> centers;
  centers.emplace_back(0.0, 0.0);
  // Hex rings: ring r holds 6*r beams at radius r*s, walked edge by edge.
  for (int ring = 1; static_cast<int>(centers.size()) < params.n_beams; ++ring) {
    Eigen::Vector2d pos(ring * s, 0.0);
    for (int side = 0; side < 6; ++side) {
      const double step_angle = (120.0 + 60.0 * side) * kDegToRad;
      const Eigen::Vector2d step(s * std::cos(step_angle), s * std::sin(step_angle));
      for (int i = 0; i < ring; ++i) {
        if (static_cast<int>(centers.size()) >= params.n_beams) break;
        centers.push_back(pos);
        pos += step;
      }
    }
  }
  return centers;
}

double beam_gain(const SystemParams& params, int /*beam*/, double offset_deg) {
  const double u = offset_deg / params.beam_3db_halfwidth_deg;
  return params.beam_peak_gain * std::exp(-std::numbers::ln2 * u * u);
}

double slant_range_km(const SystemParams& params, double offnadir_deg) {
  const double rs = kEarthRadiusKm + params.satellite_height_km;  // orbit radius
  const double theta = offnadir_deg * kDegToRad;
  const double st = rs * std::sin(theta);
  if (st >= kEarthRadiusKm) {
    throw InvalidConfigError("off-nadir angle misses the Earth: " + std::to_string(offnadir_deg));
  }
  return rs * std::cos(theta) - std::sqrt(kEarthRadiusKm * kEarthRadiusKm - st * st);
}

UserLayout generate_user_layout(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  const int k_users = params.n_users;
  const int n_beams = params.n_beams;
  const auto centers = beam_centers_deg(params);

  Rng rng(seed);
  UserLayout layout;
  layout.offset_deg.resize(k_users, n_beams);
  layout.slant_km.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    // Uniform over the disk bounded by the 3 dB contour of beam k.
    const double r = params.beam_3db_halfwidth_deg * std::sqrt(rng.uniform());
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const Eigen::Vector2d pos = centers[k] + r * Eigen::Vector2d(std::cos(az), std::sin(az));
    for (int n = 0; n < n_beams; ++n) {
      layout.offset_deg(k, n) = (pos - centers[n]).norm();
    }
    layout.slant_km(k) = slant_range_km(params, pos.norm());
  }
  return layout;
}

ChannelMatrix build_channel(const SystemParams& params, const UserLayout& layout,
                            std::uint64_t seed) {
  params.validate();
  const int k_users = params.n_users;
  const int n_beams = params.n_beams;
  if (layout.offset_deg.rows() != k_users || layout.offset_deg.cols() != n_beams ||
      layout.slant_km.size() != k_users) {
    throw InvalidConfigError("layout dimensions do not match system parameters");
  }

  const double lambda_m = kSpeedOfLightMps / (params.carrier_ghz * 1e9);
  const double noise_rms =
      std::sqrt(params.boltzmann * params.noise_temperature_k * params.bandwidth_mhz * 1e6);

  ChannelMatrix ch;
  ch.amplitude.resize(n_beams, k_users);
  for (int k = 0; k < k_users; ++k) {
    const double d_m = layout.slant_km(k) * 1e3;
    for (int n = 0; n < n_beams; ++n) {
      const double g = beam_gain(params, n, layout.offset_deg(k, n));
      const double a =
          lambda_m * std::sqrt(params.rx_antenna_gain * g) / (4.0 * kPi * d_m * noise_rms);
      if (!std::isfinite(a)) {
        throw NumericError("channel amplitude overflowed for feed " + std::to_string(n) +
                           ", user " + std::to_string(k));
      }
      ch.amplitude(n, k) = a;
    }
  }

  Rng rng(seed);
  ch.phase_rad.resize(k_users);
  for (int k = 0; k < k_users; ++k) ch.phase_rad(k) = rng.uniform(0.0, 2.0 * kPi);

  ch.h.resize(n_beams, k_users);
  for (int k = 0; k < k_users; ++k) {
    const std::complex<double> rot = std::polar(1.0, ch.phase_rad(k));
    ch.h.col(k) = ch.amplitude.col(k).cast<std::complex<double>>() * rot;
  }
  return ch;
}

}  // namespace satpower
