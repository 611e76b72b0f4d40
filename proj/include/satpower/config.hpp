#pragma once

#include <cstdint>
#include <string>

namespace satpower {

inline constexpr double kSpeedOfLightMps = 299792458.0;
inline constexpr double kBoltzmannJPerK = 1.380649e-23;
inline constexpr double kEarthRadiusKm = 6371.0;

/// Everything that defines a simulated system instance, minus the user drop.
///
/// The channel rows produced by build_channel() are already divided by the
/// thermal-noise standard deviation sqrt(K_B * T * B), so downstream SINR
/// computations use noise_power_w = 1.  The physical noise floor implied by
/// the default temperature and bandwidth is about -118.3 dBW.
struct SystemParams {
  int n_beams = 7;
  int n_users = 7;
  double bandwidth_mhz = 500.0;
  double carrier_ghz = 20.0;
  double max_power_w = 217.27011788637455;  // 23.37 dBW
  double noise_power_w = 1.0;               // normalized channel convention
  double satellite_height_km = 35786.0;
  double rx_antenna_gain = 9488.0;       // 0.6 m dish, ~60% efficiency (39.8 dBi)
  double beam_peak_gain = 39811.0;       // 46 dBi
  double beam_3db_halfwidth_deg = 0.25;
  double beam_center_spacing_deg = 0.4;
  double noise_temperature_k = 214.3;
  double boltzmann = kBoltzmannJPerK;
  std::uint64_t rng_seed = 1;

  /// Throws InvalidConfigError when any invariant is broken.
  void validate() const;
};

/// Parses the key-value configuration format written by save_params().
SystemParams load_params(const std::string& path);

void save_params(const SystemParams& params, const std::string& path);

}  // namespace satpower
