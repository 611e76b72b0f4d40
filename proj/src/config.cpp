#include "satpower/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "satpower/errors.hpp"

namespace satpower {

void SystemParams::validate() const {
  if (n_beams < 1 || n_users < 1) throw InvalidConfigError("n_beams and n_users must be >= 1");
  if (n_users > n_beams) {
    throw InvalidConfigError("n_users (" + std::to_string(n_users) + ") exceeds n_beams (" +
                             std::to_string(n_beams) + ")");
  }
  if (bandwidth_mhz <= 0) throw InvalidConfigError("bandwidth must be positive");
  if (carrier_ghz <= 0) throw InvalidConfigError("carrier frequency must be positive");
  if (max_power_w <= 0) throw InvalidConfigError("max_power must be positive");
  if (noise_power_w <= 0) throw InvalidConfigError("noise power must be positive");
  if (satellite_height_km <= 0) throw InvalidConfigError("satellite height must be positive");
  if (rx_antenna_gain <= 0 || beam_peak_gain <= 0) {
    throw InvalidConfigError("antenna gains must be positive");
  }
  if (beam_3db_halfwidth_deg <= 0 || beam_center_spacing_deg <= 0) {
    throw InvalidConfigError("beam geometry values must be positive");
  }
  if (noise_temperature_k <= 0 || boltzmann <= 0) {
    throw InvalidConfigError("noise temperature and Boltzmann constant must be positive");
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Flat section.key -> value map from an INI-style file.
std::map<std::string, std::string> parse_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    kv[section + "." + trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key,
                  double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfigError("config key '" + key + "' is not a number: " + it->second);
  }
}

std::uint64_t get_u64(const std::map<std::string, std::string>& kv, const std::string& key,
                      std::uint64_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw InvalidConfigError("config key '" + key + "' is not an integer: " + it->second);
  }
}

}  // namespace

SystemParams load_params(const std::string& path) {
  auto kv = parse_ini(path);
  SystemParams p;
  p.n_beams = static_cast<int>(get_u64(kv, "system.n_beams", p.n_beams));
  p.n_users = static_cast<int>(get_u64(kv, "system.n_users", p.n_users));
  p.bandwidth_mhz = get_double(kv, "system.bandwidth_mhz", p.bandwidth_mhz);
  p.carrier_ghz = get_double(kv, "system.carrier_ghz", p.carrier_ghz);
  p.max_power_w = get_double(kv, "system.max_power_w", p.max_power_w);
  p.noise_power_w = get_double(kv, "system.noise_power_w", p.noise_power_w);
  p.satellite_height_km = get_double(kv, "system.satellite_height_km", p.satellite_height_km);
  p.rx_antenna_gain = get_double(kv, "antenna.rx_antenna_gain", p.rx_antenna_gain);
  p.beam_peak_gain = get_double(kv, "antenna.beam_peak_gain", p.beam_peak_gain);
  p.beam_3db_halfwidth_deg = get_double(kv, "antenna.beam_3db_halfwidth_deg", p.beam_3db_halfwidth_deg);
  p.beam_center_spacing_deg = get_double(kv, "antenna.beam_center_spacing_deg", p.beam_center_spacing_deg);
  p.noise_temperature_k = get_double(kv, "noise.noise_temperature_k", p.noise_temperature_k);
  p.boltzmann = get_double(kv, "noise.boltzmann", p.boltzmann);
  p.rng_seed = get_u64(kv, "run.rng_seed", p.rng_seed);
  p.validate();
  return p;
}

void save_params(const SystemParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file: " + path);
  out.precision(17);
  out << "# satpower scenario configuration\n"
      << "[system]\n"
      << "n_beams = " << p.n_beams << "\n"
      << "n_users = " << p.n_users << "\n"
      << "bandwidth_mhz = " << p.bandwidth_mhz << "\n"
      << "carrier_ghz = " << p.carrier_ghz << "\n"
      << "max_power_w = " << p.max_power_w << "\n"
      << "# channel amplitudes are noise-normalized; keep this at 1\n"
      << "noise_power_w = " << p.noise_power_w << "\n"
      << "satellite_height_km = " << p.satellite_height_km << "\n"
      << "\n[antenna]\n"
      << "rx_antenna_gain = " << p.rx_antenna_gain << "\n"
      << "beam_peak_gain = " << p.beam_peak_gain << "\n"
      << "beam_3db_halfwidth_deg = " << p.beam_3db_halfwidth_deg << "\n"
      << "beam_center_spacing_deg = " << p.beam_center_spacing_deg << "\n"
      << "\n[noise]\n"
      << "# defaults put K_B * T * B near -118.3 dBW\n"
      << "noise_temperature_k = " << p.noise_temperature_k << "\n"
      << "boltzmann = " << p.boltzmann << "\n"
      << "\n[run]\n"
      << "rng_seed = " << p.rng_seed << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace satpower
