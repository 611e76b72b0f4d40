// Python bindings for the core pipeline: scenario -> precoder -> coupling,
// feasibility analysis, the power allocators, and trained-model inference.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include "satpower/allocators.hpp"
#include "satpower/config.hpp"
#include "satpower/errors.hpp"
#include "satpower/feasibility.hpp"
#include "satpower/harness.hpp"
#include "satpower/learned.hpp"
#include "satpower/link_metrics.hpp"
#include "satpower/precoding.hpp"
#include "satpower/rng.hpp"
#include "satpower/scenario.hpp"

namespace py = pybind11;
using namespace satpower;

namespace {

struct Pipeline {
  ChannelMatrix channel;
  Eigen::MatrixXd mu;
};

Pipeline realize(const SystemParams& params, std::uint64_t seed, const std::string& precoder) {
  const PrecoderMethod method = precoder_from_string(precoder);
  Pipeline out;
  const UserLayout layout = generate_user_layout(params, mix_seed(seed, 1));
  out.channel = build_channel(params, layout, mix_seed(seed, 2));
  const PrecodingMatrix w =
      method == PrecoderMethod::kZf
          ? zf_precoder(out.channel)
          : rzf_precoder(out.channel, params.noise_power_w, params.max_power_w);
  out.mu = coupling_matrix(out.channel, w);
  return out;
}

DemandProfile demands_from(const Eigen::VectorXd& xi_mbps, double bandwidth_mhz) {
  return DemandProfile::from_xi(xi_mbps, bandwidth_mhz);
}

py::dict report_to_dict(const FeasibilityReport& rep) {
  py::dict d;
  d["feasible"] = rep.feasible;
  d["spectral_radius"] = rep.spectral_radius;
  d["required_power_w"] = rep.required_power_w;
  d["power_lower_bound_w"] = rep.power_lower_bound_w;
  if (rep.minimal_powers_w.has_value()) {
    d["minimal_powers_w"] = *rep.minimal_powers_w;
  } else {
    d["minimal_powers_w"] = py::none();
  }
  return d;
}

py::dict result_to_dict(AllocationResult result, const Eigen::MatrixXd& mu, double noise_w,
                        double bandwidth_mhz, const DemandProfile& demands) {
  if (result.rates_mbps.size() == 0) {
    finalize_result(result, mu, noise_w, bandwidth_mhz, demands);
  }
  py::dict d;
  d["powers_w"] = result.powers_w;
  d["satisfied"] = result.satisfied;
  d["rates_mbps"] = result.rates_mbps;
  d["iterations"] = result.iterations;
  d["method"] = to_string(result.method);
  py::list trace;
  for (const TraceEntry& e : result.trace) {
    trace.append(py::make_tuple(e.n, e.q_size, e.sum_rate_mbps));
  }
  d["trace"] = trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multibeam satellite downlink power allocation core";

  // Translators run newest-first, so the base class goes in first and the
  // derived mappings take precedence.
  py::register_exception<Error>(m, "SatpowerError");
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<CorruptModelError>(m, "CorruptModelError", PyExc_OSError);
  py::register_exception<InvalidConfigError>(m, "InvalidConfigError", PyExc_ValueError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("n_beams", &SystemParams::n_beams)
      .def_readwrite("n_users", &SystemParams::n_users)
      .def_readwrite("bandwidth_mhz", &SystemParams::bandwidth_mhz)
      .def_readwrite("carrier_ghz", &SystemParams::carrier_ghz)
      .def_readwrite("max_power_w", &SystemParams::max_power_w)
      .def_readwrite("noise_power_w", &SystemParams::noise_power_w)
      .def_readwrite("satellite_height_km", &SystemParams::satellite_height_km)
      .def_readwrite("rx_antenna_gain", &SystemParams::rx_antenna_gain)
      .def_readwrite("beam_peak_gain", &SystemParams::beam_peak_gain)
      .def_readwrite("beam_3db_halfwidth_deg", &SystemParams::beam_3db_halfwidth_deg)
      .def_readwrite("beam_center_spacing_deg", &SystemParams::beam_center_spacing_deg)
      .def_readwrite("noise_temperature_k", &SystemParams::noise_temperature_k)
      .def_readwrite("rng_seed", &SystemParams::rng_seed)
      .def("validate", &SystemParams::validate);

  m.def("load_params", &load_params, py::arg("path"));
  m.def("save_params", &save_params, py::arg("params"), py::arg("path"));

  m.def(
      "simulate_channel",
      [](const SystemParams& params, std::uint64_t seed, const std::string& precoder) {
        const Pipeline p = realize(params, seed, precoder);
        py::dict d;
        d["amplitude"] = p.channel.amplitude;
        d["phase_rad"] = p.channel.phase_rad;
        d["h"] = p.channel.h;
        d["mu"] = p.mu;
        d["features"] = channel_features(p.channel);
        return d;
      },
      py::arg("params"), py::arg("seed"), py::arg("precoder") = "rzf",
      "One seeded layout + channel draw; returns the channel, the coupling "
      "matrix under the chosen precoder, and the flattened feature vector.");

  m.def(
      "simulate_coupling",
      [](const SystemParams& params, std::uint64_t seed, const std::string& precoder) {
        return realize(params, seed, precoder).mu;
      },
      py::arg("params"), py::arg("seed"), py::arg("precoder") = "rzf");

  m.def(
      "analyze_feasibility",
      [](const Eigen::MatrixXd& mu, const Eigen::VectorXd& xi_mbps, double bandwidth_mhz,
         double noise_w, double max_power_w) {
        return report_to_dict(analyze_feasibility(mu, demands_from(xi_mbps, bandwidth_mhz),
                                                  noise_w, max_power_w));
      },
      py::arg("mu"), py::arg("xi_mbps"), py::arg("bandwidth_mhz"), py::arg("noise_w"),
      py::arg("max_power_w"));

  m.def("waterfill", &waterfill, py::arg("effective_gains"), py::arg("max_power_w"));
  m.def("sum_rate_allocate", &sum_rate_allocate, py::arg("mu"), py::arg("noise_w"),
        py::arg("max_power_w"));
  m.def("all_rates_mbps", &all_rates_mbps, py::arg("powers_w"), py::arg("mu"),
        py::arg("noise_w"), py::arg("bandwidth_mhz"));

  m.def(
      "allocate",
      [](const Eigen::MatrixXd& mu, const Eigen::VectorXd& xi_mbps, double bandwidth_mhz,
         double noise_w, double max_power_w, const std::string& method) {
        const DemandProfile demands = demands_from(xi_mbps, bandwidth_mhz);
        AllocationResult result;
        switch (method_from_string(method)) {
          case Method::kJointOpt:
            result = joint_optimize(mu, noise_w, bandwidth_mhz, demands, max_power_w);
            break;
          case Method::kSatisSetOpt:
            result = satisset_optimize(mu, noise_w, bandwidth_mhz, demands, max_power_w);
            break;
          case Method::kSumOpt:
            result = sum_opt(mu, noise_w, max_power_w);
            break;
          case Method::kEqualPower:
            result = equal_power(static_cast<int>(mu.rows()), max_power_w);
            break;
          default:
            throw InvalidConfigError("method '" + method + "' needs a model file; use predict");
        }
        return result_to_dict(std::move(result), mu, noise_w, bandwidth_mhz, demands);
      },
      py::arg("mu"), py::arg("xi_mbps"), py::arg("bandwidth_mhz"), py::arg("noise_w"),
      py::arg("max_power_w"), py::arg("method") = "jointopt");

  py::class_<MlpModel>(m, "MlpModel")
      .def_property_readonly("layer_sizes",
                             [](const MlpModel& model) { return model.layer_sizes; });

  m.def(
      "load_model",
      [](const std::string& path) {
        auto [model, stats] = load_model(path);
        return py::make_tuple(std::move(model), std::move(stats));
      },
      py::arg("path"));

  py::class_<NormStats>(m, "NormStats")
      .def_readonly("x_min", &NormStats::x_min)
      .def_readonly("x_max", &NormStats::x_max)
      .def_readonly("p_min", &NormStats::p_min)
      .def_readonly("p_max", &NormStats::p_max);

  m.def("predict_allocation", &predict_allocation, py::arg("model"), py::arg("stats"),
        py::arg("features"), py::arg("max_power_w"));

  m.def(
      "run_trial",
      [](const SystemParams& params, std::uint64_t seed, const std::string& method,
         const std::string& precoder, double xi_mbps) {
        const TrialRecord rec = run_trial(params, seed, method_from_string(method),
                                          precoder_from_string(precoder), xi_mbps);
        py::dict d;
        d["seed"] = rec.seed;
        d["method"] = to_string(rec.method);
        d["precoder"] = to_string(rec.precoder);
        d["xi_mbps"] = rec.xi_mbps;
        d["q_size"] = rec.q_size;
        d["congested"] = rec.congested;
        d["sum_mbps"] = rec.sum_mbps;
        d["time_ms"] = rec.time_ms;
        d["failed"] = rec.failed;
        d["error"] = rec.error;
        return d;
      },
      py::arg("params"), py::arg("seed"), py::arg("method"), py::arg("precoder"),
      py::arg("xi_mbps"));
}
