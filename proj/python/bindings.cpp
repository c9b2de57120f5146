// Python bindings: datasets and simulation, fingerprints, classification,
// CUSUM detection, watermark statistics and identification.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tcfp/classify.hpp"
#include "tcfp/detect.hpp"
#include "tcfp/error.hpp"
#include "tcfp/fingerprint.hpp"
#include "tcfp/lti.hpp"
#include "tcfp/plantsim.hpp"
#include "tcfp/scenarios.hpp"
#include "tcfp/sysid.hpp"
#include "tcfp/timeseries.hpp"
#include "tcfp/watermark.hpp"

namespace py = pybind11;
using namespace tcfp;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict dataset_dict(const Dataset& ds) {
  py::dict d;
  for (const auto& c : ds.channels) d[py::str(c.name)] = as_array(c.values);
  return d;
}

std::vector<std::string> to_labels(const py::iterable& it) {
  std::vector<std::string> out;
  for (const auto& x : it) out.push_back(py::str(x));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transition-time fingerprinting, CUSUM detection and watermark checks";

  static py::exception<Error> error_type(m, "TcfpError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(e.name());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  // ---- datasets and simulation
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("sample_period_s", &Dataset::sample_period_s)
      .def("__len__", &Dataset::length)
      .def_property_readonly("channels",
                             [](const Dataset& d) {
                               std::vector<std::string> n;
                               for (const auto& c : d.channels) n.push_back(c.name);
                               return n;
                             })
      .def("column", [](const Dataset& d, const std::string& name) { return as_array(d.channel(name).values); })
      .def("to_dict", &dataset_dict)
      .def("export_csv", [](const Dataset& d, const std::string& path) { export_csv(d, path); });

  m.def("default_scenario_json", [] { return scenario_to_json(default_scenario()); });
  m.def("detection_scenario_json", [] { return scenario_to_json(detection_scenario()); });
  m.def(
      "simulate",
      [](const std::string& scenario_json, double duration_s, std::uint64_t seed) {
        const auto r = simulate(scenario_from_json(scenario_json), duration_s, seed);
        return py::make_tuple(r.reported, r.truth.truth, r.truth.to_json());
      },
      py::arg("scenario_json"), py::arg("duration_s"), py::arg("seed"),
      "Returns (reported, truth, ground_truth_json).");
  m.def(
      "load_csv",
      [](const std::string& path, const std::string& scenario_json) {
        auto sc = scenario_from_json(scenario_json);
        sc.attacks.clear();
        sc.watermark.enabled = false;
        return ingest_csv(path, simulate(sc, 10.0 * sc.sample_period_s, 0).reported.schema());
      },
      py::arg("path"), py::arg("scenario_json"));

  // ---- fingerprints
  py::class_<SensorThresholds>(m, "SensorThresholds")
      .def_readonly("t_on", &SensorThresholds::t_on)
      .def_readonly("t_off", &SensorThresholds::t_off)
      .def_readonly("s_max", &SensorThresholds::s_max)
      .def_readonly("s_min", &SensorThresholds::s_min);
  m.def("thresholds_from_range", &thresholds_from_range, py::arg("s_max"), py::arg("s_min"));

  py::class_<TransitionEvent>(m, "TransitionEvent")
      .def_readonly("actuator", &TransitionEvent::actuator)
      .def_property_readonly("op", [](const TransitionEvent& e) { return op_name(e.op); })
      .def_readonly("start_idx", &TransitionEvent::start_idx)
      .def_readonly("end_idx", &TransitionEvent::end_idx)
      .def_readonly("transition_time_s", &TransitionEvent::transition_time_s)
      .def_property_readonly("status", [](const TransitionEvent& e) { return status_name(e.status); });
  m.def("extract_transitions", &extract_transitions, py::arg("dataset"), py::arg("actuator"), py::arg("sensor"),
        py::arg("thresholds"), py::arg("timeout_s") = 120.0);
  m.def(
      "complete_times",
      [](const std::vector<TransitionEvent>& ev, const std::string& op) {
        if (op.empty()) return complete_times(ev);
        return complete_times(ev, op == "on" ? Op::on : Op::off);
      },
      py::arg("events"), py::arg("op") = "");

  m.def("feature_names", [] {
    std::vector<std::string> n;
    for (const char* s : FeatureVector::names()) n.emplace_back(s);
    return n;
  });
  m.def(
      "features",
      [](const std::vector<double>& chunk, std::size_t chunk_size) {
        const auto a = features(chunk, chunk_size).as_array();
        return std::vector<double>(a.begin(), a.end());
      },
      py::arg("chunk"), py::arg("chunk_size") = 10);
  m.def(
      "chunk_features",
      [](const std::vector<double>& times, std::size_t chunk_size) {
        return feature_matrix(chunk_features(times, chunk_size));
      },
      py::arg("times"), py::arg("chunk_size") = 10, "One row of 8 features per full chunk.");

  // ---- classification
  py::class_<SvmModel>(m, "SvmModel")
      .def_property_readonly("kernel", [](const SvmModel& s) { return kernel_name(s.kernel); })
      .def_readonly("classes", &SvmModel::classes)
      .def("predict",
           [](const SvmModel& s, const Matrix& X) {
             std::vector<std::string> out;
             for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(predict(s, X.row(i).transpose()));
             return out;
           })
      .def("accuracy", [](const SvmModel& s, const Matrix& X, const py::iterable& y) {
        return accuracy(s, X, to_labels(y));
      })
      .def("to_json", &svm_to_json);
  m.def("svm_from_json", &svm_from_json);
  m.def(
      "train_svm",
      [](const Matrix& X, const py::iterable& y, const std::string& kernel, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.kernel = parse_kernel(kernel);
        cfg.seed = seed;
        return train(X, to_labels(y), cfg);
      },
      py::arg("X"), py::arg("labels"), py::arg("kernel") = "rbf", py::arg("seed") = 1);
  m.def(
      "cross_validate",
      [](const Matrix& X, const py::iterable& y, const std::string& kernel, int folds, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.kernel = parse_kernel(kernel);
        cfg.seed = seed;
        return cross_validate(X, to_labels(y), folds, cfg).accuracy;
      },
      py::arg("X"), py::arg("labels"), py::arg("kernel") = "rbf", py::arg("folds") = 5, py::arg("seed") = 1);

  // ---- detection
  py::class_<CusumParams>(m, "CusumParams")
      .def(py::init<double, double, double, double>(), py::arg("mu"), py::arg("beta"), py::arg("t_plus"),
           py::arg("t_minus"))
      .def_readwrite("mu", &CusumParams::mu)
      .def_readwrite("beta", &CusumParams::beta)
      .def_readwrite("t_plus", &CusumParams::t_plus)
      .def_readwrite("t_minus", &CusumParams::t_minus);
  py::class_<CusumState>(m, "CusumState")
      .def(py::init<>())
      .def_readwrite("s_plus", &CusumState::s_plus)
      .def_readwrite("s_minus", &CusumState::s_minus)
      .def_readwrite("i", &CusumState::i);
  py::class_<CusumStep>(m, "CusumStep")
      .def_readonly("state", &CusumStep::state)
      .def_readonly("d_plus", &CusumStep::d_plus)
      .def_readonly("d_minus", &CusumStep::d_minus)
      .def_readonly("alarm_plus", &CusumStep::alarm_plus)
      .def_readonly("alarm_minus", &CusumStep::alarm_minus);
  m.def("cusum_step", &cusum_step, py::arg("state"), py::arg("params"), py::arg("t"));
  m.def("fit_cusum_params", &fit_cusum_params);
  m.def("tune_thresholds", &tune_thresholds, py::arg("times"), py::arg("params"), py::arg("max_far") = 0.02);
  m.def("alarm_rates", &alarm_rates);

  // ---- watermark statistics
  m.def(
      "time_to_critical",
      [](const std::string& scenario_json) {
        const auto sc = scenario_from_json(scenario_json);
        return scenario_tq_bound(sc);
      },
      py::arg("scenario_json"), "Smallest time-to-critical bound of the scenario's tanks, seconds.");
  py::class_<KsResult>(m, "KsResult")
      .def_readonly("d_stat", &KsResult::d_stat)
      .def_readonly("critical", &KsResult::critical)
      .def_readonly("distinct", &KsResult::distinct);
  m.def("ks_two_sample", &ks_two_sample, py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05);
  m.def(
      "nist_subset",
      [](const std::vector<int>& bits) {
        std::vector<py::tuple> out;
        for (const auto& t : nist_subset(bits)) out.push_back(py::make_tuple(t.name, t.applicable, t.p_value));
        return out;
      },
      "List of (test, applicable, p_value).");
  m.def("entropy_bits", &entropy_bits);
  m.def("bin_indices", &bin_indices);

  // ---- identification
  py::class_<StateSpaceModel>(m, "StateSpaceModel")
      .def_readonly("A", &StateSpaceModel::A)
      .def_readonly("B", &StateSpaceModel::B)
      .def_readonly("C", &StateSpaceModel::C)
      .def("to_json", [](const StateSpaceModel& s) { return model_to_json(s); });
  m.def("stage1_four_state_model", &stage1_four_state_model);
  m.def("spectral_radius", &spectral_radius);
  m.def(
      "identify",
      [](const Dataset& ds, const std::vector<std::string>& inputs, const std::vector<std::string>& outputs, int order,
         int horizon) { return identify(ds, inputs, outputs, IdentConfig{order, horizon, 1e-8}); },
      py::arg("dataset"), py::arg("inputs"), py::arg("outputs"), py::arg("order") = 4, py::arg("horizon") = 20);
  m.def(
      "nrmse",
      [](const StateSpaceModel& s, const Dataset& ds, const std::vector<std::string>& inputs,
         const std::vector<std::string>& outputs) { return validate(s, ds, inputs, outputs).nrmse; },
      py::arg("model"), py::arg("dataset"), py::arg("inputs"), py::arg("outputs"));
}
