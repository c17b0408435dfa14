#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lmnl/analysis.hpp"
#include "lmnl/dataio.hpp"
#include "lmnl/error.hpp"
#include "lmnl/estimation.hpp"
#include "lmnl/model_io.hpp"
#include "lmnl/scenarios.hpp"
#include "lmnl/synthgen.hpp"

namespace py = pybind11;
using namespace lmnl;

namespace {

ChoiceDataset make_dataset(std::vector<std::string> columns, Matrix values, std::vector<int> choice,
                           std::vector<std::string> alternatives, std::optional<AvailabilityMatrix> available) {
  ChoiceDataset d;
  d.columns = std::move(columns);
  d.values = std::move(values);
  d.choice = std::move(choice);
  d.alternatives = std::move(alternatives);
  d.available = available ? *available
                          : AvailabilityMatrix::Constant(d.values.rows(), d.alternative_count(), true);
  d.validate();
  return d;
}

py::dict report_dict(const EstimationReport& r) {
  py::dict params;
  for (const auto& p : r.parameters) {
    params[py::str(p.name)] = py::dict(py::arg("value") = p.value, py::arg("std_error") = p.std_error,
                                       py::arg("t_stat") = p.t_stat, py::arg("p_value") = p.p_value);
  }
  py::dict nests, ratios;
  for (const auto& n : r.nest_factors) nests[py::str(n.name)] = n.value;
  for (const auto& n : r.ratios) ratios[py::str(n.name)] = n.value;
  py::dict out;
  out["model"] = r.model;
  out["parameters"] = params;
  out["nest_factors"] = nests;
  out["ratios"] = ratios;
  out["train_ll"] = r.train_ll;
  out["train_rho2"] = r.train_rho2;
  out["train_accuracy"] = r.train_accuracy;
  if (r.has_test) {
    out["test_ll"] = r.test_ll;
    out["test_rho2"] = r.test_rho2;
    out["test_accuracy"] = r.test_accuracy;
  }
  out["hessian_singular"] = r.hessian_singular;
  out["warnings"] = r.warnings;
  out["epoch_loss"] = r.epoch_loss;
  return out;
}

}  // namespace

PYBIND11_MODULE(_lmnl, m) {
  m.doc() = "Hybrid logit / neural-network discrete choice models";

  py::register_exception<Error>(m, "LmnlError", PyExc_RuntimeError);

  py::class_<ChoiceDataset>(m, "ChoiceDataset")
      .def(py::init(&make_dataset), py::arg("columns"), py::arg("values"), py::arg("choice"),
           py::arg("alternatives"), py::arg("available") = py::none())
      .def_readonly("columns", &ChoiceDataset::columns)
      .def_readonly("values", &ChoiceDataset::values)
      .def_readonly("available", &ChoiceDataset::available)
      .def_readonly("choice", &ChoiceDataset::choice)
      .def_readonly("alternatives", &ChoiceDataset::alternatives)
      .def_property_readonly("rows", &ChoiceDataset::rows)
      .def("column", &ChoiceDataset::column)
      .def("set_column", &ChoiceDataset::set_column)
      .def("__len__", &ChoiceDataset::rows);

  m.def("load_csv", [](const std::filesystem::path& p, std::vector<std::string> alternatives) {
    return load_csv(p, default_schema(std::move(alternatives)));
  }, py::arg("path"), py::arg("alternatives"));
  m.def("write_csv", &write_csv, py::arg("data"), py::arg("path"));
  m.def("load_swissmetro", [](const std::filesystem::path& p, bool ga_cost_adjust) {
    SwissmetroOptions o;
    o.ga_cost_adjust = ga_cost_adjust;
    return preprocess_swissmetro(load_table(p), o);
  }, py::arg("path"), py::arg("ga_cost_adjust") = false);
  m.def("load_optima", [](const std::filesystem::path& p) { return preprocess_optima(load_table(p)); },
        py::arg("path"));
  m.def("split", &split, py::arg("data"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0);

  py::class_<BinaryScenario>(m, "BinaryScenario")
      .def(py::init<>())
      .def_readwrite("beta_p", &BinaryScenario::beta_p)
      .def_readwrite("beta_a", &BinaryScenario::beta_a)
      .def_readwrite("beta_b", &BinaryScenario::beta_b)
      .def_readwrite("beta_qc", &BinaryScenario::beta_qc)
      .def_readwrite("n_train", &BinaryScenario::n_train)
      .def_readwrite("n_test", &BinaryScenario::n_test)
      .def_readwrite("seed", &BinaryScenario::seed);
  m.def("gen_binary", &gen_binary);
  m.def("gen_correlated", &gen_correlated, py::arg("scenario"), py::arg("s"));
  m.def("gen_guevara", &gen_guevara, py::arg("rows"), py::arg("seed"));
  m.def("head_split", &head_split, py::arg("data"), py::arg("n_train"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("dropout", &TrainConfig::dropout)
      .def_readwrite("l2", &TrainConfig::l2)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate);

  py::class_<HybridChoiceModel>(m, "Model")
      .def_property_readonly("kind", [](const HybridChoiceModel& h) { return to_string(h.kind); })
      .def_property_readonly("parameter_names", [](const HybridChoiceModel& h) { return h.spec.parameters(); })
      .def_readwrite("beta", &HybridChoiceModel::beta)
      .def_property_readonly("network_weight_count", &HybridChoiceModel::network_weight_count)
      .def("probabilities", py::overload_cast<const HybridChoiceModel&, const ChoiceDataset&>(&choice_probabilities))
      .def("log_likelihood", py::overload_cast<const HybridChoiceModel&, const ChoiceDataset&>(&log_likelihood))
      .def("save", py::overload_cast<const HybridChoiceModel&, const std::filesystem::path&>(&save_model));
  m.def("load_model", py::overload_cast<const std::filesystem::path&>(&load_model));

  py::class_<ModelDef>(m, "ModelDef")
      .def_readwrite("name", &ModelDef::name)
      .def("build", &ModelDef::build, py::arg("seed") = 0);
  m.def("binary_logit", &binary_logit, py::arg("name"), py::arg("x"));
  m.def("binary_lmnl", &binary_lmnl, py::arg("name"), py::arg("x"), py::arg("q"), py::arg("width") = 100);
  m.def("swissmetro_model", &swissmetro_model, py::arg("which"), py::arg("width") = 100);
  m.def("optima_model", &optima_model, py::arg("which"), py::arg("width") = 100);

  m.def("fit", [](HybridChoiceModel& model, const ChoiceDataset& train, const TrainConfig& config,
                  const std::optional<ChoiceDataset>& test, const std::string& strategy, bool standard_errors) {
    ReportOptions opt;
    opt.standard_errors = standard_errors;
    const Strategy s = parse_strategy(strategy);
    EstimationReport r;
    {
      py::gil_scoped_release release;
      r = fit(model, train, config, s, test ? &*test : nullptr, opt);
    }
    return report_dict(r);
  }, py::arg("model"), py::arg("train"), py::arg("config") = TrainConfig{}, py::arg("test") = py::none(),
     py::arg("strategy") = "joint", py::arg("standard_errors") = true);

  m.def("feature_impact", [](const HybridChoiceModel& model, const ChoiceDataset& data) {
    const auto fi = feature_impact(model, data);
    py::dict out;
    for (const auto& f : fi.features) out[py::str(f)] = fi.overall(f);
    return out;
  }, py::arg("model"), py::arg("data"));
}
