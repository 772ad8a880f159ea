#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qirt/cli.hpp"
#include "qirt/distances.hpp"
#include "qirt/measures.hpp"
#include "qirt/repro.hpp"
#include "qirt/transforms.hpp"

namespace py = pybind11;
using namespace qirt;

namespace {

WitnessFamily family_or_default(const std::optional<std::vector<PovmSet>>& sets) {
  return sets ? make_witness_family(*sets, "user family") : default_witness_family();
}

FreeSetSpec free_spec(const std::string& tag, const std::optional<std::vector<PovmSet>>& sets) {
  const FreeClass c = parse_free_class(tag);
  if (c == FreeClass::IB_Witness || c == FreeClass::WIB_Witness) return free_set(c, family_or_default(sets));
  return free_set(c);
}

}  // namespace

PYBIND11_MODULE(_qirt, m) {
  m.doc() = "Resource theories of quantum instruments";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<Povm>(m, "Povm")
      .def(py::init<std::vector<ComplexMatrix>, std::vector<std::string>>(), py::arg("elements"),
           py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("dim", &Povm::dim)
      .def_property_readonly("outcomes", &Povm::outcomes)
      .def_property_readonly("elements", &Povm::elements)
      .def_property_readonly("labels", &Povm::labels);

  py::class_<CpMap>(m, "CpMap")
      .def(py::init<std::size_t, std::size_t, ComplexMatrix>(), py::arg("dim_in"), py::arg("dim_out"), py::arg("choi"))
      .def_static("from_kraus", &CpMap::from_kraus)
      .def_property_readonly("dim_in", &CpMap::dim_in)
      .def_property_readonly("dim_out", &CpMap::dim_out)
      .def_property_readonly("choi", &CpMap::choi)
      .def("kraus", &CpMap::kraus)
      .def("is_trace_preserving", &CpMap::is_trace_preserving, py::arg("tol") = kValidityTol)
      .def("__call__", [](const CpMap& c, const ComplexMatrix& rho) { return apply(c, rho); });

  py::class_<Instrument>(m, "Instrument")
      .def(py::init<std::vector<CpMap>, std::vector<std::string>>(), py::arg("branches"),
           py::arg("labels") = std::vector<std::string>{})
      .def_static("from_chois", &Instrument::from_chois, py::arg("dim_in"), py::arg("dim_out"), py::arg("chois"),
                  py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("dim_in", &Instrument::dim_in)
      .def_property_readonly("dim_out", &Instrument::dim_out)
      .def_property_readonly("outcomes", &Instrument::outcomes)
      .def_property_readonly("branches", &Instrument::branches)
      .def_property_readonly("labels", &Instrument::labels)
      .def("channel", &Instrument::channel);

  py::class_<Verdict>(m, "Verdict")
      .def_property_readonly("status", [](const Verdict& v) { return to_string(v.status); })
      .def_property_readonly("relaxation", [](const Verdict& v) { return to_string(v.relaxation); })
      .def_readonly("margin", &Verdict::margin)
      .def_readonly("certificate", &Verdict::certificate)
      .def_readonly("certificate_data", &Verdict::certificate_data)
      .def("__repr__", [](const Verdict& v) {
        return std::string("Verdict(") + to_string(v.status) + ", margin=" + std::to_string(v.margin) + ")";
      });

  py::class_<DistanceResult>(m, "DistanceResult")
      .def_readonly("value", &DistanceResult::value)
      .def_readonly("achiever", &DistanceResult::achiever)
      .def_readonly("note", &DistanceResult::note)
      .def_property_readonly("method", [](const DistanceResult& d) { return to_string(d.method); });

  py::class_<MeasureResult>(m, "MeasureResult")
      .def_readonly("value", &MeasureResult::value)
      .def_readonly("optimizer", &MeasureResult::optimizer)
      .def_readonly("gap", &MeasureResult::gap)
      .def_property_readonly("bound", [](const MeasureResult& r) { return to_string(r.bound); })
      .def_property_readonly("status", [](const MeasureResult& r) { return to_string(r.status); });

  py::class_<HierarchyReport>(m, "HierarchyReport")
      .def_readonly("ip", &HierarchyReport::ip)
      .def_readonly("ep", &HierarchyReport::ep)
      .def_readonly("sep", &HierarchyReport::sep)
      .def_readonly("mip", &HierarchyReport::mip)
      .def_readonly("smip", &HierarchyReport::smip)
      .def_readonly("relaxed", &HierarchyReport::relaxed)
      .def_readonly("violations", &HierarchyReport::violations)
      .def("ok", &HierarchyReport::ok);

  py::class_<DepolarizingThresholds>(m, "DepolarizingThresholds")
      .def_readonly("eb", &DepolarizingThresholds::eb)
      .def_readonly("ibc_n", &DepolarizingThresholds::ibc_n)
      .def_readonly("ibc", &DepolarizingThresholds::ibc);

  m.def("depolarizing", &depolarizing, py::arg("d"), py::arg("t"));
  m.def("identity_channel", &identity_channel);
  m.def("unitary_channel", &unitary_channel);
  m.def("trash_and_prepare", &trash_and_prepare, py::arg("dim_in"), py::arg("sigma"));
  m.def("apply", [](const CpMap& c, const ComplexMatrix& rho) { return apply(c, rho); });
  m.def("dual_apply", &dual_apply);
  m.def("compose", &compose, py::arg("second"), py::arg("first"));
  m.def("one_outcome", &one_outcome);
  m.def("lueders_instrument", &lueders_instrument);
  m.def("measure_prepare_channel", &measure_prepare_channel);
  m.def("heisenberg_measurement", &heisenberg_measurement);
  m.def("classical_post_process", &classical_post_process);
  m.def("induced_povm", &induced_povm);
  m.def("example1_instrument", &example1_instrument);
  m.def("example2_pair", &example2_pair);

  m.def("diamond_distance", &diamond_distance);
  m.def("diamond_lower_bound", &diamond_lower_bound, py::arg("a"), py::arg("b"), py::arg("samples") = 200,
        py::arg("seed") = kDefaultSeed);
  m.def("measurement_distance", &measurement_distance);
  m.def("instrument_distance", &instrument_distance);
  m.def("set_distance", py::overload_cast<const InstrumentSet&, const InstrumentSet&>(&set_distance));

  m.def("is_trash_and_prepare", &is_trash_and_prepare);
  m.def("is_entanglement_breaking", &is_entanglement_breaking);
  m.def("is_weak_entanglement_breaking", &is_weak_entanglement_breaking);
  m.def("joint_measurement", &joint_measurement);
  m.def(
      "breaks_incompatibility",
      [](const Instrument& i, std::optional<std::vector<PovmSet>> f) { return breaks_incompatibility(i, family_or_default(f)); },
      py::arg("instrument"), py::arg("family") = py::none());
  m.def(
      "is_weak_incompatibility_breaking",
      [](const Instrument& i, std::optional<std::vector<PovmSet>> f) {
        return is_weak_incompatibility_breaking(i, family_or_default(f));
      },
      py::arg("instrument"), py::arg("family") = py::none());
  m.def("is_traditionally_compatible", &is_traditionally_compatible);
  m.def("is_weakly_compatible", &is_weakly_compatible);
  m.def("is_parallel_compatible", &is_parallel_compatible);
  m.def("depolarizing_thresholds", &depolarizing_thresholds, py::arg("d"), py::arg("n") = 2);

  auto measure = [&m](const char* name, MeasureResult (*fn)(const InstrumentSet&, const FreeSetSpec&)) {
    m.def(
        name,
        [fn](const InstrumentSet& s, const std::string& free, std::optional<std::vector<PovmSet>> f) {
          return fn(s, free_spec(free, f));
        },
        py::arg("instruments"), py::arg("free"), py::arg("family") = py::none());
  };
  measure("robustness", &robustness);
  measure("weight", &weight);
  measure("distance_measure", &distance_measure);
  m.def(
      "extended_measure",
      [](const InstrumentSet& s, const std::string& free, std::size_t max_dim_b, std::optional<std::vector<PovmSet>> f) {
        return extended_measure(s, free_spec(free, f), max_dim_b);
      },
      py::arg("instruments"), py::arg("free"), py::arg("max_dim_b") = 2, py::arg("family") = py::none());
  m.def(
      "hierarchy_report",
      [](const Instrument& i, std::optional<std::vector<PovmSet>> f) { return hierarchy_report(i, family_or_default(f)); },
      py::arg("instrument"), py::arg("family") = py::none());

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        const cli::Outcome o = cli::execute(args);
        return py::make_tuple(o.exit_code, o.report.is_null() ? std::string() : o.report.dump(), o.message);
      },
      py::arg("args"), "Runs one command; returns (exit code, report JSON text, message).");
}
