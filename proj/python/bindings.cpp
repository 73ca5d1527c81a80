#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "edgescatter/channels.hpp"
#include "edgescatter/config.hpp"
#include "edgescatter/errors.hpp"
#include "edgescatter/observables.hpp"
#include "edgescatter/potential.hpp"
#include "edgescatter/scattering.hpp"
#include "edgescatter/tasks.hpp"
#include "edgescatter/transverse_spectrum.hpp"

namespace py = pybind11;
namespace es = edgescatter;

namespace {

es::Component component(const std::string& name) { return es::component_from_string(name); }

es::Frame frame(const std::string& name) {
  if (name == "rotated") return es::Frame::Rotated;
  if (name == "original") return es::Frame::Original;
  throw es::Error(es::ErrorKind::InvalidArgument, "frame must be 'rotated' or 'original'");
}

}  // namespace

PYBIND11_MODULE(_edgescatter, m) {
  m.doc() = "Edge-channel scattering matrices and interface conductivity for Dirac domain walls";

  // Kept for the life of the interpreter.
  static PyObject* error_type = py::exception<es::Error>(m, "Error", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const es::Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(e.what());
      inst.attr("kind") = std::string(es::to_string(e.kind()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<es::TransverseBasis>(m, "Basis")
      .def_property_readonly("n_max", &es::TransverseBasis::n_max)
      .def_property_readonly("analytic", &es::TransverseBasis::analytic)
      .def("rho", py::overload_cast<int>(&es::TransverseBasis::rho, py::const_))
      .def("orthonormality_defect", &es::TransverseBasis::orthonormality_defect)
      .def("nu_at", &es::TransverseBasis::nu_at)
      .def("mu_at", &es::TransverseBasis::mu_at);

  m.def(
      "make_basis",
      [](int n_max, const std::string& kind, const std::string& bounded, double amplitude, double scale,
         double y_cutoff, int quad_points) {
        es::ExperimentConfig cfg;
        cfg.n_max = n_max;
        cfg.quad_points = quad_points;
        cfg.wall = {kind, bounded, amplitude, scale, y_cutoff};
        return es::make_basis(cfg);
      },
      py::arg("n_max") = 24, py::arg("kind") = "linear", py::arg("bounded") = "tanh", py::arg("amplitude") = 1.0,
      py::arg("scale") = 1.0, py::arg("y_cutoff") = 12.0, py::arg("quad_points") = 0);
  m.def("ladder_residual", &es::ladder_residual);
  m.def("critical_set", &es::critical_set, py::arg("basis"), py::arg("e_max"));

  py::class_<es::Channel>(m, "Channel")
      .def_readonly("level", &es::Channel::level)
      .def_readonly("branch_sign", &es::Channel::branch_sign)
      .def_readonly("xi", &es::Channel::xi)
      .def_readonly("current", &es::Channel::current)
      .def_readonly("upper", &es::Channel::upper)
      .def_readonly("lower", &es::Channel::lower)
      .def_property_readonly("propagating", &es::Channel::propagating);

  py::class_<es::ChannelSet>(m, "ChannelSet")
      .def_readonly("energy", &es::ChannelSet::energy)
      .def_readonly("propagating", &es::ChannelSet::propagating)
      .def_readonly("evanescent", &es::ChannelSet::evanescent)
      .def_readonly("n_plus", &es::ChannelSet::n_plus)
      .def_readonly("n_minus", &es::ChannelSet::n_minus)
      .def_property_readonly("M", &es::ChannelSet::M);

  m.def(
      "channels_at",
      [](const es::TransverseBasis& b, double e, int n_evanescent, double guard) {
        return es::channels_at(b, e, {n_evanescent, guard});
      },
      py::arg("basis"), py::arg("energy"), py::arg("n_evanescent") = 8, py::arg("guard") = 1e-3);
  m.def("gram_matrix", &es::gram_matrix);

  py::class_<es::GaussianBump>(m, "Bump")
      .def(py::init([](const std::string& c, double amplitude, double x0, double y0, double sx, double sy) {
             return es::GaussianBump{component(c), amplitude, x0, y0, sx, sy};
           }),
           py::arg("component") = "q0", py::arg("amplitude") = 1.0, py::arg("x0") = 0.0, py::arg("y0") = 0.0,
           py::arg("sx") = 1.0, py::arg("sy") = std::numeric_limits<double>::infinity())
      .def_readwrite("amplitude", &es::GaussianBump::amplitude)
      .def_readwrite("x0", &es::GaussianBump::x0)
      .def_readwrite("y0", &es::GaussianBump::y0)
      .def_readwrite("sx", &es::GaussianBump::sx)
      .def_readwrite("sy", &es::GaussianBump::sy);

  py::class_<es::Potential>(m, "Potential")
      .def_property_readonly("support_radius", &es::Potential::support_radius)
      .def_property_readonly("empty", &es::Potential::empty)
      .def("matrix", &es::Potential::matrix)
      .def("pointwise_norm", &es::Potential::pointwise_norm);

  m.def(
      "potential",
      [](const std::vector<es::GaussianBump>& bumps, const std::string& f) {
        es::PotentialSpec s;
        s.bumps = bumps;
        return es::build_potential(s, frame(f));
      },
      py::arg("bumps") = std::vector<es::GaussianBump>{}, py::arg("frame") = "rotated");
  m.def(
      "potential_from_json",
      [](const std::string& text) {
        es::Frame f = es::Frame::Rotated;
        const auto spec = es::parse_potential(text, false, &f);
        return es::build_potential(spec, f);
      },
      py::arg("text"));

  py::class_<es::DecayCertificate>(m, "DecayCertificate")
      .def_readonly("C", &es::DecayCertificate::C)
      .def_readonly("h", &es::DecayCertificate::h)
      .def_readonly("range", &es::DecayCertificate::range)
      .def_readonly("C_per_range", &es::DecayCertificate::C_per_range);
  m.def("verify_decay", &es::verify_decay, py::arg("potential"), py::arg("h") = 2.0, py::arg("sample_count") = 2001);

  py::class_<es::SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("X", &es::SolverParams::X)
      .def_readwrite("nodes_per_unit", &es::SolverParams::nodes_per_unit)
      .def_readwrite("tol_solve", &es::SolverParams::tol_solve)
      .def_readwrite("tol_match", &es::SolverParams::tol_match)
      .def_readwrite("n_evanescent", &es::SolverParams::n_evanescent)
      .def_readwrite("guard", &es::SolverParams::guard)
      .def_readwrite("margin", &es::SolverParams::margin);

  py::class_<es::ScatteringMatrix>(m, "ScatteringMatrix")
      .def_readonly("energy", &es::ScatteringMatrix::energy)
      .def_readonly("S", &es::ScatteringMatrix::S)
      .def_readonly("n_plus", &es::ScatteringMatrix::n_plus)
      .def_readonly("n_minus", &es::ScatteringMatrix::n_minus)
      .def_readonly("unitarity_defect", &es::ScatteringMatrix::unitarity_defect)
      .def_readonly("match_defect", &es::ScatteringMatrix::match_defect)
      .def_property_readonly("M", &es::ScatteringMatrix::M)
      .def_property_readonly("T_plus", &es::ScatteringMatrix::T_plus)
      .def_property_readonly("R_minus", &es::ScatteringMatrix::R_minus)
      .def_property_readonly("R_plus", &es::ScatteringMatrix::R_plus)
      .def_property_readonly("T_minus", &es::ScatteringMatrix::T_minus)
      .def("trace_difference", &es::ScatteringMatrix::trace_difference);

  m.def("scatter_at", &es::scatter_at, py::arg("basis"), py::arg("potential"), py::arg("energy"),
        py::arg("params") = es::SolverParams{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "current_matrix",
      [](const es::ChannelSet& set, double center, double width) {
        return es::unperturbed_current_matrix(set, es::SwitchProfile::position(center, width));
      },
      py::arg("channels"), py::arg("center") = 0.0, py::arg("width") = 1.0);

  py::class_<es::ConductivityNode>(m, "ConductivityNode")
      .def_readonly("energy", &es::ConductivityNode::energy)
      .def_readonly("weight", &es::ConductivityNode::weight)
      .def_readonly("n_plus", &es::ConductivityNode::n_plus)
      .def_readonly("n_minus", &es::ConductivityNode::n_minus)
      .def_readonly("trace_difference", &es::ConductivityNode::trace_difference)
      .def_readonly("offset", &es::ConductivityNode::offset);
  py::class_<es::ConductivityReport>(m, "ConductivityReport")
      .def_readonly("sigma", &es::ConductivityReport::sigma)
      .def_readonly("nodes", &es::ConductivityReport::nodes)
      .def_readonly("any_offset", &es::ConductivityReport::any_offset);

  m.def(
      "conductivity",
      [](const es::TransverseBasis& b, const es::Potential& p, double e_minus, double e_plus, int n_nodes,
         const es::SolverParams& params, int jobs) {
        return es::conductivity(b, p, es::SwitchProfile::energy_window(e_minus, e_plus), n_nodes, params, jobs);
      },
      py::arg("basis"), py::arg("potential"), py::arg("e_minus"), py::arg("e_plus"), py::arg("n_nodes") = 21,
      py::arg("params") = es::SolverParams{}, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());

  m.def(
      "run_task",
      [](const std::string& config_text, bool toml) {
        const auto out = es::run_task(es::parse_config(config_text, toml));
        return py::make_tuple(out.exit_code, out.body);
      },
      py::arg("config"), py::arg("toml") = false);
}
