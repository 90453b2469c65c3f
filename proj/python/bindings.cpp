// SPDX-License-Identifier: Apache-2.0
//
// nfisac: beamforming toolkit for XL-RIS assisted near-field ISAC systems
// Copyright (C) 2026 The nfisac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nfisac/cli.hpp"
#include "nfisac/dataset.hpp"
#include "nfisac/fp_bcd.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nfisac;

namespace
{
    py::dict report_dict(const SolverReport &r)
    {
        py::dict d;
        d["wsr"] = r.wsr;
        d["surrogate"] = r.surrogate;
        d["transmit_feasible"] = r.transmit_feasible;
        d["termination"] = to_string(r.termination);
        d["cycles"] = r.cycles;
        d["best_index"] = r.best_index;
        d["feasible"] = r.feasible;
        d["init"] = r.init == InitMode::plain ? "plain" : r.init == InitMode::reaimed_r0 ? "reaimed_r0" : "reaimed_r0_theta";
        d["times_ms"] = py::dict(py::arg("aux") = r.times.aux_ms, py::arg("theta") = r.times.theta_ms,
                                 py::arg("transmit") = r.times.transmit_ms, py::arg("total") = r.times.total_ms);
        return d;
    }

    py::tuple cli_call(const std::vector<std::string> &args)
    {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }
} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Beamforming design for XL-RIS assisted near-field ISAC";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_RuntimeError);

    py::enum_<SensingReference>(m, "SensingReference")
        .value("array_gain", SensingReference::array_gain)
        .value("absolute", SensingReference::absolute);

    py::enum_<CsiErrorModel>(m, "CsiErrorModel")
        .value("relative", CsiErrorModel::relative)
        .value("absolute", CsiErrorModel::absolute);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("M", &SystemConfig::M)
        .def_readwrite("Nx", &SystemConfig::Nx)
        .def_readwrite("Nz", &SystemConfig::Nz)
        .def_readwrite("fc", &SystemConfig::fc)
        .def_property_readonly("N", &SystemConfig::N)
        .def_property_readonly("wavelength", &SystemConfig::wavelength)
        .def_property_readonly("spacing", &SystemConfig::spacing);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("system", &ScenarioConfig::system)
        .def_readwrite("K", &ScenarioConfig::K)
        .def_readwrite("L", &ScenarioConfig::L)
        .def_readwrite("P0", &ScenarioConfig::P0)
        .def_readwrite("rho_th", &ScenarioConfig::rho_th)
        .def_readwrite("sigma2", &ScenarioConfig::sigma2)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_readwrite("sigma_e2", &ScenarioConfig::sigma_e2)
        .def_readwrite("csi_error", &ScenarioConfig::csi_error)
        .def_readwrite("sensing", &ScenarioConfig::sensing)
        .def("validate", &ScenarioConfig::validate)
        .def("problem", &ScenarioConfig::problem);

    py::class_<ChannelSet>(m, "ChannelSet")
        .def(py::init<>())
        .def_readwrite("G", &ChannelSet::G)
        .def_readwrite("h_ris_cu", &ChannelSet::h_ris_cu)
        .def_readwrite("h_bs_cu", &ChannelSet::h_bs_cu)
        .def_readwrite("h_ris_tgt", &ChannelSet::h_ris_tgt)
        .def_readwrite("noise_var", &ChannelSet::noise_var)
        .def_readwrite("sensing_ref", &ChannelSet::sensing_ref)
        .def_property_readonly("M", &ChannelSet::M)
        .def_property_readonly("N", &ChannelSet::N)
        .def_property_readonly("K", &ChannelSet::K)
        .def_property_readonly("L", &ChannelSet::L)
        .def("check_dimensions", &ChannelSet::check_dimensions);

    py::class_<ProblemParams>(m, "ProblemParams")
        .def(py::init<>())
        .def(py::init(
                 [](const RVec &tau, double P0, double rho_th)
                 {
                     ProblemParams p;
                     p.tau = tau;
                     p.P0 = P0;
                     p.rho_th = rho_th;
                     return p;
                 }),
             py::arg("tau"), py::arg("P0") = 1.0, py::arg("rho_th") = 0.0)
        .def_readwrite("tau", &ProblemParams::tau)
        .def_readwrite("P0", &ProblemParams::P0)
        .def_readwrite("rho_th", &ProblemParams::rho_th);

    py::class_<SolutionMeta>(m, "SolutionMeta")
        .def(py::init<>())
        .def_readwrite("method", &SolutionMeta::method)
        .def_readwrite("runtime_ms", &SolutionMeta::runtime_ms)
        .def_readwrite("iterations", &SolutionMeta::iterations);

    py::class_<BeamformingSolution>(m, "BeamformingSolution")
        .def(py::init<>())
        .def_readwrite("W", &BeamformingSolution::W)
        .def_readwrite("R0", &BeamformingSolution::R0)
        .def_readwrite("theta", &BeamformingSolution::theta)
        .def_readwrite("meta", &BeamformingSolution::meta);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("sinr", &EvalReport::sinr)
        .def_readonly("rate", &EvalReport::rate)
        .def_readonly("wsr", &EvalReport::wsr)
        .def_readonly("rho", &EvalReport::rho)
        .def_readonly("rho_normalized", &EvalReport::rho_normalized)
        .def_readonly("power", &EvalReport::power)
        .def_readonly("power_ok", &EvalReport::power_ok)
        .def_readonly("sensing_ok", &EvalReport::sensing_ok)
        .def_readonly("unit_modulus_ok", &EvalReport::unit_modulus_ok)
        .def_property_readonly("feasible", &EvalReport::feasible)
        .def_property_readonly("min_rho", &EvalReport::min_rho);

    py::class_<BcdConfig>(m, "BcdConfig")
        .def(py::init<>())
        .def_readwrite("tol", &BcdConfig::tol)
        .def_readwrite("max_iters", &BcdConfig::max_iters)
        .def_readwrite("C1", &BcdConfig::C1)
        .def_readwrite("C2", &BcdConfig::C2)
        .def_readwrite("penalty", &BcdConfig::penalty)
        .def_readwrite("power_split", &BcdConfig::power_split)
        .def_readwrite("warm_start", &BcdConfig::warm_start)
        .def_readwrite("seed", &BcdConfig::seed);

    py::class_<CsiRecord>(m, "CsiRecord")
        .def_readonly("scenario_id", &CsiRecord::scenario_id)
        .def_readonly("config", &CsiRecord::config)
        .def_readonly("channels", &CsiRecord::channels)
        .def_readonly("perturbed", &CsiRecord::perturbed)
        .def_readonly("sigma_e2", &CsiRecord::sigma_e2)
        .def("observed", &CsiRecord::observed, py::return_value_policy::copy)
        .def("to_json", [](const CsiRecord &r) { return to_json_line(r); });

    py::class_<SolutionRecord>(m, "SolutionRecord")
        .def(py::init(
                 [](std::uint64_t id, const BeamformingSolution &s)
                 {
                     return SolutionRecord{id, s};
                 }),
             py::arg("scenario_id"), py::arg("solution"))
        .def_readwrite("scenario_id", &SolutionRecord::scenario_id)
        .def_readwrite("solution", &SolutionRecord::solution)
        .def("to_json", [](const SolutionRecord &r) { return to_json_line(r); });

    m.def(
        "sample_channels", [](const ScenarioConfig &cfg, std::uint64_t index) { return sample_scenario(cfg, index).channels; },
        py::arg("config"), py::arg("index") = 0, "Channels of scenario `index` drawn from `config`");
    m.def("make_record", &make_record, py::arg("config"), py::arg("index"));
    m.def("evaluate", &evaluate, py::arg("channels"), py::arg("solution"), py::arg("params"));
    m.def("effective_cu_channels", &effective_cu_channels, py::arg("channels"), py::arg("theta"));
    m.def("initial_solution",
          [](const ChannelSet &ch, const ProblemParams &p, const BcdConfig &cfg) { return initial_solution(ch, p, cfg); },
          py::arg("channels"), py::arg("params"), py::arg("config") = BcdConfig{});
    m.def(
        "run_bcd",
        [](const ChannelSet &ch, const ProblemParams &p, const BcdConfig &cfg)
        {
            BcdResult r;
            {
                py::gil_scoped_release release;
                r = run_bcd(ch, p, cfg);
            }
            return py::make_tuple(r.solution, report_dict(r.report));
        },
        py::arg("channels"), py::arg("params"), py::arg("config") = BcdConfig{},
        "Runs the FP/BCD solver; returns (solution, report dict)");

    m.def("write_dataset", py::overload_cast<const std::string &, const std::vector<CsiRecord> &>(&write_dataset),
          py::arg("path"), py::arg("records"));
    m.def("read_dataset", py::overload_cast<const std::string &>(&read_dataset), py::arg("path"));
    m.def("write_solutions",
          py::overload_cast<const std::string &, const std::vector<SolutionRecord> &>(&write_solutions),
          py::arg("path"), py::arg("records"));
    m.def("read_solutions", py::overload_cast<const std::string &>(&read_solutions), py::arg("path"));
    m.def("run_cli", &cli_call, py::arg("args"), "Runs one command line; returns (exit_code, stdout, stderr)");
}
