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

#ifndef NFISAC_DATASET_HPP
#define NFISAC_DATASET_HPP

#include "nfisac/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nfisac
{
    struct Disk
    {
        Vec3 center{0.0, 0.0, 0.0};
        double radius = 1.0;
    };

    enum class CsiErrorModel
    {
        relative, // variance sigma_e^2 * |h|^2 / dim per entry
        absolute  // variance sigma_e^2 per entry
    };

    // Everything needed to draw one family of scenarios. Defaults reproduce the reference setup.
    struct ScenarioConfig
    {
        SystemConfig system;
        int K = 4;
        int L = 2;
        double P0 = 1.0;
        double rho_th = 1e4;
        double sigma2 = 1e-9; // used for every CU unless noise_var is set
        RVec noise_var;       // optional per-CU override
        RVec tau;             // optional per-CU weights, ones if empty
        Disk cu_disk{Vec3(2.0, 2.0, 0.0), 1.0};
        Disk tgt_disk{Vec3(4.0, 2.0, 0.0), 1.0};
        Vec3 bs_center{-4.0, 2.0, 0.0};
        Vec3 ris_center{0.0, 0.0, 0.0};
        std::uint64_t seed = 0;
        double sigma_e2 = 0.0;
        CsiErrorModel csi_error = CsiErrorModel::relative;
        SensingReference sensing = SensingReference::array_gain;

        void validate() const;
        RVec noise() const;
        RVec weights() const;
        ProblemParams problem() const;
    };

    struct Scenario
    {
        Placement placement;
        ChannelSet channels;
    };

    // Independent RNG per (seed, index, stream); stream 0 draws positions, stream 1 CSI errors
    std::mt19937_64 scenario_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

    // Uniform point over the disk area, z taken from the disk center
    Vec3 sample_in_disk(const Disk &disk, std::mt19937_64 &rng);

    Scenario sample_scenario(const ScenarioConfig &cfg, std::uint64_t index);

    // h' = h + e on h_ris_cu and h_bs_cu only; G and target channels are copied untouched
    ChannelSet perturb_csi(const ChannelSet &ch, double sigma_e2, std::mt19937_64 &rng,
                           CsiErrorModel model = CsiErrorModel::relative);

    struct CsiRecord
    {
        std::uint64_t scenario_id = 0;
        ScenarioConfig config;
        Placement placement; // only cu and tgt are serialized
        ChannelSet channels;
        std::optional<ChannelSet> perturbed; // h_ris_cu and h_bs_cu replaced
        double sigma_e2 = 0.0;

        // Channels handed to a solver: the perturbed ones when present
        const ChannelSet &observed() const { return perturbed ? *perturbed : channels; }
    };

    CsiRecord make_record(const ScenarioConfig &cfg, std::uint64_t index);

    struct SolutionRecord
    {
        std::uint64_t scenario_id = 0;
        BeamformingSolution solution;
    };

    // One line of JSON, no trailing newline. Non-finite values raise SchemaError.
    std::string to_json_line(const CsiRecord &rec);
    std::string to_json_line(const SolutionRecord &rec);

    // line_no is only used in error messages
    CsiRecord csi_from_json_line(const std::string &line, std::size_t line_no = 1);
    SolutionRecord solution_from_json_line(const std::string &line, std::size_t line_no = 1);

    void write_dataset(std::ostream &os, const std::vector<CsiRecord> &records);
    void write_dataset(const std::string &path, const std::vector<CsiRecord> &records);
    std::vector<CsiRecord> read_dataset(std::istream &is);
    std::vector<CsiRecord> read_dataset(const std::string &path);

    void write_solutions(std::ostream &os, const std::vector<SolutionRecord> &records);
    void write_solutions(const std::string &path, const std::vector<SolutionRecord> &records);
    std::vector<SolutionRecord> read_solutions(std::istream &is);
    std::vector<SolutionRecord> read_solutions(const std::string &path);

    // One row of the evaluation table
    struct EvalRow
    {
        std::uint64_t scenario_id = 0;
        std::string method;
        int K = 0;
        int L = 0;
        int N = 0;
        double P0 = 0.0;
        double sigma_e2 = 0.0;
        double wsr = 0.0;
        double min_rho = 0.0; // smallest normalized beampattern gain
        double power_used = 0.0;
        bool feasible = false;
        double runtime_ms = 0.0;
    };

    // Scores a solution on the record's channels; perfect_csi forces the unperturbed set
    EvalRow score(const CsiRecord &rec, const SolutionRecord &sol, bool perfect_csi);

    inline constexpr const char *kEvalCsvHeader =
        "scenario_id,method,K,L,N,P0,sigma_e2,wsr,min_rho,power_used,feasible,runtime_ms";

    void export_eval_csv(std::ostream &os, const std::vector<EvalRow> &rows);
    void export_eval_csv(const std::string &path, const std::vector<EvalRow> &rows);
    std::vector<EvalRow> read_eval_csv(std::istream &is);

} // namespace nfisac

#endif
