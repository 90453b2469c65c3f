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

#ifndef NFISAC_METRICS_HPP
#define NFISAC_METRICS_HPP

#include "nfisac/geometry.hpp"

#include <string>
#include <vector>

namespace nfisac
{
    struct SolutionMeta
    {
        std::string method = "bcd";
        double runtime_ms = 0.0;
        int iterations = 0;
    };

    // Decision variables of one design: W (M x K), R0 (M x M Hermitian PSD), theta (N, unit modulus)
    struct BeamformingSolution
    {
        CMat W;
        CMat R0;
        CVec theta;
        SolutionMeta meta;
    };

    // Objective weights and budgets shared by all solvers for one instance
    struct ProblemParams
    {
        RVec tau;            // K rate weights, > 0
        double P0 = 1.0;     // transmit power budget in [W]
        double rho_th = 0.0; // sensing threshold, compared with rho_l / sensing_ref_l

        void validate(int K) const;
    };

    // Feasibility tolerances
    inline constexpr double kPowerTol = 1e-9;
    inline constexpr double kSensingTol = 1e-3;
    inline constexpr double kModulusTol = 1e-9;

    struct EvalReport
    {
        RVec sinr;            // linear
        RVec rate;            // log2(1 + sinr) in [bit/s/Hz]
        double wsr = 0.0;     // sum tau_k * rate_k
        RVec rho;             // beampattern gain per target, absolute
        RVec rho_normalized;  // rho_l / sensing_ref_l, the quantity compared with rho_th
        double power = 0.0;   // tr(W^H W) + tr(R0)
        bool power_ok = false;
        std::vector<bool> sensing_ok;
        bool unit_modulus_ok = false;

        bool feasible() const;
        double min_rho() const; // smallest normalized gain, +inf for L = 0
    };

    // h_CU,k = G^H diag(h^R-CU_k) theta + h^BS-CU_k, one column per CU
    CMat effective_cu_channels(const ChannelSet &ch, const CVec &theta);

    // h_TGT,l = G^H diag(h^R-TGT_l) theta, one column per target
    CMat cascaded_tgt_channels(const ChannelSet &ch, const CVec &theta);

    double sinr(const ChannelSet &ch, const BeamformingSolution &sol, int k);

    double beampattern_gain(const ChannelSet &ch, const BeamformingSolution &sol, int l);

    double transmit_power(const BeamformingSolution &sol);

    // Sum of tau_k * ln(1 + gamma_k); the solvers work in nats, reports in bits
    double weighted_sum_rate_nats(const RVec &sinr, const RVec &tau);

    EvalReport evaluate(const ChannelSet &ch, const BeamformingSolution &sol, const ProblemParams &params);

    // Throws ConfigError on dimension mismatch between channels and solution
    void check_solution_shape(const ChannelSet &ch, const BeamformingSolution &sol);

} // namespace nfisac

#endif
