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

#ifndef NFISAC_FP_BCD_HPP
#define NFISAC_FP_BCD_HPP

#include "nfisac/circle_manifold.hpp"
#include "nfisac/convex_subproblem.hpp"
#include "nfisac/metrics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nfisac
{
    struct BcdConfig
    {
        double tol = 1e-6;        // on |WSR_t - WSR_{t-1}| in bit/s/Hz
        int max_iters = 30;       // I_max
        double C1 = 50.0;         // proximal weight on W
        double C2 = 50.0;         // proximal weight on R0
        double penalty = 30.0;    // C in the phase subproblem
        double power_split = 0.7; // share of P0 given to the communication beams at t = 0
        bool warm_start = true;   // start RCG from the previous theta instead of a fresh draw
        std::uint64_t seed = 0;
        RcgSettings rcg;
        QcqpSettings qcqp;

        void validate() const;
    };

    struct FpState
    {
        RVec lambda;
        CVec v;
        BeamformingSolution sol;
        double f = 0.0; // surrogate in nats
        int t = 0;
    };

    enum class Termination
    {
        tolerance,
        max_iters,
        subproblem_infeasible
    };

    std::string to_string(Termination t);

    struct StageTimes
    {
        double aux_ms = 0.0;
        double theta_ms = 0.0;
        double transmit_ms = 0.0;
        double total_ms = 0.0;
    };

    // Surrogate after each block of one cycle
    struct BlockSurrogates
    {
        double after_aux = 0.0;
        double after_theta = 0.0;
        double after_transmit = 0.0;
    };

    // How the starting point was made sensing-feasible
    enum class InitMode
    {
        plain,           // matched filters + isotropic sensing covariance
        reaimed_r0,      // sensing covariance steered to the dominant target eigenvector
        reaimed_r0_theta // phases additionally steered towards the targets
    };

    struct SolverReport
    {
        // Index 0 holds the initialization, entry t the state after cycle t
        std::vector<double> wsr;       // bit/s/Hz
        std::vector<double> surrogate; // nats
        std::vector<RVec> violation;   // max(0, rho_th - rho_l / ref_l), after the phase block
        std::vector<BlockSurrogates> blocks;
        std::vector<bool> transmit_feasible;
        StageTimes times;
        Termination termination = Termination::max_iters;
        InitMode init = InitMode::plain;
        int cycles = 0;
        int best_index = 0;
        bool feasible = false; // returned solution passes evaluate()
    };

    // f(lambda, v, W, R0, theta) of the FP reformulation, natural logarithm
    double fp_surrogate(const ChannelSet &ch, const BeamformingSolution &sol, const RVec &lambda, const CVec &v,
                        const RVec &tau);

    // (chi^2 + chi sqrt(chi^2 + 4)) / 2
    double lambda_closed_form(double chi);

    // sqrt(tau (1 + lambda)) h^H w_k / (sum_j |h^H w_j|^2 + h^H R0 h + sigma^2)
    cd v_closed_form(const CVec &h, const CMat &W, const CMat &R0, int k, double noise_var, double tau, double lambda);

    // Joint maximizer over (lambda, v): v at lambda = SINR, then lambda from its closed form at that v
    std::pair<RVec, CVec> update_lambda_v(const FpState &state, const ChannelSet &ch, const ProblemParams &params);

    TransmitSubproblem make_transmit_subproblem(const FpState &state, const ChannelSet &ch,
                                                const ProblemParams &params, const BcdConfig &cfg);

    BeamformingSolution initial_solution(const ChannelSet &ch, const ProblemParams &params, const BcdConfig &cfg,
                                         InitMode *mode = nullptr);

    struct CycleOutcome
    {
        FpState state;
        BlockSurrogates blocks;
        RVec theta_violation;
        bool transmit_feasible = true;
        StageTimes times;
    };

    // Called after every (lambda, v) update with the state and channels
    using AuxObserver = std::function<void(const FpState &, const ChannelSet &)>;

    CycleOutcome bcd_cycle(const FpState &state, const ChannelSet &ch, const ProblemParams &params,
                           const BcdConfig &cfg, const AuxObserver &observer = {});

    struct BcdResult
    {
        BeamformingSolution solution;
        SolverReport report;
    };

    BcdResult run_bcd(const ChannelSet &ch, const ProblemParams &params, const BcdConfig &cfg,
                      const AuxObserver &observer = {});

} // namespace nfisac

#endif
