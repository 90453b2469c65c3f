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

#ifndef NFISAC_CONVEX_SUBPROBLEM_HPP
#define NFISAC_CONVEX_SUBPROBLEM_HPP

#include "nfisac/types.hpp"

#include <vector>

namespace nfisac
{
    // Transmit-design subproblem in (W, R0) for fixed FP auxiliaries and RIS phases:
    //
    //   min  g(W, R0) + C1/2 ||W - W_a||^2 + C2/2 ||R0 - R0_a||_F^2
    //   s.t. tr(W^H W) + tr(R0) <= P0,  R0 >= 0,
    //        linearized sensing constraints around the anchor (W_a, R0_a)
    //
    // with g = sum_k |v_k|^2 h_k^H (W W^H + R0) h_k - 2 sum_k sqrt(tau_k (1 + lambda_k)) Re{v_k^* h_k^H w_k}.
    struct TransmitSubproblem
    {
        CMat h_cu;        // M x K effective CU channels at the current theta
        CMat h_tgt;       // M x L cascaded target channels at the current theta
        RVec sensing_ref; // L, divisor turning rho_l into the thresholded quantity
        RVec tau;
        RVec lambda;
        CVec v;
        CMat W_anchor;  // M x K
        CMat R0_anchor; // M x M
        double C1 = 50.0;
        double C2 = 50.0;
        double P0 = 1.0;
        double rho_th = 0.0;

        int M() const { return static_cast<int>(h_cu.rows()); }
        int K() const { return static_cast<int>(h_cu.cols()); }
        int L() const { return static_cast<int>(h_tgt.cols()); }

        void validate() const;
    };

    // <W_coef, W> + <R0_coef, R0> >= rhs, everything divided by sensing_ref_l
    struct LinearizedSensing
    {
        CMat W_coef;
        CMat R0_coef;
        double rhs = 0.0;

        double lhs(const CMat &W, const CMat &R0) const;
    };

    // First-order minorant of h^H (W W^H + R0) h - rho_th >= 0 around W_anchor
    std::vector<LinearizedSensing> sca_linearize(const TransmitSubproblem &sub);

    // g(W, R0) without the proximal terms
    double transmit_surrogate(const TransmitSubproblem &sub, const CMat &W, const CMat &R0);

    // g(W, R0) plus the proximal terms, the quantity solve_qcqp minimizes
    double transmit_objective(const TransmitSubproblem &sub, const CMat &W, const CMat &R0);

    // Real gradients of transmit_objective
    void transmit_gradient(const TransmitSubproblem &sub, const CMat &W, const CMat &R0, CMat &gW, CMat &gR0);

    // Euclidean projection onto {tr(W^H W) + tr(R0) <= P0, R0 Hermitian PSD}
    void project_power_psd(CMat &W, CMat &R0, double P0);

    // Projection of the Hermitian part of A onto the PSD cone (eigenvalue clipping)
    CMat project_psd(const CMat &A);

    struct QcqpSettings
    {
        int max_inner = 5000;   // accelerated projected-gradient iterations per multiplier update
        int max_outer = 60;     // multiplier updates
        double kkt_tol = 1e-6;  // scaled by max(1, P0)
        double feas_tol = 1e-6; // relative to the linearized right-hand side
    };

    struct QcqpResult
    {
        CMat W;
        CMat R0;
        double objective = 0.0;
        RVec multipliers;           // one per sensing constraint, in normalized-gain units
        double max_violation = 0.0; // largest linearized-constraint shortfall, normalized-gain units
        double kkt_residual = 0.0;
        int inner_iterations = 0;
        int outer_iterations = 0;
        bool feasible = false;
        bool converged = false;
    };

    QcqpResult solve_qcqp(const TransmitSubproblem &sub, const QcqpSettings &settings = {});

} // namespace nfisac

#endif
