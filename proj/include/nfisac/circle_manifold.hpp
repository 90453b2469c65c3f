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

#ifndef NFISAC_CIRCLE_MANIFOLD_HPP
#define NFISAC_CIRCLE_MANIFOLD_HPP

#include "nfisac/geometry.hpp"

#include <vector>

namespace nfisac
{
    // Hermitian PSD matrix kept as A = F F^H; N x N operators are never formed densely
    struct LowRankPsd
    {
        CMat F;

        CVec apply(const CVec &x) const { return F * (F.adjoint() * x); }
        double quad(const CVec &x) const { return (F.adjoint() * x).squaredNorm(); }
        CMat dense() const { return F * F.adjoint(); }
    };

    // Factor F with F F^H = W W^H + PSD part of R0
    CMat covariance_factor(const CMat &W, const CMat &R0);

    // Phase subproblem on the complex circle manifold:
    //
    //   f_R(theta) = theta^H B theta - 2 Re{theta^H eta} + C/2 sum_l ((rho_th - theta^H A_l theta)^+)^2
    struct ThetaSubproblem
    {
        LowRankPsd B;
        CVec eta;
        std::vector<LowRankPsd> A; // already divided by the sensing reference
        double rho_th = 0.0;
        double penalty = 30.0;

        int N() const { return static_cast<int>(eta.size()); }
    };

    ThetaSubproblem assemble_theta_subproblem(const ChannelSet &ch, const CMat &W, const CMat &R0, const RVec &tau,
                                              const RVec &lambda, const CVec &v, double rho_th, double penalty);

    double penalized_objective(const ThetaSubproblem &sub, const CVec &theta);

    // Wirtinger gradient d f_R / d theta^*; the directional derivative along d is 2 Re{g^H d}
    CVec euclidean_gradient(const ThetaSubproblem &sub, const CVec &theta);

    // z - Re{z .* conj(theta)} .* theta
    CVec project_tangent(const CVec &theta, const CVec &z);

    CVec riemannian_gradient(const ThetaSubproblem &sub, const CVec &theta);

    // Element-wise normalization of theta + d. Returns false if some entry of theta + d vanishes.
    bool retract(const CVec &theta, const CVec &d, CVec &out);

    // Polak-Ribiere+ direction with vector transport by tangent projection. Falls back to -grad
    // when the result is not a descent direction.
    CVec conjugate_direction(const CVec &theta, const CVec &grad, const CVec &prev_grad, const CVec &prev_dir);

    struct RcgSettings
    {
        int max_iters = 300;
        double grad_tol = 1e-6; // on |grad|, relative to max(1, |f|)
        double armijo_c = 1e-4;
        double backtrack = 0.5;
        int max_backtracks = 60;
    };

    struct RcgResult
    {
        CVec theta;
        double objective = 0.0;
        double grad_norm = 0.0;
        int iterations = 0;
        bool converged = false;
        std::vector<double> trace;  // objective after every accepted step, trace[0] at the start point
        std::vector<double> slopes; // 2 Re{grad^H d} of each search direction
    };

    RcgResult rcg_minimize(const ThetaSubproblem &sub, const CVec &theta0, const RcgSettings &settings = {});

} // namespace nfisac

#endif
