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

#include "nfisac/circle_manifold.hpp"

#include <algorithm>
#include <cmath>

namespace nfisac
{
    CMat covariance_factor(const CMat &W, const CMat &R0)
    {
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (R0 + R0.adjoint()));
        const RVec e = es.eigenvalues();
        const double cut = 1e-14 * std::max(1.0, e.cwiseAbs().maxCoeff());
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < e.size(); ++i)
            if (e(i) > cut)
                keep.push_back(i);

        CMat F(W.rows(), W.cols() + static_cast<Eigen::Index>(keep.size()));
        F.leftCols(W.cols()) = W;
        for (std::size_t j = 0; j < keep.size(); ++j)
            F.col(W.cols() + static_cast<Eigen::Index>(j)) = std::sqrt(e(keep[j])) * es.eigenvectors().col(keep[j]);
        return F;
    }

    ThetaSubproblem assemble_theta_subproblem(const ChannelSet &ch, const CMat &W, const CMat &R0, const RVec &tau,
                                              const RVec &lambda, const CVec &v, double rho_th, double penalty)
    {
        const int N = ch.N(), M = ch.M(), K = ch.K(), L = ch.L();
        if (W.rows() != M || W.cols() != K || R0.rows() != M || R0.cols() != M)
            throw ConfigError("W or R0 has the wrong shape for the phase subproblem");
        if (tau.size() != K || lambda.size() != K || v.size() != K)
            throw ConfigError("auxiliary vectors must have K entries");

        const CMat Fq = covariance_factor(W, R0);
        const CMat GFq = ch.G * Fq; // N x r
        const CMat Q = Fq * Fq.adjoint();
        const auto r = Fq.cols();

        ThetaSubproblem sub;
        sub.rho_th = rho_th;
        sub.penalty = penalty;
        sub.eta = CVec::Zero(N);
        sub.B.F.resize(N, K * r);

        // H_RC,k = diag(conj(h^R-CU_k)) G, so H_RC,k X = conj(h) .* (G X)
        for (int k = 0; k < K; ++k)
        {
            const CVec hc = ch.h_ris_cu.col(k).conjugate();
            sub.B.F.middleCols(k * r, r) = std::abs(v(k)) * (GFq.array().colwise() * hc.array()).matrix();
            const double a = std::sqrt(tau(k) * (1.0 + lambda(k)));
            const CVec Gw = ch.G * W.col(k);
            const CVec GQd = ch.G * (Q * ch.h_bs_cu.col(k));
            sub.eta += (a * std::conj(v(k)) * Gw - std::norm(v(k)) * GQd).cwiseProduct(hc);
        }

        sub.A.resize(static_cast<std::size_t>(L));
        for (int l = 0; l < L; ++l)
        {
            const CVec hc = ch.h_ris_tgt.col(l).conjugate();
            sub.A[l].F = (GFq.array().colwise() * hc.array()).matrix() / std::sqrt(ch.sensing_ref(l));
        }
        return sub;
    }

    double penalized_objective(const ThetaSubproblem &sub, const CVec &theta)
    {
        double f = sub.B.quad(theta) - 2.0 * std::real(theta.dot(sub.eta));
        for (const auto &A : sub.A)
        {
            const double short_by = std::max(0.0, sub.rho_th - A.quad(theta));
            f += 0.5 * sub.penalty * short_by * short_by;
        }
        return f;
    }

    CVec euclidean_gradient(const ThetaSubproblem &sub, const CVec &theta)
    {
        CVec g = sub.B.apply(theta) - sub.eta;
        for (const auto &A : sub.A)
        {
            const double short_by = std::max(0.0, sub.rho_th - A.quad(theta));
            if (short_by > 0.0)
                g -= sub.penalty * short_by * A.apply(theta);
        }
        return g;
    }

    CVec project_tangent(const CVec &theta, const CVec &z)
    {
        const RVec radial = (z.array() * theta.array().conjugate()).real();
        return z - (radial.array().cast<cd>() * theta.array()).matrix();
    }

    CVec riemannian_gradient(const ThetaSubproblem &sub, const CVec &theta)
    {
        return project_tangent(theta, euclidean_gradient(sub, theta));
    }

    bool retract(const CVec &theta, const CVec &d, CVec &out)
    {
        out = theta + d;
        for (Eigen::Index n = 0; n < out.size(); ++n)
        {
            const double m = std::abs(out(n));
            if (!(m > 0.0))
                return false;
            out(n) /= m;
        }
        return true;
    }

    CVec conjugate_direction(const CVec &theta, const CVec &grad, const CVec &prev_grad, const CVec &prev_dir)
    {
        const double denom = prev_grad.squaredNorm();
        CVec d = -grad;
        if (denom > 0.0)
        {
            const CVec g_old = project_tangent(theta, prev_grad);
            const double beta = std::max(0.0, std::real(grad.dot(grad - g_old)) / denom);
            d += beta * project_tangent(theta, prev_dir);
        }
        if (!(std::real(grad.dot(d)) < 0.0))
            d = -grad;
        return d;
    }

    RcgResult rcg_minimize(const ThetaSubproblem &sub, const CVec &theta0, const RcgSettings &settings)
    {
        if (theta0.size() != sub.N())
            throw ConfigError("theta0 length does not match the phase subproblem");
        RcgResult res;
        CVec theta;
        if (!retract(theta0, CVec::Zero(theta0.size()), theta))
            throw ConfigError("theta0 has a zero entry");

        double f = penalized_objective(sub, theta);
        CVec grad = riemannian_gradient(sub, theta);
        CVec dir = -grad;
        res.trace.push_back(f);
        double last_step = 0.0;

        for (int it = 0; it < settings.max_iters; ++it)
        {
            res.grad_norm = grad.norm();
            if (res.grad_norm < settings.grad_tol * std::max(1.0, std::abs(f)))
            {
                res.converged = true;
                break;
            }
            const double slope = 2.0 * std::real(grad.dot(dir));
            res.slopes.push_back(slope);

            // Start from 1 / |grad|_inf, or from a few times the last accepted step if that is smaller
            double step = 1.0 / std::max(grad.cwiseAbs().maxCoeff(), 1e-300);
            if (last_step > 0.0)
                step = std::min(step, 4.0 * last_step);
            CVec trial;
            double f_trial = f;
            bool accepted = false;
            for (int bt = 0; bt < settings.max_backtracks; ++bt, step *= settings.backtrack)
            {
                if (!retract(theta, step * dir, trial))
                    continue;
                f_trial = penalized_objective(sub, trial);
                if (f_trial <= f + settings.armijo_c * step * slope)
                {
                    accepted = true;
                    break;
                }
            }
            if (!accepted)
                break; // no decrease representable at this precision

            ++res.iterations;
            last_step = step;
            const CVec grad_new = riemannian_gradient(sub, trial);
            dir = conjugate_direction(trial, grad_new, grad, dir);
            theta = std::move(trial);
            grad = grad_new;
            f = f_trial;
            res.trace.push_back(f);
        }
        if (!res.converged)
        {
            res.grad_norm = grad.norm();
            res.converged = res.grad_norm < settings.grad_tol * std::max(1.0, std::abs(f));
        }
        res.theta = std::move(theta);
        res.objective = f;
        return res;
    }

} // namespace nfisac
