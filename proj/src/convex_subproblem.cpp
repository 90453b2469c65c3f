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

#include "nfisac/convex_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nfisac
{
    namespace
    {
        CMat hermitian_part(const CMat &A) { return 0.5 * (A + A.adjoint()); }

        // S = sum_k |v_k|^2 h_k h_k^H
        CMat weighted_gram(const TransmitSubproblem &sub)
        {
            const int M = sub.M();
            CMat S = CMat::Zero(M, M);
            for (int k = 0; k < sub.K(); ++k)
                S.noalias() += std::norm(sub.v(k)) * sub.h_cu.col(k) * sub.h_cu.col(k).adjoint();
            return hermitian_part(S);
        }

        // Column k: sqrt(tau_k (1 + lambda_k)) v_k h_k
        CMat linear_term(const TransmitSubproblem &sub)
        {
            CMat T(sub.M(), sub.K());
            for (int k = 0; k < sub.K(); ++k)
                T.col(k) = std::sqrt(sub.tau(k) * (1.0 + sub.lambda(k))) * sub.v(k) * sub.h_cu.col(k);
            return T;
        }

        // Upper bound of <Wc, W> + <Rc, R0> over the power/PSD set
        double linear_max(const LinearizedSensing &row, double P0)
        {
            const double a = row.W_coef.norm();
            Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(row.R0_coef), Eigen::EigenvaluesOnly);
            const double b = es.eigenvalues().maxCoeff();
            double t = 0.0;
            if (b > 0.0)
                t = std::clamp(P0 - a * a / (4.0 * b * b), 0.0, P0);
            return a * std::sqrt(P0 - t) + b * t;
        }

        struct Block
        {
            CMat W;
            CMat R0;
        };

        double block_norm2(const CMat &dW, const CMat &dR) { return dW.squaredNorm() + dR.squaredNorm(); }
    } // namespace

    void TransmitSubproblem::validate() const
    {
        const int m = M(), k = K(), l = L();
        if (h_tgt.rows() != m)
            throw ConfigError("h_tgt must have M rows");
        if (sensing_ref.size() != l || tau.size() != k || lambda.size() != k || v.size() != k)
            throw ConfigError("auxiliary vectors do not match K or L");
        if (W_anchor.rows() != m || W_anchor.cols() != k)
            throw ConfigError("W anchor must be M x K");
        if (R0_anchor.rows() != m || R0_anchor.cols() != m)
            throw ConfigError("R0 anchor must be M x M");
        if (!(C1 >= 0.0) || !(C2 >= 0.0))
            throw ConfigError("proximal weights must be non-negative");
        if (!(P0 >= 0.0))
            throw ConfigError("P0 must be non-negative");
        for (int i = 0; i < l; ++i)
            if (!(sensing_ref(i) > 0.0))
                throw ConfigError("sensing reference must be positive");
        for (int i = 0; i < k; ++i)
            if (!(lambda(i) > -1.0))
                throw ConfigError("lambda must exceed -1");
    }

    double LinearizedSensing::lhs(const CMat &W, const CMat &R0) const
    {
        return real_inner(W_coef, W) + real_inner(R0_coef, R0);
    }

    std::vector<LinearizedSensing> sca_linearize(const TransmitSubproblem &sub)
    {
        std::vector<LinearizedSensing> rows;
        rows.reserve(static_cast<std::size_t>(sub.L()));
        for (int l = 0; l < sub.L(); ++l)
        {
            const CVec h = sub.h_tgt.col(l);
            const double s = sub.sensing_ref(l);
            const CMat hh = h * h.adjoint();
            LinearizedSensing row;
            row.W_coef = (2.0 / s) * hh * sub.W_anchor;
            row.R0_coef = hermitian_part(hh / s);
            row.rhs = sub.rho_th + (sub.W_anchor.adjoint() * h).squaredNorm() / s;
            rows.push_back(std::move(row));
        }
        return rows;
    }

    double transmit_surrogate(const TransmitSubproblem &sub, const CMat &W, const CMat &R0)
    {
        const CMat S = weighted_gram(sub);
        const CMat T = linear_term(sub);
        return real_inner(W, S * W) - 2.0 * real_inner(T, W) + real_inner(S, R0);
    }

    double transmit_objective(const TransmitSubproblem &sub, const CMat &W, const CMat &R0)
    {
        return transmit_surrogate(sub, W, R0) + 0.5 * sub.C1 * (W - sub.W_anchor).squaredNorm() +
               0.5 * sub.C2 * (R0 - sub.R0_anchor).squaredNorm();
    }

    void transmit_gradient(const TransmitSubproblem &sub, const CMat &W, const CMat &R0, CMat &gW, CMat &gR0)
    {
        const CMat S = weighted_gram(sub);
        gW = 2.0 * S * W - 2.0 * linear_term(sub) + sub.C1 * (W - sub.W_anchor);
        gR0 = S + sub.C2 * (R0 - sub.R0_anchor);
    }

    CMat project_psd(const CMat &A)
    {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(A));
        const RVec e = es.eigenvalues().cwiseMax(0.0);
        return hermitian_part(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint());
    }

    void project_power_psd(CMat &W, CMat &R0, double P0)
    {
        if (!(P0 > 0.0))
        {
            W.setZero();
            R0.setZero();
            return;
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(R0));
        const RVec e = es.eigenvalues();
        const double w2 = W.squaredNorm();

        // Budget used after shifting the spectrum by mu and scaling W by 1 / (1 + 2 mu)
        auto used = [&](double mu)
        {
            const double s = 1.0 + 2.0 * mu;
            return w2 / (s * s) + (e.array() - mu).cwiseMax(0.0).sum();
        };

        double mu = 0.0;
        if (used(0.0) > P0)
        {
            double lo = 0.0;
            double hi = std::max(e.maxCoeff(), 0.0) + std::max(0.0, 0.5 * (std::sqrt(w2 / P0) - 1.0));
            while (used(hi) > P0)
                hi = 2.0 * hi + 1e-300;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it)
            {
                const double mid = 0.5 * (lo + hi);
                (used(mid) > P0 ? lo : hi) = mid;
            }
            mu = hi; // feasible side
        }
        W /= (1.0 + 2.0 * mu);
        const RVec r = (e.array() - mu).cwiseMax(0.0);
        R0 = hermitian_part(es.eigenvectors() * r.asDiagonal() * es.eigenvectors().adjoint());
    }

    QcqpResult solve_qcqp(const TransmitSubproblem &sub, const QcqpSettings &settings)
    {
        sub.validate();
        const int L = sub.L();
        const double P0 = sub.P0;
        const std::vector<LinearizedSensing> rows = sca_linearize(sub);

        // Constraints as c_l(X) = (rhs_l - <a_l, X>) / |a_l| <= 0 with unit-norm rows
        RVec row_norm(L), row_tol(L);
        bool certainly_infeasible = false;
        for (int l = 0; l < L; ++l)
        {
            row_norm(l) = std::sqrt(block_norm2(rows[l].W_coef, rows[l].R0_coef));
            row_tol(l) = settings.feas_tol * std::max(rows[l].rhs, row_norm(l) * std::max(P0, 1e-300));
            if (linear_max(rows[l], P0) < rows[l].rhs - row_tol(l))
                certainly_infeasible = true;
        }
        auto violation = [&](const CMat &W, const CMat &R0, int l)
        { return rows[l].rhs - rows[l].lhs(W, R0); };

        const CMat S = weighted_gram(sub);
        const CMat T = linear_term(sub);
        Eigen::SelfAdjointEigenSolver<CMat> es(S, Eigen::EigenvaluesOnly);
        const double lip_f = std::max({2.0 * std::max(es.eigenvalues().maxCoeff(), 0.0) + sub.C1, sub.C2, 1e-12});
        const double tol = settings.kkt_tol * std::max(1.0, P0);

        auto objective_grad = [&](const CMat &W, const CMat &R0, CMat &gW, CMat &gR0)
        {
            gW = 2.0 * S * W - 2.0 * T + sub.C1 * (W - sub.W_anchor);
            gR0 = S + sub.C2 * (R0 - sub.R0_anchor);
        };

        QcqpResult res;
        res.multipliers = RVec::Zero(L);
        CMat W = sub.W_anchor, R0 = sub.R0_anchor;
        project_power_psd(W, R0, P0);

        double rho = lip_f;
        const double rho_cap = 1e10 * lip_f;
        double prev_viol = std::numeric_limits<double>::infinity();
        const int max_outer = certainly_infeasible ? std::min(settings.max_outer, 10) : settings.max_outer;
        RVec &y = res.multipliers;

        for (int outer = 0; outer < std::max(max_outer, 1); ++outer)
        {
            ++res.outer_iterations;
            const double lip = lip_f + rho * std::max(L, 1);

            // Accelerated projected gradient on the augmented Lagrangian, adaptive restart
            CMat Wy = W, Ry = R0, gW, gR;
            double t = 1.0;
            for (int it = 0; it < settings.max_inner; ++it)
            {
                ++res.inner_iterations;
                objective_grad(Wy, Ry, gW, gR);
                for (int l = 0; l < L; ++l)
                {
                    const double m = std::max(0.0, y(l) + rho * violation(Wy, Ry, l) / row_norm(l));
                    if (m > 0.0)
                    {
                        gW -= (m / row_norm(l)) * rows[l].W_coef;
                        gR -= (m / row_norm(l)) * rows[l].R0_coef;
                    }
                }
                CMat Wn = Wy - gW / lip, Rn = Ry - gR / lip;
                project_power_psd(Wn, Rn, P0);
                const double step = lip * std::sqrt(block_norm2(Wy - Wn, Ry - Rn));

                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                const bool restart = real_inner(Wy - Wn, Wn - W) + real_inner(Ry - Rn, Rn - R0) > 0.0;
                if (restart)
                {
                    Wy = Wn;
                    Ry = Rn;
                    t = 1.0;
                }
                else
                {
                    const double beta = (t - 1.0) / t_next;
                    Wy = Wn + beta * (Wn - W);
                    Ry = Rn + beta * (Rn - R0);
                    t = t_next;
                }
                W = std::move(Wn);
                R0 = std::move(Rn);
                if (step <= 0.1 * tol)
                    break;
            }

            // Multiplier update and KKT check
            double viol = 0.0, comp = 0.0;
            bool rows_ok = true;
            for (int l = 0; l < L; ++l)
            {
                const double c = violation(W, R0, l);
                y(l) = std::max(0.0, y(l) + rho * c / row_norm(l));
                viol = std::max(viol, c);
                if (c > row_tol(l))
                    rows_ok = false;
                comp = std::max(comp, std::abs(y(l) * c / row_norm(l)));
            }
            objective_grad(W, R0, gW, gR);
            for (int l = 0; l < L; ++l)
            {
                gW -= (y(l) / row_norm(l)) * rows[l].W_coef;
                gR -= (y(l) / row_norm(l)) * rows[l].R0_coef;
            }
            CMat Wp = W - gW, Rp = R0 - gR;
            project_power_psd(Wp, Rp, P0);
            const double stat = std::sqrt(block_norm2(W - Wp, R0 - Rp));

            res.max_violation = std::max(viol, 0.0);
            res.kkt_residual = std::max(stat, comp);
            res.feasible = rows_ok;
            if (rows_ok && stat <= tol && comp <= tol)
            {
                res.converged = true;
                break;
            }
            if (viol > 0.25 * prev_viol && rho < rho_cap)
                rho *= 5.0;
            prev_viol = std::max(viol, 0.0);
        }

        if (certainly_infeasible)
            res.feasible = false;
        res.W = std::move(W);
        res.R0 = std::move(R0);
        res.objective = transmit_objective(sub, res.W, res.R0);
        return res;
    }

} // namespace nfisac
