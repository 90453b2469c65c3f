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

#ifndef NFISAC_TESTS_SUPPORT_HPP
#define NFISAC_TESTS_SUPPORT_HPP

// Helpers shared by the unit tests and the acceptance runner. Oracles in here are written from the
// model equations directly and avoid calling the library routine they are used to check.

#include "nfisac/circle_manifold.hpp"
#include "nfisac/convex_subproblem.hpp"
#include "nfisac/dataset.hpp"
#include "nfisac/fp_bcd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nfisac::test
{
    inline CMat random_cmat(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng, double scale = 1.0)
    {
        std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0));
        CMat m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                m(r, c) = cd(g(rng), g(rng));
        return m;
    }

    inline CVec random_cvec(Eigen::Index n, std::mt19937_64 &rng, double scale = 1.0)
    {
        return random_cmat(n, 1, rng, scale).col(0);
    }

    inline CVec random_unit_modulus(Eigen::Index n, std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> u(-kPi, kPi);
        CVec v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = std::polar(1.0, u(rng));
        return v;
    }

    // Random Hermitian PSD matrix with the given trace
    inline CMat random_psd(Eigen::Index m, std::mt19937_64 &rng, double trace)
    {
        const CMat F = random_cmat(m, m, rng);
        CMat R = F * F.adjoint();
        R = 0.5 * (R + R.adjoint());
        return R * (trace / R.trace().real());
    }

    // Scales (W, R0) so that the power equals frac * P0
    inline void scale_power(CMat &W, CMat &R0, double P0, double frac)
    {
        const double p = W.squaredNorm() + R0.trace().real();
        if (p > 0.0)
        {
            const double s = frac * P0 / p;
            W *= std::sqrt(s);
            R0 *= s;
        }
    }

    // Reduced-size scenario config for fast unit tests
    inline ScenarioConfig small_config(std::uint64_t seed, int Nxz = 5, int M = 4, int K = 2, int L = 1)
    {
        ScenarioConfig c;
        c.system.M = M;
        c.system.Nx = c.system.Nz = Nxz;
        c.K = K;
        c.L = L;
        c.seed = seed;
        c.rho_th = 0.5 * M * Nxz * Nxz; // reachable with the default power split at this size
        return c;
    }

    inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    // ------------------------------------------------------------------ phase subproblem oracles

    struct DenseTheta
    {
        CMat B;
        CVec eta;
        std::vector<CMat> A;
        double rho_th = 0.0;
        double C = 0.0;
    };

    // Dense B, eta, A_l built entry by entry from the definitions
    inline DenseTheta dense_theta(const ChannelSet &ch, const CMat &W, const CMat &R0, const RVec &tau,
                                  const RVec &lambda, const CVec &v, double rho_th, double C)
    {
        const int N = ch.N(), K = ch.K(), L = ch.L();
        const CMat Q = W * W.adjoint() + R0;
        DenseTheta d;
        d.B = CMat::Zero(N, N);
        d.eta = CVec::Zero(N);
        d.rho_th = rho_th;
        d.C = C;
        for (int k = 0; k < K; ++k)
        {
            CMat H(N, ch.M());
            for (int n = 0; n < N; ++n)
                for (int m = 0; m < ch.M(); ++m)
                    H(n, m) = std::conj(ch.h_ris_cu(n, k)) * ch.G(n, m);
            d.B += std::norm(v(k)) * H * Q * H.adjoint();
            d.eta += std::sqrt(tau(k) * (1.0 + lambda(k))) * std::conj(v(k)) * H * W.col(k) -
                     std::norm(v(k)) * H * Q * ch.h_bs_cu.col(k);
        }
        for (int l = 0; l < L; ++l)
        {
            CMat H(N, ch.M());
            for (int n = 0; n < N; ++n)
                for (int m = 0; m < ch.M(); ++m)
                    H(n, m) = std::conj(ch.h_ris_tgt(n, l)) * ch.G(n, m);
            d.A.push_back(H * Q * H.adjoint() / ch.sensing_ref(l));
        }
        return d;
    }

    inline double dense_objective(const DenseTheta &d, const CVec &theta)
    {
        double f = std::real(theta.dot(d.B * theta)) - 2.0 * std::real(theta.dot(d.eta));
        for (const auto &A : d.A)
        {
            const double s = std::max(0.0, d.rho_th - std::real(theta.dot(A * theta)));
            f += 0.5 * d.C * s * s;
        }
        return f;
    }

    // Central finite differences of f(theta(phi)) with theta_n = exp(j phi_n)
    template <typename F>
    RVec phase_fd_gradient(F &&f, const CVec &theta, double h = 1e-6)
    {
        RVec g(theta.size());
        for (Eigen::Index n = 0; n < theta.size(); ++n)
        {
            CVec tp = theta, tm = theta;
            tp(n) *= std::polar(1.0, h);
            tm(n) *= std::polar(1.0, -h);
            g(n) = (f(tp) - f(tm)) / (2.0 * h);
        }
        return g;
    }

    // ------------------------------------------------------------------ transmit subproblem oracle

    // Dual function of the linearized transmit subproblem with one sensing row, maximized over
    // (mu, y) >= 0 by a log grid followed by alternating golden-section polishing. By strong
    // duality the maximum equals the optimal objective.
    struct DualReference
    {
        double value = -std::numeric_limits<double>::infinity();
        double mu = 0.0;
        double y = 0.0;
        CMat W;
        CMat R0;
    };

    class QcqpDualOracle
    {
    public:
        explicit QcqpDualOracle(const TransmitSubproblem &sub) : sub_(sub)
        {
            const int M = sub.M(), K = sub.K();
            S_ = CMat::Zero(M, M);
            T_ = CMat::Zero(M, K);
            for (int k = 0; k < K; ++k)
            {
                S_ += std::norm(sub.v(k)) * sub.h_cu.col(k) * sub.h_cu.col(k).adjoint();
                T_.col(k) = std::sqrt(sub.tau(k) * (1.0 + sub.lambda(k))) * sub.v(k) * sub.h_cu.col(k);
            }
            S_ = 0.5 * (S_ + S_.adjoint());
            // Linearized sensing row (one target), written out from the first-order expansion
            const CVec h = sub.h_tgt.col(0);
            const double s = sub.sensing_ref(0);
            aW_ = 2.0 * h * (h.adjoint() * sub.W_anchor) / s;
            aR_ = h * h.adjoint() / s;
            rhs_ = sub.rho_th + (sub.W_anchor.adjoint() * h).squaredNorm() / s;
        }

        double objective(const CMat &W, const CMat &R0) const
        {
            double f = 0.0;
            for (Eigen::Index k = 0; k < W.cols(); ++k)
                f += std::real(W.col(k).dot(S_ * W.col(k))) - 2.0 * std::real(T_.col(k).dot(W.col(k)));
            f += std::real((S_ * R0).trace());
            f += 0.5 * sub_.C1 * (W - sub_.W_anchor).squaredNorm() + 0.5 * sub_.C2 * (R0 - sub_.R0_anchor).squaredNorm();
            return f;
        }

        double row_lhs(const CMat &W, const CMat &R0) const
        {
            return (aW_.array().conjugate() * W.array()).real().sum() +
                   (aR_.array().conjugate() * R0.array()).real().sum();
        }

        double rhs() const { return rhs_; }

        // Inner minimizer of the Lagrangian at (mu, y) and the dual value
        double dual(double mu, double y, CMat *Wout = nullptr, CMat *Rout = nullptr) const
        {
            const int M = sub_.M();
            const CMat lhs = 2.0 * S_ + (sub_.C1 + 2.0 * mu) * CMat::Identity(M, M);
            const CMat W = lhs.ldlt().solve(2.0 * T_ + sub_.C1 * sub_.W_anchor + y * aW_);
            CMat target = sub_.R0_anchor - (S_ + mu * CMat::Identity(M, M) - y * aR_) / sub_.C2;
            target = 0.5 * (target + target.adjoint());
            Eigen::SelfAdjointEigenSolver<CMat> es(target);
            const RVec e = es.eigenvalues().cwiseMax(0.0);
            const CMat R = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
            const double L = objective(W, R) + mu * (W.squaredNorm() + R.trace().real() - sub_.P0) -
                             y * (row_lhs(W, R) - rhs_);
            if (Wout)
                *Wout = W;
            if (Rout)
                *Rout = R;
            return L;
        }

        DualReference solve(int grid = 41) const
        {
            DualReference best;
            auto axis = [&](int i)
            { return i == 0 ? 0.0 : std::pow(10.0, -6.0 + 10.0 * (i - 1) / static_cast<double>(grid - 2)); };
            for (int i = 0; i < grid; ++i)
                for (int j = 0; j < grid; ++j)
                {
                    const double d = dual(axis(i), axis(j));
                    if (d > best.value)
                    {
                        best.value = d;
                        best.mu = axis(i);
                        best.y = axis(j);
                    }
                }
            // Polish: alternate golden-section searches on each coordinate over a shrinking bracket
            double span_mu = std::max(1.0, 10.0 * best.mu), span_y = std::max(1.0, 10.0 * best.y);
            for (int round = 0; round < 60; ++round)
            {
                best.mu = golden([&](double m) { return dual(m, best.y); }, std::max(0.0, best.mu - span_mu),
                                 best.mu + span_mu);
                best.y = golden([&](double y) { return dual(best.mu, y); }, std::max(0.0, best.y - span_y),
                                best.y + span_y);
                span_mu *= 0.7;
                span_y *= 0.7;
            }
            best.value = dual(best.mu, best.y, &best.W, &best.R0);
            return best;
        }

    private:
        template <typename F>
        static double golden(F &&f, double a, double b)
        {
            const double r = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - r * (b - a), d = a + r * (b - a);
            double fc = f(c), fd = f(d);
            for (int it = 0; it < 120 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it)
            {
                if (fc > fd)
                {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - r * (b - a);
                    fc = f(c);
                }
                else
                {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + r * (b - a);
                    fd = f(d);
                }
            }
            // Keep the endpoint if it beats the interior (the bracket may start at zero)
            const double x = 0.5 * (a + b);
            return f(a) > f(x) ? a : x;
        }

        TransmitSubproblem sub_;
        CMat S_, T_, aW_, aR_;
        double rhs_ = 0.0;
    };

    // Random tiny transmit subproblem (M = 2, K = 1, L = 1) with a threshold reachable from the anchor
    inline TransmitSubproblem tiny_transmit_instance(std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        TransmitSubproblem s;
        const int M = 2, K = 1;
        s.h_cu = random_cmat(M, K, rng);
        s.h_tgt = random_cmat(M, 1, rng);
        s.sensing_ref = RVec::Constant(1, 0.5 + u(rng));
        s.tau = RVec::Constant(K, 0.5 + u(rng));
        s.lambda = RVec::Constant(K, 2.0 * u(rng));
        s.v = random_cvec(K, rng);
        s.P0 = 0.5 + u(rng);
        s.W_anchor = random_cmat(M, K, rng);
        s.R0_anchor = random_psd(M, rng, 1.0);
        scale_power(s.W_anchor, s.R0_anchor, s.P0, 0.3 + 0.7 * u(rng));
        s.C1 = 0.2 + 2.0 * u(rng);
        s.C2 = 0.2 + 2.0 * u(rng);
        const CVec h = s.h_tgt.col(0);
        const double rho_anchor =
            ((s.W_anchor.adjoint() * h).squaredNorm() + std::real(h.dot(s.R0_anchor * h))) / s.sensing_ref(0);
        s.rho_th = (0.4 + 0.8 * u(rng)) * rho_anchor;
        return s;
    }

} // namespace nfisac::test

#endif
