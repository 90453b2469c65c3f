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

#include "doctest.h"

#include "support.hpp"

#include <cmath>

using namespace nfisac;
using namespace nfisac::test;

namespace
{
    double true_gain(const TransmitSubproblem &s, const CMat &W, const CMat &R0, int l)
    {
        const CVec h = s.h_tgt.col(l);
        return ((W.adjoint() * h).squaredNorm() + std::real(h.dot(R0 * h))) / s.sensing_ref(l);
    }

    TransmitSubproblem random_instance(std::mt19937_64 &rng, int M, int K, int L)
    {
        std::uniform_real_distribution<double> u(0.2, 1.5);
        TransmitSubproblem s;
        s.h_cu = random_cmat(M, K, rng);
        s.h_tgt = random_cmat(M, L, rng);
        s.sensing_ref = RVec::Constant(L, 1.5);
        s.tau = RVec(K);
        s.lambda = RVec(K);
        for (int k = 0; k < K; ++k)
        {
            s.tau(k) = u(rng);
            s.lambda(k) = u(rng);
        }
        s.v = random_cvec(K, rng);
        s.P0 = 1.0;
        s.W_anchor = random_cmat(M, K, rng);
        s.R0_anchor = random_psd(M, rng, 1.0);
        scale_power(s.W_anchor, s.R0_anchor, s.P0, 0.8);
        s.C1 = s.C2 = 1.0;
        return s;
    }

    double min_eig(const CMat &A)
    {
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
} // namespace

TEST_CASE("Linearized sensing rows")
{
    std::mt19937_64 rng(31);
    TransmitSubproblem s = random_instance(rng, 4, 3, 2);
    s.rho_th = 0.3;
    const auto rows = sca_linearize(s);
    REQUIRE(rows.size() == 2);

    // Exact at the anchor
    for (int l = 0; l < 2; ++l)
        CHECK(rows[l].lhs(s.W_anchor, s.R0_anchor) - rows[l].rhs ==
              doctest::Approx(true_gain(s, s.W_anchor, s.R0_anchor, l) - s.rho_th).epsilon(1e-12));

    SUBCASE("global minorant on random points")
    {
        int bad = 0;
        for (int i = 0; i < 1000; ++i)
        {
            CMat W = random_cmat(4, 3, rng, 2.0);
            CMat R0 = random_psd(4, rng, 1.0);
            for (int l = 0; l < 2; ++l)
            {
                const double lin = rows[l].lhs(W, R0) - rows[l].rhs;
                const double exact = true_gain(s, W, R0, l) - s.rho_th;
                if (lin > exact + 1e-12 * (1.0 + std::abs(exact)))
                    ++bad;
            }
        }
        CHECK(bad == 0);
    }

    SUBCASE("zero anchor keeps only the covariance term")
    {
        TransmitSubproblem z = s;
        z.W_anchor.setZero();
        const auto zr = sca_linearize(z);
        CHECK(zr[0].W_coef.norm() == 0.0);
        CHECK(zr[0].rhs == doctest::Approx(s.rho_th));
    }
}

TEST_CASE("Transmit objective and gradient")
{
    std::mt19937_64 rng(32);
    const TransmitSubproblem s = random_instance(rng, 3, 2, 1);
    const CMat W = random_cmat(3, 2, rng);
    const CMat R0 = random_psd(3, rng, 0.5);

    // Surrogate written directly from its definition
    double g = 0.0;
    const CMat Q = W * W.adjoint() + R0;
    for (int k = 0; k < 2; ++k)
    {
        const CVec h = s.h_cu.col(k);
        g += std::norm(s.v(k)) * std::real(h.dot(Q * h)) -
             2.0 * std::sqrt(s.tau(k) * (1.0 + s.lambda(k))) * std::real(std::conj(s.v(k)) * h.dot(W.col(k)));
    }
    CHECK(transmit_surrogate(s, W, R0) == doctest::Approx(g).epsilon(1e-12));
    const double prox = 0.5 * s.C1 * (W - s.W_anchor).squaredNorm() + 0.5 * s.C2 * (R0 - s.R0_anchor).squaredNorm();
    CHECK(transmit_objective(s, W, R0) == doctest::Approx(g + prox).epsilon(1e-12));

    // Directional derivative versus central differences
    CMat gW, gR0;
    transmit_gradient(s, W, R0, gW, gR0);
    const CMat dW = random_cmat(3, 2, rng);
    CMat dR = random_cmat(3, 3, rng);
    dR = 0.5 * (dR + dR.adjoint());
    const double h = 1e-6;
    const double fd =
        (transmit_objective(s, W + h * dW, R0 + h * dR) - transmit_objective(s, W - h * dW, R0 - h * dR)) / (2.0 * h);
    CHECK(fd == doctest::Approx(real_inner(gW, dW) + real_inner(gR0, dR)).epsilon(1e-6));
}

TEST_CASE("Projection onto the power ball and PSD cone")
{
    std::mt19937_64 rng(33);

    SUBCASE("zero budget")
    {
        CMat W = random_cmat(3, 2, rng), R0 = random_psd(3, rng, 2.0);
        project_power_psd(W, R0, 0.0);
        CHECK(W.norm() == 0.0);
        CHECK(R0.norm() < 1e-15);
    }

    SUBCASE("interior points are fixed")
    {
        CMat W = random_cmat(3, 2, rng), R0 = random_psd(3, rng, 1.0);
        scale_power(W, R0, 1.0, 0.5);
        const CMat W0 = W, R00 = R0;
        project_power_psd(W, R0, 1.0);
        CHECK((W - W0).norm() < 1e-14);
        CHECK((R0 - R00).norm() < 1e-13);
    }

    SUBCASE("variational inequality and idempotence")
    {
        for (int rep = 0; rep < 20; ++rep)
        {
            CMat W = random_cmat(3, 2, rng, 2.0);
            CMat R0 = random_cmat(3, 3, rng, 2.0);
            R0 = 0.5 * (R0 + R0.adjoint());
            const CMat Wx = W, Rx = R0;
            project_power_psd(W, R0, 1.0);
            CHECK(W.squaredNorm() + R0.trace().real() <= 1.0 + 1e-12);
            CHECK(min_eig(R0) >= -1e-12);

            // <X - P(X), Y - P(X)> <= 0 for feasible Y
            for (int j = 0; j < 20; ++j)
            {
                CMat Wy = random_cmat(3, 2, rng), Ry = random_psd(3, rng, 1.0);
                scale_power(Wy, Ry, 1.0, 0.99);
                const double ip = real_inner(Wx - W, Wy - W) + real_inner(Rx - R0, Ry - R0);
                CHECK(ip <= 1e-9);
            }

            CMat W2 = W, R2 = R0;
            project_power_psd(W2, R2, 1.0);
            CHECK((W2 - W).norm() < 1e-10);
            CHECK((R2 - R0).norm() < 1e-10);
        }
    }

    SUBCASE("PSD projection")
    {
        CMat A = random_cmat(4, 4, rng);
        A = 0.5 * (A + A.adjoint());
        const CMat P = project_psd(A);
        CHECK(min_eig(P) >= -1e-13);
        CHECK((project_psd(P) - P).norm() < 1e-12);
        const CMat B = random_psd(4, rng, 1.0);
        CHECK((project_psd(B) - B).norm() < 1e-12);
    }
}

TEST_CASE("QCQP matches the dual reference on tiny instances")
{
    std::mt19937_64 rng(34);
    for (int rep = 0; rep < 6; ++rep)
    {
        const TransmitSubproblem s = tiny_transmit_instance(rng);
        const QcqpResult res = solve_qcqp(s);
        const DualReference ref = QcqpDualOracle(s).solve();
        REQUIRE(res.feasible);
        CHECK(std::abs(res.objective - ref.value) <= 1e-4 * std::max(1.0, std::abs(ref.value)));
        CHECK(res.W.squaredNorm() + res.R0.trace().real() <= s.P0 * (1.0 + 1e-9));
        CHECK(min_eig(res.R0) >= -1e-9);
    }
}

TEST_CASE("QCQP KKT conditions without sensing rows")
{
    // With L = 0 the KKT system only involves the power multiplier, which is recovered here from
    // the W block and then checked against the R0 block.
    std::mt19937_64 rng(35);
    for (int rep = 0; rep < 5; ++rep)
    {
        TransmitSubproblem s = random_instance(rng, 4, 2, 0);
        s.P0 = 0.2 + 0.3 * rep;
        const QcqpResult res = solve_qcqp(s);
        REQUIRE(res.converged);
        CMat gW, gR0;
        transmit_gradient(s, res.W, res.R0, gW, gR0);
        const double wn = res.W.squaredNorm();
        const double mu = wn > 0.0 ? std::max(0.0, -real_inner(gW, res.W) / (2.0 * wn)) : 0.0;
        const double scale = std::max(1.0, gW.norm());
        CHECK((gW + 2.0 * mu * res.W).norm() < 1e-4 * scale);
        const CMat Z = gR0 + mu * CMat::Identity(4, 4);
        CHECK(min_eig(Z) >= -1e-4 * scale);
        CHECK(std::abs(real_inner(Z, res.R0)) < 1e-4 * scale);
        const double slack = s.P0 - (wn + res.R0.trace().real());
        CHECK(slack >= -1e-9 * s.P0);
        CHECK(mu * slack < 1e-4 * scale);
    }
}

TEST_CASE("QCQP edge cases")
{
    std::mt19937_64 rng(36);

    SUBCASE("zero budget")
    {
        TransmitSubproblem s = random_instance(rng, 3, 2, 1);
        s.P0 = 0.0;
        s.rho_th = 0.0;
        s.W_anchor.setZero();
        s.R0_anchor.setZero();
        const QcqpResult res = solve_qcqp(s);
        CHECK(res.W.norm() < 1e-12);
        CHECK(res.R0.norm() < 1e-12);
    }

    SUBCASE("not worse than a feasible anchor")
    {
        for (int rep = 0; rep < 5; ++rep)
        {
            TransmitSubproblem s = random_instance(rng, 4, 3, 2);
            s.rho_th = 0.5 * std::min(true_gain(s, s.W_anchor, s.R0_anchor, 0), true_gain(s, s.W_anchor, s.R0_anchor, 1));
            const QcqpResult res = solve_qcqp(s);
            REQUIRE(res.feasible);
            CHECK(res.objective <= transmit_objective(s, s.W_anchor, s.R0_anchor) + 1e-9);
            // Row tolerance as documented: feas_tol relative to max(rhs, |row| P0)
            for (const auto &row : sca_linearize(s))
            {
                const double norm = std::sqrt(row.W_coef.squaredNorm() + row.R0_coef.squaredNorm());
                CHECK(row.lhs(res.W, res.R0) >= row.rhs - 1e-6 * std::max(row.rhs, norm * s.P0));
            }
        }
    }

    SUBCASE("unreachable threshold is flagged")
    {
        TransmitSubproblem s = random_instance(rng, 3, 2, 1);
        s.rho_th = 1e6;
        const QcqpResult res = solve_qcqp(s);
        CHECK_FALSE(res.feasible);
        CHECK(res.max_violation > 0.0);
    }

    SUBCASE("permuting users permutes the beams")
    {
        TransmitSubproblem s = random_instance(rng, 3, 2, 1);
        s.rho_th = 0.3 * true_gain(s, s.W_anchor, s.R0_anchor, 0);
        TransmitSubproblem p = s;
        p.h_cu.col(0).swap(p.h_cu.col(1));
        std::swap(p.tau(0), p.tau(1));
        std::swap(p.lambda(0), p.lambda(1));
        std::swap(p.v(0), p.v(1));
        p.W_anchor.col(0).swap(p.W_anchor.col(1));
        const QcqpResult a = solve_qcqp(s), b = solve_qcqp(p);
        CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-6));
        CHECK((b.W.col(0) - a.W.col(1)).norm() < 1e-4);
    }

    SUBCASE("invalid inputs")
    {
        TransmitSubproblem s = random_instance(rng, 3, 2, 1);
        s.P0 = -1.0;
        CHECK_THROWS_AS(solve_qcqp(s), ConfigError);
        s = random_instance(rng, 3, 2, 1);
        s.W_anchor = CMat::Zero(2, 2);
        CHECK_THROWS_AS(solve_qcqp(s), ConfigError);
    }
}
