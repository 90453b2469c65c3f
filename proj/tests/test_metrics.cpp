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
using nfisac::test::random_cmat;
using nfisac::test::random_psd;
using nfisac::test::random_unit_modulus;

namespace
{
    ChannelSet random_channels(std::mt19937_64 &rng, int M, int N, int K, int L)
    {
        ChannelSet ch;
        ch.G = random_cmat(N, M, rng);
        ch.h_ris_cu = random_cmat(N, K, rng);
        ch.h_bs_cu = random_cmat(M, K, rng);
        ch.h_ris_tgt = random_cmat(N, L, rng);
        ch.noise_var = RVec::Constant(K, 0.3);
        ch.sensing_ref = RVec::Constant(L, 2.0);
        return ch;
    }

    BeamformingSolution random_solution(std::mt19937_64 &rng, int M, int N, int K)
    {
        BeamformingSolution s;
        s.W = random_cmat(M, K, rng);
        s.R0 = random_psd(M, rng, 0.5);
        s.theta = random_unit_modulus(N, rng);
        return s;
    }

    // h_k = sum_n conj(G(n, :))^T h_rcu(n, k) theta_n + h_bs(:, k), written with explicit loops
    CVec loop_effective(const ChannelSet &ch, const CVec &theta, int k)
    {
        CVec h = ch.h_bs_cu.col(k);
        for (int m = 0; m < ch.M(); ++m)
            for (int n = 0; n < ch.N(); ++n)
                h(m) += std::conj(ch.G(n, m)) * ch.h_ris_cu(n, k) * theta(n);
        return h;
    }

    // Independent SINR from scalar sums
    double loop_sinr(const CVec &h, const BeamformingSolution &s, int k, double noise)
    {
        auto proj = [&](const CVec &w)
        {
            cd acc = 0.0;
            for (Eigen::Index m = 0; m < h.size(); ++m)
                acc += std::conj(h(m)) * w(m);
            return acc;
        };
        double interference = 0.0;
        for (int j = 0; j < s.W.cols(); ++j)
            if (j != k)
                interference += std::norm(proj(s.W.col(j)));
        cd q = 0.0;
        for (Eigen::Index a = 0; a < h.size(); ++a)
            for (Eigen::Index b = 0; b < h.size(); ++b)
                q += std::conj(h(a)) * s.R0(a, b) * h(b);
        return std::norm(proj(s.W.col(k))) / (interference + q.real() + noise);
    }
} // namespace

TEST_CASE("Effective channels")
{
    std::mt19937_64 rng(11);
    const ChannelSet ch = random_channels(rng, 3, 7, 2, 2);
    const CVec theta = random_unit_modulus(7, rng);
    const CMat h = effective_cu_channels(ch, theta);
    for (int k = 0; k < 2; ++k)
        CHECK((h.col(k) - loop_effective(ch, theta, k)).norm() < 1e-12 * h.col(k).norm());

    // Zero reflection leaves only the direct link
    CHECK(effective_cu_channels(ch, CVec::Zero(7)) == ch.h_bs_cu);
    CHECK(cascaded_tgt_channels(ch, CVec::Zero(7)).norm() == 0.0);
    CHECK_THROWS_AS(effective_cu_channels(ch, CVec::Zero(6)), ConfigError);
}

TEST_CASE("SINR")
{
    std::mt19937_64 rng(12);
    const ChannelSet ch = random_channels(rng, 4, 9, 3, 1);
    BeamformingSolution s = random_solution(rng, 4, 9, 3);
    const CMat h = effective_cu_channels(ch, s.theta);
    for (int k = 0; k < 3; ++k)
        CHECK(sinr(ch, s, k) == doctest::Approx(loop_sinr(h.col(k), s, k, 0.3)).epsilon(1e-12));

    SUBCASE("single user without sensing")
    {
        ChannelSet one = random_channels(rng, 2, 5, 1, 1);
        BeamformingSolution t = random_solution(rng, 2, 5, 1);
        t.R0.setZero();
        const CVec hk = effective_cu_channels(one, t.theta).col(0);
        const double ref = std::norm(hk.dot(t.W.col(0))) / 0.3;
        CHECK(sinr(one, t, 0) == doctest::Approx(ref).epsilon(1e-12));
    }

    SUBCASE("silent beam")
    {
        s.W.col(1).setZero();
        CHECK(sinr(ch, s, 1) == 0.0);
    }

    SUBCASE("non-positive noise")
    {
        ChannelSet bad = ch;
        bad.noise_var(0) = 0.0;
        CHECK_THROWS_AS(sinr(bad, s, 0), ConfigError);
    }
}

TEST_CASE("Beampattern gain")
{
    std::mt19937_64 rng(13);
    const ChannelSet ch = random_channels(rng, 3, 6, 2, 2);
    BeamformingSolution s = random_solution(rng, 3, 6, 2);
    for (int l = 0; l < 2; ++l)
    {
        const CVec h = cascaded_tgt_channels(ch, s.theta).col(l);
        const CMat Q = s.W * s.W.adjoint() + s.R0;
        CHECK(beampattern_gain(ch, s, l) == doctest::Approx(std::real(h.dot(Q * h))).epsilon(1e-12));
    }

    SUBCASE("zero solution")
    {
        s.W.setZero();
        s.R0.setZero();
        CHECK(beampattern_gain(ch, s, 0) == 0.0);
    }

    SUBCASE("isotropic probing")
    {
        s.W.setZero();
        s.R0 = CMat::Identity(3, 3) * (1.0 / 3.0);
        const CVec h = cascaded_tgt_channels(ch, s.theta).col(1);
        CHECK(beampattern_gain(ch, s, 1) == doctest::Approx(h.squaredNorm() / 3.0).epsilon(1e-12));
    }

    SUBCASE("invariant to a global phase on theta")
    {
        BeamformingSolution r = s;
        r.theta *= std::polar(1.0, 1.234);
        CHECK(beampattern_gain(ch, r, 0) == doctest::Approx(beampattern_gain(ch, s, 0)).epsilon(1e-12));
    }
}

TEST_CASE("Evaluation report")
{
    std::mt19937_64 rng(14);
    const ChannelSet ch = random_channels(rng, 3, 8, 2, 2);
    BeamformingSolution s = random_solution(rng, 3, 8, 2);
    ProblemParams params;
    params.tau = RVec::Ones(2);
    params.P0 = 100.0;
    params.rho_th = 0.0;

    const EvalReport rep = evaluate(ch, s, params);
    for (int k = 0; k < 2; ++k)
        CHECK(rep.rate(k) == doctest::Approx(std::log2(1.0 + sinr(ch, s, k))).epsilon(1e-14));
    CHECK(rep.wsr == doctest::Approx(rep.rate.sum()));
    CHECK(weighted_sum_rate_nats(rep.sinr, params.tau) == doctest::Approx(rep.wsr * std::log(2.0)).epsilon(1e-13));
    CHECK(rep.rho_normalized(0) == doctest::Approx(rep.rho(0) / 2.0));
    CHECK(rep.power == doctest::Approx(s.W.squaredNorm() + s.R0.trace().real()));
    CHECK(rep.feasible());

    SUBCASE("pure function")
    {
        const EvalReport again = evaluate(ch, s, params);
        CHECK(again.wsr == rep.wsr);
        CHECK(again.rho == rep.rho);
    }

    SUBCASE("weights scale the sum rate")
    {
        ProblemParams p2 = params;
        p2.tau = RVec::Constant(2, 3.0);
        CHECK(evaluate(ch, s, p2).wsr == doctest::Approx(3.0 * rep.wsr).epsilon(1e-14));
    }

    SUBCASE("per-beam phase rotation leaves the metrics unchanged")
    {
        BeamformingSolution r = s;
        r.W.col(0) *= std::polar(1.0, 0.4);
        r.W.col(1) *= std::polar(1.0, -2.1);
        const EvalReport b = evaluate(ch, r, params);
        CHECK(b.wsr == doctest::Approx(rep.wsr).epsilon(1e-12));
        CHECK(b.rho(1) == doctest::Approx(rep.rho(1)).epsilon(1e-12));
    }

    SUBCASE("zero solution")
    {
        BeamformingSolution z = s;
        z.W.setZero();
        z.R0.setZero();
        ProblemParams p2 = params;
        p2.rho_th = 1.0;
        const EvalReport b = evaluate(ch, z, p2);
        CHECK(b.wsr == 0.0);
        CHECK(b.power == 0.0);
        CHECK_FALSE(b.sensing_ok[0]);
        CHECK_FALSE(b.feasible());
    }

    SUBCASE("power tolerance")
    {
        ProblemParams p2 = params;
        p2.P0 = rep.power * (1.0 - 1e-11);
        CHECK(evaluate(ch, s, p2).power_ok);
        p2.P0 = rep.power * (1.0 - 1e-6);
        CHECK_FALSE(evaluate(ch, s, p2).power_ok);
    }

    SUBCASE("sensing tolerance")
    {
        ProblemParams p2 = params;
        p2.rho_th = rep.min_rho() * (1.0 + 0.5e-3);
        CHECK(evaluate(ch, s, p2).feasible());
        p2.rho_th = rep.min_rho() * (1.0 + 2e-3);
        CHECK_FALSE(evaluate(ch, s, p2).feasible());
    }

    SUBCASE("modulus check")
    {
        BeamformingSolution r = s;
        r.theta(3) *= 1.0 + 1e-6;
        CHECK_FALSE(evaluate(ch, r, params).unit_modulus_ok);
    }

    SUBCASE("no targets")
    {
        ChannelSet none = ch;
        none.h_ris_tgt.resize(8, 0);
        none.sensing_ref.resize(0);
        CHECK(std::isinf(evaluate(none, s, params).min_rho()));
    }

    SUBCASE("shape and parameter errors")
    {
        BeamformingSolution r = s;
        r.W = CMat::Zero(3, 3);
        CHECK_THROWS_AS(evaluate(ch, r, params), ConfigError);
        ProblemParams p2 = params;
        p2.tau(1) = 0.0;
        CHECK_THROWS_AS(evaluate(ch, s, p2), ConfigError);
        p2 = params;
        p2.tau = RVec::Ones(3);
        CHECK_THROWS_AS(evaluate(ch, s, p2), ConfigError);
    }
}
