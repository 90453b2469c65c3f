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

#include "nfisac/fp_bcd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

namespace nfisac
{
    namespace
    {
        using Clock = std::chrono::steady_clock;

        double elapsed_ms(Clock::time_point since)
        {
            return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
        }

        CVec random_phases(int N, std::uint64_t seed, std::uint64_t stream)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
            CVec out(N);
            for (int n = 0; n < N; ++n)
                out(n) = std::polar(1.0, phase(rng));
            return out;
        }

        // Sensing shortfall max(0, rho_th - rho_l / ref_l) per target
        RVec sensing_shortfall(const ChannelSet &ch, const BeamformingSolution &sol, double rho_th)
        {
            const CMat ht = cascaded_tgt_channels(ch, sol.theta);
            RVec out(ch.L());
            for (int l = 0; l < ch.L(); ++l)
            {
                const CVec h = ht.col(l);
                const double rho = (sol.W.adjoint() * h).squaredNorm() + std::max(0.0, std::real(h.dot(sol.R0 * h)));
                out(l) = std::max(0.0, rho_th - rho / ch.sensing_ref(l));
            }
            return out;
        }

        bool sensing_met(const ChannelSet &ch, const BeamformingSolution &sol, const ProblemParams &params)
        {
            const EvalReport rep = evaluate(ch, sol, params);
            for (bool ok : rep.sensing_ok)
                if (!ok)
                    return false;
            return true;
        }

        CMat matched_filters(const ChannelSet &ch, const CVec &theta, double power)
        {
            const CMat h = effective_cu_channels(ch, theta);
            const int M = ch.M(), K = ch.K();
            CMat W = CMat::Zero(M, K);
            if (K == 0)
                return W;
            const double scale = std::sqrt(power / K);
            for (int k = 0; k < K; ++k)
            {
                const double n = h.col(k).norm();
                if (n > 0.0)
                    W.col(k) = scale * h.col(k) / n;
                else
                    W(0, k) = scale;
            }
            return W;
        }

        // Rank-one sensing covariance along the dominant eigenvector of sum_l h_l h_l^H / ref_l
        CMat aimed_covariance(const ChannelSet &ch, const CVec &theta, double power)
        {
            const CMat ht = cascaded_tgt_channels(ch, theta);
            CMat Z = CMat::Zero(ch.M(), ch.M());
            for (int l = 0; l < ch.L(); ++l)
                Z.noalias() += ht.col(l) * ht.col(l).adjoint() / ch.sensing_ref(l);
            Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (Z + Z.adjoint()));
            const CVec u = es.eigenvectors().col(ch.M() - 1);
            return power * u * u.adjoint();
        }

        bool anchor_meets_rows(const TransmitSubproblem &sub, const QcqpSettings &qs)
        {
            for (const auto &row : sca_linearize(sub))
            {
                const double scale = std::max(std::abs(row.rhs), 1e-300);
                if (row.lhs(sub.W_anchor, sub.R0_anchor) < row.rhs - qs.feas_tol * scale)
                    return false;
            }
            return true;
        }
    } // namespace

    void BcdConfig::validate() const
    {
        if (!(tol > 0.0))
            throw ConfigError("tolerance must be positive");
        if (max_iters < 0)
            throw ConfigError("max_iters must be non-negative");
        if (!(C1 >= 0.0) || !(C2 >= 0.0) || !(penalty >= 0.0))
            throw ConfigError("proximal weights and penalty must be non-negative");
        if (!(power_split >= 0.0 && power_split <= 1.0))
            throw ConfigError("power_split must lie in [0, 1]");
    }

    std::string to_string(Termination t)
    {
        switch (t)
        {
        case Termination::tolerance:
            return "tolerance";
        case Termination::max_iters:
            return "max-iters";
        case Termination::subproblem_infeasible:
            return "subproblem-infeasible";
        }
        return "unknown";
    }

    double fp_surrogate(const ChannelSet &ch, const BeamformingSolution &sol, const RVec &lambda, const CVec &v,
                        const RVec &tau)
    {
        check_solution_shape(ch, sol);
        const CMat h = effective_cu_channels(ch, sol.theta);
        double f = 0.0;
        for (int k = 0; k < ch.K(); ++k)
        {
            const CVec hk = h.col(k);
            const Eigen::RowVectorXcd proj = hk.adjoint() * sol.W;
            const double denom =
                proj.squaredNorm() + std::max(0.0, std::real(hk.dot(sol.R0 * hk))) + ch.noise_var(k);
            const double a = std::sqrt(tau(k) * (1.0 + lambda(k)));
            f += tau(k) * (std::log1p(lambda(k)) - lambda(k));
            f += 2.0 * a * std::real(std::conj(v(k)) * proj(k));
            f -= std::norm(v(k)) * denom;
        }
        return f;
    }

    double lambda_closed_form(double chi) { return 0.5 * (chi * chi + chi * std::sqrt(chi * chi + 4.0)); }

    cd v_closed_form(const CVec &h, const CMat &W, const CMat &R0, int k, double noise_var, double tau, double lambda)
    {
        const Eigen::RowVectorXcd proj = h.adjoint() * W;
        const double denom = proj.squaredNorm() + std::max(0.0, std::real(h.dot(R0 * h))) + noise_var;
        return std::sqrt(tau * (1.0 + lambda)) * proj(k) / denom;
    }

    std::pair<RVec, CVec> update_lambda_v(const FpState &state, const ChannelSet &ch, const ProblemParams &params)
    {
        const int K = ch.K();
        const CMat h = effective_cu_channels(ch, state.sol.theta);
        RVec lambda(K);
        CVec v(K);
        for (int k = 0; k < K; ++k)
        {
            const CVec hk = h.col(k);
            const double gamma = sinr(ch, state.sol, k);
            v(k) = v_closed_form(hk, state.sol.W, state.sol.R0, k, ch.noise_var(k), params.tau(k), gamma);
            const cd signal = hk.dot(state.sol.W.col(k));
            const double chi = std::real(std::conj(v(k)) * signal) / std::sqrt(params.tau(k));
            lambda(k) = lambda_closed_form(std::max(chi, 0.0));
        }
        return {lambda, v};
    }

    TransmitSubproblem make_transmit_subproblem(const FpState &state, const ChannelSet &ch,
                                                const ProblemParams &params, const BcdConfig &cfg)
    {
        TransmitSubproblem sub;
        sub.h_cu = effective_cu_channels(ch, state.sol.theta);
        sub.h_tgt = cascaded_tgt_channels(ch, state.sol.theta);
        sub.sensing_ref = ch.sensing_ref;
        sub.tau = params.tau;
        sub.lambda = state.lambda;
        sub.v = state.v;
        sub.W_anchor = state.sol.W;
        sub.R0_anchor = state.sol.R0;
        sub.C1 = cfg.C1;
        sub.C2 = cfg.C2;
        sub.P0 = params.P0;
        sub.rho_th = params.rho_th;
        return sub;
    }

    BeamformingSolution initial_solution(const ChannelSet &ch, const ProblemParams &params, const BcdConfig &cfg,
                                         InitMode *mode)
    {
        const int M = ch.M();
        const double p_comm = cfg.power_split * params.P0;
        const double p_sense = params.P0 - p_comm;

        BeamformingSolution sol;
        sol.theta = random_phases(ch.N(), cfg.seed, 0);
        sol.W = matched_filters(ch, sol.theta, p_comm);
        sol.R0 = (M > 0 ? p_sense / M : 0.0) * CMat::Identity(M, M);
        InitMode used = InitMode::plain;

        if (ch.L() > 0 && !sensing_met(ch, sol, params))
        {
            used = InitMode::reaimed_r0;
            sol.R0 = aimed_covariance(ch, sol.theta, p_sense);

            // Steer the phases with the sensing penalty alone, aiming slightly above the threshold
            for (int round = 0; round < 3 && !sensing_met(ch, sol, params); ++round)
            {
                used = InitMode::reaimed_r0_theta;
                ThetaSubproblem sub;
                sub.B.F = CMat::Zero(ch.N(), 0);
                sub.eta = CVec::Zero(ch.N());
                sub.rho_th = 1.05 * params.rho_th;
                sub.penalty = 1.0;
                const CMat Fq = covariance_factor(sol.W, sol.R0);
                const CMat GFq = ch.G * Fq;
                for (int l = 0; l < ch.L(); ++l)
                {
                    const CVec hc = ch.h_ris_tgt.col(l).conjugate();
                    LowRankPsd A;
                    A.F = (GFq.array().colwise() * hc.array()).matrix() / std::sqrt(ch.sensing_ref(l));
                    sub.A.push_back(std::move(A));
                }
                sol.theta = rcg_minimize(sub, sol.theta, cfg.rcg).theta;
                sol.W = matched_filters(ch, sol.theta, p_comm);
                sol.R0 = aimed_covariance(ch, sol.theta, p_sense);
            }
        }
        if (mode)
            *mode = used;
        sol.meta.method = "bcd";
        return sol;
    }

    CycleOutcome bcd_cycle(const FpState &state, const ChannelSet &ch, const ProblemParams &params,
                           const BcdConfig &cfg, const AuxObserver &observer)
    {
        CycleOutcome out;
        out.state = state;
        FpState &s = out.state;
        s.t = state.t + 1;

        auto t0 = Clock::now();
        std::tie(s.lambda, s.v) = update_lambda_v(s, ch, params);
        s.f = fp_surrogate(ch, s.sol, s.lambda, s.v, params.tau);
        out.blocks.after_aux = s.f;
        out.times.aux_ms = elapsed_ms(t0);
        if (observer)
            observer(s, ch);

        t0 = Clock::now();
        const ThetaSubproblem tsub = assemble_theta_subproblem(ch, s.sol.W, s.sol.R0, params.tau, s.lambda, s.v,
                                                               params.rho_th, cfg.penalty);
        const CVec start =
            cfg.warm_start ? s.sol.theta : random_phases(ch.N(), cfg.seed, static_cast<std::uint64_t>(s.t));
        s.sol.theta = rcg_minimize(tsub, start, cfg.rcg).theta;
        s.f = fp_surrogate(ch, s.sol, s.lambda, s.v, params.tau);
        out.blocks.after_theta = s.f;
        out.theta_violation = sensing_shortfall(ch, s.sol, params.rho_th);
        out.times.theta_ms = elapsed_ms(t0);

        t0 = Clock::now();
        const TransmitSubproblem wsub = make_transmit_subproblem(s, ch, params, cfg);
        const QcqpResult q = solve_qcqp(wsub, cfg.qcqp);
        out.transmit_feasible = q.feasible;
        if (q.feasible)
        {
            // Never accept an ascent of the proximal objective from a feasible anchor
            const bool keep_anchor = anchor_meets_rows(wsub, cfg.qcqp) &&
                                     q.objective > transmit_objective(wsub, wsub.W_anchor, wsub.R0_anchor) &&
                                     transmit_power(s.sol) <= params.P0 * (1.0 + kPowerTol);
            if (!keep_anchor)
            {
                s.sol.W = q.W;
                s.sol.R0 = q.R0;
            }
        }
        s.f = fp_surrogate(ch, s.sol, s.lambda, s.v, params.tau);
        out.blocks.after_transmit = s.f;
        out.times.transmit_ms = elapsed_ms(t0);
        out.times.total_ms = out.times.aux_ms + out.times.theta_ms + out.times.transmit_ms;
        return out;
    }

    BcdResult run_bcd(const ChannelSet &ch, const ProblemParams &params, const BcdConfig &cfg,
                      const AuxObserver &observer)
    {
        ch.check_dimensions();
        params.validate(ch.K());
        cfg.validate();
        const auto start = Clock::now();

        BcdResult res;
        SolverReport &rep = res.report;
        FpState state;
        state.sol = initial_solution(ch, params, cfg, &rep.init);
        std::tie(state.lambda, state.v) = update_lambda_v(state, ch, params);
        state.f = fp_surrogate(ch, state.sol, state.lambda, state.v, params.tau);

        EvalReport ev = evaluate(ch, state.sol, params);
        rep.wsr.push_back(ev.wsr);
        rep.surrogate.push_back(state.f);
        rep.violation.push_back(sensing_shortfall(ch, state.sol, params.rho_th));
        rep.blocks.push_back({state.f, state.f, state.f});
        rep.transmit_feasible.push_back(true);

        double best_wsr = -std::numeric_limits<double>::infinity();
        BeamformingSolution best = state.sol;
        bool have_best = false;
        auto consider = [&](const BeamformingSolution &sol, const EvalReport &e, int index)
        {
            if (e.feasible() && e.wsr > best_wsr)
            {
                best_wsr = e.wsr;
                best = sol;
                rep.best_index = index;
                have_best = true;
            }
        };
        consider(state.sol, ev, 0);

        rep.termination = Termination::max_iters;
        for (int t = 1; t <= cfg.max_iters; ++t)
        {
            CycleOutcome out = bcd_cycle(state, ch, params, cfg, observer);
            state = std::move(out.state);
            rep.times.aux_ms += out.times.aux_ms;
            rep.times.theta_ms += out.times.theta_ms;
            rep.times.transmit_ms += out.times.transmit_ms;

            ev = evaluate(ch, state.sol, params);
            rep.wsr.push_back(ev.wsr);
            rep.surrogate.push_back(state.f);
            rep.violation.push_back(out.theta_violation);
            rep.blocks.push_back(out.blocks);
            rep.transmit_feasible.push_back(out.transmit_feasible);
            rep.cycles = t;
            consider(state.sol, ev, t);

            const bool settled = std::abs(rep.wsr[t] - rep.wsr[t - 1]) < cfg.tol;
            if (settled)
            {
                rep.termination = out.transmit_feasible ? Termination::tolerance : Termination::subproblem_infeasible;
                break;
            }
            if (t == cfg.max_iters && !out.transmit_feasible)
                rep.termination = Termination::subproblem_infeasible;
        }

        if (have_best)
        {
            res.solution = std::move(best);
            rep.feasible = true;
        }
        else
        {
            res.solution = state.sol;
            rep.best_index = rep.cycles;
            rep.feasible = false;
        }
        res.solution.meta.method = "bcd";
        res.solution.meta.iterations = rep.cycles;
        rep.times.total_ms = elapsed_ms(start);
        res.solution.meta.runtime_ms = rep.times.total_ms;
        return res;
    }

} // namespace nfisac
