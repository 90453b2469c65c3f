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

#include "nfisac/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nfisac
{
    void ProblemParams::validate(int K) const
    {
        if (tau.size() != K)
            throw ConfigError("tau must have one weight per CU");
        for (Eigen::Index k = 0; k < tau.size(); ++k)
            if (!(tau(k) > 0.0))
                throw ConfigError("tau weights must be positive");
        if (!(P0 >= 0.0))
            throw ConfigError("P0 must be non-negative");
        if (!(rho_th >= 0.0))
            throw ConfigError("rho_th must be non-negative");
    }

    bool EvalReport::feasible() const
    {
        if (!power_ok || !unit_modulus_ok)
            return false;
        for (bool ok : sensing_ok)
            if (!ok)
                return false;
        return true;
    }

    double EvalReport::min_rho() const
    {
        return rho_normalized.size() == 0 ? std::numeric_limits<double>::infinity() : rho_normalized.minCoeff();
    }

    void check_solution_shape(const ChannelSet &ch, const BeamformingSolution &sol)
    {
        if (sol.W.rows() != ch.M() || sol.W.cols() != ch.K())
            throw ConfigError("W must be " + std::to_string(ch.M()) + "x" + std::to_string(ch.K()));
        if (sol.R0.rows() != ch.M() || sol.R0.cols() != ch.M())
            throw ConfigError("R0 must be " + std::to_string(ch.M()) + "x" + std::to_string(ch.M()));
        if (sol.theta.size() != ch.N())
            throw ConfigError("theta must have " + std::to_string(ch.N()) + " entries");
    }

    CMat effective_cu_channels(const ChannelSet &ch, const CVec &theta)
    {
        if (theta.size() != ch.N())
            throw ConfigError("theta length does not match the RIS size");
        CMat out = ch.G.adjoint() * (ch.h_ris_cu.array().colwise() * theta.array()).matrix();
        out += ch.h_bs_cu;
        return out;
    }

    CMat cascaded_tgt_channels(const ChannelSet &ch, const CVec &theta)
    {
        if (theta.size() != ch.N())
            throw ConfigError("theta length does not match the RIS size");
        return ch.G.adjoint() * (ch.h_ris_tgt.array().colwise() * theta.array()).matrix();
    }

    namespace
    {
        double sinr_from(const CVec &h, const BeamformingSolution &sol, int k, double noise)
        {
            if (!(noise > 0.0))
                throw ConfigError("noise power must be positive");
            const Eigen::RowVectorXcd proj = h.adjoint() * sol.W;
            const double signal = std::norm(proj(k));
            double interference = 0.0;
            for (Eigen::Index j = 0; j < proj.size(); ++j)
                if (j != k)
                    interference += std::norm(proj(j));
            const double sensing = std::max(0.0, std::real(h.dot(sol.R0 * h)));
            return signal / (interference + sensing + noise);
        }

        double gain_from(const CVec &h, const BeamformingSolution &sol)
        {
            return (sol.W.adjoint() * h).squaredNorm() + std::max(0.0, std::real(h.dot(sol.R0 * h)));
        }
    } // namespace

    double sinr(const ChannelSet &ch, const BeamformingSolution &sol, int k)
    {
        check_solution_shape(ch, sol);
        const CMat h = effective_cu_channels(ch, sol.theta);
        return sinr_from(h.col(k), sol, k, ch.noise_var(k));
    }

    double beampattern_gain(const ChannelSet &ch, const BeamformingSolution &sol, int l)
    {
        check_solution_shape(ch, sol);
        const CMat h = cascaded_tgt_channels(ch, sol.theta);
        return gain_from(h.col(l), sol);
    }

    double transmit_power(const BeamformingSolution &sol)
    {
        return sol.W.squaredNorm() + sol.R0.trace().real();
    }

    double weighted_sum_rate_nats(const RVec &sinr, const RVec &tau)
    {
        double s = 0.0;
        for (Eigen::Index k = 0; k < sinr.size(); ++k)
            s += tau(k) * std::log1p(sinr(k));
        return s;
    }

    EvalReport evaluate(const ChannelSet &ch, const BeamformingSolution &sol, const ProblemParams &params)
    {
        check_solution_shape(ch, sol);
        const int K = ch.K(), L = ch.L();
        params.validate(K);

        EvalReport rep;
        const CMat hc = effective_cu_channels(ch, sol.theta);
        rep.sinr.resize(K);
        rep.rate.resize(K);
        for (int k = 0; k < K; ++k)
        {
            rep.sinr(k) = sinr_from(hc.col(k), sol, k, ch.noise_var(k));
            rep.rate(k) = std::log2(1.0 + rep.sinr(k));
        }
        rep.wsr = params.tau.dot(rep.rate);

        const CMat ht = cascaded_tgt_channels(ch, sol.theta);
        rep.rho.resize(L);
        rep.rho_normalized.resize(L);
        for (int l = 0; l < L; ++l)
        {
            rep.rho(l) = gain_from(ht.col(l), sol);
            rep.rho_normalized(l) = rep.rho(l) / ch.sensing_ref(l);
            rep.sensing_ok.push_back(rep.rho_normalized(l) >= params.rho_th * (1.0 - kSensingTol));
        }

        rep.power = transmit_power(sol);
        rep.power_ok = rep.power <= params.P0 * (1.0 + kPowerTol);
        rep.unit_modulus_ok = true;
        for (Eigen::Index n = 0; n < sol.theta.size(); ++n)
            if (std::abs(std::abs(sol.theta(n)) - 1.0) > kModulusTol)
                rep.unit_modulus_ok = false;
        return rep;
    }

} // namespace nfisac
