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

#include "nfisac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nfisac
{
    namespace
    {
        constexpr double kMinDistance = 1e-12;

        double checked_distance(const Vec3 &a, const Vec3 &b, const char *what)
        {
            double r = (a - b).norm();
            if (!(r > kMinDistance))
                throw GeometryError(std::string("coincident points in ") + what);
            return r;
        }

        void require_rows(const CMat &m, Eigen::Index rows, Eigen::Index cols, const char *field)
        {
            if (m.rows() != rows || m.cols() != cols)
                throw SchemaError("field '" + std::string(field) + "': expected " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()));
        }

        CVec spherical_phases(const Eigen::VectorXd &distances, double wavelength)
        {
            const double k = 2.0 * kPi / wavelength;
            CVec out(distances.size());
            for (Eigen::Index i = 0; i < distances.size(); ++i)
                out(i) = std::polar(1.0, -k * distances(i));
            return out;
        }
    } // namespace

    void SystemConfig::validate() const
    {
        if (M < 1)
            throw ConfigError("M must be >= 1");
        if (Nx < 1 || Nz < 1 || Nx % 2 == 0 || Nz % 2 == 0)
            throw ConfigError("Nx and Nz must be odd and >= 1 (got " + std::to_string(Nx) + ", " +
                              std::to_string(Nz) + ")");
        if (!(fc > 0.0))
            throw ConfigError("carrier frequency must be positive");
    }

    void ChannelSet::check_dimensions() const
    {
        const auto n = G.rows(), m = G.cols();
        require_rows(h_ris_cu, n, h_ris_cu.cols(), "h_ris_cu");
        require_rows(h_bs_cu, m, h_ris_cu.cols(), "h_bs_cu");
        require_rows(h_ris_tgt, n, h_ris_tgt.cols(), "h_ris_tgt");
        if (noise_var.size() != h_ris_cu.cols())
            throw SchemaError("field 'noise_var': expected " + std::to_string(h_ris_cu.cols()) + " entries");
        if (sensing_ref.size() != h_ris_tgt.cols())
            throw SchemaError("field 'sensing_ref': expected " + std::to_string(h_ris_tgt.cols()) + " entries");
    }

    AngleRange angle_range_from(const Vec3 &origin, const Vec3 &point)
    {
        const Vec3 rel = point - origin;
        AngleRange out;
        out.range = rel.norm();
        if (!(out.range > kMinDistance))
            throw GeometryError("point coincides with the RIS center");
        out.elevation = std::acos(std::clamp(rel.z() / out.range, -1.0, 1.0));
        out.azimuth = std::atan2(rel.y(), rel.x());
        return out;
    }

    Placement element_coordinates(const SystemConfig &cfg, Placement placement)
    {
        cfg.validate();
        if (placement.ris_center.y() != 0.0)
            throw GeometryError("RIS must lie in the xoz-plane (y = 0)");
        for (const auto &p : placement.cu)
            if (p.z() != 0.0)
                throw GeometryError("CU positions must lie in the xoy-plane (z = 0)");
        for (const auto &p : placement.tgt)
            if (p.z() != 0.0)
                throw GeometryError("TGT positions must lie in the xoy-plane (z = 0)");

        const double d = cfg.spacing();
        const int hx = cfg.Nx / 2, hz = cfg.Nz / 2;
        placement.ris_elements.clear();
        placement.ris_elements.reserve(static_cast<std::size_t>(cfg.N()));
        for (int nx = -hx; nx <= hx; ++nx)
            for (int nz = -hz; nz <= hz; ++nz)
                placement.ris_elements.push_back(placement.ris_center + Vec3(nx * d, 0.0, nz * d));

        // ULA along z, centered at bs_center; antenna 1 has the lowest z
        placement.bs_antennas.clear();
        const double mid = 0.5 * (cfg.M - 1);
        for (int m = 0; m < cfg.M; ++m)
            placement.bs_antennas.push_back(placement.bs_center + Vec3(0.0, 0.0, (m - mid) * d));
        return placement;
    }

    DistanceTables pairwise_distances(const Placement &placement)
    {
        if (!placement.has_elements())
            throw GeometryError("element coordinates not filled");
        const auto &bs = placement.bs_antennas;
        const auto &ris = placement.ris_elements;
        const auto M = static_cast<Eigen::Index>(bs.size());
        const auto N = static_cast<Eigen::Index>(ris.size());
        const auto K = static_cast<Eigen::Index>(placement.cu.size());
        const auto L = static_cast<Eigen::Index>(placement.tgt.size());

        DistanceTables t;
        t.bs_cu.resize(M, K);
        t.bs_ris.resize(M, N);
        t.ris_cu.resize(N, K);
        t.ris_tgt.resize(N, L);
        for (Eigen::Index m = 0; m < M; ++m)
        {
            for (Eigen::Index k = 0; k < K; ++k)
                t.bs_cu(m, k) = checked_distance(bs[m], placement.cu[k], "BS-CU");
            for (Eigen::Index n = 0; n < N; ++n)
                t.bs_ris(m, n) = checked_distance(bs[m], ris[n], "BS-RIS");
        }
        for (Eigen::Index n = 0; n < N; ++n)
        {
            for (Eigen::Index k = 0; k < K; ++k)
                t.ris_cu(n, k) = checked_distance(ris[n], placement.cu[k], "RIS-CU");
            for (Eigen::Index l = 0; l < L; ++l)
                t.ris_tgt(n, l) = checked_distance(ris[n], placement.tgt[l], "RIS-TGT");
        }
        return t;
    }

    CVec ris_array_response(double azimuth, double elevation, double range, const SystemConfig &cfg)
    {
        cfg.validate();
        if (!(range > 0.0))
            throw GeometryError("array response requires a positive range");

        const double lambda = cfg.wavelength(), d = cfg.spacing();
        const double k = 2.0 * kPi / lambda;
        const double ux = std::cos(azimuth) * std::sin(elevation); // direction cosine along x
        const double uz = std::cos(elevation);                     // direction cosine along z
        const double sz2 = std::sin(elevation) * std::sin(elevation);

        const int hx = cfg.Nx / 2, hz = cfg.Nz / 2;
        CVec ax(cfg.Nx), az(cfg.Nz);
        for (int nx = -hx; nx <= hx; ++nx)
        {
            double p = -nx * d * ux + (nx * d) * (nx * d) * (1.0 - ux * ux) / (2.0 * range);
            ax(nx + hx) = std::polar(1.0, -k * p);
        }
        for (int nz = -hz; nz <= hz; ++nz)
        {
            double p = -nz * d * uz + (nz * d) * (nz * d) * sz2 / (2.0 * range);
            az(nz + hz) = std::polar(1.0, -k * p);
        }

        CVec out(cfg.N());
        for (int ix = 0; ix < cfg.Nx; ++ix)
            out.segment(ix * cfg.Nz, cfg.Nz) = ax(ix) * az;
        return out;
    }

    ChannelSet build_channels(const SystemConfig &cfg, const Placement &placement, const RVec &noise_var,
                              SensingReference reference)
    {
        const Placement p = placement.has_elements() ? placement : element_coordinates(cfg, placement);
        const DistanceTables dist = pairwise_distances(p);
        const double lambda = cfg.wavelength(), rho0 = cfg.rho0();
        const int M = cfg.M, N = cfg.N();
        const auto K = static_cast<Eigen::Index>(p.cu.size());
        const auto L = static_cast<Eigen::Index>(p.tgt.size());
        if (noise_var.size() != K)
            throw ConfigError("noise_var must have one entry per CU");

        ChannelSet ch;
        ch.noise_var = noise_var;

        // BS -> RIS, one path-loss prefactor from antenna 1 to the RIS center
        const double beta_bs_ris = rho0 * std::pow(checked_distance(p.bs_antennas[0], p.ris_center, "BS-RIS"),
                                                   -cfg.alpha.bs_ris);
        ch.G.resize(N, M);
        for (int m = 0; m < M; ++m)
            ch.G.col(m) = beta_bs_ris * spherical_phases(dist.bs_ris.row(m).transpose(), lambda);

        ch.h_ris_cu.resize(N, K);
        ch.h_bs_cu.resize(M, K);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const AngleRange ar = angle_range_from(p.ris_center, p.cu[k]);
            const double beta_r = rho0 * std::pow(ar.range, -cfg.alpha.ris_cu);
            ch.h_ris_cu.col(k) = beta_r * ris_array_response(ar.azimuth, ar.elevation, ar.range, cfg);
            const double beta_d = rho0 * std::pow(dist.bs_cu(0, k), -cfg.alpha.bs_cu);
            ch.h_bs_cu.col(k) = beta_d * spherical_phases(dist.bs_cu.col(k), lambda);
        }

        ch.h_ris_tgt.resize(N, L);
        ch.sensing_ref.resize(L);
        for (Eigen::Index l = 0; l < L; ++l)
        {
            const AngleRange ar = angle_range_from(p.ris_center, p.tgt[l]);
            const double beta_t = rho0 * std::pow(ar.range, -cfg.alpha.ris_tgt);
            ch.h_ris_tgt.col(l) = beta_t * ris_array_response(ar.azimuth, ar.elevation, ar.range, cfg);
            const double link = beta_bs_ris * beta_t;
            ch.sensing_ref(l) = reference == SensingReference::array_gain ? link * link : 1.0;
        }
        return ch;
    }

    NearFieldBounds near_field_bounds(const SystemConfig &cfg, const Placement &placement)
    {
        cfg.validate();
        const double d = cfg.spacing(), lambda = cfg.wavelength();
        NearFieldBounds b;
        b.aperture = std::hypot(cfg.Nx * d, cfg.Nz * d);
        b.fresnel_lower = 1.2 * b.aperture;
        b.fresnel_upper = 2.0 * b.aperture * b.aperture / lambda;

        const double r_bs = (placement.bs_center - placement.ris_center).norm();
        auto harmonic = [&](const Vec3 &q)
        {
            const double r_user = (q - placement.ris_center).norm();
            return 2.0 * r_bs * r_user / (r_bs + r_user);
        };
        auto inside = [&](double r) { return b.fresnel_lower < r && r < b.fresnel_upper; };
        for (const auto &q : placement.cu)
        {
            b.r_h_cu.push_back(harmonic(q));
            b.cu_in_fresnel.push_back(inside(b.r_h_cu.back()));
        }
        for (const auto &q : placement.tgt)
        {
            b.r_h_tgt.push_back(harmonic(q));
            b.tgt_in_fresnel.push_back(inside(b.r_h_tgt.back()));
        }
        return b;
    }

} // namespace nfisac
