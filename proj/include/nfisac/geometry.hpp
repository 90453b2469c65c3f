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

#ifndef NFISAC_GEOMETRY_HPP
#define NFISAC_GEOMETRY_HPP

#include "nfisac/types.hpp"

#include <vector>

namespace nfisac
{
    inline constexpr double kSpeedOfLight = 3.0e8; // m/s

    // Path-loss exponents per link; defaults are the simulation values used throughout
    struct PathLossExponents
    {
        double ris_cu = 2.5;
        double bs_ris = 2.2;
        double bs_cu = 3.5;
        double ris_tgt = 2.5;
    };

    // Array sizes and carrier. Wavelength, spacing and reference path loss are derived so that
    // d = lambda / 2 holds exactly.
    struct SystemConfig
    {
        int M = 9;          // BS ULA antennas
        int Nx = 21;        // RIS elements along x (odd)
        int Nz = 21;        // RIS elements along z (odd)
        double fc = 28.0e9; // carrier frequency in [Hz]
        PathLossExponents alpha;

        int N() const { return Nx * Nz; }
        double wavelength() const { return kSpeedOfLight / fc; }
        double spacing() const { return 0.5 * wavelength(); }
        double rho0() const { return wavelength() / (4.0 * kPi); }

        // Throws ConfigError on even Nx/Nz, M < 1 or fc <= 0
        void validate() const;
    };

    // How the sensing threshold is compared with the beampattern gain rho_l.
    // array_gain: rho_l is divided by (beta^BS-R * beta^R-TGT_l)^2 before the comparison.
    // absolute:   rho_l is compared directly.
    enum class SensingReference
    {
        array_gain,
        absolute
    };

    // Node positions in [m]. RIS elements are indexed n = ix * Nz + iz with ix, iz counted from
    // the most negative offset, i.e. the Kronecker order of alpha_x (x) alpha_z.
    struct Placement
    {
        Vec3 bs_center{-4.0, 2.0, 0.0};
        Vec3 ris_center{0.0, 0.0, 0.0};
        std::vector<Vec3> cu;
        std::vector<Vec3> tgt;

        // Filled by element_coordinates()
        std::vector<Vec3> ris_elements;
        std::vector<Vec3> bs_antennas;

        bool has_elements() const { return !ris_elements.empty() && !bs_antennas.empty(); }
    };

    // Euclidean distance tables
    struct DistanceTables
    {
        Eigen::MatrixXd bs_cu;   // M x K
        Eigen::MatrixXd bs_ris;  // M x N
        Eigen::MatrixXd ris_cu;  // N x K
        Eigen::MatrixXd ris_tgt; // N x L
    };

    // All complex channels of one scenario. Per-node vectors are stored as columns.
    struct ChannelSet
    {
        CMat G;          // N x M, BS -> RIS
        CMat h_ris_cu;   // N x K, RIS -> CU k
        CMat h_bs_cu;    // M x K, BS -> CU k
        CMat h_ris_tgt;  // N x L, RIS -> TGT l
        RVec noise_var;  // K, sigma_k^2 in [W]
        RVec sensing_ref; // L, divisor applied to rho_l before comparing with rho_th

        int M() const { return static_cast<int>(G.cols()); }
        int N() const { return static_cast<int>(G.rows()); }
        int K() const { return static_cast<int>(h_ris_cu.cols()); }
        int L() const { return static_cast<int>(h_ris_tgt.cols()); }

        // Throws SchemaError naming the offending field
        void check_dimensions() const;
    };

    struct NearFieldBounds
    {
        double aperture = 0.0;      // D_RIS
        double fresnel_lower = 0.0; // 1.2 D_RIS
        double fresnel_upper = 0.0; // 2 D_RIS^2 / lambda
        std::vector<double> r_h_cu, r_h_tgt;
        std::vector<bool> cu_in_fresnel, tgt_in_fresnel;
    };

    // Angle-of-departure and range from the RIS center to a point
    struct AngleRange
    {
        double azimuth = 0.0;   // psi, measured in the xoy projection from the x-axis
        double elevation = 0.0; // phi, measured from the z-axis
        double range = 0.0;     // r
    };

    AngleRange angle_range_from(const Vec3 &origin, const Vec3 &point);

    Placement element_coordinates(const SystemConfig &cfg, Placement placement);

    DistanceTables pairwise_distances(const Placement &placement);

    CVec ris_array_response(double azimuth, double elevation, double range, const SystemConfig &cfg);

    ChannelSet build_channels(const SystemConfig &cfg, const Placement &placement, const RVec &noise_var,
                              SensingReference reference = SensingReference::array_gain);

    NearFieldBounds near_field_bounds(const SystemConfig &cfg, const Placement &placement);

} // namespace nfisac

#endif
