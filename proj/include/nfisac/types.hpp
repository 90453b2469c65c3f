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

#ifndef NFISAC_TYPES_HPP
#define NFISAC_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nfisac
{
    using cd = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using Vec3 = Eigen::Vector3d;

    inline constexpr double kPi = 3.14159265358979323846;

    // Invalid user-supplied configuration (even RIS dimensions, non-positive noise, ...)
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Degenerate geometry: coincident points, zero distances
    class GeometryError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Malformed or inconsistent interchange data
    class SchemaError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Real inner product <A, B> = Re{tr(A^H B)} used by all solvers on complex variables
    template <typename A, typename B>
    double real_inner(const Eigen::MatrixBase<A> &a, const Eigen::MatrixBase<B> &b)
    {
        return (a.array().conjugate() * b.array()).real().sum();
    }

} // namespace nfisac

#endif
