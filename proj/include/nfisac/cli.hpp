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

#ifndef NFISAC_CLI_HPP
#define NFISAC_CLI_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace nfisac
{
    // Exit codes of the command-line front-end
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitFailure = 1; // schema, I/O or solver errors
    inline constexpr int kExitUsage = 2;   // rejected flags or flag values

    // Runs one command line; args excludes the program name. Output goes to out/err instead of the
    // process streams so the commands can be driven from tests.
    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

    // Calls fn(i) for i in [0, count) on up to jobs threads. The first exception by index is rethrown.
    void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &fn);

} // namespace nfisac

#endif
