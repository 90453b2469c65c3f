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

#include "nfisac/dataset.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>
#include <unordered_set>

namespace nfisac
{
    using nlohmann::json;

    namespace
    {
        // ---------------------------------------------------------------- JSON helpers

        const json &field(const json &j, const char *key, const std::string &path)
        {
            if (!j.is_object())
                throw SchemaError("field '" + path + "': expected an object");
            auto it = j.find(key);
            if (it == j.end())
                throw SchemaError("missing field '" + (path.empty() ? std::string(key) : path + "." + key) + "'");
            return *it;
        }

        std::string join(const std::string &path, const char *key)
        {
            return path.empty() ? std::string(key) : path + "." + key;
        }

        template <typename T>
        T number(const json &j, const char *key, const std::string &path)
        {
            const json &v = field(j, key, path);
            if (!v.is_number())
                throw SchemaError("field '" + join(path, key) + "': expected a number");
            return v.get<T>();
        }

        double finite(double x, const char *what)
        {
            if (!std::isfinite(x))
                throw SchemaError(std::string("non-finite value in '") + what + "'");
            return x;
        }

        json vec3_json(const Vec3 &p) { return json::array({p.x(), p.y(), p.z()}); }

        Vec3 vec3_from(const json &j, const std::string &path)
        {
            if (!j.is_array() || j.size() != 3)
                throw SchemaError("field '" + path + "': expected [x, y, z]");
            for (const auto &v : j)
                if (!v.is_number())
                    throw SchemaError("field '" + path + "': expected numbers");
            return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
        }

        json real_json(const RVec &v, const char *what)
        {
            json out = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
                out.push_back(finite(v(i), what));
            return out;
        }

        RVec real_from(const json &j, const std::string &path)
        {
            if (!j.is_array())
                throw SchemaError("field '" + path + "': expected an array");
            RVec out(static_cast<Eigen::Index>(j.size()));
            for (std::size_t i = 0; i < j.size(); ++i)
            {
                if (!j[i].is_number())
                    throw SchemaError("field '" + path + "': expected numbers");
                out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
            }
            return out;
        }

        // Row-major nested arrays
        json complex_json(const CMat &m, const char *what)
        {
            json re = json::array(), im = json::array();
            for (Eigen::Index r = 0; r < m.rows(); ++r)
            {
                json rr = json::array(), ri = json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                {
                    rr.push_back(finite(m(r, c).real(), what));
                    ri.push_back(finite(m(r, c).imag(), what));
                }
                re.push_back(std::move(rr));
                im.push_back(std::move(ri));
            }
            return json{{"re", std::move(re)}, {"im", std::move(im)}};
        }

        json complex_vec_json(const CVec &v, const char *what)
        {
            json re = json::array(), im = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
            {
                re.push_back(finite(v(i).real(), what));
                im.push_back(finite(v(i).imag(), what));
            }
            return json{{"re", std::move(re)}, {"im", std::move(im)}};
        }

        CMat complex_from(const json &j, const std::string &path)
        {
            const json &re = field(j, "re", path);
            const json &im = field(j, "im", path);
            if (!re.is_array() || !im.is_array() || re.size() != im.size())
                throw SchemaError("field '" + path + "': 're' and 'im' must be arrays of equal length");
            const auto rows = static_cast<Eigen::Index>(re.size());
            const Eigen::Index cols = rows > 0 && re[0].is_array() ? static_cast<Eigen::Index>(re[0].size()) : 0;
            CMat out(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
            {
                const json &rr = re[static_cast<std::size_t>(r)], &ri = im[static_cast<std::size_t>(r)];
                if (!rr.is_array() || !ri.is_array() || static_cast<Eigen::Index>(rr.size()) != cols ||
                    static_cast<Eigen::Index>(ri.size()) != cols)
                    throw SchemaError("field '" + path + "': ragged rows");
                for (Eigen::Index c = 0; c < cols; ++c)
                {
                    const json &a = rr[static_cast<std::size_t>(c)], &b = ri[static_cast<std::size_t>(c)];
                    if (!a.is_number() || !b.is_number())
                        throw SchemaError("field '" + path + "': expected numbers");
                    out(r, c) = cd(a.get<double>(), b.get<double>());
                }
            }
            return out;
        }

        CVec complex_vec_from(const json &j, const std::string &path)
        {
            const RVec re = real_from(field(j, "re", path), path + ".re");
            const RVec im = real_from(field(j, "im", path), path + ".im");
            if (re.size() != im.size())
                throw SchemaError("field '" + path + "': 're' and 'im' differ in length");
            CVec out(re.size());
            for (Eigen::Index i = 0; i < re.size(); ++i)
                out(i) = cd(re(i), im(i));
            return out;
        }

        // Parses a matrix and checks it against an expected shape; empty arrays mean zero rows
        CMat complex_shaped(const json &j, const std::string &path, Eigen::Index rows, Eigen::Index cols)
        {
            CMat m = complex_from(j, path);
            if (m.rows() == 0 && rows == 0)
                return CMat(0, cols);
            if (m.rows() != rows || m.cols() != cols)
                throw SchemaError("field '" + path + "': expected " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()));
            return m;
        }

        void require_size(const RVec &v, Eigen::Index n, const std::string &path)
        {
            if (v.size() != n)
                throw SchemaError("field '" + path + "': expected " + std::to_string(n) + " entries, got " +
                                  std::to_string(v.size()));
        }

        // ---------------------------------------------------------------- config

        json disk_json(const Disk &d) { return json{{"center", vec3_json(d.center)}, {"radius", d.radius}}; }

        Disk disk_from(const json &j, const std::string &path)
        {
            Disk d;
            d.center = vec3_from(field(j, "center", path), path + ".center");
            d.radius = number<double>(j, "radius", path);
            return d;
        }

        json config_json(const ScenarioConfig &c)
        {
            return json{
                {"M", c.system.M},
                {"Nx", c.system.Nx},
                {"Nz", c.system.Nz},
                {"fc", c.system.fc},
                {"alpha",
                 {{"ris_cu", c.system.alpha.ris_cu},
                  {"bs_ris", c.system.alpha.bs_ris},
                  {"bs_cu", c.system.alpha.bs_cu},
                  {"ris_tgt", c.system.alpha.ris_tgt}}},
                {"K", c.K},
                {"L", c.L},
                {"P0", c.P0},
                {"rho_th", c.rho_th},
                {"noise_var", real_json(c.noise(), "config.noise_var")},
                {"tau", real_json(c.weights(), "config.tau")},
                {"cu_disk", disk_json(c.cu_disk)},
                {"tgt_disk", disk_json(c.tgt_disk)},
                {"bs_center", vec3_json(c.bs_center)},
                {"ris_center", vec3_json(c.ris_center)},
                {"seed", c.seed},
                {"sigma_e2", c.sigma_e2},
                {"csi_error", c.csi_error == CsiErrorModel::relative ? "relative" : "absolute"},
                {"sensing_reference", c.sensing == SensingReference::array_gain ? "array_gain" : "absolute"},
            };
        }

        ScenarioConfig config_from(const json &j)
        {
            const std::string p = "config";
            ScenarioConfig c;
            c.system.M = number<int>(j, "M", p);
            c.system.Nx = number<int>(j, "Nx", p);
            c.system.Nz = number<int>(j, "Nz", p);
            c.system.fc = number<double>(j, "fc", p);
            const json &a = field(j, "alpha", p);
            c.system.alpha.ris_cu = number<double>(a, "ris_cu", p + ".alpha");
            c.system.alpha.bs_ris = number<double>(a, "bs_ris", p + ".alpha");
            c.system.alpha.bs_cu = number<double>(a, "bs_cu", p + ".alpha");
            c.system.alpha.ris_tgt = number<double>(a, "ris_tgt", p + ".alpha");
            c.K = number<int>(j, "K", p);
            c.L = number<int>(j, "L", p);
            c.P0 = number<double>(j, "P0", p);
            c.rho_th = number<double>(j, "rho_th", p);
            c.noise_var = real_from(field(j, "noise_var", p), p + ".noise_var");
            c.tau = real_from(field(j, "tau", p), p + ".tau");
            if (c.noise_var.size() > 0)
                c.sigma2 = c.noise_var(0);
            c.cu_disk = disk_from(field(j, "cu_disk", p), p + ".cu_disk");
            c.tgt_disk = disk_from(field(j, "tgt_disk", p), p + ".tgt_disk");
            c.bs_center = vec3_from(field(j, "bs_center", p), p + ".bs_center");
            c.ris_center = vec3_from(field(j, "ris_center", p), p + ".ris_center");
            c.seed = number<std::uint64_t>(j, "seed", p);
            c.sigma_e2 = number<double>(j, "sigma_e2", p);
            const std::string err = field(j, "csi_error", p).get<std::string>();
            if (err != "relative" && err != "absolute")
                throw SchemaError("field 'config.csi_error': expected 'relative' or 'absolute'");
            c.csi_error = err == "relative" ? CsiErrorModel::relative : CsiErrorModel::absolute;
            const std::string ref = field(j, "sensing_reference", p).get<std::string>();
            if (ref != "array_gain" && ref != "absolute")
                throw SchemaError("field 'config.sensing_reference': expected 'array_gain' or 'absolute'");
            c.sensing = ref == "array_gain" ? SensingReference::array_gain : SensingReference::absolute;

            require_size(c.noise_var, c.K, "config.noise_var");
            require_size(c.tau, c.K, "config.tau");
            try
            {
                c.validate();
            }
            catch (const ConfigError &e)
            {
                throw SchemaError(std::string("invalid config: ") + e.what());
            }
            return c;
        }

        // Per-node channels are stored as one row per node
        json channels_json(const ChannelSet &ch, bool cu_only, const char *what)
        {
            json out{{"h_ris_cu", complex_json(ch.h_ris_cu.transpose(), what)},
                     {"h_bs_cu", complex_json(ch.h_bs_cu.transpose(), what)}};
            if (!cu_only)
            {
                out["G"] = complex_json(ch.G, what);
                out["h_ris_tgt"] = complex_json(ch.h_ris_tgt.transpose(), what);
                out["noise_var"] = real_json(ch.noise_var, what);
                out["sensing_ref"] = real_json(ch.sensing_ref, what);
            }
            return out;
        }

        ChannelSet channels_from(const json &j, const ScenarioConfig &c)
        {
            const std::string p = "channels";
            const Eigen::Index N = c.system.N(), M = c.system.M, K = c.K, L = c.L;
            ChannelSet ch;
            ch.G = complex_shaped(field(j, "G", p), p + ".G", N, M);
            ch.h_ris_cu = complex_shaped(field(j, "h_ris_cu", p), p + ".h_ris_cu", K, N).transpose();
            ch.h_bs_cu = complex_shaped(field(j, "h_bs_cu", p), p + ".h_bs_cu", K, M).transpose();
            ch.h_ris_tgt = complex_shaped(field(j, "h_ris_tgt", p), p + ".h_ris_tgt", L, N).transpose();
            ch.noise_var = real_from(field(j, "noise_var", p), p + ".noise_var");
            ch.sensing_ref = real_from(field(j, "sensing_ref", p), p + ".sensing_ref");
            require_size(ch.noise_var, K, p + ".noise_var");
            require_size(ch.sensing_ref, L, p + ".sensing_ref");
            return ch;
        }

        std::string with_line(std::size_t line_no, const std::exception &e)
        {
            return "line " + std::to_string(line_no) + ": " + e.what();
        }

        template <typename Rec, typename Parse>
        std::vector<Rec> read_lines(std::istream &is, Parse parse)
        {
            std::vector<Rec> out;
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(is, line))
            {
                ++line_no;
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                if (line.find_first_not_of(" \t") == std::string::npos)
                    continue;
                out.push_back(parse(line, line_no));
            }
            return out;
        }

        std::ifstream open_in(const std::string &path)
        {
            std::ifstream is(path, std::ios::binary);
            if (!is)
                throw std::runtime_error("cannot open '" + path + "' for reading");
            return is;
        }

        std::ofstream open_out(const std::string &path)
        {
            std::ofstream os(path, std::ios::binary | std::ios::trunc);
            if (!os)
                throw std::runtime_error("cannot open '" + path + "' for writing");
            return os;
        }
    } // namespace

    // ---------------------------------------------------------------- config and sampling

    void ScenarioConfig::validate() const
    {
        system.validate();
        if (K < 0 || L < 0)
            throw ConfigError("K and L must be non-negative");
        if (!(P0 > 0.0))
            throw ConfigError("P0 must be positive");
        if (!(rho_th >= 0.0))
            throw ConfigError("rho_th must be non-negative");
        if (!(cu_disk.radius >= 0.0) || !(tgt_disk.radius >= 0.0))
            throw ConfigError("disk radii must be non-negative");
        if (!(sigma_e2 >= 0.0))
            throw ConfigError("sigma_e2 must be non-negative");
        const RVec n = noise();
        for (Eigen::Index k = 0; k < n.size(); ++k)
            if (!(n(k) > 0.0))
                throw ConfigError("noise variances must be positive");
        if (tau.size() != 0 && tau.size() != K)
            throw ConfigError("tau must have K entries");
        if (noise_var.size() != 0 && noise_var.size() != K)
            throw ConfigError("noise_var must have K entries");
        const RVec w = weights();
        for (Eigen::Index k = 0; k < w.size(); ++k)
            if (!(w(k) > 0.0))
                throw ConfigError("tau weights must be positive");
    }

    RVec ScenarioConfig::noise() const
    {
        return noise_var.size() == K ? noise_var : RVec::Constant(K, sigma2);
    }

    RVec ScenarioConfig::weights() const { return tau.size() == K ? tau : RVec::Ones(K); }

    ProblemParams ScenarioConfig::problem() const
    {
        ProblemParams p;
        p.tau = weights();
        p.P0 = P0;
        p.rho_th = rho_th;
        return p;
    }

    std::mt19937_64 scenario_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(stream)};
        return std::mt19937_64(seq);
    }

    Vec3 sample_in_disk(const Disk &disk, std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double r = disk.radius * std::sqrt(unit(rng));
        const double phi = 2.0 * kPi * unit(rng);
        return disk.center + Vec3(r * std::cos(phi), r * std::sin(phi), 0.0);
    }

    Scenario sample_scenario(const ScenarioConfig &cfg, std::uint64_t index)
    {
        cfg.validate();
        std::mt19937_64 rng = scenario_rng(cfg.seed, index, 0);
        Scenario s;
        s.placement.bs_center = cfg.bs_center;
        s.placement.ris_center = cfg.ris_center;
        for (int k = 0; k < cfg.K; ++k)
            s.placement.cu.push_back(sample_in_disk(cfg.cu_disk, rng));
        for (int l = 0; l < cfg.L; ++l)
            s.placement.tgt.push_back(sample_in_disk(cfg.tgt_disk, rng));
        s.channels = build_channels(cfg.system, s.placement, cfg.noise(), cfg.sensing);
        return s;
    }

    ChannelSet perturb_csi(const ChannelSet &ch, double sigma_e2, std::mt19937_64 &rng, CsiErrorModel model)
    {
        if (!(sigma_e2 >= 0.0))
            throw ConfigError("sigma_e2 must be non-negative");
        ChannelSet out = ch;
        if (sigma_e2 == 0.0)
            return out;
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto perturb = [&](CMat &H)
        {
            for (Eigen::Index c = 0; c < H.cols(); ++c)
            {
                const double var = model == CsiErrorModel::relative
                                       ? sigma_e2 * H.col(c).squaredNorm() / static_cast<double>(H.rows())
                                       : sigma_e2;
                const double s = std::sqrt(0.5 * var);
                for (Eigen::Index r = 0; r < H.rows(); ++r)
                {
                    const double re = gauss(rng);
                    const double im = gauss(rng);
                    H(r, c) += cd(s * re, s * im);
                }
            }
        };
        perturb(out.h_ris_cu);
        perturb(out.h_bs_cu);
        return out;
    }

    CsiRecord make_record(const ScenarioConfig &cfg, std::uint64_t index)
    {
        Scenario s = sample_scenario(cfg, index);
        CsiRecord rec;
        rec.scenario_id = index;
        rec.config = cfg;
        rec.config.noise_var = cfg.noise();
        rec.config.tau = cfg.weights();
        rec.placement.bs_center = cfg.bs_center;
        rec.placement.ris_center = cfg.ris_center;
        rec.placement.cu = s.placement.cu;
        rec.placement.tgt = s.placement.tgt;
        rec.channels = std::move(s.channels);
        rec.sigma_e2 = cfg.sigma_e2;
        if (cfg.sigma_e2 > 0.0)
        {
            std::mt19937_64 rng = scenario_rng(cfg.seed, index, 1);
            rec.perturbed = perturb_csi(rec.channels, cfg.sigma_e2, rng, cfg.csi_error);
        }
        return rec;
    }

    // ---------------------------------------------------------------- JSONL

    std::string to_json_line(const CsiRecord &rec)
    {
        json placement{{"cu", json::array()}, {"tgt", json::array()}};
        for (const auto &p : rec.placement.cu)
            placement["cu"].push_back(vec3_json(p));
        for (const auto &p : rec.placement.tgt)
            placement["tgt"].push_back(vec3_json(p));

        json j{{"scenario_id", rec.scenario_id},
               {"config", config_json(rec.config)},
               {"placement", std::move(placement)},
               {"channels", channels_json(rec.channels, false, "channels")},
               {"sigma_e2", rec.sigma_e2}};
        if (rec.perturbed)
            j["perturbed"] = channels_json(*rec.perturbed, true, "perturbed");
        return j.dump();
    }

    std::string to_json_line(const SolutionRecord &rec)
    {
        const auto &s = rec.solution;
        json j{{"scenario_id", rec.scenario_id},
               {"W", complex_json(s.W, "W")},
               {"R0", complex_json(s.R0, "R0")},
               {"theta", complex_vec_json(s.theta, "theta")},
               {"meta",
                {{"method", s.meta.method},
                 {"runtime_ms", finite(s.meta.runtime_ms, "meta.runtime_ms")},
                 {"iterations", s.meta.iterations}}}};
        return j.dump();
    }

    CsiRecord csi_from_json_line(const std::string &line, std::size_t line_no)
    {
        try
        {
            const json j = json::parse(line);
            CsiRecord rec;
            rec.scenario_id = number<std::uint64_t>(j, "scenario_id", "");
            rec.config = config_from(field(j, "config", ""));
            const json &pl = field(j, "placement", "");
            rec.placement.bs_center = rec.config.bs_center;
            rec.placement.ris_center = rec.config.ris_center;
            for (const auto &p : field(pl, "cu", "placement"))
                rec.placement.cu.push_back(vec3_from(p, "placement.cu"));
            for (const auto &p : field(pl, "tgt", "placement"))
                rec.placement.tgt.push_back(vec3_from(p, "placement.tgt"));
            if (static_cast<int>(rec.placement.cu.size()) != rec.config.K)
                throw SchemaError("field 'placement.cu': expected " + std::to_string(rec.config.K) + " positions");
            if (static_cast<int>(rec.placement.tgt.size()) != rec.config.L)
                throw SchemaError("field 'placement.tgt': expected " + std::to_string(rec.config.L) + " positions");
            rec.channels = channels_from(field(j, "channels", ""), rec.config);
            rec.sigma_e2 = number<double>(j, "sigma_e2", "");
            if (auto it = j.find("perturbed"); it != j.end() && !it->is_null())
            {
                ChannelSet p = rec.channels;
                const Eigen::Index N = rec.config.system.N(), M = rec.config.system.M, K = rec.config.K;
                p.h_ris_cu = complex_shaped(field(*it, "h_ris_cu", "perturbed"), "perturbed.h_ris_cu", K, N).transpose();
                p.h_bs_cu = complex_shaped(field(*it, "h_bs_cu", "perturbed"), "perturbed.h_bs_cu", K, M).transpose();
                rec.perturbed = std::move(p);
            }
            return rec;
        }
        catch (const json::exception &e)
        {
            throw SchemaError(with_line(line_no, e));
        }
        catch (const SchemaError &e)
        {
            throw SchemaError(with_line(line_no, e));
        }
    }

    SolutionRecord solution_from_json_line(const std::string &line, std::size_t line_no)
    {
        try
        {
            const json j = json::parse(line);
            SolutionRecord rec;
            rec.scenario_id = number<std::uint64_t>(j, "scenario_id", "");
            auto &s = rec.solution;
            s.W = complex_from(field(j, "W", ""), "W");
            s.R0 = complex_from(field(j, "R0", ""), "R0");
            s.theta = complex_vec_from(field(j, "theta", ""), "theta");
            if (s.R0.rows() != s.R0.cols())
                throw SchemaError("field 'R0': expected a square matrix");
            if (s.W.rows() != s.R0.rows() && s.W.rows() != 0)
                throw SchemaError("field 'W': row count differs from R0");
            if (s.W.rows() == 0)
                s.W.resize(s.R0.rows(), 0);
            const json &meta = field(j, "meta", "");
            s.meta.method = field(meta, "method", "meta").get<std::string>();
            s.meta.runtime_ms = number<double>(meta, "runtime_ms", "meta");
            s.meta.iterations = number<int>(meta, "iterations", "meta");
            return rec;
        }
        catch (const json::exception &e)
        {
            throw SchemaError(with_line(line_no, e));
        }
        catch (const SchemaError &e)
        {
            throw SchemaError(with_line(line_no, e));
        }
    }

    void write_dataset(std::ostream &os, const std::vector<CsiRecord> &records)
    {
        for (const auto &r : records)
            os << to_json_line(r) << '\n';
    }

    void write_dataset(const std::string &path, const std::vector<CsiRecord> &records)
    {
        auto os = open_out(path);
        write_dataset(os, records);
    }

    std::vector<CsiRecord> read_dataset(std::istream &is)
    {
        auto out = read_lines<CsiRecord>(is, csi_from_json_line);
        std::unordered_set<std::uint64_t> seen;
        for (const auto &r : out)
            if (!seen.insert(r.scenario_id).second)
                throw SchemaError("duplicate scenario_id " + std::to_string(r.scenario_id));
        return out;
    }

    std::vector<CsiRecord> read_dataset(const std::string &path)
    {
        auto is = open_in(path);
        return read_dataset(is);
    }

    void write_solutions(std::ostream &os, const std::vector<SolutionRecord> &records)
    {
        for (const auto &r : records)
            os << to_json_line(r) << '\n';
    }

    void write_solutions(const std::string &path, const std::vector<SolutionRecord> &records)
    {
        auto os = open_out(path);
        write_solutions(os, records);
    }

    std::vector<SolutionRecord> read_solutions(std::istream &is)
    {
        return read_lines<SolutionRecord>(is, solution_from_json_line);
    }

    std::vector<SolutionRecord> read_solutions(const std::string &path)
    {
        auto is = open_in(path);
        return read_solutions(is);
    }

    // ---------------------------------------------------------------- evaluation table

    EvalRow score(const CsiRecord &rec, const SolutionRecord &sol, bool perfect_csi)
    {
        const ChannelSet &ch = perfect_csi ? rec.channels : rec.observed();
        try
        {
            check_solution_shape(ch, sol.solution);
        }
        catch (const ConfigError &e)
        {
            throw SchemaError("scenario " + std::to_string(rec.scenario_id) + ": " + e.what());
        }
        const EvalReport ev = evaluate(ch, sol.solution, rec.config.problem());
        EvalRow row;
        row.scenario_id = rec.scenario_id;
        row.method = sol.solution.meta.method;
        row.K = ch.K();
        row.L = ch.L();
        row.N = ch.N();
        row.P0 = rec.config.P0;
        row.sigma_e2 = rec.sigma_e2;
        row.wsr = ev.wsr;
        row.min_rho = ev.min_rho();
        row.power_used = ev.power;
        row.feasible = ev.feasible();
        row.runtime_ms = sol.solution.meta.runtime_ms;
        return row;
    }

    void export_eval_csv(std::ostream &os, const std::vector<EvalRow> &rows)
    {
        std::ostringstream out;
        out.imbue(std::locale::classic());
        out << std::setprecision(17);
        out << kEvalCsvHeader << '\n';
        for (const auto &r : rows)
        {
            out << r.scenario_id << ',' << r.method << ',' << r.K << ',' << r.L << ',' << r.N << ',' << r.P0 << ','
                << r.sigma_e2 << ',' << r.wsr << ',' << r.min_rho << ',' << r.power_used << ','
                << (r.feasible ? 1 : 0) << ',' << r.runtime_ms << '\n';
        }
        os << out.str();
    }

    void export_eval_csv(const std::string &path, const std::vector<EvalRow> &rows)
    {
        auto os = open_out(path);
        export_eval_csv(os, rows);
    }

    std::vector<EvalRow> read_eval_csv(std::istream &is)
    {
        std::vector<EvalRow> rows;
        std::string line;
        if (!std::getline(is, line) || line != kEvalCsvHeader)
            throw SchemaError("evaluation CSV: unexpected header");
        std::size_t line_no = 1;
        while (std::getline(is, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cells.push_back(cell);
            if (cells.size() != 12)
                throw SchemaError("line " + std::to_string(line_no) + ": expected 12 columns");
            try
            {
                EvalRow r;
                r.scenario_id = std::stoull(cells[0]);
                r.method = cells[1];
                r.K = std::stoi(cells[2]);
                r.L = std::stoi(cells[3]);
                r.N = std::stoi(cells[4]);
                r.P0 = std::stod(cells[5]);
                r.sigma_e2 = std::stod(cells[6]);
                r.wsr = std::stod(cells[7]);
                r.min_rho = cells[8] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cells[8]);
                r.power_used = std::stod(cells[9]);
                r.feasible = cells[10] == "1";
                r.runtime_ms = std::stod(cells[11]);
                rows.push_back(std::move(r));
            }
            catch (const std::logic_error &e)
            {
                throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return rows;
    }

} // namespace nfisac
