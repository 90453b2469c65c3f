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

#include "nfisac/cli.hpp"

#include "nfisac/dataset.hpp"
#include "nfisac/fp_bcd.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace nfisac
{
    using nlohmann::json;

    void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &fn)
    {
        const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex mu;
        std::size_t failed_at = count;
        std::exception_ptr failure;
        auto work = [&]
        {
            for (std::size_t i = next++; i < count; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < failed_at)
                    {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    namespace
    {
        struct UsageError : std::runtime_error
        {
            using std::runtime_error::runtime_error;
        };

        // ---------------------------------------------------------------- shared flags

        struct ScenarioFlags
        {
            ScenarioConfig cfg;
            std::string csi_error = "relative";
            std::string sensing = "array_gain";

            ScenarioConfig resolve() const
            {
                ScenarioConfig c = cfg;
                c.csi_error = csi_error == "absolute" ? CsiErrorModel::absolute : CsiErrorModel::relative;
                c.sensing = sensing == "absolute" ? SensingReference::absolute : SensingReference::array_gain;
                try
                {
                    c.validate();
                }
                catch (const ConfigError &e)
                {
                    throw UsageError(e.what());
                }
                return c;
            }
        };

        void add_scenario_flags(CLI::App *app, ScenarioFlags &f)
        {
            auto &c = f.cfg;
            app->add_option("--M", c.system.M, "BS antennas")->capture_default_str();
            app->add_option("--K", c.K, "communication users")->capture_default_str();
            app->add_option("--L", c.L, "sensing targets")->capture_default_str();
            app->add_option("--Nx", c.system.Nx, "RIS elements along x (odd)")->capture_default_str();
            app->add_option("--Nz", c.system.Nz, "RIS elements along z (odd)")->capture_default_str();
            app->add_option("--P0", c.P0, "transmit power budget [W]")->capture_default_str();
            app->add_option("--rho-th", c.rho_th, "sensing threshold")->capture_default_str();
            app->add_option("--sigma2", c.sigma2, "receiver noise power [W]")->capture_default_str();
            app->add_option("--sigma-e", c.sigma_e2, "CSI error variance sigma_e^2 (0 = perfect CSI)")
                ->capture_default_str();
            app->add_option("--csi-error", f.csi_error, "CSI error scaling")
                ->check(CLI::IsMember({"relative", "absolute"}))
                ->capture_default_str();
            app->add_option("--sensing-ref", f.sensing, "unit of the sensing threshold")
                ->check(CLI::IsMember({"array_gain", "absolute"}))
                ->capture_default_str();
        }

        struct SolverFlags
        {
            BcdConfig bcd;
            std::uint64_t seed = 0;
            int jobs = 1;
            bool no_timing = false;
        };

        void add_solver_flags(CLI::App *app, SolverFlags &f)
        {
            app->add_option("--max-iters", f.bcd.max_iters, "BCD cycles I_max")->capture_default_str();
            app->add_option("--tol", f.bcd.tol, "stop when the WSR changes less than this")->capture_default_str();
            app->add_option("--c1", f.bcd.C1, "proximal weight on W")->capture_default_str();
            app->add_option("--c2", f.bcd.C2, "proximal weight on R0")->capture_default_str();
            app->add_option("--penalty", f.bcd.penalty, "sensing penalty in the phase subproblem")
                ->capture_default_str();
            app->add_option("--solver-seed", f.seed, "seed for the random initial phases")->capture_default_str();
            app->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
            app->add_flag("--no-timing", f.no_timing, "write zero runtimes so outputs are byte-reproducible");
        }

        void require_output_dir(const std::string &path)
        {
            namespace fs = std::filesystem;
            const fs::path parent = fs::absolute(fs::path(path)).parent_path();
            if (!fs::is_directory(parent))
                throw UsageError("output directory does not exist: " + parent.string());
        }

        std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t id)
        {
            // splitmix64 finalizer
            std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (id + 1);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            return z ^ (z >> 31);
        }

        // ---------------------------------------------------------------- solving

        struct Solved
        {
            SolutionRecord solution;
            json report;
        };

        json report_row(const CsiRecord &rec, const SolutionRecord &sol, const SolverReport *rep, bool no_timing)
        {
            const EvalRow row = score(rec, sol, false);
            json j{{"scenario_id", rec.scenario_id},
                   {"method", sol.solution.meta.method},
                   {"wsr", row.wsr},
                   {"min_rho", std::isfinite(row.min_rho) ? json(row.min_rho) : json(nullptr)},
                   {"power", row.power_used},
                   {"feasible", row.feasible},
                   {"runtime_ms", sol.solution.meta.runtime_ms}};
            if (rep)
            {
                j["cycles"] = rep->cycles;
                j["termination"] = to_string(rep->termination);
                j["init"] = rep->init == InitMode::plain        ? "plain"
                            : rep->init == InitMode::reaimed_r0 ? "reaimed_r0"
                                                                : "reaimed_r0_theta";
                j["stage_ms"] = {{"aux", no_timing ? 0.0 : rep->times.aux_ms},
                                 {"theta", no_timing ? 0.0 : rep->times.theta_ms},
                                 {"transmit", no_timing ? 0.0 : rep->times.transmit_ms}};
                j["wsr_trace"] = rep->wsr;
                j["transmit_feasible"] = rep->transmit_feasible;
            }
            return j;
        }

        std::vector<Solved> solve_bcd(const std::vector<CsiRecord> &records, const SolverFlags &f)
        {
            std::vector<Solved> out(records.size());
            parallel_for(records.size(), f.jobs,
                         [&](std::size_t i)
                         {
                             const CsiRecord &rec = records[i];
                             BcdConfig cfg = f.bcd;
                             cfg.seed = mix_seed(f.seed, rec.scenario_id);
                             BcdResult res = run_bcd(rec.observed(), rec.config.problem(), cfg);
                             if (f.no_timing)
                                 res.solution.meta.runtime_ms = 0.0;
                             out[i].solution.scenario_id = rec.scenario_id;
                             out[i].solution.solution = std::move(res.solution);
                             out[i].report = report_row(rec, out[i].solution, &res.report, f.no_timing);
                         });
            return out;
        }

        std::string id_list(const std::vector<std::uint64_t> &ids)
        {
            std::ostringstream os;
            for (std::size_t i = 0; i < ids.size(); ++i)
                os << (i ? ", " : "") << ids[i];
            return os.str();
        }

        // Pairs every dataset record with exactly one solution, or throws listing the offenders
        std::vector<const SolutionRecord *> align(const std::vector<CsiRecord> &data,
                                                  const std::vector<SolutionRecord> &sols, const std::string &what)
        {
            std::map<std::uint64_t, const SolutionRecord *> by_id;
            std::vector<std::uint64_t> unknown, duplicate, missing;
            std::map<std::uint64_t, bool> in_data;
            for (const auto &r : data)
                in_data[r.scenario_id] = true;
            for (const auto &s : sols)
            {
                if (!in_data.count(s.scenario_id))
                    unknown.push_back(s.scenario_id);
                else if (!by_id.emplace(s.scenario_id, &s).second)
                    duplicate.push_back(s.scenario_id);
            }
            std::vector<const SolutionRecord *> out;
            for (const auto &r : data)
            {
                auto it = by_id.find(r.scenario_id);
                if (it == by_id.end())
                    missing.push_back(r.scenario_id);
                else
                    out.push_back(it->second);
            }
            std::string msg;
            if (!missing.empty())
                msg += "missing solutions for scenario ids: " + id_list(missing) + ". ";
            if (!unknown.empty())
                msg += "solutions reference unknown scenario ids: " + id_list(unknown) + ". ";
            if (!duplicate.empty())
                msg += "duplicate solutions for scenario ids: " + id_list(duplicate) + ". ";
            if (!msg.empty())
                throw SchemaError(what + ": " + msg);
            return out;
        }

        void write_reports(const std::string &path, const std::vector<json> &rows)
        {
            std::ofstream os(path, std::ios::binary | std::ios::trunc);
            if (!os)
                throw std::runtime_error("cannot open '" + path + "' for writing");
            for (const auto &r : rows)
                os << r.dump() << '\n';
        }

        void print_summary(std::ostream &out, const std::string &method, const std::vector<json> &rows)
        {
            std::size_t feasible = 0;
            double wsr = 0.0, runtime = 0.0;
            for (const auto &r : rows)
            {
                feasible += r["feasible"].get<bool>() ? 1 : 0;
                wsr += r["wsr"].get<double>();
                runtime += r["runtime_ms"].get<double>();
            }
            const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
            out << "solved " << rows.size() << " scenarios with " << method << ": " << feasible << " feasible, "
                << rows.size() - feasible << " flagged; mean WSR " << std::setprecision(6) << wsr / n
                << " bit/s/Hz; mean runtime " << runtime / n << " ms\n";
        }

        std::vector<CsiRecord> generate(const ScenarioConfig &cfg, std::size_t count, int jobs)
        {
            std::vector<CsiRecord> out(count);
            parallel_for(count, jobs, [&](std::size_t i) { out[i] = make_record(cfg, i); });
            return out;
        }

        std::vector<EvalRow> score_all(const std::vector<CsiRecord> &data,
                                       const std::vector<const SolutionRecord *> &sols, bool perfect_csi)
        {
            std::vector<EvalRow> rows;
            rows.reserve(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                rows.push_back(score(data[i], *sols[i], perfect_csi));
            return rows;
        }

        double median(std::vector<double> v)
        {
            if (v.empty())
                return std::nan("");
            std::sort(v.begin(), v.end());
            const std::size_t m = v.size() / 2;
            return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
        }

        // Applies one sweep value to a config
        void apply_sweep(ScenarioConfig &cfg, const std::string &param, double value)
        {
            if (param == "P0")
            {
                cfg.P0 = value;
                return;
            }
            const double r = std::round(value);
            if (r != value || r < 0)
                throw UsageError(param + " values must be non-negative integers");
            const int iv = static_cast<int>(r);
            if (param == "K")
                cfg.K = iv;
            else if (param == "L")
                cfg.L = iv;
            else if (param == "N")
            {
                const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(iv))));
                if (side * side != iv || side % 2 == 0)
                    throw UsageError("N values must be squares of odd integers (N = Nx * Nz with Nx = Nz)");
                cfg.system.Nx = cfg.system.Nz = side;
            }
            else
                throw UsageError("unknown sweep parameter '" + param + "'");
        }
    } // namespace

    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Beamforming design for XL-RIS assisted near-field ISAC", "nfisac"};
        app.require_subcommand(1);

        // gen-dataset
        ScenarioFlags gen_flags;
        std::size_t gen_count = 0;
        std::string gen_out;
        int gen_jobs = 1;
        auto *gen = app.add_subcommand("gen-dataset", "draw random scenarios and write their channels as JSONL");
        gen->add_option("--count", gen_count, "number of scenarios")->required();
        gen->add_option("--seed", gen_flags.cfg.seed, "dataset seed")->capture_default_str();
        gen->add_option("--out", gen_out, "output JSONL path")->required();
        gen->add_option("--jobs", gen_jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        add_scenario_flags(gen, gen_flags);

        // solve
        SolverFlags solve_flags;
        std::string solve_in, solve_method = "bcd", solve_out, solve_report, solve_external;
        auto *solve = app.add_subcommand("solve", "design beamformers for every scenario of a dataset");
        solve->add_option("--in", solve_in, "input dataset")->required()->check(CLI::ExistingFile);
        solve->add_option("--method", solve_method, "bcd, or gnn to score externally produced solutions")
            ->check(CLI::IsMember({"bcd", "gnn"}))
            ->capture_default_str();
        solve->add_option("--out", solve_out, "output solutions JSONL")->required();
        solve->add_option("--report", solve_report, "per-scenario report JSONL");
        solve->add_option("--solutions", solve_external, "solutions produced by the trainer (method gnn)")
            ->check(CLI::ExistingFile);
        add_solver_flags(solve, solve_flags);

        // eval
        std::string eval_data, eval_out;
        std::vector<std::string> eval_solutions;
        bool eval_perfect = false;
        auto *eval = app.add_subcommand("eval", "score solutions against a dataset and write a CSV table");
        eval->add_option("--data", eval_data, "dataset JSONL")->required()->check(CLI::ExistingFile);
        eval->add_option("--solutions", eval_solutions, "one or more solutions JSONL files")
            ->required()
            ->check(CLI::ExistingFile);
        eval->add_option("--out", eval_out, "output CSV")->required();
        eval->add_flag("--perfect-csi", eval_perfect, "score on the unperturbed channels");

        // sweep
        ScenarioFlags sweep_flags;
        SolverFlags sweep_solver;
        std::string sweep_param, sweep_out, sweep_method = "bcd";
        std::vector<double> sweep_values;
        std::size_t sweep_count = 0;
        auto *sweep = app.add_subcommand("sweep", "generate, solve and score over one parameter axis");
        sweep->add_option("--param", sweep_param, "swept parameter")
            ->required()
            ->check(CLI::IsMember({"N", "P0", "K", "L"}));
        sweep->add_option("--values", sweep_values, "comma-separated values")->required()->delimiter(',');
        sweep->add_option("--count", sweep_count, "scenarios per value")->required();
        sweep->add_option("--seed", sweep_flags.cfg.seed, "dataset seed")->capture_default_str();
        sweep->add_option("--method", sweep_method, "solver")->check(CLI::IsMember({"bcd"}))->capture_default_str();
        sweep->add_option("--out", sweep_out, "output CSV")->required();
        add_scenario_flags(sweep, sweep_flags);
        add_solver_flags(sweep, sweep_solver);

        try
        {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        }
        catch (const CLI::ParseError &e)
        {
            const int code = app.exit(e, out, err);
            return code == 0 ? kExitOk : kExitUsage;
        }

        try
        {
            if (gen->parsed())
            {
                const ScenarioConfig cfg = gen_flags.resolve();
                require_output_dir(gen_out);
                write_dataset(gen_out, generate(cfg, gen_count, gen_jobs));
                out << "wrote " << gen_count << " scenarios to " << gen_out << "\n";
            }
            else if (solve->parsed())
            {
                require_output_dir(solve_out);
                if (!solve_report.empty())
                    require_output_dir(solve_report);
                if (solve_method == "gnn" && solve_external.empty())
                    throw UsageError("--method gnn scores external solutions and needs --solutions");
                solve_flags.bcd.validate();

                const std::vector<CsiRecord> data = read_dataset(solve_in);
                std::vector<SolutionRecord> sols;
                std::vector<json> reports;
                if (solve_method == "bcd")
                {
                    for (auto &s : solve_bcd(data, solve_flags))
                    {
                        sols.push_back(std::move(s.solution));
                        reports.push_back(std::move(s.report));
                    }
                }
                else
                {
                    const std::vector<SolutionRecord> ext = read_solutions(solve_external);
                    for (const SolutionRecord *s : align(data, ext, solve_external))
                    {
                        SolutionRecord copy = *s;
                        if (copy.solution.meta.method.empty())
                            copy.solution.meta.method = "gnn";
                        if (solve_flags.no_timing)
                            copy.solution.meta.runtime_ms = 0.0;
                        sols.push_back(std::move(copy));
                    }
                    for (std::size_t i = 0; i < data.size(); ++i)
                        reports.push_back(report_row(data[i], sols[i], nullptr, solve_flags.no_timing));
                }
                write_solutions(solve_out, sols);
                if (!solve_report.empty())
                    write_reports(solve_report, reports);
                print_summary(out, solve_method, reports);
            }
            else if (eval->parsed())
            {
                require_output_dir(eval_out);
                const std::vector<CsiRecord> data = read_dataset(eval_data);
                std::vector<EvalRow> rows;
                for (const auto &path : eval_solutions)
                {
                    const std::vector<SolutionRecord> sols = read_solutions(path);
                    const auto aligned = align(data, sols, path);
                    const auto part = score_all(data, aligned, eval_perfect);
                    rows.insert(rows.end(), part.begin(), part.end());
                }
                export_eval_csv(eval_out, rows);
                const auto feasible = std::count_if(rows.begin(), rows.end(), [](const EvalRow &r) { return r.feasible; });
                out << "scored " << rows.size() << " solutions: " << feasible << " satisfy all constraints\n";
            }
            else if (sweep->parsed())
            {
                require_output_dir(sweep_out);
                sweep_solver.bcd.validate();
                std::vector<EvalRow> rows;
                for (double value : sweep_values)
                {
                    ScenarioFlags flags = sweep_flags;
                    apply_sweep(flags.cfg, sweep_param, value);
                    const ScenarioConfig cfg = flags.resolve();
                    const std::vector<CsiRecord> data = generate(cfg, sweep_count, sweep_solver.jobs);
                    std::vector<SolutionRecord> sols;
                    for (auto &s : solve_bcd(data, sweep_solver))
                        sols.push_back(std::move(s.solution));
                    std::vector<const SolutionRecord *> ptrs;
                    for (const auto &s : sols)
                        ptrs.push_back(&s);
                    const auto part = score_all(data, ptrs, false);
                    std::vector<double> wsr;
                    for (const auto &r : part)
                        wsr.push_back(r.wsr);
                    out << sweep_param << " = " << value << ": median WSR " << std::setprecision(6) << median(wsr)
                        << " bit/s/Hz over " << part.size() << " scenarios\n";
                    rows.insert(rows.end(), part.begin(), part.end());
                }
                export_eval_csv(sweep_out, rows);
            }
            return kExitOk;
        }
        catch (const UsageError &e)
        {
            err << "usage error: " << e.what() << "\n";
            return kExitUsage;
        }
        catch (const ConfigError &e)
        {
            err << "usage error: " << e.what() << "\n";
            return kExitUsage;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << "\n";
            return kExitFailure;
        }
    }

} // namespace nfisac
