// SPDX-License-Identifier: Apache-2.0
//
// qcomp - coordinated beamforming and power allocation for multicell
// networks with low-resolution ADCs/DACs
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
//
// Monte-Carlo experiment engine. A spec enumerates (drop, bits, target,
// method) trials; every trial draws its scenario from a seed derived from
// (master seed, drop index) only, so all methods and quantizer settings see
// identical channels per drop and reruns are reproducible regardless of the
// worker count. Failed trials are recorded with their status, never
// dropped.

#ifndef QCOMP_HARNESS_HPP
#define QCOMP_HARNESS_HPP

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qcomp/baseline.hpp"
#include "qcomp/common.hpp"
#include "qcomp/downlink.hpp"
#include "qcomp/quantizer.hpp"
#include "qcomp/rng.hpp"
#include "qcomp/scenario.hpp"
#include "qcomp/uplink.hpp"

namespace qcomp {

enum class Method { QiCoMP, QPercell };

inline const char* to_string(Method m) { return m == Method::QiCoMP ? "qicomp" : "qpercell"; }

inline Method method_from_string(const std::string& s) {
    if (s == "qicomp") return Method::QiCoMP;
    if (s == "qpercell") return Method::QPercell;
    throw std::invalid_argument("unknown method: " + s);
}

struct ExperimentSpec {
    NetworkConfig scenario;
    std::vector<int> bits_list;      // kInfiniteBits for infinite resolution
    std::vector<double> targets_db;  // common target for all users, swept
    int n_drops = 1;
    std::vector<Method> methods{Method::QiCoMP};
    std::uint64_t master_seed = 1;
    int workers = 1;
    SolverOptions solver;
    PercellOptions percell;

    void validate() const {
        scenario.validate();
        if (n_drops < 1) throw std::invalid_argument("ExperimentSpec: n_drops must be >= 1");
        if (bits_list.empty()) throw std::invalid_argument("ExperimentSpec: bits list is empty");
        if (targets_db.empty()) throw std::invalid_argument("ExperimentSpec: target sweep is empty");
        if (methods.empty()) throw std::invalid_argument("ExperimentSpec: no methods selected");
        for (int b : bits_list)
            if (b != kInfiniteBits && (b < 1 || b > kMaxBits))
                throw std::invalid_argument("ExperimentSpec: bits out of range");
    }
};

// One solved trial. Wall time is in-memory diagnostics only; it is kept out
// of the CSV so identical specs produce byte-identical record files.
struct TrialRecord {
    int drop = 0;
    Method method = Method::QiCoMP;
    int bits = kInfiniteBits;
    double target_db = 0.0;
    std::string status;
    double total_ul_power = 0.0;  // linear, unit-noise scale (mW)
    double total_dl_power = 0.0;
    arma::vec ul_sinr_db;
    arma::vec dl_sinr_db;
    int iterations = 0;
    double wall_time_ms = 0.0;

    bool converged() const { return status == "optimal" || status == "converged"; }
};

namespace detail {

inline TrialRecord run_trial(const ExperimentSpec& spec, int drop, int bits, double target_db,
                             Method method) {
    TrialRecord rec;
    rec.drop = drop;
    rec.method = method;
    rec.bits = bits;
    rec.target_db = target_db;

    NetworkConfig config = spec.scenario;
    config.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(drop));
    const NetworkScenario sc = make_scenario(config);
    const QuantizerModel q = quantizer_model(bits);
    arma::vec targets(sc.n_links());
    targets.fill(db_to_linear(target_db));

    const auto t0 = std::chrono::steady_clock::now();
    if (method == Method::QiCoMP) {
        const UplinkSolution ul = fixed_point_solve(sc, targets, q, spec.solver);
        rec.iterations = ul.iterations;
        rec.total_ul_power = ul.total_power();
        if (ul.status != SolveStatus::Optimal) {
            rec.status = to_string(ul.status);
            rec.ul_sinr_db.set_size(sc.n_links());
            rec.ul_sinr_db.fill(-arma::datum::inf);
            rec.dl_sinr_db = rec.ul_sinr_db;
        } else {
            const DownlinkSolution dl = solve_downlink(ul.combiners, sc, targets, q);
            rec.status = dl.status == TauStatus::Optimal ? "optimal" : to_string(dl.status);
            rec.total_dl_power = dl.total_power;
            const SinrReport rep = achieved_sinr_report(ul, dl, sc, q, targets);
            rec.ul_sinr_db = rep.ul_sinr_db;
            rec.dl_sinr_db = rep.dl_sinr_db;
        }
    } else {
        const PercellSolution ps = percell_solve(sc, targets, q, spec.percell);
        rec.status = to_string(ps.status);
        rec.iterations = ps.outer_iterations;
        rec.total_ul_power = ps.total_ul_power();
        rec.total_dl_power = ps.total_dl_power(q);
        rec.ul_sinr_db = ps.ul_sinr_db;
        rec.dl_sinr_db = ps.dl_sinr_db;
    }
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace detail

// Runs every (drop, bits, target, method) combination. The record list has
// exactly n_drops * |bits| * |targets| * |methods| entries in enumeration
// order; workers pick trials by atomic counter and write into preallocated
// slots, so the output is independent of scheduling.
inline std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    struct Task {
        int drop, bits;
        double target_db;
        Method method;
    };
    std::vector<Task> tasks;
    for (int d = 0; d < spec.n_drops; ++d)
        for (int b : spec.bits_list)
            for (double t : spec.targets_db)
                for (Method m : spec.methods) tasks.push_back({d, b, t, m});

    std::vector<TrialRecord> records(tasks.size());
    const int n_workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(tasks.size())));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        while (true) {
            const std::size_t k = cursor.fetch_add(1);
            if (k >= tasks.size()) break;
            const Task& t = tasks[k];
            records[k] = detail::run_trial(spec, t.drop, t.bits, t.target_db, t.method);
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return records;
}

// --- CSV records ---------------------------------------------------------

inline constexpr int kCsvSchemaVersion = 1;

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string join_db_list(const arma::vec& v) {
    std::string out;
    for (arma::uword k = 0; k < v.n_elem; ++k) {
        if (k) out += ';';
        out += format_double(v(k));
    }
    return out;
}

inline arma::vec parse_db_list(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';'))
        if (!tok.empty()) vals.push_back(std::strtod(tok.c_str(), nullptr));
    return arma::vec(vals);
}

inline std::string bits_to_string(int bits) {
    return bits == kInfiniteBits ? "inf" : std::to_string(bits);
}

inline int bits_from_string(const std::string& s) {
    if (s == "inf") return kInfiniteBits;
    return std::stoi(s);
}

// RFC-4180 split of one line; fields holding separators are double-quoted.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                cur += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

inline const char* kCsvHeader =
    "drop,method,bits,target_sinr_db,status,total_ul_power_mw,total_dl_power_mw,"
    "iterations,ul_sinr_db,dl_sinr_db";

inline void write_records_csv(const std::string& path, const std::vector<TrialRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kCsvHeader << "\n";
    for (const TrialRecord& r : records) {
        out << r.drop << ',' << to_string(r.method) << ',' << detail::bits_to_string(r.bits) << ','
            << detail::format_double(r.target_db) << ',' << r.status << ','
            << detail::format_double(r.total_ul_power) << ','
            << detail::format_double(r.total_dl_power) << ',' << r.iterations << ",\""
            << detail::join_db_list(r.ul_sinr_db) << "\",\"" << detail::join_db_list(r.dl_sinr_db)
            << "\"\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<TrialRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty records file: " + path);
    if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header in " + path);
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 10) throw std::runtime_error("malformed CSV row in " + path);
        TrialRecord r;
        r.drop = std::stoi(f[0]);
        r.method = method_from_string(f[1]);
        r.bits = detail::bits_from_string(f[2]);
        r.target_db = std::strtod(f[3].c_str(), nullptr);
        r.status = f[4];
        r.total_ul_power = std::strtod(f[5].c_str(), nullptr);
        r.total_dl_power = std::strtod(f[6].c_str(), nullptr);
        r.iterations = std::stoi(f[7]);
        r.ul_sinr_db = detail::parse_db_list(f[8]);
        r.dl_sinr_db = detail::parse_db_list(f[9]);
        records.push_back(std::move(r));
    }
    return records;
}

// --- Post-processing ------------------------------------------------------

enum class SinrField { UplinkDb, DownlinkDb };

// Empirical CDF over per-user achieved SINRs pooled across the given
// records: sorted (value, cumulative fraction) pairs ending at 1.
inline std::vector<std::pair<double, double>> compute_cdf(const std::vector<TrialRecord>& records,
                                                          SinrField field) {
    std::vector<double> pool;
    for (const TrialRecord& r : records) {
        const arma::vec& v = field == SinrField::UplinkDb ? r.ul_sinr_db : r.dl_sinr_db;
        pool.insert(pool.end(), v.begin(), v.end());
    }
    if (pool.empty()) throw std::invalid_argument("compute_cdf: no per-user values in selection");
    std::sort(pool.begin(), pool.end());
    std::vector<std::pair<double, double>> cdf(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k)
        cdf[k] = {pool[k], double(k + 1) / double(pool.size())};
    return cdf;
}

struct CurvePoint {
    Method method = Method::QiCoMP;
    int bits = kInfiniteBits;
    double target_db = 0.0;
    double mean_dl_power_dbm = 0.0;  // mean over converged drops, physical dBm
    int n_converged = 0;
    int n_diverged = 0;  // nonzero marks the grid point as unreliable
};

// Mean total DL power versus target, one curve per (method, bits). Averages
// run over converged trials only; grid points with any non-converged drop
// carry a nonzero n_diverged marker.
inline std::vector<CurvePoint> power_vs_target_curve(const std::vector<TrialRecord>& records) {
    std::map<std::tuple<std::string, int, double>, CurvePoint> grid;
    std::map<std::tuple<std::string, int, double>, double> sums;
    for (const TrialRecord& r : records) {
        const auto key = std::make_tuple(std::string(to_string(r.method)), r.bits, r.target_db);
        CurvePoint& p = grid[key];
        p.method = r.method;
        p.bits = r.bits;
        p.target_db = r.target_db;
        if (r.converged()) {
            ++p.n_converged;
            sums[key] += r.total_dl_power;
        } else {
            ++p.n_diverged;
        }
    }
    std::vector<CurvePoint> out;
    for (auto& [key, p] : grid) {
        p.mean_dl_power_dbm =
            p.n_converged > 0 ? linear_to_db(sums[key] / p.n_converged) : arma::datum::nan;
        out.push_back(p);
    }
    return out;
}

// --- Experiment spec JSON --------------------------------------------------

inline void to_json(nlohmann::json& j, const ExperimentSpec& s) {
    j["scenario"] = s.scenario;
    j["bits"] = nlohmann::json::array();
    for (int b : s.bits_list) {
        if (b == kInfiniteBits)
            j["bits"].push_back("inf");
        else
            j["bits"].push_back(b);
    }
    j["targets_db"] = s.targets_db;
    j["n_drops"] = s.n_drops;
    j["methods"] = nlohmann::json::array();
    for (Method m : s.methods) j["methods"].push_back(to_string(m));
    j["seed"] = s.master_seed;
    j["workers"] = s.workers;
    j["solver"] = {{"tolerance", s.solver.tolerance},
                   {"max_iterations", s.solver.max_iterations},
                   {"power_cap", s.solver.power_cap}};
    j["percell"] = {{"outer_tolerance", s.percell.outer_tolerance},
                    {"max_outer_iterations", s.percell.max_outer_iterations}};
}

inline void from_json(const nlohmann::json& j, ExperimentSpec& s) {
    s = ExperimentSpec{};
    if (j.contains("scenario")) j.at("scenario").get_to(s.scenario);
    s.bits_list.clear();
    for (const auto& b : j.at("bits")) {
        if (b.is_string()) {
            if (b.get<std::string>() != "inf")
                throw std::invalid_argument("ExperimentSpec: bits entries must be integers or \"inf\"");
            s.bits_list.push_back(kInfiniteBits);
        } else {
            s.bits_list.push_back(b.get<int>());
        }
    }
    j.at("targets_db").get_to(s.targets_db);
    j.at("n_drops").get_to(s.n_drops);
    s.methods.clear();
    for (const auto& m : j.at("methods")) s.methods.push_back(method_from_string(m.get<std::string>()));
    if (j.contains("seed")) j.at("seed").get_to(s.master_seed);
    if (j.contains("workers")) j.at("workers").get_to(s.workers);
    if (j.contains("solver")) {
        const auto& o = j.at("solver");
        if (o.contains("tolerance")) o.at("tolerance").get_to(s.solver.tolerance);
        if (o.contains("max_iterations")) o.at("max_iterations").get_to(s.solver.max_iterations);
        if (o.contains("power_cap")) o.at("power_cap").get_to(s.solver.power_cap);
        s.percell.inner = s.solver;
    }
    if (j.contains("percell")) {
        const auto& o = j.at("percell");
        if (o.contains("outer_tolerance")) o.at("outer_tolerance").get_to(s.percell.outer_tolerance);
        if (o.contains("max_outer_iterations"))
            o.at("max_outer_iterations").get_to(s.percell.max_outer_iterations);
    }
    s.validate();
}

}  // namespace qcomp

#endif  // QCOMP_HARNESS_HPP
