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
// Command-line front end: `run` executes an experiment spec and emits the
// records CSV plus metadata JSON, `cdf` and `curve` post-process a records
// file, and `oracle` prints the Lloyd-Max distortion table.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "qcomp/qcomp.hpp"

namespace {

using nlohmann::json;

int parse_bits(const std::string& s) {
    if (s == "inf") return qcomp::kInfiniteBits;
    return std::stoi(s);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

int cmd_run(const std::string& spec_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<int> workers) {
    qcomp::ExperimentSpec spec = load_json(spec_path).get<qcomp::ExperimentSpec>();
    if (seed) spec.master_seed = *seed;
    if (workers) spec.workers = *workers;
    spec.validate();

    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const auto records = qcomp::run_experiment(spec);
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const std::string csv_path = (std::filesystem::path(out_dir) / "records.csv").string();
    qcomp::write_records_csv(csv_path, records);

    json meta;
    meta["schema_version"] = qcomp::kCsvSchemaVersion;
    meta["spec"] = spec;
    meta["n_records"] = records.size();
    meta["elapsed_ms"] = elapsed_ms;
    std::map<std::string, int> by_status;
    double total_dl_mw = 0.0;
    int converged = 0;
    for (const auto& r : records) {
        ++by_status[r.status];
        if (r.converged()) {
            total_dl_mw += r.total_dl_power;
            ++converged;
        }
    }
    meta["status_counts"] = by_status;
    const std::string meta_path = (std::filesystem::path(out_dir) / "meta.json").string();
    std::ofstream meta_out(meta_path);
    meta_out << meta.dump(2) << "\n";
    if (!meta_out) throw std::runtime_error("write failed: " + meta_path);

    std::cout << records.size() << " trials -> " << csv_path << "\n";
    for (const auto& [status, n] : by_status) std::cout << "  " << status << ": " << n << "\n";
    if (converged > 0)
        std::cout << "mean converged DL power: "
                  << qcomp::linear_to_db(total_dl_mw / converged) << " dBm\n";
    return 0;
}

int cmd_cdf(const std::string& records_path, const std::string& method_str,
            const std::string& bits_str, std::optional<double> target_db,
            const std::string& field_str, const std::string& out_path) {
    const auto all = qcomp::read_records_csv(records_path);
    const qcomp::Method method = qcomp::method_from_string(method_str);
    const int bits = parse_bits(bits_str);
    std::vector<qcomp::TrialRecord> selected;
    for (const auto& r : all) {
        if (r.method != method || r.bits != bits) continue;
        if (target_db && r.target_db != *target_db) continue;
        selected.push_back(r);
    }
    const qcomp::SinrField field =
        field_str == "ul" ? qcomp::SinrField::UplinkDb : qcomp::SinrField::DownlinkDb;
    const auto cdf = qcomp::compute_cdf(selected, field);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        out = &file;
    }
    *out << "sinr_db,cdf\n";
    for (const auto& [v, p] : cdf) *out << v << ',' << p << '\n';
    return 0;
}

int cmd_curve(const std::string& records_path, const std::string& out_path) {
    const auto curve = qcomp::power_vs_target_curve(qcomp::read_records_csv(records_path));
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        out = &file;
    }
    *out << "method,bits,target_sinr_db,mean_dl_power_dbm,n_converged,n_diverged\n";
    for (const auto& p : curve)
        *out << qcomp::to_string(p.method) << ','
             << (p.bits == qcomp::kInfiniteBits ? "inf" : std::to_string(p.bits)) << ','
             << p.target_db << ',' << p.mean_dl_power_dbm << ',' << p.n_converged << ','
             << p.n_diverged << '\n';
    return 0;
}

int cmd_oracle(int max_bits, bool as_json, int codebook_bits) {
    if (as_json || codebook_bits > 0) {
        json j;
        j["beta_table"] = json::array();
        for (int b = 1; b <= max_bits; ++b) {
            const qcomp::QuantizerModel q = qcomp::quantizer_model(b);
            j["beta_table"].push_back({{"bits", b}, {"beta", q.beta}, {"alpha", q.alpha}});
        }
        if (codebook_bits > 0) {
            const qcomp::ScalarCodebook& cb = qcomp::lloyd_max_codebook(codebook_bits);
            j["codebook"] = {{"bits", codebook_bits},
                             {"levels", std::vector<double>(cb.levels.begin(), cb.levels.end())},
                             {"thresholds",
                              std::vector<double>(cb.thresholds.begin(), cb.thresholds.end())},
                             {"distortion", cb.distortion}};
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "bits      beta         alpha\n";
    for (int b = 1; b <= max_bits; ++b) {
        const qcomp::QuantizerModel q = qcomp::quantizer_model(b);
        std::printf("%4d  %.9f  %.9f\n", b, q.beta, q.alpha);
    }
    std::cout << " inf  0.000000000  1.000000000\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coordinated beamforming/power allocation simulator for low-resolution multicell networks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment spec and write records");
    std::string spec_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    run->add_option("--spec", spec_path, "experiment spec JSON")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--workers", workers, "worker thread count");

    auto* cdf = app.add_subcommand("cdf", "per-user SINR CDF from a records file");
    std::string records_path, method_str = "qicomp", bits_str = "3", field_str = "dl", out_path;
    std::optional<double> target_db;
    cdf->add_option("--records", records_path, "records CSV")->required();
    cdf->add_option("--method", method_str, "qicomp or qpercell");
    cdf->add_option("--bits", bits_str, "quantizer bits or 'inf'");
    cdf->add_option("--target", target_db, "restrict to one target (dB)");
    cdf->add_option("--field", field_str, "ul or dl")->check(CLI::IsMember({"ul", "dl"}));
    cdf->add_option("--out", out_path, "output CSV (stdout when omitted)");

    auto* curve = app.add_subcommand("curve", "mean power versus target curves");
    std::string curve_records, curve_out;
    curve->add_option("--records", curve_records, "records CSV")->required();
    curve->add_option("--out", curve_out, "output CSV (stdout when omitted)");

    auto* oracle = app.add_subcommand("oracle", "print the Lloyd-Max distortion table");
    int max_bits = 8, codebook_bits = 0;
    bool as_json = false;
    oracle->add_option("--max-bits", max_bits, "table upper bound")->check(CLI::Range(1, 12));
    oracle->add_flag("--json", as_json, "emit JSON");
    oracle->add_option("--codebook", codebook_bits, "also dump one codebook (JSON)")
        ->check(CLI::Range(1, 12));

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(spec_path, out_dir, seed, workers);
        if (cdf->parsed()) return cmd_cdf(records_path, method_str, bits_str, target_db, field_str, out_path);
        if (curve->parsed()) return cmd_curve(curve_records, curve_out);
        if (oracle->parsed()) return cmd_oracle(max_bits, as_json, codebook_bits);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
