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
// End-to-end verification suite. Each case prints one PASS line; a failed
// assertion aborts the case, so a missing line means the criterion failed.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <thread>

#include "qcomp/qcomp.hpp"
#include "test_support.hpp"

using namespace qcomp;
using qcomp_test::scalar_scenario;
using qcomp_test::synthetic_scenario;
using qcomp_test::uniform_targets;

namespace {

int worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

NetworkConfig desk_config(arma::uword nc, arma::uword nu, arma::uword nb) {
    NetworkConfig c;
    c.n_cells = nc;
    c.n_users_per_cell = nu;
    c.n_bs_antennas = nb;
    return c;
}

struct SolvedDrop {
    NetworkScenario sc;
    arma::vec targets;
    QuantizerModel q;
    UplinkSolution ul;
};

// Draws scenario-module instances until `count` feasible solves collected.
std::vector<SolvedDrop> feasible_instances(int count, arma::uword nb,
                                           const std::vector<int>& bits_cycle, double target_db,
                                           std::uint64_t seed_base) {
    std::vector<SolvedDrop> out;
    SolverOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 30000;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        REQUIRE(attempts < 2 * count);  // feasibility should be the norm at 0 dB
        NetworkConfig c = desk_config(2, 2, nb);
        c.seed = seed_base + attempts;
        ++attempts;
        SolvedDrop d;
        d.sc = make_scenario(c);
        d.targets = uniform_targets(d.sc, target_db);
        d.q = quantizer_model(bits_cycle[out.size() % bits_cycle.size()]);
        d.ul = fixed_point_solve(d.sc, d.targets, d.q, opts);
        if (d.ul.status != SolveStatus::Optimal) continue;
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace

TEST_CASE("C01 scalar closed-form oracle and feasibility boundary", "[acceptance]") {
    const NetworkScenario sc = scalar_scenario({1.0, 1.0});  // |h|^2 = 2
    SolverOptions opts;
    opts.tolerance = 1e-13;
    opts.max_iterations = 500000;

    for (double gamma : {0.25, 1.0, 4.0}) {
        const UplinkSolution s =
            fixed_point_solve(sc, arma::vec{gamma}, quantizer_model(kInfiniteBits), opts);
        REQUIRE(s.status == SolveStatus::Optimal);
        REQUIRE(std::abs(s.powers(0) - gamma / 2.0) / (gamma / 2.0) < 1e-9);
    }

    const QuantizerModel q3 = quantizer_model(3);
    for (double gamma : {0.25, 1.0, 4.0}) {
        const UplinkSolution s = fixed_point_solve(sc, arma::vec{gamma}, q3, opts);
        REQUIRE(s.status == SolveStatus::Optimal);
        const double expected = 1.0 / (2.0 * (q3.alpha * (1.0 + 1.0 / gamma) - 1.0));
        REQUIRE(std::abs(s.powers(0) - expected) / expected < 1e-9);
    }

    // Infeasible exactly when gamma >= alpha/beta, on a grid straddling it.
    for (int bits : {1, 3}) {
        const QuantizerModel q = quantizer_model(bits);
        const double bound = q.alpha / q.beta;
        for (double ratio : {0.5, 0.9, 0.99, 1.05, 1.5, 3.0}) {
            const UplinkSolution s = fixed_point_solve(sc, arma::vec{ratio * bound}, q, opts);
            if (ratio < 1.0)
                REQUIRE(s.status == SolveStatus::Optimal);
            else
                REQUIRE(s.status == SolveStatus::Infeasible);
        }
    }
    std::printf("[acceptance] C01 scalar closed-form oracle: PASS\n");
}

TEST_CASE("C02 constraint activeness on 200 feasible instances", "[acceptance]") {
    const auto drops = feasible_instances(200, 8, {2, 3, kInfiniteBits}, 0.0, 20000);
    for (const SolvedDrop& d : drops) {
        REQUIRE(d.ul.max_sinr_deviation < 1e-6);
        const DownlinkSolution dl = solve_downlink(d.ul.combiners, d.sc, d.targets, d.q);
        REQUIRE(dl.status == TauStatus::Optimal);
        for (arma::uword i = 0; i < d.sc.n_cells(); ++i)
            for (arma::uword u = 0; u < d.sc.n_users(); ++u) {
                const arma::uword k = flat_index(i, u, d.sc.n_users());
                const double ul = ul_sinr(d.ul.combiners.col(k), d.sc, d.ul.powers, d.q, i, u);
                const double dls = dl_sinr(dl.precoders, d.sc, d.q, i, u);
                REQUIRE(std::abs(ul - d.targets(k)) / d.targets(k) < 1e-6);
                REQUIRE(std::abs(dls - d.targets(k)) / d.targets(k) < 1e-6);
            }
    }
    std::printf("[acceptance] C02 UL/DL constraint activeness (200 instances): PASS\n");
}

TEST_CASE("C03 zero duality gap on 200 feasible instances", "[acceptance]") {
    const auto drops = feasible_instances(200, 8, {2, 3, kInfiniteBits}, 0.0, 20000);
    for (const SolvedDrop& d : drops) {
        const DownlinkSolution dl = solve_downlink(d.ul.combiners, d.sc, d.targets, d.q);
        REQUIRE(dl.status == TauStatus::Optimal);
        REQUIRE(std::abs(dl.total_power - d.ul.total_power()) / d.ul.total_power() < 1e-8);
    }
    std::printf("[acceptance] C03 zero duality gap (200 instances): PASS\n");
}

TEST_CASE("C04 standard-function properties of the update map", "[acceptance]") {
    Rng rng = make_rng(4004);
    const int bits_pool[] = {1, 2, 3, 5, kInfiniteBits};
    int violations = 0;
    for (int instance = 0; instance < 50; ++instance) {
        const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
        const arma::vec targets = uniform_targets(sc, 0.0);
        for (int tuple = 0; tuple < 20; ++tuple) {
            const QuantizerModel q = quantizer_model(bits_pool[(instance + tuple) % 5]);
            const arma::vec big = 10.0 * arma::randu<arma::vec>(4) + 1e-3;
            const arma::vec small = big % arma::randu<arma::vec>(4);
            const arma::vec f_big = fixed_point_update(sc, targets, q, big);
            const arma::vec f_small = fixed_point_update(sc, targets, q, small);
            if (!(f_big.min() > 0.0)) ++violations;
            if (!((f_big - f_small).min() >= -1e-14)) ++violations;
            for (double rho : {1.5, 2.0, 10.0})
                if (!((rho * f_big - fixed_point_update(sc, targets, q, rho * big)).min() > 0.0))
                    ++violations;
        }
    }
    REQUIRE(violations == 0);
    std::printf("[acceptance] C04 standard-function properties (1000 tuples): PASS\n");
}

TEST_CASE("C05 uniqueness: initialization independence on 100 instances", "[acceptance]") {
    const auto drops = feasible_instances(100, 8, {3}, 0.0, 50000);
    SolverOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 30000;
    for (const SolvedDrop& d : drops) {
        const UplinkSolution again = fixed_point_solve(d.sc, d.targets, d.q, opts, 10.0 * d.ul.powers);
        REQUIRE(again.status == SolveStatus::Optimal);
        REQUIRE((arma::abs(again.powers - d.ul.powers) / d.ul.powers).max() < 1e-8);
    }
    std::printf("[acceptance] C05 initialization independence (100 instances): PASS\n");
}

TEST_CASE("C06 Lloyd-Max beta oracle anchors", "[acceptance]") {
    REQUIRE(std::abs(lloyd_max_codebook(1).distortion - (1.0 - 2.0 / arma::datum::pi)) < 1e-12);

    const double classic[] = {0.1175, 0.03454, 0.009497, 0.002499};
    for (int b = 2; b <= 5; ++b)
        REQUIRE(std::abs(lloyd_max_codebook(b).distortion - classic[b - 2]) < 1e-3);

    Rng rng = make_rng(606);
    for (int b = 1; b <= 5; ++b) {
        const int n_batches = 10;
        arma::vec batch(n_batches);
        for (int k = 0; k < n_batches; ++k) batch(k) = empirical_beta(b, 100000, rng);
        const double se = arma::stddev(batch) / std::sqrt(double(n_batches));
        REQUIRE(std::abs(arma::mean(batch) - lloyd_max_codebook(b).distortion) < 3.0 * se + 1e-12);
    }
    std::printf("[acceptance] C06 beta oracle (analytic, classic table, Monte-Carlo): PASS\n");
}

TEST_CASE("C07 two-cell CDF spike and per-drop dominance", "[acceptance]") {
    ExperimentSpec spec;
    spec.scenario = desk_config(2, 2, 64);
    spec.bits_list = {3};
    spec.targets_db = {0.0};
    spec.n_drops = 200;
    spec.methods = {Method::QiCoMP, Method::QPercell};
    spec.master_seed = 707;
    spec.workers = worker_count();
    spec.solver.tolerance = 1e-12;
    spec.percell.inner.tolerance = 1e-12;
    const auto records = run_experiment(spec);
    REQUIRE(records.size() == 400);

    std::vector<TrialRecord> qicomp, qpercell;
    for (const auto& r : records)
        (r.method == Method::QiCoMP ? qicomp : qpercell).push_back(r);

    int within = 0, total = 0;
    for (const auto& r : qicomp)
        for (double v : r.dl_sinr_db) {
            within += std::abs(v) <= 0.1;
            ++total;
        }
    for (const auto& r : qicomp)
        for (double v : r.ul_sinr_db) {
            within += std::abs(v) <= 0.1;
            ++total;
        }
    REQUIRE(double(within) / total >= 0.99);

    // Dominance on the minimized objective: a converged per-cell point is
    // feasible for the uplink problem, so the coordinated optimum can never
    // exceed it (and equals its own DL total by the zero gap). The per-cell
    // DL total is only comparable on drops where the local construction
    // actually delivered every target.
    int compared = 0;
    for (std::size_t k = 0; k < qicomp.size(); ++k) {
        if (!qicomp[k].converged() || !qpercell[k].converged()) continue;
        ++compared;
        REQUIRE(qicomp[k].total_ul_power <= qpercell[k].total_ul_power * (1.0 + 1e-9));
        const bool percell_feasible = qpercell[k].dl_sinr_db.min() >= -0.001;
        if (percell_feasible)
            REQUIRE(qicomp[k].total_dl_power <= qpercell[k].total_dl_power * (1.0 + 1e-9));
    }
    REQUIRE(compared > 0);
    std::printf("[acceptance] C07 CDF spike at 0 dB and dominance (%d/%d users in band, %d drops compared): PASS\n",
                within, total, compared);
}

TEST_CASE("C08 dense-network baseline misses while coordinated hits", "[acceptance]") {
    ExperimentSpec spec;
    spec.scenario = desk_config(7, 4, 64);
    spec.bits_list = {3};
    spec.targets_db = {0.0};
    spec.n_drops = 50;
    spec.methods = {Method::QiCoMP, Method::QPercell};
    spec.master_seed = 808;
    spec.workers = worker_count();
    const auto records = run_experiment(spec);

    int percell_missing = 0;
    for (const auto& r : records) {
        if (r.method == Method::QiCoMP) {
            if (r.converged())
                for (double v : r.dl_sinr_db) REQUIRE(std::abs(v) <= 0.01);
        } else {
            if (!r.converged()) {
                ++percell_missing;
            } else {
                for (double v : r.dl_sinr_db) percell_missing += (v < -0.01);
            }
        }
    }
    REQUIRE(percell_missing > 0);
    std::printf("[acceptance] C08 dense network: per-cell misses %d user/drops, coordinated hits all: PASS\n",
                percell_missing);
}

TEST_CASE("C09 power-versus-target sweep reproduces the figure shapes", "[acceptance]") {
    std::map<std::tuple<int, int, double>, CurvePoint> grid;  // (nb, bits, target)
    for (int nb : {16, 64}) {
        ExperimentSpec spec;
        spec.scenario = desk_config(7, 4, nb);
        spec.bits_list = {2, 3, kInfiniteBits};
        spec.targets_db = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
        spec.n_drops = 20;
        spec.methods = {Method::QiCoMP};
        spec.master_seed = 909;  // same seed: both antenna counts share geometry
        spec.workers = worker_count();
        const auto curve = power_vs_target_curve(run_experiment(spec));
        for (const auto& p : curve) grid[{nb, p.bits, p.target_db}] = p;
    }
    auto clean = [](const CurvePoint& p) { return p.n_diverged == 0 && p.n_converged > 0; };

    // (a) monotone in the target between fully converged grid points
    for (int nb : {16, 64})
        for (int bits : {2, 3, kInfiniteBits})
            for (double t = 0.0; t < 12.0; t += 2.0) {
                const CurvePoint a = grid[{nb, bits, t}], b = grid[{nb, bits, t + 2.0}];
                if (clean(a) && clean(b)) REQUIRE(b.mean_dl_power_dbm > a.mean_dl_power_dbm);
            }
    // (b) fewer bits cost more power at every fully converged target
    for (int nb : {16, 64})
        for (double t = 0.0; t <= 12.0; t += 2.0) {
            const CurvePoint p2 = grid[{nb, 2, t}], p3 = grid[{nb, 3, t}],
                             pi = grid[{nb, kInfiniteBits, t}];
            if (clean(p2) && clean(p3)) REQUIRE(p2.mean_dl_power_dbm >= p3.mean_dl_power_dbm);
            if (clean(p3) && clean(pi)) REQUIRE(p3.mean_dl_power_dbm >= pi.mean_dl_power_dbm);
        }
    // (c) two-bit curves hit a finite divergence onset; infinite resolution never does
    for (int nb : {16, 64}) {
        int b2_diverged = 0, binf_diverged = 0;
        for (double t = 0.0; t <= 12.0; t += 2.0) {
            b2_diverged += grid[{nb, 2, t}].n_diverged;
            binf_diverged += grid[{nb, kInfiniteBits, t}].n_diverged;
        }
        REQUIRE(b2_diverged > 0);
        REQUIRE(binf_diverged == 0);
    }
    // (d) more antennas reduce the mean power at every comparable point
    for (int bits : {2, 3, kInfiniteBits})
        for (double t = 0.0; t <= 12.0; t += 2.0) {
            const CurvePoint p16 = grid[{16, bits, t}], p64 = grid[{64, bits, t}];
            if (clean(p16) && clean(p64))
                REQUIRE(p64.mean_dl_power_dbm < p16.mean_dl_power_dbm);
        }
    std::printf("[acceptance] C09 figure-shape sweep (monotone, bit order, onset, array gain): PASS\n");
}

TEST_CASE("C10 infinite-resolution degeneration to the classic solver", "[acceptance]") {
    SolverOptions opts;
    opts.tolerance = 1e-12;
    opts.max_iterations = 30000;
    for (int k = 0; k < 50; ++k) {
        NetworkConfig c = desk_config(2, 2, 8);
        c.seed = 100000 + k;
        const NetworkScenario sc = make_scenario(c);
        const arma::vec targets = uniform_targets(sc, 0.0);
        const UplinkSolution ul = fixed_point_solve(sc, targets, quantizer_model(kInfiniteBits), opts);
        REQUIRE(ul.status == SolveStatus::Optimal);
        const auto ref = qcomp_test::reference_unquantized_solve(sc, targets);
        REQUIRE(ref.converged);
        REQUIRE((arma::abs(ul.powers - ref.powers) / ref.powers).max() < 1e-8);

        const DownlinkSolution dl =
            solve_downlink(ul.combiners, sc, targets, quantizer_model(kInfiniteBits));
        REQUIRE(dl.status == TauStatus::Optimal);
        REQUIRE(std::abs(dl.total_power - ref.total_dl_power) / ref.total_dl_power < 1e-8);
    }
    std::printf("[acceptance] C10 unquantized degeneration oracle (50 instances): PASS\n");
}
