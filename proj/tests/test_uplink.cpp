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

#include <catch2/catch_amalgamated.hpp>

#include "qcomp/uplink.hpp"
#include "test_support.hpp"

using namespace qcomp;
using qcomp_test::scalar_scenario;
using qcomp_test::synthetic_scenario;
using qcomp_test::uniform_targets;

TEST_CASE("K is the identity at zero power", "[uplink]") {
    Rng rng = make_rng(21);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    const arma::cx_mat K = build_K(sc, arma::vec(4, arma::fill::zeros), quantizer_model(3), 0);
    CHECK(arma::norm(K - arma::eye<arma::cx_mat>(4, 4), "fro") < 1e-14);
}

TEST_CASE("K reduces to the classic covariance at infinite resolution", "[uplink]") {
    Rng rng = make_rng(22);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    const arma::vec powers = arma::abs(arma::vec(4, arma::fill::randn));
    const arma::cx_mat K = build_K(sc, powers, quantizer_model(kInfiniteBits), 1);

    arma::cx_mat expected(4, 4, arma::fill::eye);
    for (arma::uword j = 0; j < 2; ++j)
        for (arma::uword v = 0; v < 2; ++v) {
            const arma::cx_vec h = sc.channels(1, j).col(v);
            expected += powers(flat_index(j, v, 2)) * h * h.t();
        }
    CHECK(arma::norm(K - expected, "fro") / arma::norm(expected, "fro") < 1e-13);
}

TEST_CASE("scalar K is resolution independent via alpha + beta = 1", "[uplink]") {
    // N_b = 1, |h|^2 = 2, lambda = 3: K = 1 + 6 alpha + 6 beta = 7.
    const NetworkScenario sc = scalar_scenario({1.0, 1.0});
    for (int bits : {1, 3, kInfiniteBits}) {
        const arma::cx_mat K = build_K(sc, arma::vec{3.0}, quantizer_model(bits), 0);
        CHECK(std::abs(K(0, 0) - std::complex<double>(7.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("scalar closed forms for the fixed point", "[uplink]") {
    const NetworkScenario sc = scalar_scenario({1.0, 1.0});  // |h|^2 = 2
    SolverOptions opts;
    opts.tolerance = 1e-13;
    opts.max_iterations = 200000;

    const arma::vec gamma{1.0};
    const UplinkSolution inf_sol = fixed_point_solve(sc, gamma, quantizer_model(kInfiniteBits), opts);
    REQUIRE(inf_sol.status == SolveStatus::Optimal);
    CHECK(inf_sol.powers(0) == Catch::Approx(0.5).epsilon(1e-9));  // gamma / |h|^2

    const QuantizerModel q3 = quantizer_model(3);
    const UplinkSolution q_sol = fixed_point_solve(sc, gamma, q3, opts);
    REQUIRE(q_sol.status == SolveStatus::Optimal);
    const double expected = 1.0 / (2.0 * (q3.alpha * 2.0 - 1.0));
    CHECK(q_sol.powers(0) == Catch::Approx(expected).epsilon(1e-9));
    CHECK(q_sol.powers(0) == Catch::Approx(0.5371120362935227).epsilon(1e-6));
}

TEST_CASE("scalar infeasibility at the quantized SINR ceiling", "[uplink]") {
    const NetworkScenario sc = scalar_scenario({1.0, 0.0});
    const QuantizerModel q = quantizer_model(3);
    SolverOptions opts;
    opts.max_iterations = 500000;
    const UplinkSolution sol =
        fixed_point_solve(sc, arma::vec{1.2 * q.alpha / q.beta}, q, opts);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("update map is positive, monotone and scalable", "[uplink]") {
    Rng rng = make_rng(23);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    const arma::vec targets = uniform_targets(sc, 0.0);
    const QuantizerModel q = quantizer_model(2);
    for (int rep = 0; rep < 20; ++rep) {
        const arma::vec big = 5.0 * arma::abs(arma::vec(4, arma::fill::randn));
        const arma::vec small = big % arma::randu<arma::vec>(4);
        const arma::vec f_big = fixed_point_update(sc, targets, q, big);
        const arma::vec f_small = fixed_point_update(sc, targets, q, small);
        CHECK(f_big.min() > 0.0);
        CHECK((f_big - f_small).min() > -1e-14);
        for (double rho : {1.5, 2.0, 10.0})
            CHECK((rho * f_big - fixed_point_update(sc, targets, q, rho * big)).min() > 0.0);
    }
}

TEST_CASE("trajectory from zero is monotone nondecreasing", "[uplink]") {
    Rng rng = make_rng(24);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    const arma::vec targets = uniform_targets(sc, 0.0);
    const QuantizerModel q = quantizer_model(3);
    arma::vec powers(4, arma::fill::zeros);
    for (int it = 0; it < 60; ++it) {
        const arma::vec next = fixed_point_update(sc, targets, q, powers);
        CHECK((next - powers).min() >= -1e-15);
        powers = next;
    }
}

TEST_CASE("solution is independent of the initialization", "[uplink]") {
    Rng rng = make_rng(25);
    const NetworkScenario sc = synthetic_scenario(2, 2, 8, rng);
    const arma::vec targets = uniform_targets(sc, 0.0);
    const QuantizerModel q = quantizer_model(3);
    SolverOptions opts;
    opts.tolerance = 1e-12;
    const UplinkSolution from_zero = fixed_point_solve(sc, targets, q, opts);
    REQUIRE(from_zero.status == SolveStatus::Optimal);
    const UplinkSolution from_above =
        fixed_point_solve(sc, targets, q, opts, 10.0 * from_zero.powers);
    REQUIRE(from_above.status == SolveStatus::Optimal);
    CHECK((arma::abs(from_zero.powers - from_above.powers) / from_zero.powers).max() < 1e-8);
}

TEST_CASE("mmse combiner reduces to the matched filter without interference", "[uplink]") {
    Rng rng = make_rng(26);
    NetworkScenario sc = synthetic_scenario(1, 1, 4, rng);
    const arma::cx_vec f =
        mmse_combiner(sc, arma::vec{0.0}, quantizer_model(kInfiniteBits), 0, 0);
    CHECK(arma::norm(f - sc.channels(0, 0).col(0)) < 1e-12);
}

TEST_CASE("scalar mmse combiner is a positive multiple of the channel", "[uplink]") {
    const NetworkScenario sc = scalar_scenario({0.6, -0.8});
    const arma::cx_vec f = mmse_combiner(sc, arma::vec{2.0}, quantizer_model(2), 0, 0);
    const std::complex<double> ratio = f(0) / sc.channels(0, 0)(0, 0);
    CHECK(ratio.real() > 0.0);
    CHECK(std::abs(ratio.imag()) < 1e-14);
}

TEST_CASE("mmse combiner maximizes the uplink SINR", "[uplink]") {
    Rng rng = make_rng(27);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    const arma::vec targets = uniform_targets(sc, 0.0);
    const QuantizerModel q = quantizer_model(3);
    const UplinkSolution sol = fixed_point_solve(sc, targets, q);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const arma::cx_vec f = sol.combiners.col(1);
    const double best = ul_sinr(f, sc, sol.powers, q, 0, 1);
    for (int rep = 0; rep < 100; ++rep) {
        const arma::cx_vec perturbed = f + 1e-3 * arma::norm(f) * randn_cvec(4, rng);
        CHECK(ul_sinr(perturbed, sc, sol.powers, q, 0, 1) <= best + 1e-12);
    }
}

TEST_CASE("uplink SINR special cases", "[uplink]") {
    const NetworkScenario sc = scalar_scenario({2.0, 0.0});  // |h|^2 = 4
    const QuantizerModel inf = quantizer_model(kInfiniteBits);
    const arma::cx_vec f{std::complex<double>(1.0, 0.0)};
    CHECK(ul_sinr(f, sc, arma::vec{0.0}, inf, 0, 0) == 0.0);
    CHECK(ul_sinr(f, sc, arma::vec{3.0}, inf, 0, 0) == Catch::Approx(12.0).epsilon(1e-12));
    CHECK_THROWS_AS(ul_sinr(arma::cx_vec{std::complex<double>(0.0, 0.0)}, sc, arma::vec{1.0},
                            inf, 0, 0),
                    std::invalid_argument);
}

TEST_CASE("converged solutions meet every target exactly", "[uplink]") {
    Rng rng = make_rng(28);
    for (int bits : {2, 3, kInfiniteBits}) {
        const NetworkScenario sc = synthetic_scenario(2, 2, 8, rng);
        const arma::vec targets = uniform_targets(sc, 0.0);
        const UplinkSolution sol = fixed_point_solve(sc, targets, quantizer_model(bits));
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(sol.max_sinr_deviation < 1e-6);
        CHECK(sol.powers.min() > 0.0);
    }
}

TEST_CASE("coarser quantization costs strictly more power", "[uplink]") {
    Rng rng = make_rng(29);
    const NetworkScenario sc = synthetic_scenario(2, 2, 8, rng);
    const arma::vec targets = uniform_targets(sc, 0.0);
    const double p2 = fixed_point_solve(sc, targets, quantizer_model(2)).total_power();
    const double p3 = fixed_point_solve(sc, targets, quantizer_model(3)).total_power();
    const double pinf = fixed_point_solve(sc, targets, quantizer_model(kInfiniteBits)).total_power();
    CHECK(p2 > p3);
    CHECK(p3 > pinf);
}

TEST_CASE("infinite-resolution solve matches the independent reference", "[uplink]") {
    Rng rng = make_rng(30);
    const NetworkScenario sc = synthetic_scenario(2, 2, 6, rng);
    const arma::vec targets = uniform_targets(sc, 2.0);
    SolverOptions opts;
    opts.tolerance = 1e-12;
    const UplinkSolution sol = fixed_point_solve(sc, targets, quantizer_model(kInfiniteBits), opts);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const auto ref = qcomp_test::reference_unquantized_solve(sc, targets);
    REQUIRE(ref.converged);
    CHECK((arma::abs(sol.powers - ref.powers) / ref.powers).max() < 1e-8);
}

TEST_CASE("solver validates inputs", "[uplink]") {
    Rng rng = make_rng(31);
    const NetworkScenario sc = synthetic_scenario(2, 2, 4, rng);
    CHECK_THROWS_AS(fixed_point_solve(sc, arma::vec{1.0}, quantizer_model(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fixed_point_solve(sc, arma::vec{1.0, 1.0, 1.0, -1.0}, quantizer_model(3)),
                    std::invalid_argument);
}
