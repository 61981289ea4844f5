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
// Per-cell iterative baseline ("Q-Percell"). Each BS repeatedly solves its
// own single-cell power problem treating the received out-of-cell
// interference, including its cross-cell share of the ADC noise covariance,
// as a frozen noise floor; the BSs then exchange updated powers and iterate
// until the noise estimates stabilize. The downlink mirrors the uplink
// solution cell by cell: scaling weights come from the local coupling block
// with the UL-measured interference standing in for the (unmeasurable)
// downlink interference at the users. That proxy is exact only without
// cross-cell coupling, so converged runs meet every uplink target but the
// delivered downlink SINRs scatter around the targets as coupling grows.
// Divergence is reported, never repaired.

#ifndef QCOMP_BASELINE_HPP
#define QCOMP_BASELINE_HPP

#include <armadillo>
#include <stdexcept>

#include "qcomp/common.hpp"
#include "qcomp/downlink.hpp"
#include "qcomp/quantizer.hpp"
#include "qcomp/scenario.hpp"
#include "qcomp/uplink.hpp"

namespace qcomp {

enum class PercellStatus { Converged, Diverged, IterationCap };

inline const char* to_string(PercellStatus s) {
    switch (s) {
        case PercellStatus::Converged: return "converged";
        case PercellStatus::Diverged: return "diverged";
        case PercellStatus::IterationCap: return "iteration_cap";
    }
    return "?";
}

struct PercellOptions {
    double outer_tolerance = 1e-8;
    int max_outer_iterations = 500;
    SolverOptions inner;
};

struct PercellSolution {
    arma::vec powers;        // flat cell-major
    arma::cx_mat combiners;  // empty when the uplink stage diverged
    arma::cx_mat precoders;  // empty when the downlink stage diverged
    arma::vec tau;
    int outer_iterations = 0;
    PercellStatus status = PercellStatus::IterationCap;
    arma::vec ul_sinr_db;  // achieved, full multicell formulas
    arma::vec dl_sinr_db;

    double total_ul_power() const { return arma::accu(powers); }
    double total_dl_power(const QuantizerModel& q) const {
        return precoders.n_elem == 0 ? 0.0
                                     : q.alpha * arma::accu(arma::square(arma::abs(precoders)));
    }
};

// Per-user achieved SINRs of any (powers, combiners, precoders) triple,
// evaluated with the full multicell formulas. Missing combiners or
// precoders (a diverged stage) yield the -inf dB sentinel for that side.
struct SinrReport {
    arma::vec ul_sinr_db;
    arma::vec dl_sinr_db;
    arma::vec target_db;
    arma::vec ul_delta_db;  // achieved - target
    arma::vec dl_delta_db;
    arma::uvec under_target;  // 1 where the DL side misses by more than the slack
    double total_ul_power = 0.0;
    double total_dl_power = 0.0;
    double duality_gap = 0.0;  // |dl - ul| / ul
};

inline SinrReport achieved_sinr_report(const arma::vec& powers, const arma::cx_mat& combiners,
                                       const arma::cx_mat& precoders, const NetworkScenario& sc,
                                       const QuantizerModel& q, const arma::vec& targets,
                                       double slack_db = 0.01) {
    const arma::uword n = sc.n_links(), nu = sc.n_users();
    const double neg_inf = -arma::datum::inf;
    SinrReport rep;
    rep.ul_sinr_db.set_size(n);
    rep.dl_sinr_db.set_size(n);
    rep.target_db = 10.0 * arma::log10(targets);
    for (arma::uword i = 0; i < sc.n_cells(); ++i)
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::uword k = flat_index(i, u, nu);
            rep.ul_sinr_db(k) =
                (combiners.n_elem == 0 || arma::norm(combiners.col(k)) == 0.0)
                    ? neg_inf
                    : linear_to_db(ul_sinr(combiners.col(k), sc, powers, q, i, u));
            rep.dl_sinr_db(k) =
                (precoders.n_elem == 0) ? neg_inf : linear_to_db(dl_sinr(precoders, sc, q, i, u));
        }
    rep.ul_delta_db = rep.ul_sinr_db - rep.target_db;
    rep.dl_delta_db = rep.dl_sinr_db - rep.target_db;
    rep.under_target = rep.dl_delta_db < -slack_db;
    rep.total_ul_power = arma::accu(powers);
    rep.total_dl_power =
        precoders.n_elem == 0 ? 0.0 : q.alpha * arma::accu(arma::square(arma::abs(precoders)));
    rep.duality_gap = rep.total_ul_power > 0.0
                          ? std::abs(rep.total_dl_power - rep.total_ul_power) / rep.total_ul_power
                          : 0.0;
    return rep;
}

inline SinrReport achieved_sinr_report(const UplinkSolution& ul, const DownlinkSolution& dl,
                                       const NetworkScenario& sc, const QuantizerModel& q,
                                       const arma::vec& targets) {
    return achieved_sinr_report(ul.powers, ul.combiners, dl.precoders, sc, q, targets);
}

inline SinrReport achieved_sinr_report(const PercellSolution& sol, const NetworkScenario& sc,
                                       const QuantizerModel& q, const arma::vec& targets) {
    return achieved_sinr_report(sol.powers, sol.combiners, sol.precoders, sc, q, targets);
}

namespace detail {

// Single-cell uplink fixed point for cell `i` with every other cell's power
// frozen. Freezing the out-of-cell rows of the power vector inside K_i is
// exactly the "interference as fixed noise" covariance
// alpha^2 sum_{j != i} H_{i,j} L_j H_{i,j}^H plus its share of the
// quantization diagonal. Returns false on divergence past the power cap.
inline bool percell_inner_solve(const NetworkScenario& sc, const arma::vec& targets,
                                const QuantizerModel& q, arma::uword i, arma::vec& powers,
                                const SolverOptions& opts) {
    const arma::uword nu = sc.n_users();
    constexpr double kRelFloor = 1e-30;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const arma::cx_mat K = build_K(sc, powers, q, i);
        arma::cx_mat L;
        if (!arma::chol(L, K, "lower"))
            throw std::runtime_error("percell_inner_solve: K factorization failed");
        double rel_change = 0.0;
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::uword k = flat_index(i, u, nu);
            const arma::cx_vec y = arma::solve(arma::trimatl(L), sc.channels(i, i).col(u));
            const double quad = arma::dot(arma::abs(y), arma::abs(y));
            const double next = 1.0 / (q.alpha * (1.0 + 1.0 / targets(k)) * quad);
            rel_change = std::max(rel_change,
                                  std::abs(next - powers(k)) / std::max(powers(k), kRelFloor));
            powers(k) = next;
        }
        if (powers.rows(i * nu, (i + 1) * nu - 1).max() > opts.power_cap) return false;
        if (rel_change < opts.tolerance) return true;
    }
    return false;  // treated as divergence of the inner stage
}

// External noise power observed by each BS: trace of the frozen
// interference covariance (monitored for outer-loop convergence).
inline arma::vec percell_noise_traces(const NetworkScenario& sc, const arma::vec& powers,
                                      const QuantizerModel& q) {
    const arma::uword nc = sc.n_cells(), nu = sc.n_users();
    arma::vec traces(nc, arma::fill::zeros);
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword j = 0; j < nc; ++j) {
            if (j == i) continue;
            for (arma::uword v = 0; v < nu; ++v)
                traces(i) += powers(flat_index(j, v, nu)) *
                             arma::dot(arma::abs(sc.channels(i, j).col(v)),
                                       arma::abs(sc.channels(i, j).col(v)));
        }
    return q.alpha * traces;  // (alpha^2 + alpha*beta) * tr(M) = alpha * tr(M)
}

}  // namespace detail

// Q-Percell: outer loop alternating per-cell uplink solves against frozen
// out-of-cell interference until both the powers and the per-cell noise
// traces are stable; the downlink weights are then constructed once per
// cell from the local coupling block, with each user's share of the frozen
// uplink noise folded into the unit term of the right-hand side.
inline PercellSolution percell_solve(const NetworkScenario& sc, const arma::vec& targets,
                                     const QuantizerModel& q, const PercellOptions& opts = {}) {
    if (targets.n_elem != sc.n_links()) throw std::invalid_argument("percell_solve: target size mismatch");
    if (targets.min() <= 0.0) throw std::invalid_argument("percell_solve: targets must be positive");

    const arma::uword nc = sc.n_cells(), nu = sc.n_users(), n = nc * nu;
    constexpr double kRelFloor = 1e-30;
    PercellSolution sol;
    sol.powers.zeros(n);
    sol.ul_sinr_db.set_size(n);
    sol.dl_sinr_db.set_size(n);

    arma::vec traces(nc, arma::fill::zeros);
    bool ul_converged = false;
    for (int outer = 1; outer <= opts.max_outer_iterations; ++outer) {
        sol.outer_iterations = outer;
        const arma::vec prev_powers = sol.powers;
        const arma::vec prev_traces = traces;
        for (arma::uword i = 0; i < nc; ++i) {
            if (!detail::percell_inner_solve(sc, targets, q, i, sol.powers, opts.inner)) {
                sol.status = PercellStatus::Diverged;
                const SinrReport rep = achieved_sinr_report(sol, sc, q, targets);
                sol.ul_sinr_db = rep.ul_sinr_db;
                sol.dl_sinr_db = rep.dl_sinr_db;
                return sol;
            }
        }
        traces = detail::percell_noise_traces(sc, sol.powers, q);
        const double power_change =
            (arma::abs(sol.powers - prev_powers) / arma::clamp(prev_powers, kRelFloor, arma::datum::inf)).max();
        const double trace_change =
            (arma::abs(traces - prev_traces) / arma::clamp(prev_traces, kRelFloor, arma::datum::inf)).max();
        if (power_change < opts.outer_tolerance && trace_change < opts.outer_tolerance) {
            ul_converged = true;
            break;
        }
    }
    if (!ul_converged) {
        sol.status = PercellStatus::IterationCap;
        const SinrReport rep = achieved_sinr_report(sol, sc, q, targets);
        sol.ul_sinr_db = rep.ul_sinr_db;
        sol.dl_sinr_db = rep.dl_sinr_db;
        return sol;
    }

    // Per-cell MMSE combiners at the stable powers; the frozen external
    // covariance is already carried by the full power vector.
    sol.combiners.set_size(sc.n_antennas(), n);
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword u = 0; u < nu; ++u)
            sol.combiners.col(flat_index(i, u, nu)) = mmse_combiner(sc, sol.powers, q, i, u);

    // Downlink: one-shot per-cell construction. The BS has no measurement
    // of its users' downlink interference, so the unit noise term is
    // augmented by the uplink external noise projected through each user's
    // combiner, normalized against the uplink thermal reference
    // alpha^2 ||f||^2. The weights solve the local coupling block only.
    const arma::mat sigma = build_sigma(sol.combiners, sc, targets, q);
    arma::vec tau(n, arma::fill::zeros);
    for (arma::uword i = 0; i < nc; ++i) {
        arma::cx_mat external(sc.n_antennas(), sc.n_antennas(), arma::fill::zeros);
        for (arma::uword j = 0; j < nc; ++j) {
            if (j == i) continue;
            arma::cx_mat scaled = sc.channels(i, j);
            scaled.each_row() %= arma::conv_to<arma::cx_rowvec>::from(
                arma::sqrt(sol.powers.rows(j * nu, (j + 1) * nu - 1)).t());
            const arma::cx_mat M = scaled * scaled.t();
            external += q.alpha * q.alpha * M;
            external.diag() += q.alpha * q.beta *
                               arma::conv_to<arma::cx_vec>::from(arma::real(M.diag()));
        }
        const arma::span rows(i * nu, (i + 1) * nu - 1);
        arma::vec rhs(nu);
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::cx_vec f = sol.combiners.col(flat_index(i, u, nu));
            const double thermal = q.alpha * q.alpha * std::pow(arma::norm(f), 2);
            rhs(u) = 1.0 + std::real(arma::cdot(f, external * f)) / thermal;
        }
        arma::vec tau_i;
        const bool ok = arma::solve(tau_i, sigma(rows, rows), rhs, arma::solve_opts::no_approx);
        if (!ok || !tau_i.is_finite() || tau_i.min() <= 0.0) {
            sol.status = PercellStatus::Diverged;
            sol.tau = tau;
            const SinrReport rep = achieved_sinr_report(sol, sc, q, targets);
            sol.ul_sinr_db = rep.ul_sinr_db;
            sol.dl_sinr_db = rep.dl_sinr_db;
            return sol;
        }
        tau(rows) = tau_i;
    }
    sol.tau = tau;
    sol.precoders = sol.combiners;
    sol.precoders.each_row() %= arma::conv_to<arma::cx_rowvec>::from(arma::sqrt(tau).t());
    sol.status = PercellStatus::Converged;

    const SinrReport rep = achieved_sinr_report(sol, sc, q, targets);
    sol.ul_sinr_db = rep.ul_sinr_db;
    sol.dl_sinr_db = rep.dl_sinr_db;
    return sol;
}

}  // namespace qcomp

#endif  // QCOMP_BASELINE_HPP
