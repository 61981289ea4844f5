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
// Quantization-aware uplink power minimization under per-user SINR targets.
// The solver iterates the fixed-point power update
//
//   lambda_{i,u} <- 1 / ( alpha (1 + 1/gamma_{i,u}) h^H K_i^-1(L) h )
//   K_i(L) = I + alpha sum_{j,v} lambda_{j,v} h_{i,j,v} h_{i,j,v}^H
//              + beta diag(H_i L H_i^H)
//
// which is a standard interference function (positive, monotone, scalable),
// so the iteration converges to the unique optimum from any starting point
// whenever the target tuple is feasible. At the fixed point every SINR
// constraint is active.

#ifndef QCOMP_UPLINK_HPP
#define QCOMP_UPLINK_HPP

#include <armadillo>
#include <stdexcept>

#include "qcomp/common.hpp"
#include "qcomp/quantizer.hpp"
#include "qcomp/scenario.hpp"

namespace qcomp {

struct SolverOptions {
    double tolerance = 1e-10;        // max relative power change per sweep
    int max_iterations = 10000;
    double power_cap = 1e12;         // divergence detector, unit-noise scale
    double initial_power = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, IterationCap };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::IterationCap: return "iteration_cap";
    }
    return "?";
}

struct UplinkSolution {
    arma::vec powers;        // flat cell-major, unit-noise scale
    arma::cx_mat combiners;  // N_b x (N_c*N_u), column per user
    int iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::IterationCap;
    double max_sinr_deviation = 0.0;  // max relative |SINR - target| at the solution

    double total_power() const { return arma::accu(powers); }
};

// K_i(L) for one BS; Hermitian positive definite for any nonnegative powers.
inline arma::cx_mat build_K(const NetworkScenario& sc, const arma::vec& powers,
                            const QuantizerModel& q, arma::uword cell) {
    if (powers.n_elem != sc.n_links()) throw std::invalid_argument("build_K: power vector size mismatch");
    if (powers.min() < 0.0) throw std::invalid_argument("build_K: negative power");
    const arma::cx_mat H = sc.stacked_channels(cell);
    arma::cx_mat scaled = H;
    scaled.each_row() %= arma::conv_to<arma::cx_rowvec>::from(arma::sqrt(powers).t());
    const arma::cx_mat G = scaled * scaled.t();  // H L H^H
    arma::cx_mat K = q.alpha * G;
    const arma::vec diag = q.beta * arma::real(G.diag()) + 1.0;
    K.diag() += arma::conv_to<arma::cx_vec>::from(diag);
    return K;
}

namespace detail {

// One synchronous sweep of the power update evaluated at `powers`, using a
// Cholesky factorization per cell (K^-1 is never formed).
inline arma::vec fixed_point_update_impl(const NetworkScenario& sc, const arma::vec& targets,
                                         const QuantizerModel& q, const arma::vec& powers) {
    const arma::uword nc = sc.n_cells(), nu = sc.n_users();
    arma::vec next(nc * nu);
    for (arma::uword i = 0; i < nc; ++i) {
        const arma::cx_mat K = build_K(sc, powers, q, i);
        arma::cx_mat L;
        if (!arma::chol(L, K, "lower"))
            throw std::runtime_error("fixed_point_update: K factorization failed");
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::uword k = flat_index(i, u, nu);
            const arma::cx_vec y = arma::solve(arma::trimatl(L), sc.channels(i, i).col(u));
            const double quad = arma::dot(arma::abs(y), arma::abs(y));  // h^H K^-1 h
            next(k) = 1.0 / (q.alpha * (1.0 + 1.0 / targets(k)) * quad);
        }
    }
    return next;
}

}  // namespace detail

// The standard-function update map F(L); exposed for property checks and
// trajectory inspection.
inline arma::vec fixed_point_update(const NetworkScenario& sc, const arma::vec& targets,
                                    const QuantizerModel& q, const arma::vec& powers) {
    if (targets.n_elem != sc.n_links()) throw std::invalid_argument("fixed_point_update: target size mismatch");
    if (targets.min() <= 0.0) throw std::invalid_argument("fixed_point_update: targets must be positive");
    return detail::fixed_point_update_impl(sc, targets, q, powers);
}

// Linear MMSE combiner for user (cell, user):
// f = [ alpha^2 sum_{(j,v) != (i,u)} lambda h h^H + alpha I
//       + alpha beta diag(H_i L H_i^H) ]^-1 h_{i,i,u}.
inline arma::cx_vec mmse_combiner(const NetworkScenario& sc, const arma::vec& powers,
                                  const QuantizerModel& q, arma::uword cell, arma::uword user) {
    if (powers.min() < 0.0) throw std::invalid_argument("mmse_combiner: negative power");
    const arma::uword k = flat_index(cell, user, sc.n_users());
    const arma::cx_mat H = sc.stacked_channels(cell);
    arma::cx_mat scaled = H;
    scaled.each_row() %= arma::conv_to<arma::cx_rowvec>::from(arma::sqrt(powers).t());
    const arma::cx_mat G = scaled * scaled.t();
    const arma::cx_vec h = sc.channels(cell, cell).col(user);
    arma::cx_mat C = q.alpha * q.alpha * (G - powers(k) * h * h.t());
    const arma::vec diag = q.alpha * (1.0 + q.beta * arma::real(G.diag()));
    C.diag() += arma::conv_to<arma::cx_vec>::from(diag);
    return arma::solve(C, h, arma::solve_opts::likely_sympd);
}

// Achieved uplink SINR of user (cell, user) under combiner f. The
// quantization term uses the covariance at the full power profile,
// including the user's own contribution.
inline double ul_sinr(const arma::cx_vec& f, const NetworkScenario& sc, const arma::vec& powers,
                      const QuantizerModel& q, arma::uword cell, arma::uword user) {
    if (arma::norm(f) == 0.0) throw std::invalid_argument("ul_sinr: zero combiner");
    const arma::uword k = flat_index(cell, user, sc.n_users());
    const arma::cx_mat H = sc.stacked_channels(cell);
    const arma::vec gains = arma::square(arma::abs(H.t() * f));  // |f^H h_{i,j,v}|^2
    const double a2 = q.alpha * q.alpha;
    const double signal = a2 * powers(k) * gains(k);
    double interference = a2 * (arma::dot(powers, gains) - powers(k) * gains(k));
    const arma::vec quant_diag = ul_quant_cov(H, powers, q);
    interference += arma::dot(quant_diag, arma::square(arma::abs(f)));
    interference += a2 * arma::dot(arma::abs(f), arma::abs(f));
    return signal / interference;
}

// Fixed-point solve of the uplink problem from an explicit starting vector.
// The iteration declares Infeasible as soon as any power crosses
// opts.power_cap and IterationCap when the budget runs out. On convergence
// the MMSE combiners are materialized and the SINR activeness is measured
// into max_sinr_deviation. The fixed point is unique, so any nonnegative
// start converges to the same solution.
inline UplinkSolution fixed_point_solve(const NetworkScenario& sc, const arma::vec& targets,
                                        const QuantizerModel& q, const SolverOptions& opts,
                                        arma::vec initial_powers) {
    if (targets.n_elem != sc.n_links()) throw std::invalid_argument("fixed_point_solve: target size mismatch");
    if (targets.min() <= 0.0) throw std::invalid_argument("fixed_point_solve: targets must be positive");
    if (!(opts.tolerance > 0.0)) throw std::invalid_argument("fixed_point_solve: tolerance must be positive");
    if (initial_powers.n_elem != sc.n_links() || initial_powers.min() < 0.0)
        throw std::invalid_argument("fixed_point_solve: invalid initial powers");

    constexpr double kRelFloor = 1e-30;
    UplinkSolution sol;
    sol.powers = std::move(initial_powers);

    for (int it = 1; it <= opts.max_iterations; ++it) {
        const arma::vec next = detail::fixed_point_update_impl(sc, targets, q, sol.powers);
        const arma::vec denom = arma::clamp(sol.powers, kRelFloor, arma::datum::inf);
        const double rel_change = (arma::abs(next - sol.powers) / denom).max();
        sol.powers = next;
        sol.iterations = it;
        if (sol.powers.max() > opts.power_cap) {
            sol.status = SolveStatus::Infeasible;
            return sol;
        }
        if (rel_change < opts.tolerance) {
            sol.converged = true;
            sol.status = SolveStatus::Optimal;
            break;
        }
    }
    if (!sol.converged) {
        sol.status = SolveStatus::IterationCap;
        return sol;
    }

    const arma::uword nc = sc.n_cells(), nu = sc.n_users();
    sol.combiners.set_size(sc.n_antennas(), nc * nu);
    sol.max_sinr_deviation = 0.0;
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::uword k = flat_index(i, u, nu);
            sol.combiners.col(k) = mmse_combiner(sc, sol.powers, q, i, u);
            const double sinr = ul_sinr(sol.combiners.col(k), sc, sol.powers, q, i, u);
            sol.max_sinr_deviation =
                std::max(sol.max_sinr_deviation, std::abs(sinr - targets(k)) / targets(k));
        }
    return sol;
}

// Default entry point: constant initialization at opts.initial_power (zero
// by default, which makes the power trajectory monotone nondecreasing and
// divergence easy to spot).
inline UplinkSolution fixed_point_solve(const NetworkScenario& sc, const arma::vec& targets,
                                        const QuantizerModel& q, const SolverOptions& opts = {}) {
    arma::vec initial(sc.n_links());
    initial.fill(opts.initial_power);
    return fixed_point_solve(sc, targets, q, opts, std::move(initial));
}

}  // namespace qcomp

#endif  // QCOMP_UPLINK_HPP
