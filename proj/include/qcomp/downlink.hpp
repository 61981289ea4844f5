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
// Downlink precoder construction from the uplink solution. By uplink-
// downlink duality the optimal precoders are scaled uplink combiners,
// w_{i,u} = sqrt(tau_{i,u}) f_{i,u}, where tau solves the linear activeness
// system Sigma tau = 1 built from the combiners. At the optimum the total
// radiated power alpha sum ||w||^2 equals the uplink total power (zero
// duality gap).

#ifndef QCOMP_DOWNLINK_HPP
#define QCOMP_DOWNLINK_HPP

#include <armadillo>
#include <stdexcept>

#include "qcomp/common.hpp"
#include "qcomp/quantizer.hpp"
#include "qcomp/scenario.hpp"
#include "qcomp/uplink.hpp"

namespace qcomp {

enum class TauStatus { Optimal, NonPositiveTau, IterationCap };

inline const char* to_string(TauStatus s) {
    switch (s) {
        case TauStatus::Optimal: return "optimal";
        case TauStatus::NonPositiveTau: return "nonpositive_tau";
        case TauStatus::IterationCap: return "iteration_cap";
    }
    return "?";
}

struct TauResult {
    arma::vec tau;
    TauStatus status = TauStatus::NonPositiveTau;
    int iterations = 0;
};

struct DownlinkSolution {
    arma::cx_mat precoders;  // N_b x (N_c*N_u), w_{i,u} = sqrt(tau) f_{i,u}
    arma::vec tau;
    double total_power = 0.0;  // alpha * sum_{i,u} ||w_{i,u}||^2, unit-noise scale
    TauStatus status = TauStatus::NonPositiveTau;
};

// Scaling-weight coupling matrix. Row r = (i,u), column c = (j,v):
//   r == c:  alpha^2/gamma |f^H h|^2 - alpha beta f^H diag(h h^H) f
//   r != c:  -alpha^2 |f_{j,v}^H h_{j,i,u}|^2
//            - alpha beta f_{j,v}^H diag(h_{j,i,u} h_{j,i,u}^H) f_{j,v}
// with h_{j,i,u} the channel from BS j to user (i,u).
inline arma::mat build_sigma(const arma::cx_mat& combiners, const NetworkScenario& sc,
                             const arma::vec& targets, const QuantizerModel& q) {
    const arma::uword nc = sc.n_cells(), nu = sc.n_users(), n = nc * nu;
    if (combiners.n_cols != n || targets.n_elem != n)
        throw std::invalid_argument("build_sigma: combiner/target size mismatch");
    const double a2 = q.alpha * q.alpha, ab = q.alpha * q.beta;

    arma::mat sigma(n, n);
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword u = 0; u < nu; ++u) {
            const arma::uword r = flat_index(i, u, nu);
            for (arma::uword j = 0; j < nc; ++j) {
                const arma::vec h_abs2 = arma::square(arma::abs(sc.channels(j, i).col(u)));
                for (arma::uword v = 0; v < nu; ++v) {
                    const arma::uword c = flat_index(j, v, nu);
                    const arma::cx_vec& f = combiners.unsafe_col(c);
                    const double beam = std::norm(arma::cdot(f, sc.channels(j, i).col(u)));
                    const double quant = arma::dot(arma::square(arma::abs(f)), h_abs2);
                    sigma(r, c) = (r == c) ? a2 / targets(r) * beam - ab * quant
                                           : -a2 * beam - ab * quant;
                }
            }
        }
    return sigma;
}

// Direct dense solve of Sigma tau = 1. NonPositiveTau flags a singular
// system or any nonpositive entry; values are never clamped.
inline TauResult solve_tau(const arma::mat& sigma) {
    if (sigma.n_rows != sigma.n_cols) throw std::invalid_argument("solve_tau: sigma must be square");
    TauResult res;
    arma::vec tau;
    const bool ok = arma::solve(tau, sigma, arma::vec(sigma.n_rows, arma::fill::ones),
                                arma::solve_opts::no_approx);
    if (!ok || !tau.is_finite() || tau.min() <= 0.0) {
        res.tau = std::move(tau);
        res.status = TauStatus::NonPositiveTau;
        return res;
    }
    res.tau = std::move(tau);
    res.status = TauStatus::Optimal;
    return res;
}

// Per-user fixed-point update on the activeness system (each user refreshes
// its own weight assuming the others fixed):
//   tau_r <- (rhs_r - sum_{c != r} sigma_{r,c} tau_c) / sigma_{r,r}.
// Off-diagonal couplings are nonpositive, so from tau = 0 the iterates grow
// monotonically and converge exactly when the system is feasible.
inline TauResult tau_iterative_from_sigma(const arma::mat& sigma, const arma::vec& rhs,
                                          const SolverOptions& opts = {}) {
    if (sigma.n_rows != sigma.n_cols || sigma.n_rows != rhs.n_elem)
        throw std::invalid_argument("tau_iterative: dimension mismatch");
    TauResult res;
    const arma::uword n = sigma.n_rows;
    const arma::vec diag = sigma.diag();
    if (diag.min() <= 0.0) {
        res.status = TauStatus::NonPositiveTau;
        return res;
    }
    arma::mat off = sigma;
    off.diag().zeros();

    arma::vec tau(n, arma::fill::zeros);
    constexpr double kRelFloor = 1e-30;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const arma::vec next = (rhs - off * tau) / diag;
        const double rel_change =
            (arma::abs(next - tau) / arma::clamp(tau, kRelFloor, arma::datum::inf)).max();
        tau = next;
        res.iterations = it;
        if (!tau.is_finite() || tau.max() > opts.power_cap || tau.min() < 0.0) {
            res.tau = std::move(tau);
            res.status = TauStatus::IterationCap;
            return res;
        }
        if (rel_change < opts.tolerance) {
            res.tau = std::move(tau);
            res.status = TauStatus::Optimal;
            return res;
        }
    }
    res.tau = std::move(tau);
    res.status = TauStatus::IterationCap;
    return res;
}

inline TauResult tau_iterative(const arma::cx_mat& combiners, const NetworkScenario& sc,
                               const arma::vec& targets, const QuantizerModel& q,
                               const SolverOptions& opts = {}) {
    const arma::mat sigma = build_sigma(combiners, sc, targets, q);
    return tau_iterative_from_sigma(sigma, arma::vec(sigma.n_rows, arma::fill::ones), opts);
}

// w_{i,u} = sqrt(tau_{i,u}) f_{i,u}; total power alpha * sum tau ||f||^2.
inline DownlinkSolution assemble_precoders(const arma::cx_mat& combiners, const arma::vec& tau,
                                           const QuantizerModel& q) {
    if (combiners.n_cols != tau.n_elem) throw std::invalid_argument("assemble_precoders: size mismatch");
    if (tau.min() <= 0.0) throw std::invalid_argument("assemble_precoders: tau must be positive");
    DownlinkSolution dl;
    dl.tau = tau;
    dl.precoders = combiners;
    dl.precoders.each_row() %= arma::conv_to<arma::cx_rowvec>::from(arma::sqrt(tau).t());
    dl.total_power = q.alpha * arma::accu(arma::square(arma::abs(dl.precoders)));
    dl.status = TauStatus::Optimal;
    return dl;
}

// Achieved downlink SINR of user (cell, user) under the full precoder set
// (flat cell-major columns). The quantization term sums, over every BS j,
// the quadratic form of the user's channel in that BS's DAC noise
// covariance alpha*beta*diag(W_j W_j^H).
inline double dl_sinr(const arma::cx_mat& precoders, const NetworkScenario& sc,
                      const QuantizerModel& q, arma::uword cell, arma::uword user) {
    if (!precoders.is_finite()) throw std::invalid_argument("dl_sinr: non-finite precoders");
    const arma::uword nc = sc.n_cells(), nu = sc.n_users();
    const arma::uword k = flat_index(cell, user, nu);
    const double a2 = q.alpha * q.alpha;

    double signal = 0.0, interference = 1.0;
    for (arma::uword j = 0; j < nc; ++j) {
        const arma::cx_vec h = sc.channels(j, cell).col(user);  // BS j -> user (cell,user)
        const arma::cx_mat W_j = precoders.cols(j * nu, (j + 1) * nu - 1);
        const arma::vec beams = arma::square(arma::abs(W_j.t() * h));
        for (arma::uword v = 0; v < nu; ++v) {
            if (flat_index(j, v, nu) == k)
                signal = a2 * beams(v);
            else
                interference += a2 * beams(v);
        }
        interference += arma::dot(dl_quant_cov(W_j, q), arma::square(arma::abs(h)));
    }
    return signal / interference;
}

// Convenience pipeline: coupling matrix, direct tau solve, precoders.
inline DownlinkSolution solve_downlink(const arma::cx_mat& combiners, const NetworkScenario& sc,
                                       const arma::vec& targets, const QuantizerModel& q) {
    const arma::mat sigma = build_sigma(combiners, sc, targets, q);
    const TauResult tr = solve_tau(sigma);
    if (tr.status != TauStatus::Optimal) {
        DownlinkSolution dl;
        dl.tau = tr.tau;
        dl.status = tr.status;
        return dl;
    }
    return assemble_precoders(combiners, tr.tau, q);
}

}  // namespace qcomp

#endif  // QCOMP_DOWNLINK_HPP
