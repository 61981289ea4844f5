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
// Additive quantization noise model (AQNM). An entry-wise scalar MMSE
// quantizer of resolution b is linearized as gain alpha = 1 - beta plus
// uncorrelated noise, where beta = E[|r - r_q|^2] / E[|r|^2] is the
// normalized distortion of the optimal (Lloyd-Max) quantizer for a
// unit-variance Gaussian input. beta is derived here from first principles
// rather than imported from published tables.

#ifndef QCOMP_QUANTIZER_HPP
#define QCOMP_QUANTIZER_HPP

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>

#include "qcomp/common.hpp"
#include "qcomp/rng.hpp"

namespace qcomp {

// Sentinel for infinite resolution (alpha = 1, beta = 0).
inline constexpr int kInfiniteBits = -1;
inline constexpr int kMaxBits = 12;

// Lloyd-Max codebook for a unit-variance Gaussian input.
struct ScalarCodebook {
    arma::vec thresholds;  // 2^b - 1 sorted cell boundaries
    arma::vec levels;      // 2^b reproduction levels (cell centroids)
    double distortion = 0.0;  // MSE for a unit-variance Gaussian input
    int iterations = 0;

    // Nearest-level quantization via threshold lookup.
    double quantize(double x) const {
        const double* begin = thresholds.memptr();
        const double* end = begin + thresholds.n_elem;
        const arma::uword cell = std::upper_bound(begin, end, x) - begin;
        return levels(cell);
    }
};

struct QuantizerModel {
    int bits = kInfiniteBits;
    double alpha = 1.0;
    double beta = 0.0;

    bool infinite() const { return bits == kInfiniteBits; }
};

namespace detail {

inline double gauss_pdf(double x) {
    static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * arma::datum::pi);
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard normal quantile by bisection; startup-only, accuracy ~1e-13.
inline double gauss_quantile(double p) {
    double lo = -10.0, hi = 10.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (gauss_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Partial moments of N(0,1) over (a, b): mass, first and second moment.
struct CellMoments {
    double p, m1, m2;
};

inline CellMoments cell_moments(double a, double b) {
    const double fa = std::isinf(a) ? 0.0 : gauss_pdf(a);
    const double fb = std::isinf(b) ? 0.0 : gauss_pdf(b);
    const double Fa = std::isinf(a) ? (a < 0 ? 0.0 : 1.0) : gauss_cdf(a);
    const double Fb = std::isinf(b) ? (b < 0 ? 0.0 : 1.0) : gauss_cdf(b);
    CellMoments m;
    m.p = Fb - Fa;
    m.m1 = fa - fb;
    m.m2 = m.p + (std::isinf(a) ? 0.0 : a * fa) - (std::isinf(b) ? 0.0 : b * fb);
    return m;
}

}  // namespace detail

// Lloyd-Max fixed point for a unit-variance Gaussian: thresholds are
// midpoints of adjacent levels, levels the centroids of their cells, and
// the sweep stops once the largest centroid movement drops below
// `tolerance`. Plain alternation needs ~M^2 sweeps (prohibitive beyond
// ~8 bits), so each sweep applies a Newton correction of the stationarity
// system with its tridiagonal Jacobian and falls back to the plain centroid
// assignment if the step leaves the ordered region. Cell statistics use
// closed-form Gaussian partial moments, so the returned distortion is exact
// for the returned codebook.
inline ScalarCodebook lloyd_max(int bits, double tolerance = 1e-10) {
    if (bits < 1 || bits > kMaxBits) throw std::invalid_argument("lloyd_max: bits must be in [1, 12]");
    if (!(tolerance > 0.0)) throw std::invalid_argument("lloyd_max: tolerance must be positive");

    const arma::uword n_levels = arma::uword(1) << bits;
    ScalarCodebook cb;
    cb.levels.set_size(n_levels);
    cb.thresholds.set_size(n_levels - 1);

    // Panter-Dite initialization: quantiles of the asymptotically optimal
    // point density, which for N(0,1) is the N(0,3) density.
    const double spread = std::sqrt(3.0);
    for (arma::uword k = 0; k < n_levels; ++k)
        cb.levels(k) = spread * detail::gauss_quantile((k + 0.5) / double(n_levels));

    const int max_iterations = 20000;
    const double inf = std::numeric_limits<double>::infinity();
    arma::vec centroid(n_levels), dc_da(n_levels), dc_db(n_levels);
    bool converged = false;
    int it = 0;
    for (; it < max_iterations; ++it) {
        for (arma::uword k = 0; k + 1 < n_levels; ++k)
            cb.thresholds(k) = 0.5 * (cb.levels(k) + cb.levels(k + 1));

        double movement = 0.0;
        for (arma::uword k = 0; k < n_levels; ++k) {
            const double a = (k == 0) ? -inf : cb.thresholds(k - 1);
            const double b = (k + 1 == n_levels) ? inf : cb.thresholds(k);
            const auto m = detail::cell_moments(a, b);
            centroid(k) = (m.p > 0.0) ? m.m1 / m.p : cb.levels(k);
            movement = std::max(movement, std::abs(centroid(k) - cb.levels(k)));
            const double fa = std::isinf(a) ? 0.0 : detail::gauss_pdf(a);
            const double fb = std::isinf(b) ? 0.0 : detail::gauss_pdf(b);
            dc_da(k) = (m.p > 0.0 && fa > 0.0) ? fa * (m.m1 - a * m.p) / (m.p * m.p) : 0.0;
            dc_db(k) = (m.p > 0.0 && fb > 0.0) ? fb * (b * m.p - m.m1) / (m.p * m.p) : 0.0;
        }
        if (movement < tolerance) {
            converged = true;
            break;
        }

        // Newton step on G(l) = l - centroid(l); thresholds are midpoints,
        // so each centroid couples only to its two neighbor levels.
        arma::vec diag = 1.0 - 0.5 * (dc_da + dc_db);
        arma::vec sub = -0.5 * dc_da.tail(n_levels - 1);
        arma::vec sup = -0.5 * dc_db.head(n_levels - 1);
        arma::vec rhs = centroid - cb.levels;
        for (arma::uword k = 1; k < n_levels; ++k) {  // Thomas elimination
            const double w = sub(k - 1) / diag(k - 1);
            diag(k) -= w * sup(k - 1);
            rhs(k) -= w * rhs(k - 1);
        }
        arma::vec step(n_levels);
        step(n_levels - 1) = rhs(n_levels - 1) / diag(n_levels - 1);
        for (arma::uword k = n_levels - 1; k-- > 0;)
            step(k) = (rhs(k) - sup(k) * step(k + 1)) / diag(k);

        const arma::vec candidate = cb.levels + step;
        const bool ordered = candidate.is_finite() &&
                             (n_levels == 1 || arma::diff(candidate).min() > 0.0);
        cb.levels = ordered ? candidate : centroid;
    }
    if (!converged) throw std::runtime_error("lloyd_max: no convergence within iteration cap");
    cb.iterations = it + 1;

    double mse = 0.0;
    for (arma::uword k = 0; k < n_levels; ++k) {
        const double a = (k == 0) ? -inf : cb.thresholds(k - 1);
        const double b = (k + 1 == n_levels) ? inf : cb.thresholds(k);
        const auto m = detail::cell_moments(a, b);
        mse += m.m2 - 2.0 * cb.levels(k) * m.m1 + cb.levels(k) * cb.levels(k) * m.p;
    }
    cb.distortion = mse;
    return cb;
}

// Cached codebook lookup; computed lazily per resolution. The level
// movement bottoms out at a roundoff floor that grows with the codebook
// size, so large codebooks use a looser level tolerance; the distortion is
// quadratically insensitive to level error and stays accurate to ~1e-15.
inline const ScalarCodebook& lloyd_max_codebook(int bits) {
    static std::map<int, ScalarCodebook> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(bits);
    if (it == cache.end()) {
        const double tol = bits <= 9 ? 1e-10 : (bits <= 11 ? 1e-9 : 1e-8);
        it = cache.emplace(bits, lloyd_max(bits, tol)).first;
    }
    return it->second;
}

// AQNM gain pair for resolution `bits`: beta from the Lloyd-Max oracle,
// alpha = 1 - beta. Infinite resolution maps to (1, 0).
inline QuantizerModel quantizer_model(int bits) {
    if (bits == kInfiniteBits) return {kInfiniteBits, 1.0, 0.0};
    if (bits < 1 || bits > kMaxBits)
        throw std::invalid_argument("quantizer_model: bits must be in [1, 12] or infinite");
    const double beta = lloyd_max_codebook(bits).distortion;
    return {bits, 1.0 - beta, beta};
}

// Uplink quantization-noise covariance, C = alpha*beta * diag(H L H^H + I),
// returned as its diagonal. H is the N_b x (N_c*N_u) stacked channel of one
// BS and `powers` the flat network power vector.
inline arma::vec ul_quant_cov(const arma::cx_mat& channels_at_bs, const arma::vec& powers,
                              const QuantizerModel& q) {
    if (channels_at_bs.n_cols != powers.n_elem)
        throw std::invalid_argument("ul_quant_cov: power vector does not match channel columns");
    if (powers.min() < 0.0) throw std::invalid_argument("ul_quant_cov: negative power");
    arma::vec diag(channels_at_bs.n_rows, arma::fill::ones);
    diag += arma::square(arma::abs(channels_at_bs)) * powers;
    return q.alpha * q.beta * diag;
}

// Downlink quantization-noise covariance at one BS,
// C = alpha*beta * diag(W W^H), returned as its diagonal.
inline arma::vec dl_quant_cov(const arma::cx_mat& precoders_at_bs, const QuantizerModel& q) {
    if (!precoders_at_bs.is_finite()) throw std::invalid_argument("dl_quant_cov: non-finite precoder");
    const arma::vec diag = arma::sum(arma::square(arma::abs(precoders_at_bs)), 1);
    return q.alpha * q.beta * diag;
}

// Monte-Carlo estimate of beta = E[(r - r_q)^2] / E[r^2] from quantizing
// unit-Gaussian samples with the Lloyd-Max codebook. Infinite resolution
// bypasses quantization and returns 0.
inline double empirical_beta(int bits, std::size_t n_samples, Rng& rng) {
    if (bits == kInfiniteBits) return 0.0;
    if (n_samples < 10000) throw std::invalid_argument("empirical_beta: need at least 1e4 samples");
    const ScalarCodebook& cb = lloyd_max_codebook(bits);
    double err = 0.0, pow_sum = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double x = randn(rng);
        const double d = x - cb.quantize(x);
        err += d * d;
        pow_sum += x * x;
    }
    return err / pow_sum;
}

}  // namespace qcomp

#endif  // QCOMP_QUANTIZER_HPP
