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

#ifndef QCOMP_RNG_HPP
#define QCOMP_RNG_HPP

#include <armadillo>
#include <complex>
#include <cstdint>
#include <random>

namespace qcomp {

using Rng = std::mt19937_64;

namespace detail {
// splitmix64 finalizer; good avalanche for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Deterministic per-stream seed derivation: streams are indexed by counter,
// never by scheduling order, so concurrent runs stay reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return detail::splitmix64(detail::splitmix64(master) ^ (stream + 0x9e3779b97f4a7c15ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double randn(Rng& rng) {
    static thread_local std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

// One CN(0,1) draw: real/imag parts iid N(0, 1/2).
inline std::complex<double> randn_c(Rng& rng) {
    const double s = 1.0 / std::sqrt(2.0);
    return {s * randn(rng), s * randn(rng)};
}

inline arma::cx_vec randn_cvec(arma::uword n, Rng& rng) {
    arma::cx_vec v(n);
    for (arma::uword k = 0; k < n; ++k) v(k) = randn_c(rng);
    return v;
}

inline arma::cx_mat randn_cmat(arma::uword n_rows, arma::uword n_cols, Rng& rng) {
    arma::cx_mat m(n_rows, n_cols);
    for (arma::uword c = 0; c < n_cols; ++c)
        for (arma::uword r = 0; r < n_rows; ++r) m(r, c) = randn_c(rng);
    return m;
}

}  // namespace qcomp

#endif  // QCOMP_RNG_HPP
