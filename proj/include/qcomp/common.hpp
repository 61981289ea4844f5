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

#ifndef QCOMP_COMMON_HPP
#define QCOMP_COMMON_HPP

#include <armadillo>
#include <cmath>
#include <limits>

namespace qcomp {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// 10*log10(x); returns -inf for x <= 0 so that zero power maps to the
// -inf dB sentinel instead of NaN.
inline double linear_to_db(double x) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(x);
}

// Per-(cell,user) quantities are stored flat in cell-major order, matching
// the block structure blkdiag(L_1, ..., L_Nc) of the network power matrix.
inline arma::uword flat_index(arma::uword cell, arma::uword user, arma::uword n_users) {
    return cell * n_users + user;
}

}  // namespace qcomp

#endif  // QCOMP_COMMON_HPP
