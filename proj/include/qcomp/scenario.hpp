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
// Multicell geometry, user placement and channel generation. Cells are
// hexagonal with the BS at the center; supported layouts are 1, 2 and 7
// cells (center plus one hexagonal ring). Large-scale fading follows the
// Erceg log-distance model with lognormal shadowing; small-scale fading is
// iid Rayleigh. Channels are noise-normalized: the thermal noise power is
// folded into the channel coefficients so every downstream receiver sees
// unit noise variance per antenna.

#ifndef QCOMP_SCENARIO_HPP
#define QCOMP_SCENARIO_HPP

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcomp/common.hpp"
#include "qcomp/rng.hpp"

namespace qcomp {

// Erceg log-distance pathloss parameters. Defaults are suburban terrain
// category B with a 30 m BS; the pathloss exponent is
// gamma = a - b*h_b + c/h_b.
struct PathlossParams {
    double reference_distance_m = 100.0;
    double erceg_a = 4.0;
    double erceg_b = 0.0065;
    double erceg_c = 17.1;
    double bs_height_m = 30.0;

    double exponent() const { return erceg_a - erceg_b * bs_height_m + erceg_c / bs_height_m; }
};

struct NetworkConfig {
    arma::uword n_cells = 2;
    arma::uword n_users_per_cell = 2;
    arma::uword n_bs_antennas = 16;
    double inter_site_distance_m = 2000.0;
    double min_user_bs_distance_m = 100.0;
    double carrier_frequency_hz = 2.4e9;
    double bandwidth_hz = 10e6;
    double noise_figure_db = 5.0;
    double shadowing_std_db = 8.7;
    PathlossParams pathloss;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_cells != 1 && n_cells != 2 && n_cells != 7)
            throw std::invalid_argument("NetworkConfig: n_cells must be 1, 2 or 7");
        if (n_users_per_cell < 1 || n_bs_antennas < 1)
            throw std::invalid_argument("NetworkConfig: counts must be >= 1");
        if (!(inter_site_distance_m > 2.0 * min_user_bs_distance_m))
            throw std::invalid_argument("NetworkConfig: inter_site_distance must exceed twice the min user-BS distance");
        if (!(carrier_frequency_hz > 0.0) || !(bandwidth_hz > 0.0))
            throw std::invalid_argument("NetworkConfig: carrier frequency and bandwidth must be positive");
        if (!(min_user_bs_distance_m >= 0.0) || !(shadowing_std_db >= 0.0))
            throw std::invalid_argument("NetworkConfig: negative distance or shadowing std");
        if (!(pathloss.reference_distance_m > 0.0) || !(pathloss.bs_height_m > 0.0))
            throw std::invalid_argument("NetworkConfig: invalid pathloss parameters");
    }

    // Thermal noise floor over the configured bandwidth plus noise figure.
    double noise_power_dbm() const {
        return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    }
    double noise_power_mw() const { return db_to_linear(noise_power_dbm()); }
};

// One Monte-Carlo network realization. channels(i, j) is the N_b x N_u
// matrix H_{i,j} between BS i and the users of cell j, noise-normalized so
// the per-antenna noise covariance is the identity. large_scale_db(i, j)
// holds the corresponding per-user dB gains before normalization
// (pathloss + shadowing), kept for diagnostics and regression fixtures.
struct NetworkScenario {
    arma::mat bs_positions;                 // n_cells x 2
    std::vector<arma::mat> user_positions;  // per cell, n_users x 2
    arma::field<arma::cx_mat> channels;     // (i, j) -> N_b x N_u
    arma::field<arma::vec> large_scale_db;  // (i, j) -> N_u

    arma::uword n_cells() const { return channels.n_rows; }
    arma::uword n_users() const { return channels(0, 0).n_cols; }
    arma::uword n_antennas() const { return channels(0, 0).n_rows; }
    arma::uword n_links() const { return n_cells() * n_users(); }

    // h_{i,j,u}: channel from user u of cell j to BS i.
    arma::cx_vec user_channel(arma::uword bs, arma::uword cell, arma::uword user) const {
        return channels(bs, cell).col(user);
    }

    // H_i = [H_{i,1}, ..., H_{i,Nc}], flat cell-major columns.
    arma::cx_mat stacked_channels(arma::uword bs) const {
        arma::cx_mat H(n_antennas(), n_links());
        for (arma::uword j = 0; j < n_cells(); ++j)
            H.cols(j * n_users(), (j + 1) * n_users() - 1) = channels(bs, j);
        return H;
    }
};

// BS positions for the supported layouts. The 7-cell layout is a center BS
// surrounded by six BSs at the inter-site distance, one per 60 degrees.
inline arma::mat generate_layout(const NetworkConfig& config) {
    const double isd = config.inter_site_distance_m;
    switch (config.n_cells) {
        case 1:
            return arma::mat{{0.0, 0.0}};
        case 2:
            return arma::mat{{0.0, 0.0}, {isd, 0.0}};
        case 7: {
            arma::mat layout(7, 2, arma::fill::zeros);
            for (arma::uword k = 0; k < 6; ++k) {
                const double phi = k * arma::datum::pi / 3.0;
                layout(k + 1, 0) = isd * std::cos(phi);
                layout(k + 1, 1) = isd * std::sin(phi);
            }
            return layout;
        }
        default:
            throw std::invalid_argument("generate_layout: unsupported n_cells");
    }
}

namespace detail {

// Point-in-hexagon test for the Voronoi cell of a BS whose neighbors sit at
// multiples of 60 degrees: |p . n_k| <= isd/2 for the three face normals.
inline bool in_hexagon(double x, double y, double isd) {
    const double half = 0.5 * isd;
    const double c60 = 0.5, s60 = std::sqrt(3.0) / 2.0;
    return std::abs(x) <= half && std::abs(c60 * x + s60 * y) <= half &&
           std::abs(-c60 * x + s60 * y) <= half;
}

}  // namespace detail

// Uniform user positions inside each serving hexagon, rejecting candidates
// closer than min_user_bs_distance to any BS. Rejection cap 1e6 per user.
inline std::vector<arma::mat> drop_users(const arma::mat& layout, const NetworkConfig& config,
                                         Rng& rng) {
    const double isd = config.inter_site_distance_m;
    const double circumradius = isd / std::sqrt(3.0);
    std::uniform_real_distribution<double> ux(-0.5 * isd, 0.5 * isd);
    std::uniform_real_distribution<double> uy(-circumradius, circumradius);

    std::vector<arma::mat> users(layout.n_rows);
    for (arma::uword j = 0; j < layout.n_rows; ++j) {
        users[j].set_size(config.n_users_per_cell, 2);
        for (arma::uword u = 0; u < config.n_users_per_cell; ++u) {
            bool placed = false;
            for (long attempt = 0; attempt < 1000000; ++attempt) {
                const double dx = ux(rng), dy = uy(rng);
                if (!detail::in_hexagon(dx, dy, isd)) continue;
                const double px = layout(j, 0) + dx, py = layout(j, 1) + dy;
                bool clear = true;
                for (arma::uword i = 0; i < layout.n_rows; ++i) {
                    const double d = std::hypot(px - layout(i, 0), py - layout(i, 1));
                    if (d < config.min_user_bs_distance_m) {
                        clear = false;
                        break;
                    }
                }
                if (!clear) continue;
                users[j](u, 0) = px;
                users[j](u, 1) = py;
                placed = true;
                break;
            }
            if (!placed) throw std::runtime_error("drop_users: rejection sampling cap exceeded");
        }
    }
    return users;
}

// Large-scale channel gain in dB: free-space loss at the reference distance
// plus the Erceg log-distance slope, plus the shadowing sample. Distances
// below the reference distance are clamped to it.
inline double channel_gain_db(double distance_m, const NetworkConfig& config, double shadow_db) {
    const double d0 = config.pathloss.reference_distance_m;
    const double d = std::max(distance_m, d0);
    const double wavelength = 299792458.0 / config.carrier_frequency_hz;
    const double pl_d0 = 20.0 * std::log10(4.0 * arma::datum::pi * d0 / wavelength);
    const double slope = 10.0 * config.pathloss.exponent() * std::log10(d / d0);
    return -(pl_d0 + slope) + shadow_db;
}

inline double draw_shadowing_db(const NetworkConfig& config, Rng& rng) {
    return config.shadowing_std_db * randn(rng);
}

// Full scenario: layout, user drop, large-scale gains, then Rayleigh fading.
// Channel coefficients absorb the noise power: h = sqrt(g / sigma_n^2) * g_small
// with g_small ~ CN(0,1) iid, so downstream math runs at unit noise. Draw
// order is positions, then shadowing, then fading, so the geometry of a seed
// is invariant to the antenna count.
inline NetworkScenario generate_channels(const NetworkConfig& config, Rng& rng) {
    config.validate();
    NetworkScenario sc;
    sc.bs_positions = generate_layout(config);
    sc.user_positions = drop_users(sc.bs_positions, config, rng);

    const arma::uword nc = config.n_cells, nu = config.n_users_per_cell, nb = config.n_bs_antennas;
    sc.large_scale_db.set_size(nc, nc);
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword j = 0; j < nc; ++j) {
            sc.large_scale_db(i, j).set_size(nu);
            for (arma::uword u = 0; u < nu; ++u) {
                const double d = std::hypot(sc.user_positions[j](u, 0) - sc.bs_positions(i, 0),
                                            sc.user_positions[j](u, 1) - sc.bs_positions(i, 1));
                sc.large_scale_db(i, j)(u) = channel_gain_db(d, config, draw_shadowing_db(config, rng));
            }
        }

    const double noise_mw = config.noise_power_mw();
    sc.channels.set_size(nc, nc);
    for (arma::uword i = 0; i < nc; ++i)
        for (arma::uword j = 0; j < nc; ++j) {
            sc.channels(i, j).set_size(nb, nu);
            for (arma::uword u = 0; u < nu; ++u) {
                const double scale = std::sqrt(db_to_linear(sc.large_scale_db(i, j)(u)) / noise_mw);
                sc.channels(i, j).col(u) = scale * randn_cvec(nb, rng);
            }
        }
    return sc;
}

inline NetworkScenario make_scenario(const NetworkConfig& config) {
    Rng rng = make_rng(config.seed);
    return generate_channels(config, rng);
}

// --- JSON serialization -----------------------------------------------

inline void to_json(nlohmann::json& j, const PathlossParams& p) {
    j = {{"reference_distance_m", p.reference_distance_m},
         {"erceg_a", p.erceg_a},
         {"erceg_b", p.erceg_b},
         {"erceg_c", p.erceg_c},
         {"bs_height_m", p.bs_height_m}};
}

inline void from_json(const nlohmann::json& j, PathlossParams& p) {
    p = PathlossParams{};
    if (j.contains("reference_distance_m")) j.at("reference_distance_m").get_to(p.reference_distance_m);
    if (j.contains("erceg_a")) j.at("erceg_a").get_to(p.erceg_a);
    if (j.contains("erceg_b")) j.at("erceg_b").get_to(p.erceg_b);
    if (j.contains("erceg_c")) j.at("erceg_c").get_to(p.erceg_c);
    if (j.contains("bs_height_m")) j.at("bs_height_m").get_to(p.bs_height_m);
}

inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
    j = {{"n_cells", c.n_cells},
         {"n_users_per_cell", c.n_users_per_cell},
         {"n_bs_antennas", c.n_bs_antennas},
         {"inter_site_distance_m", c.inter_site_distance_m},
         {"min_user_bs_distance_m", c.min_user_bs_distance_m},
         {"carrier_frequency_hz", c.carrier_frequency_hz},
         {"bandwidth_hz", c.bandwidth_hz},
         {"noise_figure_db", c.noise_figure_db},
         {"shadowing_std_db", c.shadowing_std_db},
         {"pathloss", c.pathloss},
         {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
    c = NetworkConfig{};
    if (j.contains("n_cells")) j.at("n_cells").get_to(c.n_cells);
    if (j.contains("n_users_per_cell")) j.at("n_users_per_cell").get_to(c.n_users_per_cell);
    if (j.contains("n_bs_antennas")) j.at("n_bs_antennas").get_to(c.n_bs_antennas);
    if (j.contains("inter_site_distance_m")) j.at("inter_site_distance_m").get_to(c.inter_site_distance_m);
    if (j.contains("min_user_bs_distance_m")) j.at("min_user_bs_distance_m").get_to(c.min_user_bs_distance_m);
    if (j.contains("carrier_frequency_hz")) j.at("carrier_frequency_hz").get_to(c.carrier_frequency_hz);
    if (j.contains("bandwidth_hz")) j.at("bandwidth_hz").get_to(c.bandwidth_hz);
    if (j.contains("noise_figure_db")) j.at("noise_figure_db").get_to(c.noise_figure_db);
    if (j.contains("shadowing_std_db")) j.at("shadowing_std_db").get_to(c.shadowing_std_db);
    if (j.contains("pathloss")) j.at("pathloss").get_to(c.pathloss);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    c.validate();
}

inline constexpr int kScenarioSchemaVersion = 1;

// Versioned scenario blob for regression fixtures; complex matrices are
// stored as column-major re/im arrays.
inline nlohmann::json scenario_to_json(const NetworkScenario& sc) {
    nlohmann::json j;
    j["version"] = kScenarioSchemaVersion;
    j["bs_positions"] = std::vector<std::vector<double>>();
    for (arma::uword i = 0; i < sc.bs_positions.n_rows; ++i)
        j["bs_positions"].push_back({sc.bs_positions(i, 0), sc.bs_positions(i, 1)});
    j["user_positions"] = nlohmann::json::array();
    for (const auto& cell : sc.user_positions) {
        nlohmann::json cj = nlohmann::json::array();
        for (arma::uword u = 0; u < cell.n_rows; ++u) cj.push_back({cell(u, 0), cell(u, 1)});
        j["user_positions"].push_back(cj);
    }
    j["n_antennas"] = sc.n_antennas();
    j["n_users"] = sc.n_users();
    j["channels"] = nlohmann::json::array();
    for (arma::uword i = 0; i < sc.n_cells(); ++i)
        for (arma::uword jj = 0; jj < sc.n_cells(); ++jj) {
            const arma::cx_mat& H = sc.channels(i, jj);
            nlohmann::json e;
            e["bs"] = i;
            e["cell"] = jj;
            e["re"] = std::vector<double>(H.n_elem);
            e["im"] = std::vector<double>(H.n_elem);
            for (arma::uword k = 0; k < H.n_elem; ++k) {
                e["re"][k] = H(k).real();
                e["im"][k] = H(k).imag();
            }
            e["large_scale_db"] = arma::conv_to<std::vector<double>>::from(sc.large_scale_db(i, jj));
            j["channels"].push_back(e);
        }
    return j;
}

inline NetworkScenario scenario_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != kScenarioSchemaVersion)
        throw std::invalid_argument("scenario_from_json: unsupported schema version");
    NetworkScenario sc;
    const auto& bs = j.at("bs_positions");
    sc.bs_positions.set_size(bs.size(), 2);
    for (arma::uword i = 0; i < bs.size(); ++i) {
        sc.bs_positions(i, 0) = bs[i][0].get<double>();
        sc.bs_positions(i, 1) = bs[i][1].get<double>();
    }
    for (const auto& cj : j.at("user_positions")) {
        arma::mat cell(cj.size(), 2);
        for (arma::uword u = 0; u < cj.size(); ++u) {
            cell(u, 0) = cj[u][0].get<double>();
            cell(u, 1) = cj[u][1].get<double>();
        }
        sc.user_positions.push_back(cell);
    }
    const arma::uword nc = bs.size();
    const arma::uword nb = j.at("n_antennas").get<arma::uword>();
    const arma::uword nu = j.at("n_users").get<arma::uword>();
    sc.channels.set_size(nc, nc);
    sc.large_scale_db.set_size(nc, nc);
    for (const auto& e : j.at("channels")) {
        const arma::uword i = e.at("bs").get<arma::uword>();
        const arma::uword jj = e.at("cell").get<arma::uword>();
        arma::cx_mat H(nb, nu);
        for (arma::uword k = 0; k < H.n_elem; ++k)
            H(k) = {e.at("re")[k].get<double>(), e.at("im")[k].get<double>()};
        sc.channels(i, jj) = H;
        sc.large_scale_db(i, jj) = arma::vec(e.at("large_scale_db").get<std::vector<double>>());
    }
    return sc;
}

}  // namespace qcomp

#endif  // QCOMP_SCENARIO_HPP
