/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The greenai authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <greenai/config.hpp>
#include <greenai/error.hpp>
#include <greenai/random.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace greenai {

using Matrix = Eigen::MatrixXd;

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Position&) const = default;
};

/// Positions, fading draws and the K x N gain matrix of one scenario.
struct ChannelRealization {
    std::vector<Position> positions;
    Position uav;
    Matrix fading;  ///< |h_{k,n}| draws
    Matrix gains;   ///< g_{k,n}

    int devices() const { return static_cast<int>(gains.rows()); }
    int subcarriers() const { return static_cast<int>(gains.cols()); }
};

/// Uniform placement over the disk of radius coverage_radius at the origin.
inline std::vector<Position> place_devices(const ScenarioConfig& config, Rng& rng) {
    std::vector<Position> out;
    out.reserve(static_cast<std::size_t>(config.K));
    for (int k = 0; k < config.K; ++k) {
        const double r = config.coverage_radius * std::sqrt(rng.uniform());
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        out.push_back({r * std::cos(theta), r * std::sin(theta), 0.0});
    }
    return out;
}

inline double squared_distance(const Position& device, const Position& uav) {
    const double dx = device.x - uav.x;
    const double dy = device.y - uav.y;
    return dx * dx + dy * dy + uav.z * uav.z;
}

/// Rayleigh magnitudes |h|: |h|^2 is unit-mean exponential, i.i.d. over (k, n).
/// Draw order is row-major (device, then subcarrier).
inline Matrix draw_fading(const ScenarioConfig& config, Rng& rng) {
    Matrix h(config.K, config.N);
    for (int k = 0; k < config.K; ++k)
        for (int n = 0; n < config.N; ++n) h(k, n) = std::sqrt(rng.exponential());
    return h;
}

/// g = beta * fading_factor / d^2, where fading_factor is whatever multiplies
/// the path loss (|h|^2 under FadingModel::power).
inline Matrix channel_gains(const std::vector<Position>& positions, const Position& uav,
                            const Matrix& fading_factor, double beta0_db) {
    if (static_cast<Eigen::Index>(positions.size()) != fading_factor.rows())
        throw std::invalid_argument("channel_gains: positions/fading shape mismatch");
    const double beta = std::pow(10.0, beta0_db / 10.0);
    Matrix g(fading_factor.rows(), fading_factor.cols());
    for (Eigen::Index k = 0; k < g.rows(); ++k) {
        const double d2 = squared_distance(positions[static_cast<std::size_t>(k)], uav);
        g.row(k) = beta * fading_factor.row(k) / d2;
    }
    return g;
}

inline Position uav_position(const ScenarioConfig& config) { return {0.0, 0.0, config.z_uav}; }

/// Full scenario draw. Placement consumes the stream first, then fading.
inline ChannelRealization make_realization(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ChannelRealization out;
    out.uav = uav_position(config);
    out.positions = place_devices(config, rng);
    out.fading = draw_fading(config, rng);
    const Matrix factor = config.fading_model == FadingModel::power
                              ? Matrix(out.fading.array().square())
                              : out.fading;
    out.gains = channel_gains(out.positions, out.uav, factor, config.beta0_db);
    return out;
}

inline ChannelRealization make_realization(const ScenarioConfig& config) {
    return make_realization(config, config.seed);
}

// ---------------------------------------------------------------------------
// CSV dump, used for regression fixtures. Numbers use the shortest
// round-trip representation, so a dump/load cycle is exact.

inline constexpr const char* realization_magic = "# greenai-realization v1";

inline void write_realization_csv(std::ostream& out, const ChannelRealization& r) {
    using detail::format_double;
    out << realization_magic << '\n';
    out << "shape," << r.devices() << ',' << r.subcarriers() << '\n';
    out << "uav," << format_double(r.uav.x) << ',' << format_double(r.uav.y) << ','
        << format_double(r.uav.z) << '\n';
    for (int k = 0; k < r.devices(); ++k) {
        const auto& p = r.positions[static_cast<std::size_t>(k)];
        out << "device," << k << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
            << format_double(p.z) << '\n';
    }
    auto rows = [&](const char* tag, const Matrix& m) {
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
            out << tag << ',' << k;
            for (Eigen::Index n = 0; n < m.cols(); ++n) out << ',' << format_double(m(k, n));
            out << '\n';
        }
    };
    rows("fading", r.fading);
    rows("gain", r.gains);
}

inline ChannelRealization read_realization_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != realization_magic)
        throw IoError("realization dump: missing or unsupported version header");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    auto num = [](const std::string& s) {
        return detail::parse_number<double>("realization", s);
    };

    ChannelRealization r;
    int K = -1, N = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        const auto& tag = cells.front();
        if (tag == "shape" && cells.size() == 3) {
            K = detail::parse_number<int>("K", cells[1]);
            N = detail::parse_number<int>("N", cells[2]);
            r.positions.assign(static_cast<std::size_t>(K), {});
            r.fading.resize(K, N);
            r.gains.resize(K, N);
        } else if (tag == "uav" && cells.size() == 4) {
            r.uav = {num(cells[1]), num(cells[2]), num(cells[3])};
        } else if (K < 0) {
            throw IoError("realization dump: shape line must precede data");
        } else if (tag == "device" && cells.size() == 5) {
            const int k = detail::parse_number<int>("device", cells[1]);
            if (k < 0 || k >= K) throw IoError("realization dump: device index out of range");
            r.positions[static_cast<std::size_t>(k)] = {num(cells[2]), num(cells[3]), num(cells[4])};
        } else if ((tag == "fading" || tag == "gain") && cells.size() == static_cast<std::size_t>(N) + 2) {
            const int k = detail::parse_number<int>("row", cells[1]);
            if (k < 0 || k >= K) throw IoError("realization dump: row index out of range");
            Matrix& m = tag == "fading" ? r.fading : r.gains;
            for (int n = 0; n < N; ++n) m(k, n) = num(cells[static_cast<std::size_t>(n) + 2]);
        } else {
            throw IoError("realization dump: malformed line '" + line + "'");
        }
    }
    if (K < 0) throw IoError("realization dump: no shape line");
    return r;
}

}  // namespace greenai
