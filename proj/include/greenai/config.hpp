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

#include <greenai/error.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

namespace greenai {

/// How the fading draw enters the channel gain.
enum class FadingModel {
    power,      ///< |h|^2, unit-mean exponential (default)
    magnitude,  ///< literal |h|, Rayleigh magnitude (sensitivity runs)
};

/**
 * All physical and algorithmic parameters of one scenario.
 *
 * Units: w in Hz per subcarrier, sigma2_dbm_hz in dBm/Hz, powers in Watts,
 * bt_target in bits delivered per device in a unit-length slot, lengths in
 * meters, beta0_db in dB at 1 m.
 */
struct ScenarioConfig {
    int K = 70;
    int N = 35;
    double w = 10e6;
    double sigma2_dbm_hz = -174.0;
    double zeta = 1.0;
    double p_max = 0.2;
    double p_f = 1.4002;
    double bt_target = 50e3;
    double coverage_radius = 500.0;
    double z_uav = 100.0;
    double beta0_db = -30.0;
    std::uint64_t seed = 1;
    int max_iters = 100;
    double tol = 1e-6;

    // Extensions beyond the core parameter set.
    int max_clusters = 10;                      ///< upper bound on candidate C
    FadingModel fading_model = FadingModel::power;

    /// Noise power on one subcarrier in Watts (density times bandwidth).
    double noise_watts() const {
        return std::pow(10.0, (sigma2_dbm_hz - 30.0) / 10.0) * w;
    }

    double beta_linear() const { return std::pow(10.0, beta0_db / 10.0); }

    /// Throws ConfigError on the first violated invariant.
    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw ConfigError(std::string("invalid config: ") + what);
        };
        require(K >= 1, "K >= 1");
        require(N >= 1, "N >= 1");
        require(std::isfinite(w) && w > 0, "w > 0");
        require(std::isfinite(sigma2_dbm_hz), "sigma2_dbm_hz finite");
        require(std::isfinite(zeta) && zeta >= 1, "zeta >= 1");
        require(std::isfinite(p_max) && p_max > 0, "p_max > 0");
        require(std::isfinite(p_f) && p_f >= 0, "p_f >= 0");
        require(std::isfinite(bt_target) && bt_target > 0, "bt_target > 0");
        require(std::isfinite(coverage_radius) && coverage_radius > 0, "coverage_radius > 0");
        require(std::isfinite(z_uav) && z_uav > 0, "z_uav > 0");
        require(std::isfinite(beta0_db), "beta0_db finite");
        require(max_iters >= 1, "max_iters >= 1");
        require(std::isfinite(tol) && tol > 0, "tol > 0");
        require(max_clusters >= 2, "max_clusters >= 2");
    }

    bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
    return value;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Applies one `key = value` setting. Keys are the ScenarioConfig field names.
inline void set_config_value(ScenarioConfig& c, std::string_view key, std::string_view value) {
    using detail::parse_number;
    if (key == "K") c.K = parse_number<int>(key, value);
    else if (key == "N") c.N = parse_number<int>(key, value);
    else if (key == "w") c.w = parse_number<double>(key, value);
    else if (key == "sigma2_dbm_hz") c.sigma2_dbm_hz = parse_number<double>(key, value);
    else if (key == "zeta") c.zeta = parse_number<double>(key, value);
    else if (key == "p_max") c.p_max = parse_number<double>(key, value);
    else if (key == "p_f") c.p_f = parse_number<double>(key, value);
    else if (key == "bt_target") c.bt_target = parse_number<double>(key, value);
    else if (key == "coverage_radius") c.coverage_radius = parse_number<double>(key, value);
    else if (key == "z_uav") c.z_uav = parse_number<double>(key, value);
    else if (key == "beta0_db") c.beta0_db = parse_number<double>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "max_iters") c.max_iters = parse_number<int>(key, value);
    else if (key == "tol") c.tol = parse_number<double>(key, value);
    else if (key == "max_clusters") c.max_clusters = parse_number<int>(key, value);
    else if (key == "fading_model") {
        if (value == "power") c.fading_model = FadingModel::power;
        else if (value == "magnitude") c.fading_model = FadingModel::magnitude;
        else throw ConfigError("fading_model must be 'power' or 'magnitude'");
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

/// Parses the flat key-value format. Blank lines and '#' comments are skipped.
/// Unspecified keys keep their defaults. The result is validated.
inline ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(view.substr(0, eq));
        const auto value = detail::trim(view.substr(eq + 1));
        try {
            set_config_value(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    try {
        return parse_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_config(std::ostream& out, const ScenarioConfig& c) {
    using detail::format_double;
    out << "K = " << c.K << '\n'
        << "N = " << c.N << '\n'
        << "w = " << format_double(c.w) << '\n'
        << "sigma2_dbm_hz = " << format_double(c.sigma2_dbm_hz) << '\n'
        << "zeta = " << format_double(c.zeta) << '\n'
        << "p_max = " << format_double(c.p_max) << '\n'
        << "p_f = " << format_double(c.p_f) << '\n'
        << "bt_target = " << format_double(c.bt_target) << '\n'
        << "coverage_radius = " << format_double(c.coverage_radius) << '\n'
        << "z_uav = " << format_double(c.z_uav) << '\n'
        << "beta0_db = " << format_double(c.beta0_db) << '\n'
        << "seed = " << c.seed << '\n'
        << "max_iters = " << c.max_iters << '\n'
        << "tol = " << format_double(c.tol) << '\n'
        << "max_clusters = " << c.max_clusters << '\n'
        << "fading_model = " << (c.fading_model == FadingModel::power ? "power" : "magnitude") << '\n';
}

}  // namespace greenai
