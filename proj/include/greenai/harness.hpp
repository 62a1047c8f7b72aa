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

#include <greenai/allocation.hpp>
#include <greenai/clustering.hpp>
#include <greenai/config.hpp>
#include <greenai/error.hpp>
#include <greenai/oracle.hpp>
#include <greenai/power.hpp>
#include <greenai/random.hpp>
#include <greenai/scenario.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace greenai {

enum class Algorithm { green_ai, greedy, exhaustive };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::green_ai: return "green_ai";
        case Algorithm::greedy: return "greedy";
        case Algorithm::exhaustive: return "exhaustive";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
    if (s == "green_ai") return Algorithm::green_ai;
    if (s == "greedy") return Algorithm::greedy;
    if (s == "exhaustive") return Algorithm::exhaustive;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

enum class SweepVariable { p_f, bt_target, K };

inline std::string_view to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::p_f: return "p_f";
        case SweepVariable::bt_target: return "bt_target";
        case SweepVariable::K: return "K";
    }
    return "?";
}

/// Accepts the CLI spellings (`p_f`, `bt`, `K`) and the field names.
inline SweepVariable parse_sweep_variable(std::string_view s) {
    if (s == "p_f") return SweepVariable::p_f;
    if (s == "bt" || s == "bt_target") return SweepVariable::bt_target;
    if (s == "K") return SweepVariable::K;
    throw ConfigError("unknown sweep variable '" + std::string(s) + "'");
}

struct TrialOptions {
    std::optional<int> fixed_u;  ///< overrides the devices-per-subcarrier cap for every algorithm
    double enumeration_budget = default_enumeration_budget;
};

struct TrialResult {
    Solution solution;
    AllocationMatrix alloc;
};

/// Channel-independent stream for the clustering step of a trial.
inline std::uint64_t clustering_seed(std::uint64_t trial_seed) { return derive_seed({trial_seed, 0x6b6d65646f6964ULL}); }

/// Runs one algorithm on an existing realization.
inline TrialResult run_trial(const ChannelRealization& scenario, const ScenarioConfig& config, Algorithm algorithm,
                             std::uint64_t seed, const TrialOptions& options = {}) {
    const Matrix& g = scenario.gains;
    const int K = static_cast<int>(g.rows());
    const int N = static_cast<int>(g.cols());
    const int min_cap = min_feasible_cap(K, N);

    TrialResult out;
    AllocationMeta meta;
    switch (algorithm) {
        case Algorithm::green_ai: {
            ClusterAssignment clusters = single_cluster(K);
            if (K >= 3) {
                Rng rng(clustering_seed(seed));
                auto sel = select_cluster_count(device_features(g), rng, config.max_clusters);
                clusters = std::move(sel.assignment);
                meta.cluster_count = sel.C;
                meta.max_cluster_size = clusters.max_cluster_size();
            }
            meta.U = options.fixed_u.value_or(std::max(meta.cluster_count, min_cap));
            out.alloc = assign_subcarriers(normalize_gains(g), clusters, meta.U, g);
            out.solution = optimize(out.alloc, g, config);
            break;
        }
        case Algorithm::greedy: {
            meta.U = options.fixed_u.value_or(min_cap);
            out.alloc = greedy_assign(g, meta.U);
            out.solution = optimize(out.alloc, g, config);
            break;
        }
        case Algorithm::exhaustive: {
            meta.U = options.fixed_u.value_or(min_cap);
            auto res = exhaustive_search(g, config, meta.U, options.enumeration_budget);
            out.alloc = std::move(res.best_alloc);
            out.solution = std::move(res.best_solution);
            break;
        }
    }
    out.solution.meta = meta;
    return out;
}

/// Draws the scenario for `seed` and runs one algorithm on it.
inline TrialResult run_trial(const ScenarioConfig& config, Algorithm algorithm, std::uint64_t seed,
                             const TrialOptions& options = {}) {
    return run_trial(make_realization(config, seed), config, algorithm, seed, options);
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepSpec {
    SweepVariable variable = SweepVariable::p_f;
    std::vector<double> values;
    int trials = 1;
    ScenarioConfig base;
    std::vector<Algorithm> algorithms{Algorithm::green_ai, Algorithm::greedy};
    TrialOptions options;
    int threads = 0;  ///< 0: hardware concurrency
};

struct SweepRow {
    std::string variable;
    double value = 0.0;
    Algorithm algorithm = Algorithm::green_ai;
    double mean_ee = 0.0;  ///< over converged trials; NaN if none converged
    double std_ee = 0.0;   ///< sample standard deviation over converged trials
    int trials = 0;
    double convergence_rate = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    const SweepRow* find(double value, Algorithm a) const {
        for (const auto& r : rows)
            if (r.value == value && r.algorithm == a) return &r;
        return nullptr;
    }
};

inline std::vector<double> default_sweep_values(SweepVariable v) {
    std::vector<double> out;
    switch (v) {
        case SweepVariable::p_f:
            for (int i = 0; i < 14; ++i) out.push_back(0.1003 + (1.4002 - 0.1003) * i / 13.0);
            out.back() = 1.4002;
            break;
        case SweepVariable::bt_target:
            for (int b = 10; b <= 90; b += 10) out.push_back(b * 1000.0);
            break;
        case SweepVariable::K:
            for (int k = 10; k <= 70; k += 10) out.push_back(k);
            break;
    }
    return out;
}

inline ScenarioConfig config_for(const ScenarioConfig& base, SweepVariable v, double value) {
    ScenarioConfig c = base;
    switch (v) {
        case SweepVariable::p_f: c.p_f = value; break;
        case SweepVariable::bt_target: c.bt_target = value; break;
        case SweepVariable::K:
            if (value != std::floor(value)) throw ConfigError("K sweep values must be integers");
            c.K = static_cast<int>(value);
            break;
    }
    c.validate();
    return c;
}

/// Seed of trial t at sweep value v.
inline std::uint64_t trial_seed(std::uint64_t base_seed, double value, int t) {
    return derive_seed({base_seed, seed_bits(value), static_cast<std::uint64_t>(t)});
}

inline void validate(const SweepSpec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        if (!(spec.values[i] > spec.values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    if (spec.algorithms.empty()) throw ConfigError("sweep needs at least one algorithm");
    for (double v : spec.values) {
        const auto c = config_for(spec.base, spec.variable, v);
        if (std::find(spec.algorithms.begin(), spec.algorithms.end(), Algorithm::exhaustive) != spec.algorithms.end()) {
            const int U = spec.options.fixed_u.value_or(min_feasible_cap(c.K, c.N));
            const double count = count_capped_assignments(c.K, c.N, U);
            if (count > spec.options.enumeration_budget) throw BudgetExceededError(count, spec.options.enumeration_budget);
        }
    }
}

namespace detail {

struct TrialOutcome {
    double ee = 0.0;
    bool converged = false;
};

// Runs fn(i) for i in [0, jobs) on a bounded pool. The first exception wins.
template <typename Fn>
void parallel_for(std::size_t jobs, int threads, Fn&& fn) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/**
 * Runs every (value, trial) cell. All algorithms of a cell share one
 * scenario realization. A trial that fails (infeasible allocation, QoS
 * unreachable) counts against convergence_rate and is left out of the EE
 * statistics; it never aborts the sweep.
 */
inline SweepResult run_sweep(const SweepSpec& spec) {
    validate(spec);
    const std::size_t V = spec.values.size();
    const std::size_t T = static_cast<std::size_t>(spec.trials);
    const std::size_t A = spec.algorithms.size();
    std::vector<detail::TrialOutcome> outcomes(V * T * A);

    detail::parallel_for(V * T, spec.threads, [&](std::size_t job) {
        const std::size_t vi = job / T;
        const int t = static_cast<int>(job % T);
        const double value = spec.values[vi];
        const auto config = config_for(spec.base, spec.variable, value);
        const auto seed = trial_seed(spec.base.seed, value, t);
        const auto scenario = make_realization(config, seed);
        for (std::size_t ai = 0; ai < A; ++ai) {
            auto& slot = outcomes[job * A + ai];
            try {
                const auto res = run_trial(scenario, config, spec.algorithms[ai], seed, spec.options);
                slot = {res.solution.ee, res.solution.converged};
            } catch (const InfeasibleError&) {
                slot = {0.0, false};
            }
        }
    });

    SweepResult result;
    for (std::size_t vi = 0; vi < V; ++vi) {
        for (std::size_t ai = 0; ai < A; ++ai) {
            std::vector<double> ees;
            for (std::size_t t = 0; t < T; ++t) {
                const auto& o = outcomes[(vi * T + t) * A + ai];
                if (o.converged) ees.push_back(o.ee);
            }
            SweepRow row;
            row.variable = std::string(to_string(spec.variable));
            row.value = spec.values[vi];
            row.algorithm = spec.algorithms[ai];
            row.trials = spec.trials;
            row.convergence_rate = static_cast<double>(ees.size()) / static_cast<double>(T);
            if (ees.empty()) {
                row.mean_ee = std::numeric_limits<double>::quiet_NaN();
            } else {
                double sum = 0.0;
                for (double e : ees) sum += e;
                row.mean_ee = sum / static_cast<double>(ees.size());
                if (ees.size() > 1) {
                    double ss = 0.0;
                    for (double e : ees) ss += (e - row.mean_ee) * (e - row.mean_ee);
                    row.std_ee = std::sqrt(ss / static_cast<double>(ees.size() - 1));
                }
            }
            result.rows.push_back(std::move(row));
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.value != b.value) return a.value < b.value;
        return to_string(a.algorithm) < to_string(b.algorithm);
    });
    return result;
}

inline constexpr const char* sweep_csv_header = "variable,value,algorithm,mean_ee,std_ee,trials,convergence_rate";

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    using detail::format_double;
    out << sweep_csv_header << '\n';
    for (const auto& r : result.rows) {
        out << r.variable << ',' << format_double(r.value) << ',' << to_string(r.algorithm) << ','
            << (std::isnan(r.mean_ee) ? std::string("nan") : format_double(r.mean_ee)) << ','
            << format_double(r.std_ee) << ',' << r.trials << ',' << format_double(r.convergence_rate) << '\n';
    }
}

inline void save_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_sweep_csv(out, result);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace greenai
