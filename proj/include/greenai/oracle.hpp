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
#include <greenai/config.hpp>
#include <greenai/error.hpp>
#include <greenai/power.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace greenai {

struct OracleResult {
    AllocationMatrix best_alloc;
    Solution best_solution;
    long long evaluated = 0;
    bool feasible_found = false;  ///< at least one enumerated assignment converged
};

/**
 * Number of maps from K labelled devices to N subcarriers with at most U
 * devices per subcarrier. Counted column by column:
 * ways(c + 1, j) = sum_{t <= min(U, j)} ways(c, j - t) * binom(j, t).
 */
inline double count_capped_assignments(int K, int N, int U) {
    if (K < 0 || N < 0 || U < 0) throw std::invalid_argument("count_capped_assignments: negative size");
    std::vector<long double> ways(static_cast<std::size_t>(K) + 1, 0.0L);
    ways[0] = 1.0L;
    for (int c = 0; c < N; ++c) {
        std::vector<long double> next(ways.size(), 0.0L);
        for (int j = 0; j <= K; ++j) {
            long double binom = 1.0L;  // binom(j, t), built incrementally
            for (int t = 0; t <= std::min(U, j); ++t) {
                next[static_cast<std::size_t>(j)] += ways[static_cast<std::size_t>(j - t)] * binom;
                binom = binom * static_cast<long double>(j - t) / static_cast<long double>(t + 1);
            }
        }
        ways = std::move(next);
    }
    return static_cast<double>(ways[static_cast<std::size_t>(K)]);
}

inline constexpr double default_enumeration_budget = 1e6;

/**
 * Brute force over every device-to-subcarrier map respecting the cap U, in
 * lexicographic order of (subcarrier of device 0, of device 1, ...). Each
 * map is power-optimized and the highest-EE converged one is kept (first
 * maximizer on ties). Throws BudgetExceededError before doing any work when
 * the map count exceeds `budget`.
 */
inline OracleResult exhaustive_search(const Matrix& gains, const ScenarioConfig& config, int U,
                                      double budget = default_enumeration_budget) {
    const int K = static_cast<int>(gains.rows());
    const int N = static_cast<int>(gains.cols());
    const double count = count_capped_assignments(K, N, U);
    if (count > budget) throw BudgetExceededError(count, budget);
    if (count == 0.0) throw InfeasibleError("exhaustive_search: no map satisfies the subcarrier cap");

    OracleResult out;
    BinaryMatrix alpha = BinaryMatrix::Zero(K, N);
    std::vector<int> load(static_cast<std::size_t>(N), 0);
    bool have_any = false;

    auto visit = [&](auto&& self, int k) -> void {
        if (k == K) {
            auto alloc = make_allocation(alpha, U, gains);
            auto sol = optimize(alloc, gains, config);
            ++out.evaluated;
            const bool better = sol.converged ? (!out.feasible_found || sol.ee > out.best_solution.ee)
                                              : (!out.feasible_found && (!have_any || sol.ee > out.best_solution.ee));
            if (better) {
                out.feasible_found = out.feasible_found || sol.converged;
                out.best_alloc = std::move(alloc);
                out.best_solution = std::move(sol);
                have_any = true;
            }
            return;
        }
        for (int n = 0; n < N; ++n) {
            if (load[static_cast<std::size_t>(n)] >= U) continue;
            alpha(k, n) = 1;
            ++load[static_cast<std::size_t>(n)];
            self(self, k + 1);
            --load[static_cast<std::size_t>(n)];
            alpha(k, n) = 0;
        }
    };
    visit(visit, 0);
    return out;
}

namespace detail {

// All compositions of `total` into `parts` nonnegative integers, in
// lexicographic order.
inline std::vector<std::vector<int>> compositions(int total, int parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(parts), 0);
    auto rec = [&](auto&& self, int i, int left) -> void {
        if (i == parts - 1) {
            cur[static_cast<std::size_t>(i)] = left;
            out.push_back(cur);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            cur[static_cast<std::size_t>(i)] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, total);
    return out;
}

}  // namespace detail

/**
 * Dense-grid reference for the power step on tiny instances (at most three
 * assigned pairs). Each device's QoS target is split over its pairs on a grid
 * of `resolution` steps; for each combination the powers follow exactly from
 * the rates by back-substitution along every decode order (a pair with zero
 * rate is silent, an active pair pays at least its SIC floor). The
 * combination with the least total power within every device budget wins.
 */
inline Solution grid_power_oracle(const AllocationMatrix& alloc, const Matrix& gains, const ScenarioConfig& config,
                                  int resolution) {
    const int K = alloc.devices();
    const int N = alloc.subcarriers();
    if (alloc.alpha.sum() > 3) throw std::invalid_argument("grid_power_oracle: more than 3 assigned pairs");
    if (resolution < 1) throw std::invalid_argument("grid_power_oracle: resolution >= 1");

    const double noise = config.noise_watts();
    const double target_se = config.bt_target / config.w;
    std::vector<std::vector<int>> subs(static_cast<std::size_t>(K));
    std::vector<std::vector<std::vector<int>>> splits(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        subs[static_cast<std::size_t>(k)] = alloc.subcarriers_of(k);
        if (subs[static_cast<std::size_t>(k)].empty())
            throw std::invalid_argument("grid_power_oracle: device without subcarrier");
        splits[static_cast<std::size_t>(k)] =
            detail::compositions(resolution, static_cast<int>(subs[static_cast<std::size_t>(k)].size()));
    }

    Matrix se = Matrix::Zero(K, N);
    auto powers_for = [&](const Matrix& rates_se) {
        Matrix p = Matrix::Zero(K, N);
        for (int n = 0; n < N; ++n) {
            const auto& order = alloc.decode_order[static_cast<std::size_t>(n)];
            double tail = 0.0;
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                const int k = *it;
                if (rates_se(k, n) > 0.0) {
                    p(k, n) = std::max(power_from_rate(rates_se(k, n), gains(k, n), tail, noise),
                                       sic_floor_power(gains(k, n), tail, config.zeta));
                }
                tail += p(k, n) * gains(k, n);
            }
        }
        return p;
    };

    Solution best;
    double best_power = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(static_cast<std::size_t>(K), 0);
    while (true) {
        for (int k = 0; k < K; ++k) {
            const auto& split = splits[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
            const auto& sk = subs[static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < sk.size(); ++i)
                se(k, sk[i]) = target_se * static_cast<double>(split[i]) / static_cast<double>(resolution);
        }
        const Matrix p = powers_for(se);
        bool within = true;
        for (int k = 0; k < K; ++k) within = within && p.row(k).sum() <= config.p_max;
        const double total = p.sum();
        if (within && total < best_power) {
            best_power = total;
            best.rates = config.w * se;
            best.powers = p;
        }
        int k = K - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == splits[static_cast<std::size_t>(k)].size()) {
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }

    best.converged = std::isfinite(best_power);
    if (!best.converged) {
        best.rates = Matrix::Zero(K, N);
        best.powers = Matrix::Zero(K, N);
    }
    best.interference = interference_matrix(alloc, best.powers, gains);
    best.b_sum = best.rates.sum();
    best.p_t = best.powers.sum();
    best.ee = total_ee(best.b_sum, best.p_t, config.p_f);
    best.qos_met.assign(static_cast<std::size_t>(K), best.converged ? 1 : 0);
    best.meta.U = alloc.U;
    return best;
}

}  // namespace greenai
