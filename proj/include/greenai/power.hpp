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
#include <greenai/scenario.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenai {

// ---------------------------------------------------------------------------
// Pair-level physics. Rates named `se` are spectral efficiencies in
// bits/s/Hz; rates in a Solution are bits/s (se times w).

/// Residual SIC interference on (k, n): received power of the co-assigned
/// devices decoded after k. Zero when k is decoded last.
inline double interference(const AllocationMatrix& alloc, const Matrix& powers, const Matrix& gains, int k, int n) {
    const auto& order = alloc.decode_order[static_cast<std::size_t>(n)];
    double sum = 0.0;
    bool after = false;
    for (int j : order) {
        if (after) sum += powers(j, n) * gains(j, n);
        if (j == k) after = true;
    }
    return sum;
}

/// Interference for every assigned pair (zero elsewhere).
inline Matrix interference_matrix(const AllocationMatrix& alloc, const Matrix& powers, const Matrix& gains) {
    Matrix I = Matrix::Zero(alloc.devices(), alloc.subcarriers());
    for (int n = 0; n < alloc.subcarriers(); ++n) {
        const auto& order = alloc.decode_order[static_cast<std::size_t>(n)];
        double tail = 0.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            I(*it, n) = tail;
            tail += powers(*it, n) * gains(*it, n);
        }
    }
    return I;
}

/// p g / I >= zeta; I = 0 is always decodable.
inline bool sic_feasible(double p, double g, double I, double zeta) {
    if (I <= 0.0) return true;
    return p * g >= zeta * I;
}

/// w * alpha * log2(1 + p g / (noise + I)), in bits/s.
inline double rate(int alpha, double p, double g, double I, double w, double noise) {
    if (alpha == 0) return 0.0;
    return w * std::log1p(p * g / (noise + I)) / std::numbers::ln2;
}

/// Power that achieves spectral efficiency `se` on a pair: (noise + I)(2^se - 1)/g.
inline double power_from_rate(double se, double g, double I, double noise) {
    return (noise + I) * std::expm1(se * std::numbers::ln2) / g;
}

/// Smallest power meeting the SIC condition: zeta I / g.
inline double sic_floor_power(double g, double I, double zeta) { return zeta * I / g; }

// ---------------------------------------------------------------------------
// Single-device water-filling.

struct PairChannel {
    double g = 0.0;
    double I = 0.0;
};

struct WaterfillResult {
    std::vector<double> se;      ///< bits/s/Hz per listed subcarrier
    std::vector<double> power;   ///< Watts per listed subcarrier
    double chi = 0.0;            ///< water level; the QoS multiplier lambda
    double mu = 0.0;             ///< power-budget multiplier, > 0 only at the boundary
    std::vector<double> delta;   ///< SIC multipliers, > 0 only on floor-bound pairs
    bool feasible = true;        ///< QoS met within the power budget

    double total_power() const {
        double s = 0.0;
        for (double p : power) s += p;
        return s;
    }
    double total_se() const {
        double s = 0.0;
        for (double r : se) s += r;
        return s;
    }
};

namespace detail {

struct WaterfillProblem {
    std::vector<double> cost;   // a_n = (noise + I_n) / g_n
    std::vector<double> floor;  // SIC floor power, 0 where I_n = 0
    std::vector<double> lb;     // SIC floor spectral efficiency
    std::vector<char> active;   // pair allowed to carry rate
};

inline double pair_power(const WaterfillProblem& p, std::size_t n, double se) {
    if (!p.active[n]) return 0.0;
    return std::max(p.cost[n] * std::expm1(se * std::numbers::ln2), p.floor[n]);
}

// se_n(L) = max(lb_n, L - log2 a_n) over active pairs, L = log2 of the level.
inline std::vector<double> level_rates(const WaterfillProblem& p, double L) {
    std::vector<double> se(p.cost.size(), 0.0);
    for (std::size_t n = 0; n < se.size(); ++n)
        if (p.active[n]) se[n] = std::max(p.lb[n], L - std::log2(p.cost[n]));
    return se;
}

// Exact level meeting sum(se) == target, given sum(lb over active) < target.
// sum(se(L)) is piecewise linear in L with breakpoints lb_n + log2 a_n.
inline double level_for_rate(const WaterfillProblem& p, double target) {
    // Walk the breakpoints upward; past the i-th one, i pairs are above their floor.
    double fixed = 0.0;  // sum of lb for pairs still clamped
    for (std::size_t n = 0; n < p.cost.size(); ++n)
        if (p.active[n]) fixed += p.lb[n];
    double free_offset = 0.0;  // sum of log2 a_n over unclamped pairs
    std::size_t m = 0;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t n = 0; n < p.cost.size(); ++n)
        if (p.active[n]) order.emplace_back(p.lb[n] + std::log2(p.cost[n]), n);
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto n = order[i].second;
        fixed -= p.lb[n];
        free_offset += std::log2(p.cost[n]);
        ++m;
        const double L = (target - fixed + free_offset) / static_cast<double>(m);
        const double next = i + 1 < order.size() ? order[i + 1].first : std::numeric_limits<double>::infinity();
        if (L <= next) return L;
    }
    return std::numeric_limits<double>::infinity();  // unreachable with >= 1 active pair
}

inline double power_at_level(const WaterfillProblem& p, double L) {
    const auto se = level_rates(p, L);
    double s = 0.0;
    for (std::size_t n = 0; n < se.size(); ++n) s += pair_power(p, n, se[n]);
    return s;
}

struct ActiveSetSolution {
    std::vector<double> se;
    double power = 0.0;
    double L = -std::numeric_limits<double>::infinity();  // -inf: every pair on its floor
};

// Minimum-power rates delivering `target` bits/s/Hz on the active pairs.
inline ActiveSetSolution min_power(const WaterfillProblem& p, double target) {
    ActiveSetSolution out;
    double floors = 0.0;
    for (std::size_t n = 0; n < p.cost.size(); ++n)
        if (p.active[n]) floors += p.lb[n];
    if (floors >= target) {
        // The SIC floors already carry the target: spread it over them.
        out.se.assign(p.cost.size(), 0.0);
        for (std::size_t n = 0; n < p.cost.size(); ++n)
            if (p.active[n] && floors > 0.0) out.se[n] = p.lb[n] * (target / floors);
    } else {
        out.L = level_for_rate(p, target);
        out.se = level_rates(p, out.L);
        // Absorb rounding in the largest rate so the split sums to the target.
        std::size_t top = 0;
        double sum = 0.0;
        for (std::size_t n = 0; n < out.se.size(); ++n) {
            sum += out.se[n];
            if (out.se[n] > out.se[top]) top = n;
        }
        out.se[top] = std::max(p.lb[top], out.se[top] + (target - sum));
    }
    for (std::size_t n = 0; n < out.se.size(); ++n) out.power += pair_power(p, n, out.se[n]);
    return out;
}

// Maximum rate with total power exactly `budget` (bisection on the level).
inline ActiveSetSolution max_rate(const WaterfillProblem& p, double budget) {
    double lo = -2000.0, hi = 2000.0;
    for (std::size_t n = 0; n < p.cost.size(); ++n)
        if (p.active[n]) lo = std::min(lo, std::log2(p.cost[n]) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (power_at_level(p, mid) <= budget ? lo : hi) = mid;
    }
    ActiveSetSolution out;
    out.L = lo;
    out.se = level_rates(p, lo);
    for (std::size_t n = 0; n < out.se.size(); ++n) out.power += pair_power(p, n, out.se[n]);
    return out;
}

}  // namespace detail

/**
 * Minimum-power rate split for one device with the interference held fixed.
 *
 * Each pair costs (noise + I)(2^se - 1)/g. A pair that carries rate must
 * also sit at or above its SIC floor zeta I / g, so an interfered pair is
 * either silent or pays at least its floor; the floor itself already buys
 * log2(1 + zeta I/(noise + I)) bits/s/Hz. Every on/off pattern of the
 * interfered pairs is tried (up to 12 of them; beyond that all stay on) and
 * within a pattern the rates follow the water-filling rule
 * se = max(floor, log2 chi + log2(w g / (ln2 (noise + I)))) with chi set so
 * that w * sum(se) equals the QoS target.
 *
 * If even the cheapest pattern needs more than p_max, the device instead
 * gets the maximum rate it can reach with exactly p_max and `feasible` is
 * false.
 */
inline WaterfillResult waterfill(std::span<const PairChannel> pairs, double target_se, double p_max, double noise,
                                 double zeta, double w) {
    if (pairs.empty()) throw std::invalid_argument("waterfill: device has no subcarrier");
    if (!(target_se >= 0.0)) throw std::invalid_argument("waterfill: negative target");

    detail::WaterfillProblem prob;
    std::vector<std::size_t> interfered;
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        const auto& pc = pairs[n];
        if (!(pc.g > 0.0)) throw std::invalid_argument("waterfill: gain must be positive");
        prob.cost.push_back((noise + pc.I) / pc.g);
        prob.floor.push_back(sic_floor_power(pc.g, pc.I, zeta));
        prob.lb.push_back(pc.I > 0.0 ? std::log1p(zeta * pc.I / (noise + pc.I)) / std::numbers::ln2 : 0.0);
        prob.active.push_back(1);
        if (pc.I > 0.0) interfered.push_back(n);
    }

    const std::size_t free_bits = interfered.size() <= 12 ? interfered.size() : 0;
    const std::uint64_t patterns = std::uint64_t{1} << free_bits;

    auto configure = [&](std::uint64_t mask) {
        for (std::size_t i = 0; i < free_bits; ++i) prob.active[interfered[i]] = (mask >> i) & 1U;
        for (char a : prob.active)
            if (a) return true;
        return false;
    };

    WaterfillResult result;
    detail::ActiveSetSolution best;
    std::uint64_t best_mask = 0;
    best.power = std::numeric_limits<double>::infinity();
    // Highest mask first: all pairs on, so ties keep the widest pattern.
    for (std::uint64_t m = patterns; m-- > 0;) {
        if (!configure(m)) continue;
        auto sol = detail::min_power(prob, target_se);
        if (sol.power < best.power) {
            best = std::move(sol);
            best_mask = m;
        }
    }
    configure(best_mask);

    if (best.power > p_max) {
        result.feasible = false;
        best = detail::ActiveSetSolution{};
        best.power = -1.0;
        double best_rate = -1.0;
        for (std::uint64_t m = patterns; m-- > 0;) {
            if (!configure(m)) continue;
            double floors = 0.0;
            for (std::size_t n = 0; n < pairs.size(); ++n)
                if (prob.active[n]) floors += prob.floor[n];
            if (floors > p_max) continue;
            auto sol = detail::max_rate(prob, p_max);
            double r = 0.0;
            for (double s : sol.se) r += s;
            if (r > best_rate) {
                best_rate = r;
                best = std::move(sol);
                best_mask = m;
            }
        }
        if (best_rate < 0.0) {
            // Not even one SIC floor fits the budget: the device stays silent.
            result.se.assign(pairs.size(), 0.0);
            result.power.assign(pairs.size(), 0.0);
            result.delta.assign(pairs.size(), 0.0);
            return result;
        }
        configure(best_mask);
    }

    result.se = best.se;
    result.power.resize(pairs.size());
    for (std::size_t n = 0; n < pairs.size(); ++n) result.power[n] = detail::pair_power(prob, n, result.se[n]);

    const double chi = std::isfinite(best.L) ? std::exp2(best.L) * std::numbers::ln2 / w : 0.0;
    result.chi = result.feasible ? chi : 0.0;
    result.mu = result.feasible ? 0.0 : chi;
    const double level = result.feasible ? result.chi : result.mu;
    result.delta.assign(pairs.size(), 0.0);
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        if (!prob.active[n] || prob.floor[n] <= 0.0) continue;
        const bool on_floor = result.se[n] <= prob.lb[n] * (1.0 + 1e-12);
        if (!on_floor) continue;
        const double marginal = prob.cost[n] * std::numbers::ln2 * std::exp2(result.se[n]) / w;
        result.delta[n] = std::max(0.0, marginal - level);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Outer loop.

struct DualState {
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    Matrix delta;
};

/// Grouping facts carried along with a solution.
struct AllocationMeta {
    int U = 0;                 ///< devices-per-subcarrier cap used for the assignment
    int cluster_count = 0;     ///< C chosen by silhouette (0 when no clustering ran)
    int max_cluster_size = 0;
};

struct Solution {
    Matrix rates;          ///< scheduled bits/s per assigned pair
    Matrix powers;         ///< Watts
    Matrix interference;   ///< snapshot used by the final water-filling pass
    double b_sum = 0.0;
    double p_t = 0.0;
    double ee = 0.0;
    double ee_initial = 0.0;  ///< EE of the equal-power starting point
    int iterations = 0;
    bool converged = false;
    std::vector<char> qos_met;
    DualState duals;
    AllocationMeta meta;
};

/// B^Sum / (P_f + P_t). Zero throughput gives zero.
inline double total_ee(double b_sum, double p_t, double p_f) {
    if (b_sum <= 0.0) return 0.0;
    return b_sum / (p_f + p_t);
}

inline double total_ee(const Solution& s, double p_f) { return total_ee(s.b_sum, s.p_t, p_f); }

/// Water-fills one device of `alloc` against a fixed interference snapshot.
inline WaterfillResult waterfill_device(int k, const AllocationMatrix& alloc, const Matrix& gains,
                                        const Matrix& interference_snapshot, const ScenarioConfig& config) {
    std::vector<PairChannel> pairs;
    for (int n : alloc.subcarriers_of(k)) pairs.push_back({gains(k, n), interference_snapshot(k, n)});
    return waterfill(pairs, config.bt_target / config.w, config.p_max, config.noise_watts(), config.zeta, config.w);
}

namespace detail {

inline double relative_change(double now, double before) {
    const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
    return std::abs(now - before) / scale;
}

}  // namespace detail

/**
 * Iterative power optimization for a fixed assignment.
 *
 * Starts from p = p_max / |S_k| on each of device k's subcarriers, then
 * alternates water-filling of every device against a frozen interference
 * snapshot with re-evaluation of the interference, until both the EE and
 * the total transmit power change by less than `tol` (relative) or
 * `max_iters` passes have run. A solution is converged only if the loop
 * settled and every device met its QoS target within p_max; otherwise the
 * best iterate seen is returned with converged = false.
 */
inline Solution optimize(const AllocationMatrix& alloc, const Matrix& gains, const ScenarioConfig& config) {
    const int K = alloc.devices();
    const int N = alloc.subcarriers();
    if (gains.rows() != K || gains.cols() != N) throw std::invalid_argument("optimize: gain/allocation shape mismatch");
    if (static_cast<int>(alloc.decode_order.size()) != N) throw std::invalid_argument("optimize: missing decode order");

    const double noise = config.noise_watts();
    std::vector<std::vector<int>> subs(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        subs[static_cast<std::size_t>(k)] = alloc.subcarriers_of(k);
        if (subs[static_cast<std::size_t>(k)].empty())
            throw std::invalid_argument("optimize: device " + std::to_string(k) + " has no subcarrier");
    }

    Matrix powers = Matrix::Zero(K, N);
    for (int k = 0; k < K; ++k)
        for (int n : subs[static_cast<std::size_t>(k)])
            powers(k, n) = config.p_max / static_cast<double>(subs[static_cast<std::size_t>(k)].size());

    Solution best;
    {
        // Equal-power start: a device cannot deliver more than its target.
        const Matrix I0 = interference_matrix(alloc, powers, gains);
        double bits = 0.0;
        for (int k = 0; k < K; ++k) {
            double cap = 0.0;
            for (int n : subs[static_cast<std::size_t>(k)]) cap += rate(1, powers(k, n), gains(k, n), I0(k, n), config.w, noise);
            bits += std::min(cap, config.bt_target);
        }
        best.ee_initial = total_ee(bits, powers.sum(), config.p_f);
    }

    const double target_se = config.bt_target / config.w;
    double prev_ee = std::numeric_limits<double>::quiet_NaN();
    double prev_pt = std::numeric_limits<double>::quiet_NaN();
    bool settled = false;
    double best_ee = -1.0;

    for (int it = 1; it <= config.max_iters; ++it) {
        Solution cur;
        cur.interference = interference_matrix(alloc, powers, gains);
        cur.rates = Matrix::Zero(K, N);
        cur.powers = Matrix::Zero(K, N);
        cur.qos_met.assign(static_cast<std::size_t>(K), 1);
        cur.duals.lambda = Eigen::VectorXd::Zero(K);
        cur.duals.mu = Eigen::VectorXd::Zero(K);
        cur.duals.delta = Matrix::Zero(K, N);

        for (int k = 0; k < K; ++k) {
            const auto& sk = subs[static_cast<std::size_t>(k)];
            std::vector<PairChannel> pairs;
            for (int n : sk) pairs.push_back({gains(k, n), cur.interference(k, n)});
            const auto wf = waterfill(pairs, target_se, config.p_max, noise, config.zeta, config.w);
            for (std::size_t i = 0; i < sk.size(); ++i) {
                cur.rates(k, sk[i]) = config.w * wf.se[i];
                cur.powers(k, sk[i]) = wf.power[i];
                cur.duals.delta(k, sk[i]) = wf.delta[i];
            }
            cur.duals.lambda(k) = wf.chi;
            cur.duals.mu(k) = wf.mu;
            cur.qos_met[static_cast<std::size_t>(k)] = wf.feasible ? 1 : 0;
        }

        cur.b_sum = cur.rates.sum();
        cur.p_t = cur.powers.sum();
        cur.ee = total_ee(cur.b_sum, cur.p_t, config.p_f);
        cur.iterations = it;
        cur.ee_initial = best.ee_initial;
        powers = cur.powers;

        const bool stable = it > 1 && detail::relative_change(cur.ee, prev_ee) < config.tol &&
                            detail::relative_change(cur.p_t, prev_pt) < config.tol;
        prev_ee = cur.ee;
        prev_pt = cur.p_t;

        if (cur.ee > best_ee || stable) {
            best_ee = cur.ee;
            best = std::move(cur);
        }
        if (stable) {
            settled = true;
            break;
        }
    }

    const bool all_met = std::all_of(best.qos_met.begin(), best.qos_met.end(), [](char c) { return c != 0; });
    best.converged = settled && all_met;
    best.meta.U = alloc.U;
    return best;
}

// ---------------------------------------------------------------------------
// Constraint verification from the solution matrices alone.

struct ConstraintReport {
    int power_budget = 0;   ///< per-device power budget
    int occupancy = 0;      ///< devices per subcarrier above U
    int sic = 0;            ///< SIC decodability ratio
    int qos = 0;            ///< delivered bits off the QoS target
    int support = 0;        ///< power or rate outside alpha, or negative power
    int achievability = 0;  ///< scheduled rate above what the power achieves
    std::vector<std::string> messages;

    int total() const { return power_budget + occupancy + sic + qos + support + achievability; }
    bool ok() const { return total() == 0; }
};

inline ConstraintReport check_constraints(const Solution& s, const AllocationMatrix& alloc, const Matrix& gains,
                                          const ScenarioConfig& config, double rel_tol = 1e-6) {
    ConstraintReport rep;
    const int K = alloc.devices();
    const int N = alloc.subcarriers();
    const double noise = config.noise_watts();
    const Matrix I = interference_matrix(alloc, s.powers, gains);
    auto note = [&](int& counter, std::string msg) {
        ++counter;
        if (rep.messages.size() < 32) rep.messages.push_back(std::move(msg));
    };

    for (int n = 0; n < N; ++n)
        if (alloc.alpha.col(n).sum() > alloc.U)
            note(rep.occupancy, "occupancy: subcarrier " + std::to_string(n) + " exceeds U");

    for (int k = 0; k < K; ++k) {
        double pk = 0.0, bits = 0.0;
        for (int n = 0; n < N; ++n) {
            const double p = s.powers(k, n);
            const double r = s.rates(k, n);
            if (p < 0.0 || (!alloc.assigned(k, n) && (p != 0.0 || r != 0.0))) {
                note(rep.support, "support: pair (" + std::to_string(k) + "," + std::to_string(n) + ")");
                continue;
            }
            if (!alloc.assigned(k, n)) continue;
            pk += p;
            bits += r;
            if (p > 0.0 && p * gains(k, n) < (config.zeta - rel_tol) * I(k, n))
                note(rep.sic, "sic: pair (" + std::to_string(k) + "," + std::to_string(n) + ")");
            if (r > 0.0 && rate(1, p, gains(k, n), I(k, n), config.w, noise) < r * (1.0 - rel_tol))
                note(rep.achievability, "rate: pair (" + std::to_string(k) + "," + std::to_string(n) + ")");
        }
        if (pk > config.p_max * (1.0 + rel_tol)) note(rep.power_budget, "power budget: device " + std::to_string(k));
        if (std::abs(bits - config.bt_target) > rel_tol * config.bt_target)
            note(rep.qos, "qos: device " + std::to_string(k));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization.

inline void write_solution_csv(std::ostream& out, const Solution& s, const AllocationMatrix& alloc) {
    using detail::format_double;
    out << "device,subcarrier,rate,power\n";
    for (int k = 0; k < alloc.devices(); ++k)
        for (int n : alloc.subcarriers_of(k))
            out << k << ',' << n << ',' << format_double(s.rates(k, n)) << ',' << format_double(s.powers(k, n)) << '\n';
}

inline nlohmann::json solution_summary(const Solution& s) {
    return {
        {"ee", s.ee},
        {"b_sum", s.b_sum},
        {"p_t", s.p_t},
        {"iterations", s.iterations},
        {"converged", s.converged},
        {"ee_initial", s.ee_initial},
        {"U", s.meta.U},
        {"cluster_count", s.meta.cluster_count},
        {"max_cluster_size", s.meta.max_cluster_size},
    };
}

}  // namespace greenai
