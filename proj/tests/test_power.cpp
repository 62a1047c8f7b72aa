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

#include <greenai/allocation.hpp>
#include <greenai/power.hpp>
#include <greenai/scenario.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <tuple>

#include "oracles.hpp"

namespace greenai {
namespace {

AllocationMatrix shared(const Matrix& gains, int U) {
    BinaryMatrix alpha = BinaryMatrix::Ones(gains.rows(), gains.cols());
    return make_allocation(alpha, U, gains);
}

TEST(Interference, SingleOccupantSeesNothing) {
    const Matrix g = Matrix::Constant(1, 1, 1e-8);
    const auto a = shared(g, 1);
    EXPECT_EQ(interference(a, Matrix::Constant(1, 1, 0.1), g, 0, 0), 0.0);
}

TEST(Interference, FirstDecodedSeesTheOther) {
    Matrix g(2, 1);
    g << 3e-8, 1e-8;
    Matrix p(2, 1);
    p << 0.2, 0.1;
    const auto a = shared(g, 2);
    EXPECT_DOUBLE_EQ(interference(a, p, g, 0, 0), 1e-9);
    EXPECT_EQ(interference(a, p, g, 1, 0), 0.0);
}

TEST(Interference, MatchesWeakerDeviceSumForEveryOrdering) {
    // Residual interference on k is the received power of every strictly
    // weaker co-channel device, whatever the index order.
    const double levels[3] = {1e-9, 4e-9, 9e-9};
    int perm[3] = {0, 1, 2};
    do {
        Matrix g(3, 1), p(3, 1);
        for (int k = 0; k < 3; ++k) {
            g(k, 0) = levels[perm[k]];
            p(k, 0) = 0.05 * (k + 1);
        }
        const auto a = shared(g, 3);
        const Matrix I = interference_matrix(a, p, g);
        for (int k = 0; k < 3; ++k) {
            double ref = 0.0;
            for (int j = 0; j < 3; ++j)
                if (g(j, 0) < g(k, 0)) ref += p(j, 0) * g(j, 0);
            EXPECT_DOUBLE_EQ(interference(a, p, g, k, 0), ref);
            EXPECT_DOUBLE_EQ(I(k, 0), ref);
        }
    } while (std::next_permutation(perm, perm + 3));
}

TEST(Sic, Boundaries) {
    EXPECT_TRUE(sic_feasible(1.0, 2.0, 2.0, 1.0));
    EXPECT_FALSE(sic_feasible(0.5, 2.0, 2.0, 1.0));
    EXPECT_TRUE(sic_feasible(1e-30, 1e-9, 0.0, 1.0));
    EXPECT_FALSE(sic_feasible(1.0, 2.0, 1.5, 1.5));
    EXPECT_DOUBLE_EQ(sic_floor_power(2.0, 3.0, 1.5), 2.25);
}

TEST(Rate, Basics) {
    EXPECT_EQ(rate(0, 1.0, 1.0, 0.0, 1e7, 1e-14), 0.0);
    EXPECT_DOUBLE_EQ(rate(1, 2.0, 0.5, 0.0, 1e7, 1.0), 1e7);
}

TEST(PowerFromRate, Basics) {
    EXPECT_EQ(power_from_rate(0.0, 1.0, 0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(power_from_rate(1.0, 1.0, 0.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(power_from_rate(2.0, 0.5, 0.0, 1.0), 6.0);
}

TEST(PowerFromRate, InvertsRate) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double se = 1e-4 + 8.0 * rng.uniform();
        const double g = std::pow(10.0, -14.0 + 8.0 * rng.uniform());
        const double I = rng.uniform() < 0.5 ? 0.0 : std::pow(10.0, -16.0 + 6.0 * rng.uniform());
        const double noise = 3.98e-14;
        const double w = 1e7;
        const double p = power_from_rate(se, g, I, noise);
        EXPECT_NEAR(rate(1, p, g, I, w, noise) / (w * se), 1.0, 1e-9);
    }
}

TEST(Waterfill, SingleSubcarrierTakesTheWholeTarget) {
    const PairChannel pc{1e-9, 0.0};
    const auto r = waterfill(std::span(&pc, 1), 0.005, 0.2, 4e-14, 1.0, 1e7);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.se[0], 0.005);
    EXPECT_DOUBLE_EQ(r.power[0], power_from_rate(0.005, 1e-9, 0.0, 4e-14));
}

TEST(Waterfill, EqualSubcarriersSplitEvenly) {
    const std::vector<PairChannel> pcs{{2e-9, 1e-16}, {2e-9, 1e-16}};
    const auto r = waterfill(pcs, 0.01, 0.2, 4e-14, 1.0, 1e7);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.se[0], 0.005, 1e-12);
    EXPECT_NEAR(r.se[1], 0.005, 1e-12);
}

TEST(Waterfill, CheaperToSilenceOneOfTwoFloorBoundPairs) {
    // Both floors cost more than the rate needs, so one pair carries it all.
    const std::vector<PairChannel> pcs{{2e-9, 1e-15}, {2e-9, 1e-15}};
    const auto r = waterfill(pcs, 0.01, 0.2, 4e-14, 1.0, 1e7);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(std::min(r.se[0], r.se[1]), 0.0);
    EXPECT_EQ(std::min(r.power[0], r.power[1]), 0.0);
    EXPECT_DOUBLE_EQ(r.total_power(), sic_floor_power(2e-9, 1e-15, 1.0));
    EXPECT_NEAR(r.total_se(), 0.01, 1e-15);
}

TEST(Waterfill, UnequalSubcarriersMatchGridMinimum) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const double R = 0.5 + 6.0 * rng.uniform();
        const double g1 = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
        const double g2 = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
        const std::vector<PairChannel> pcs{{g1, 0.0}, {g2, 0.0}};
        const auto r = waterfill(pcs, R, 1e12, 1.0, 1.0, 1.0);
        ASSERT_TRUE(r.feasible);
        const auto ref = greenai::testing::grid_two_way_split(R, 1.0 / g1, 1.0 / g2, 1000);
        EXPECT_NEAR(r.se[0], ref.r1, 0.005 * R);
        EXPECT_NEAR(r.se[1], ref.r2, 0.005 * R);
        EXPECT_LE(r.total_power(), ref.power * (1.0 + 1e-12));
        EXPECT_NEAR(r.total_se(), R, 1e-12 * R);
    }
}

TEST(Waterfill, WeakSubcarrierCanBeLeftDry) {
    const std::vector<PairChannel> pcs{{1.0, 0.0}, {1e-3, 0.0}};
    const auto r = waterfill(pcs, 1.0, 1e9, 1.0, 1.0, 1.0);
    EXPECT_EQ(r.se[1], 0.0);
    EXPECT_EQ(r.power[1], 0.0);
    EXPECT_NEAR(r.se[0], 1.0, 1e-12);
}

TEST(Waterfill, BudgetBoundaryFlagsInfeasibility) {
    const PairChannel pc{1e-12, 0.0};
    const auto r = waterfill(std::span(&pc, 1), 5.0, 0.2, 4e-14, 1.0, 1e7);
    EXPECT_FALSE(r.feasible);
    EXPECT_NEAR(r.total_power(), 0.2, 1e-9);
    EXPECT_LT(r.total_se(), 5.0);
    EXPECT_GT(r.mu, 0.0);
    EXPECT_EQ(r.chi, 0.0);
}

TEST(Waterfill, SicFloorRaisesPower) {
    // Interference far above what the QoS rate needs: the pair pays the floor.
    const PairChannel pc{1e-9, 1e-12};
    const double target = 0.005;
    const auto r = waterfill(std::span(&pc, 1), target, 0.2, 4e-14, 1.0, 1e7);
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.total_se(), target, 1e-15);
    EXPECT_DOUBLE_EQ(r.power[0], sic_floor_power(1e-9, 1e-12, 1.0));
    EXPECT_TRUE(sic_feasible(r.power[0] * (1 + 1e-12), 1e-9, 1e-12, 1.0));
    EXPECT_GT(r.delta[0], 0.0);
}

TEST(Waterfill, RejectsEmptyAndBadInput) {
    EXPECT_THROW(waterfill({}, 1.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    const PairChannel bad{0.0, 0.0};
    EXPECT_THROW(waterfill(std::span(&bad, 1), 1.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Waterfill, DualsAreNonNegativeAndSlack) {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<PairChannel> pcs;
        const int S = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < S; ++i)
            pcs.push_back({std::pow(10.0, -14.0 + 3.0 * rng.uniform()),
                           rng.uniform() < 0.5 ? 0.0 : std::pow(10.0, -15.0 + 3.0 * rng.uniform())});
        const auto r = waterfill(pcs, 0.005 * (1 + rng.below(20)), 0.2, 3.98e-14, 1.0, 1e7);
        EXPECT_GE(r.chi, 0.0);
        EXPECT_GE(r.mu, 0.0);
        if (r.feasible) {
            EXPECT_EQ(r.mu, 0.0);
        }
        double p = 0.0;
        for (std::size_t i = 0; i < pcs.size(); ++i) {
            EXPECT_GE(r.delta[i], 0.0);
            EXPECT_GE(r.power[i], 0.0);
            p += r.power[i];
            if (r.delta[i] > 0.0) {
                EXPECT_NEAR(r.power[i] * pcs[i].g, pcs[i].I, 1e-9 * pcs[i].I);
            }
            if (r.power[i] > 0.0) {
                EXPECT_GE(r.power[i] * pcs[i].g, pcs[i].I * (1 - 1e-9));
            }
        }
        if (r.mu > 0.0) {
            EXPECT_NEAR(p, 0.2, 1e-9);
        }
        EXPECT_LE(p, 0.2 * (1 + 1e-9));
    }
}

ScenarioConfig tiny(int K, int N) {
    ScenarioConfig c;
    c.K = K;
    c.N = N;
    return c;
}

TEST(Optimize, SingleDeviceClosedForm) {
    const auto c = tiny(1, 1);
    const Matrix g = Matrix::Constant(1, 1, 2.5e-9);
    const auto s = optimize(shared(g, 1), g, c);
    ASSERT_TRUE(s.converged);
    const double p = power_from_rate(c.bt_target / c.w, 2.5e-9, 0.0, c.noise_watts());
    EXPECT_NEAR(s.powers(0, 0) / p, 1.0, 1e-12);
    EXPECT_NEAR(s.ee / (c.bt_target / (c.p_f + p)), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(total_ee(s, c.p_f), s.ee);
}

TEST(Optimize, OrthogonalDevicesClosedForm) {
    auto c = tiny(10, 10);
    c.beta0_db = -90.0;
    const auto r = make_realization(c, 5);
    const auto a = greedy_assign(r.gains, 1);
    const auto s = optimize(a, r.gains, c);
    ASSERT_TRUE(s.converged);
    double pt = 0.0;
    for (int k = 0; k < c.K; ++k)
        for (int n : a.subcarriers_of(k)) pt += power_from_rate(c.bt_target / c.w, r.gains(k, n), 0.0, c.noise_watts());
    EXPECT_NEAR(s.p_t / pt, 1.0, 1e-12);
    EXPECT_NEAR(s.ee / (c.K * c.bt_target / (c.p_f + pt)), 1.0, 1e-12);
}

// Two devices on one subcarrier; every (p1, p2) on a 1 mW grid, delivered
// bits capped at the target, QoS and SIC checked from first principles.
double grid_ee_two_shared(const Matrix& g, const ScenarioConfig& c) {
    const double noise = c.noise_watts();
    const int strong = g(0, 0) >= g(1, 0) ? 0 : 1;
    const int weak = 1 - strong;
    double best = 0.0;
    const int steps = static_cast<int>(std::lround(c.p_max / 1e-3));
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
            double p[2];
            p[strong] = i * 1e-3;
            p[weak] = j * 1e-3;
            const double I = p[weak] * g(weak, 0);
            if (!sic_feasible(p[strong], g(strong, 0), I, c.zeta)) continue;
            const double r_strong = c.w * std::log2(1.0 + p[strong] * g(strong, 0) / (noise + I));
            const double r_weak = c.w * std::log2(1.0 + p[weak] * g(weak, 0) / noise);
            if (r_strong < c.bt_target || r_weak < c.bt_target) continue;
            best = std::max(best, 2.0 * c.bt_target / (c.p_f + p[0] + p[1]));
        }
    return best;
}

TEST(Optimize, TwoSharedDevicesMatchPowerGrid) {
    // With microwatt optima the 1 mW grid alone costs 2 mW, which is only
    // below 1% of the denominator at the larger circuit power.
    const std::vector<std::tuple<double, double, double>> cases{
        {1.4002, 3e-15, 2e-15}, {1.4002, 1e-14, 1.5e-15}, {1.4002, 2e-9, 5e-10},
        {0.1003, 3e-15, 2e-15}, {0.1003, 1e-14, 1.5e-15}};
    for (auto [pf, g1, g2] : cases) {
        {
            auto c = tiny(2, 1);
            c.p_f = pf;
            Matrix g(2, 1);
            g << g1, g2;
            const auto s = optimize(shared(g, 2), g, c);
            ASSERT_TRUE(s.converged) << g1 << ' ' << g2;
            const double ref = grid_ee_two_shared(g, c);
            ASSERT_GT(ref, 0.0);
            EXPECT_GE(s.ee, ref * (1 - 1e-9));
            EXPECT_NEAR(s.ee / ref, 1.0, 0.01) << "p_f " << pf << " g " << g1 << ' ' << g2;
            EXPECT_TRUE(check_constraints(s, shared(g, 2), g, c).ok());
        }
    }
}

TEST(Optimize, DefaultScenarioSatisfiesConstraints) {
    const ScenarioConfig c;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = make_realization(c, seed);
        const auto a = greedy_assign(r.gains, 2);
        const auto s = optimize(a, r.gains, c);
        ASSERT_TRUE(s.converged);
        const auto rep = check_constraints(s, a, r.gains, c);
        EXPECT_TRUE(rep.ok()) << (rep.messages.empty() ? "" : rep.messages.front());
        EXPECT_GE(s.ee, s.ee_initial);
        EXPECT_NEAR(s.b_sum, c.K * c.bt_target, 1e-6 * c.K * c.bt_target);
        EXPECT_DOUBLE_EQ(s.p_t, s.powers.sum());
        EXPECT_EQ(s.qos_met.size(), static_cast<std::size_t>(c.K));

        // The snapshot used by the final pass agrees with the returned powers.
        const Matrix I = interference_matrix(a, s.powers, r.gains);
        EXPECT_LE((I - s.interference).cwiseAbs().maxCoeff(), 1e-6 * std::max(I.maxCoeff(), c.noise_watts()));

        EXPECT_GE(s.duals.lambda.minCoeff(), 0.0);
        EXPECT_EQ(s.duals.mu.maxCoeff(), 0.0);
        EXPECT_GE(s.duals.delta.minCoeff(), 0.0);
    }
}

TEST(Optimize, IterationCapReportsNonConvergence) {
    auto c = ScenarioConfig{};
    c.max_iters = 1;
    const auto r = make_realization(c, 1);
    const auto a = greedy_assign(r.gains, 2);
    const auto s = optimize(a, r.gains, c);
    EXPECT_FALSE(s.converged);
    EXPECT_EQ(s.iterations, 1);
}

TEST(Optimize, UnreachableQosReportsNonConvergenceWithinBudget) {
    auto c = tiny(4, 2);
    c.p_max = 1e-13;
    const auto r = make_realization(c, 2);
    const auto a = greedy_assign(r.gains, 2);
    const auto s = optimize(a, r.gains, c);
    EXPECT_FALSE(s.converged);
    EXPECT_TRUE(std::any_of(s.qos_met.begin(), s.qos_met.end(), [](char q) { return q == 0; }));
    for (int k = 0; k < c.K; ++k) EXPECT_LE(s.powers.row(k).sum(), c.p_max * (1 + 1e-9));
    const auto rep = check_constraints(s, a, r.gains, c);
    EXPECT_EQ(rep.power_budget, 0);
    EXPECT_GT(rep.qos, 0);
}

TEST(Optimize, MultiSubcarrierDevices) {
    auto c = tiny(3, 4);
    c.beta0_db = -95.0;
    const auto r = make_realization(c, 8);
    BinaryMatrix alpha(3, 4);
    alpha << 1, 1, 0, 0,
             0, 1, 1, 0,
             1, 0, 1, 1;
    const auto a = make_allocation(alpha, 2, r.gains);
    const auto s = optimize(a, r.gains, c);
    ASSERT_TRUE(s.converged);
    const auto rep = check_constraints(s, a, r.gains, c);
    EXPECT_TRUE(rep.ok()) << (rep.messages.empty() ? "" : rep.messages.front());
}

TEST(Optimize, RejectsMalformedInput) {
    const auto c = tiny(2, 2);
    const Matrix g = Matrix::Ones(2, 2);
    BinaryMatrix alpha = BinaryMatrix::Zero(2, 2);
    alpha(0, 0) = 1;
    EXPECT_THROW(optimize(make_allocation(alpha, 1, g), g, c), std::invalid_argument);
    EXPECT_THROW(optimize(shared(g, 2), Matrix::Ones(3, 2), c), std::invalid_argument);
}

TEST(TotalEe, Arithmetic) {
    EXPECT_EQ(total_ee(0.0, 1.0, 1.0), 0.0);
    EXPECT_EQ(total_ee(1e6, 1.0, 1.0), 5e5);
    EXPECT_DOUBLE_EQ(total_ee(3e6, 1.0, 1.0), 3.0 * total_ee(1e6, 1.0, 1.0));
}

TEST(Constraints, DetectViolations) {
    const auto c = tiny(2, 1);
    Matrix g(2, 1);
    g << 2e-9, 1e-9;
    const auto a = shared(g, 1);  // two devices, cap 1
    Solution s;
    s.powers = Matrix::Zero(2, 1);
    s.rates = Matrix::Zero(2, 1);
    s.powers << 1e-3, 0.5;
    s.rates << c.bt_target, c.bt_target * 0.5;
    const auto rep = check_constraints(s, a, g, c);
    EXPECT_EQ(rep.occupancy, 1);
    EXPECT_EQ(rep.power_budget, 1);
    EXPECT_EQ(rep.qos, 1);
    EXPECT_EQ(rep.sic, 1);
    EXPECT_FALSE(rep.ok());
}

TEST(Serialization, SolutionCsvAndSummary) {
    const auto c = tiny(1, 1);
    const Matrix g = Matrix::Constant(1, 1, 1e-9);
    const auto a = shared(g, 1);
    const auto s = optimize(a, g, c);
    std::ostringstream out;
    write_solution_csv(out, s, a);
    EXPECT_EQ(out.str().rfind("device,subcarrier,rate,power\n0,0,50000,", 0), 0U);
    const auto j = solution_summary(s);
    EXPECT_EQ(j.at("converged").get<bool>(), true);
    EXPECT_DOUBLE_EQ(j.at("ee").get<double>(), s.ee);
}

}  // namespace
}  // namespace greenai
