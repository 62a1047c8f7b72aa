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
#include <greenai/scenario.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace greenai {
namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

void expect_one_per_device_and_capped(const AllocationMatrix& a) {
    for (int k = 0; k < a.devices(); ++k) EXPECT_EQ(a.alpha.row(k).sum(), 1) << "device " << k;
    for (int n = 0; n < a.subcarriers(); ++n) EXPECT_LE(a.alpha.col(n).sum(), a.U) << "subcarrier " << n;
}

TEST(Normalize, ConstantRowBecomesOnes) {
    const Matrix G = normalize_gains(mat({{2, 2, 2}}));
    for (int n = 0; n < 3; ++n) EXPECT_EQ(G(0, n), 1.0);
}

TEST(Normalize, SimpleRow) {
    const Matrix G = normalize_gains(mat({{1, 3}}));
    EXPECT_EQ(G(0, 0), 0.5);
    EXPECT_EQ(G(0, 1), 1.5);
}

TEST(Normalize, EveryRowHasUnitMean) {
    Rng rng(1);
    Matrix g(5, 4);
    for (int k = 0; k < 5; ++k)
        for (int n = 0; n < 4; ++n) g(k, n) = 1e-9 * rng.exponential() * (k + 1);
    const Matrix G = normalize_gains(g);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(G.row(k).mean(), 1.0, 1e-12);
}

TEST(Assign, TwoDevicesTwoSubcarriers) {
    const Matrix G = mat({{0.9, 1.1}, {1.2, 0.8}});
    const auto a = assign_subcarriers(G, single_cluster(2), 1, G);
    EXPECT_TRUE(a.assigned(0, 1));
    EXPECT_TRUE(a.assigned(1, 0));
    // Reference: of the two feasible maps, this one has the larger selected sum.
    EXPECT_GT(G(0, 1) + G(1, 0), G(0, 0) + G(1, 1));
}

TEST(Assign, SingleDeviceTakesArgmax) {
    const Matrix G = mat({{0.7, 1.6, 0.7}});
    const auto a = assign_subcarriers(G, single_cluster(1), 1, G);
    EXPECT_EQ(a.subcarriers_of(0), std::vector<int>{1});
}

TEST(Assign, CapacityForcesFullColumns) {
    const Matrix G = mat({{1.5, 0.5}, {1.4, 0.6}, {1.3, 0.7}, {1.2, 0.8}});
    const auto a = assign_subcarriers(G, single_cluster(4), 2, G);
    EXPECT_EQ(a.alpha.col(0).sum(), 2);
    EXPECT_EQ(a.alpha.col(1).sum(), 2);
    expect_one_per_device_and_capped(a);
}

TEST(Assign, InsufficientCapacityIsInfeasible) {
    const Matrix G = Matrix::Ones(5, 2);
    EXPECT_THROW(assign_subcarriers(G, single_cluster(5), 2, G), InfeasibleError);
    EXPECT_THROW(greedy_assign(G, 2), InfeasibleError);
    EXPECT_THROW(greedy_assign(G, 0), std::invalid_argument);
}

TEST(Assign, ClusterMatesAvoidEachOther) {
    // Both devices of cluster 0 prefer subcarrier 0; the second one is steered away.
    const Matrix G = mat({{1.5, 0.5, 1.0}, {1.4, 0.6, 1.0}, {1.3, 0.9, 0.8}});
    ClusterAssignment c;
    c.C = 2;
    c.labels = {0, 0, 1};
    c.medoids = {0, 2};
    const auto a = assign_subcarriers(G, c, 2, G);
    EXPECT_TRUE(a.assigned(0, 0));
    EXPECT_TRUE(a.assigned(1, 2));  // best subcarrier not yet used by cluster 0
    EXPECT_TRUE(a.assigned(2, 0));  // other cluster may share
}

TEST(Assign, FallsBackWhenNoClusterFreeSubcarrierRemains) {
    const Matrix G = mat({{1.2, 0.8}, {1.1, 0.9}, {1.0, 1.0}});
    const auto a = assign_subcarriers(G, single_cluster(3), 2, G);
    expect_one_per_device_and_capped(a);
}

TEST(Assign, InvariantToPerDeviceScaling) {
    Rng rng(2);
    Matrix g(12, 6);
    for (int k = 0; k < 12; ++k)
        for (int n = 0; n < 6; ++n) g(k, n) = 1e-10 * rng.exponential();
    Matrix scaled = g;
    for (int k = 0; k < 12; ++k) scaled.row(k) *= std::pow(10.0, k % 4);
    ClusterAssignment c;
    c.C = 3;
    for (int k = 0; k < 12; ++k) c.labels.push_back(k % 3);
    c.medoids = {0, 1, 2};
    const auto a = assign_subcarriers(normalize_gains(g), c, 2, g);
    const auto b = assign_subcarriers(normalize_gains(scaled), c, 2, scaled);
    EXPECT_TRUE(a.alpha == b.alpha);
}

TEST(Greedy, SingleDeviceTakesArgmaxRawGain) {
    const auto a = greedy_assign(mat({{3e-9, 5e-9, 1e-9}}), 1);
    EXPECT_EQ(a.subcarriers_of(0), std::vector<int>{1});
}

TEST(Greedy, StrongDeviceWinsRawButLosesNormalized) {
    // Device 0 is strong on average, device 1 weak but peaked on subcarrier 0.
    const Matrix g = mat({{10, 9}, {1, 0.2}});
    const auto greedy = greedy_assign(g, 1);
    EXPECT_TRUE(greedy.assigned(0, 0));
    EXPECT_TRUE(greedy.assigned(1, 1));

    const auto norm = assign_subcarriers(normalize_gains(g), single_cluster(2), 1, g);
    EXPECT_TRUE(norm.assigned(1, 0));
    EXPECT_TRUE(norm.assigned(0, 1));

    // Enumeration of both maps: raw gain sum favours greedy's map,
    // normalized gain sum favours the other.
    const Matrix G = normalize_gains(g);
    EXPECT_GT(g(0, 0) + g(1, 1), g(0, 1) + g(1, 0));
    EXPECT_GT(G(0, 1) + G(1, 0), G(0, 0) + G(1, 1));
}

TEST(Greedy, SensitiveToPerDeviceScaling) {
    const Matrix g = mat({{2, 1}, {1.5, 0.1}});
    Matrix scaled = g;
    scaled.row(1) *= 10.0;
    EXPECT_FALSE(greedy_assign(g, 1).alpha == greedy_assign(scaled, 1).alpha);
}

TEST(Greedy, DefaultScenarioRespectsCap) {
    const ScenarioConfig c;
    const auto r = make_realization(c, 3);
    const auto a = greedy_assign(r.gains, 2);
    expect_one_per_device_and_capped(a);
    for (int n = 0; n < c.N; ++n) EXPECT_EQ(a.alpha.col(n).sum(), 2);
}

TEST(Allocation, RandomInstancesAreValid) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const int N = 1 + static_cast<int>(rng.below(8));
        const int K = 1 + static_cast<int>(rng.below(20));
        const int U = min_feasible_cap(K, N) + static_cast<int>(rng.below(2));
        Matrix g(K, N);
        for (int k = 0; k < K; ++k)
            for (int n = 0; n < N; ++n) g(k, n) = rng.exponential();
        ClusterAssignment c;
        c.C = std::min(K, 3);
        for (int k = 0; k < K; ++k) c.labels.push_back(k < c.C ? k : static_cast<int>(rng.below(static_cast<std::uint64_t>(c.C))));
        for (int i = 0; i < c.C; ++i) c.medoids.push_back(i);
        expect_one_per_device_and_capped(assign_subcarriers(normalize_gains(g), c, U, g));
        expect_one_per_device_and_capped(greedy_assign(g, U));
    }
}

TEST(DecodeOrder, StrongestFirstLowerIndexOnTies) {
    BinaryMatrix alpha = BinaryMatrix::Zero(4, 1);
    alpha << 1, 1, 1, 1;
    const auto a = make_allocation(alpha, 4, mat({{2}, {5}, {2}, {7}}));
    EXPECT_EQ(a.decode_order[0], (std::vector<int>{3, 1, 0, 2}));
    EXPECT_EQ(a.decode_position(0, 0), 2);
    EXPECT_EQ(a.occupied_subcarriers(), 1);
}

TEST(MinCap, Ceiling) {
    EXPECT_EQ(min_feasible_cap(70, 35), 2);
    EXPECT_EQ(min_feasible_cap(71, 35), 3);
    EXPECT_EQ(min_feasible_cap(1, 35), 1);
}

TEST(Allocation, CsvListsAssignedPairs) {
    const Matrix G = mat({{0.9, 1.1}, {1.2, 0.8}});
    std::ostringstream out;
    write_allocation_csv(out, greedy_assign(G, 1));
    EXPECT_NE(out.str().find("0,1"), std::string::npos);
    EXPECT_NE(out.str().find("1,0"), std::string::npos);
}

}  // namespace
}  // namespace greenai
