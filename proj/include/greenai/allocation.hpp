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

#include <greenai/clustering.hpp>
#include <greenai/error.hpp>
#include <greenai/scenario.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace greenai {

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Subcarrier assignment alpha together with the SIC decode order of every
 * subcarrier (strongest gain first, lower device index on ties) and the
 * devices-per-subcarrier cap U.
 */
struct AllocationMatrix {
    BinaryMatrix alpha;
    std::vector<std::vector<int>> decode_order;
    int U = 1;

    int devices() const { return static_cast<int>(alpha.rows()); }
    int subcarriers() const { return static_cast<int>(alpha.cols()); }

    bool assigned(int k, int n) const { return alpha(k, n) != 0; }

    std::vector<int> subcarriers_of(int k) const {
        std::vector<int> out;
        for (int n = 0; n < subcarriers(); ++n)
            if (assigned(k, n)) out.push_back(n);
        return out;
    }

    /// Position of device k in the decode order of subcarrier n, or -1.
    int decode_position(int k, int n) const {
        const auto& order = decode_order[static_cast<std::size_t>(n)];
        const auto it = std::find(order.begin(), order.end(), k);
        return it == order.end() ? -1 : static_cast<int>(it - order.begin());
    }

    int occupied_subcarriers() const {
        int s = 0;
        for (const auto& o : decode_order) s += o.empty() ? 0 : 1;
        return s;
    }
};

/// Rebuilds decode_order from alpha: descending gain, lower index first on ties.
inline void set_decode_order(AllocationMatrix& alloc, const Matrix& gains) {
    const int K = alloc.devices();
    const int N = alloc.subcarriers();
    alloc.decode_order.assign(static_cast<std::size_t>(N), {});
    for (int n = 0; n < N; ++n) {
        auto& order = alloc.decode_order[static_cast<std::size_t>(n)];
        for (int k = 0; k < K; ++k)
            if (alloc.assigned(k, n)) order.push_back(k);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return gains(a, n) > gains(b, n); });
    }
}

inline AllocationMatrix make_allocation(const BinaryMatrix& alpha, int U, const Matrix& gains) {
    AllocationMatrix alloc;
    alloc.alpha = alpha;
    alloc.U = U;
    set_decode_order(alloc, gains);
    return alloc;
}

/// G[k][n] = g[k][n] / mean_n g[k][.]
inline Matrix normalize_gains(const Matrix& gains) {
    Matrix out(gains.rows(), gains.cols());
    for (Eigen::Index k = 0; k < gains.rows(); ++k) out.row(k) = gains.row(k) / gains.row(k).mean();
    return out;
}

namespace detail {

// One greedy pass. Devices are served in descending order of their best
// score; each takes its highest-scoring subcarrier with residual capacity.
// With cluster labels, subcarriers not yet holding a device of the same
// cluster are preferred whenever one has capacity.
inline BinaryMatrix greedy_pass(const Matrix& score, int U, const std::vector<int>* labels, int clusters) {
    const int K = static_cast<int>(score.rows());
    const int N = static_cast<int>(score.cols());
    if (U < 1) throw std::invalid_argument("devices-per-subcarrier cap must be >= 1");
    if (static_cast<long long>(N) * U < K)
        throw InfeasibleError("subcarrier capacity N*U = " + std::to_string(static_cast<long long>(N) * U) +
                              " < K = " + std::to_string(K));

    std::vector<double> best(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) best[static_cast<std::size_t>(k)] = score.row(k).maxCoeff();
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return best[static_cast<std::size_t>(a)] > best[static_cast<std::size_t>(b)];
    });

    BinaryMatrix alpha = BinaryMatrix::Zero(K, N);
    std::vector<int> load(static_cast<std::size_t>(N), 0);
    std::vector<char> cluster_on(labels ? static_cast<std::size_t>(clusters) * static_cast<std::size_t>(N) : 0, 0);

    for (int k : order) {
        int pick = -1, fallback = -1;
        for (int n = 0; n < N; ++n) {
            if (load[static_cast<std::size_t>(n)] >= U) continue;
            if (fallback < 0 || score(k, n) > score(k, fallback)) fallback = n;
            if (labels) {
                const auto c = static_cast<std::size_t>((*labels)[static_cast<std::size_t>(k)]);
                if (cluster_on[c * static_cast<std::size_t>(N) + static_cast<std::size_t>(n)]) continue;
            }
            if (pick < 0 || score(k, n) > score(k, pick)) pick = n;
        }
        if (pick < 0) pick = fallback;
        alpha(k, pick) = 1;
        ++load[static_cast<std::size_t>(pick)];
        if (labels) {
            const auto c = static_cast<std::size_t>((*labels)[static_cast<std::size_t>(k)]);
            cluster_on[c * static_cast<std::size_t>(N) + static_cast<std::size_t>(pick)] = 1;
        }
    }
    return alpha;
}

}  // namespace detail

/**
 * Normalized-gain assignment. Every device gets exactly one subcarrier, no
 * subcarrier gets more than U devices, and devices avoid subcarriers already
 * used by their own cluster while an alternative with capacity exists.
 * `gains` are the raw gains that fix the SIC decode order.
 * Throws InfeasibleError when N * U < K.
 */
inline AllocationMatrix assign_subcarriers(const Matrix& norm_gains, const ClusterAssignment& clusters, int U,
                                           const Matrix& gains) {
    validate_assignment(clusters, static_cast<int>(norm_gains.rows()));
    const auto alpha = detail::greedy_pass(norm_gains, U, &clusters.labels, clusters.C);
    return make_allocation(alpha, U, gains);
}

/// Baseline: the same pass ranked by raw gain, ignoring clusters.
inline AllocationMatrix greedy_assign(const Matrix& gains, int U) {
    const auto alpha = detail::greedy_pass(gains, U, nullptr, 0);
    return make_allocation(alpha, U, gains);
}

/// Smallest cap that makes N subcarriers hold K devices.
inline int min_feasible_cap(int K, int N) { return (K + N - 1) / N; }

inline void write_allocation_csv(std::ostream& out, const AllocationMatrix& alloc) {
    out << "device,subcarrier,decode_position\n";
    for (int k = 0; k < alloc.devices(); ++k)
        for (int n : alloc.subcarriers_of(k)) out << k << ',' << n << ',' << alloc.decode_position(k, n) << '\n';
}

}  // namespace greenai
