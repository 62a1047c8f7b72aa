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

#include <greenai/random.hpp>
#include <greenai/scenario.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace greenai {

/// Partition of K points into C clusters around medoids.
struct ClusterAssignment {
    std::vector<int> labels;   ///< length K, values in [0, C)
    std::vector<int> medoids;  ///< length C, point index of each cluster's medoid
    int C = 0;
    double total_cost = 0.0;          ///< sum of point-to-medoid distances
    std::vector<double> cost_trace;   ///< cost after seeding and after every swap

    std::vector<int> sizes() const {
        std::vector<int> s(static_cast<std::size_t>(C), 0);
        for (int l : labels) ++s[static_cast<std::size_t>(l)];
        return s;
    }
    int max_cluster_size() const {
        const auto s = sizes();
        return s.empty() ? 0 : *std::max_element(s.begin(), s.end());
    }
};

struct SilhouetteReport {
    std::vector<double> per_point;
    double mean = 0.0;
};

/// Pairwise Euclidean distances between the rows of `features`.
inline Matrix distance_matrix(const Matrix& features) {
    const Eigen::Index K = features.rows();
    Matrix d(K, K);
    for (Eigen::Index i = 0; i < K; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < K; ++j) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < features.cols(); ++c) {
                const double diff = features(i, c) - features(j, c);
                s += diff * diff;
            }
            d(i, j) = d(j, i) = std::sqrt(s);
        }
    }
    return d;
}

/// Per-device clustering feature: mean gain across subcarriers, in dB.
inline Matrix device_features(const Matrix& gains) {
    Matrix f(gains.rows(), 1);
    for (Eigen::Index k = 0; k < gains.rows(); ++k) f(k, 0) = 10.0 * std::log10(gains.row(k).mean());
    return f;
}

/// Trivial one-cluster labelling, for systems too small to cluster.
inline ClusterAssignment single_cluster(int K) {
    ClusterAssignment a;
    a.C = 1;
    a.labels.assign(static_cast<std::size_t>(K), 0);
    a.medoids = {0};
    return a;
}

namespace detail {

// Swap-phase state of one PAM run, in canonical point order.
class PamState {
public:
    PamState(const Matrix& dist, std::vector<int> medoids)
        : dist_(dist), medoids_(std::move(medoids)) {
        refresh();
    }

    double cost() const { return cost_; }
    const std::vector<int>& medoids() const { return medoids_; }

    // Best single swap; returns false when none strictly improves the cost.
    bool improve() {
        const int K = static_cast<int>(dist_.rows());
        const int C = static_cast<int>(medoids_.size());
        std::vector<char> is_medoid(static_cast<std::size_t>(K), 0);
        for (int m : medoids_) is_medoid[static_cast<std::size_t>(m)] = 1;

        double best_delta = 0.0;
        int best_slot = -1, best_point = -1;
        for (int slot = 0; slot < C; ++slot) {
            for (int h = 0; h < K; ++h) {
                if (is_medoid[static_cast<std::size_t>(h)]) continue;
                double delta = 0.0;
                for (int j = 0; j < K; ++j) {
                    const auto uj = static_cast<std::size_t>(j);
                    const double dh = dist_(j, h);
                    const double keep = nearest_slot_[uj] == slot ? second_[uj] : nearest_[uj];
                    delta += std::min(dh, keep) - nearest_[uj];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_slot = slot;
                    best_point = h;
                }
            }
        }
        const double eps = 1e-12 * std::max(1.0, cost_);
        if (best_slot < 0 || best_delta >= -eps) return false;
        medoids_[static_cast<std::size_t>(best_slot)] = best_point;
        refresh();
        return true;
    }

private:
    void refresh() {
        const int K = static_cast<int>(dist_.rows());
        nearest_.assign(static_cast<std::size_t>(K), std::numeric_limits<double>::infinity());
        second_.assign(static_cast<std::size_t>(K), std::numeric_limits<double>::infinity());
        nearest_slot_.assign(static_cast<std::size_t>(K), -1);
        cost_ = 0.0;
        for (int j = 0; j < K; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            for (int slot = 0; slot < static_cast<int>(medoids_.size()); ++slot) {
                const double d = dist_(j, medoids_[static_cast<std::size_t>(slot)]);
                if (d < nearest_[uj]) {
                    second_[uj] = nearest_[uj];
                    nearest_[uj] = d;
                    nearest_slot_[uj] = slot;
                } else if (d < second_[uj]) {
                    second_[uj] = d;
                }
            }
            cost_ += nearest_[uj];
        }
    }

    const Matrix& dist_;
    std::vector<int> medoids_;
    std::vector<double> nearest_, second_;
    std::vector<int> nearest_slot_;
    double cost_ = 0.0;
};

// k-medoids++ seeding: first medoid uniform, then proportional to squared
// distance from the closest chosen medoid.
inline std::vector<int> seed_medoids(const Matrix& dist, int C, Rng& rng) {
    const int K = static_cast<int>(dist.rows());
    std::vector<int> medoids{static_cast<int>(rng.below(static_cast<std::uint64_t>(K)))};
    std::vector<double> closest(static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) closest[static_cast<std::size_t>(j)] = dist(j, medoids[0]);

    while (static_cast<int>(medoids.size()) < C) {
        std::vector<char> taken(static_cast<std::size_t>(K), 0);
        for (int m : medoids) taken[static_cast<std::size_t>(m)] = 1;
        double total = 0.0;
        for (int j = 0; j < K; ++j)
            if (!taken[static_cast<std::size_t>(j)]) total += closest[static_cast<std::size_t>(j)] * closest[static_cast<std::size_t>(j)];

        int pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (int j = 0; j < K; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (taken[uj]) continue;
                acc += closest[uj] * closest[uj];
                pick = j;
                if (acc > target) break;
            }
        } else {
            // All remaining points coincide with a medoid: pick uniformly.
            auto nth = static_cast<int>(rng.below(static_cast<std::uint64_t>(K - static_cast<int>(medoids.size()))));
            for (int j = 0; j < K; ++j) {
                if (taken[static_cast<std::size_t>(j)]) continue;
                if (nth-- == 0) {
                    pick = j;
                    break;
                }
            }
        }
        medoids.push_back(pick);
        for (int j = 0; j < K; ++j)
            closest[static_cast<std::size_t>(j)] = std::min(closest[static_cast<std::size_t>(j)], dist(j, pick));
    }
    return medoids;
}

}  // namespace detail

/**
 * PAM k-medoids on the rows of `features` (Euclidean distance).
 *
 * Points are first put in canonical order (lexicographic by feature, then by
 * index) so the result does not depend on input order. Each of `restarts`
 * runs seeds with k-medoids++ and then applies best-improvement swaps until
 * no swap strictly lowers the total dissimilarity; the cheapest run wins.
 * Points equidistant from two medoids join the one that comes first in
 * canonical order. Clusters are numbered in canonical medoid order.
 */
inline ClusterAssignment k_medoids(const Matrix& features, int C, Rng& rng, int restarts = 5) {
    const int K = static_cast<int>(features.rows());
    if (K < 3) throw std::invalid_argument("k_medoids: need at least 3 points");
    if (C < 2 || C > K - 1)
        throw std::invalid_argument("k_medoids: C=" + std::to_string(C) + " outside [2, K-1]");
    if (restarts < 1) throw std::invalid_argument("k_medoids: restarts >= 1");

    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        for (Eigen::Index c = 0; c < features.cols(); ++c) {
            if (features(a, c) < features(b, c)) return true;
            if (features(b, c) < features(a, c)) return false;
        }
        return false;
    });
    Matrix canon(K, features.cols());
    for (int i = 0; i < K; ++i) canon.row(i) = features.row(order[static_cast<std::size_t>(i)]);
    const Matrix dist = distance_matrix(canon);

    std::vector<int> best_medoids;
    std::vector<double> best_trace;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        detail::PamState pam(dist, detail::seed_medoids(dist, C, rng));
        std::vector<double> trace{pam.cost()};
        while (pam.improve()) trace.push_back(pam.cost());
        if (pam.cost() < best_cost) {
            best_cost = pam.cost();
            best_medoids = pam.medoids();
            best_trace = std::move(trace);
        }
    }

    std::sort(best_medoids.begin(), best_medoids.end());
    std::vector<int> canon_labels(static_cast<std::size_t>(K), -1);
    for (int c = 0; c < C; ++c) canon_labels[static_cast<std::size_t>(best_medoids[static_cast<std::size_t>(c)])] = c;
    for (int j = 0; j < K; ++j) {
        auto& label = canon_labels[static_cast<std::size_t>(j)];
        if (label >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            const double d = dist(j, best_medoids[static_cast<std::size_t>(c)]);
            if (d < best) {
                best = d;
                label = c;
            }
        }
    }

    ClusterAssignment out;
    out.C = C;
    out.labels.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) out.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = canon_labels[static_cast<std::size_t>(i)];
    for (int m : best_medoids) out.medoids.push_back(order[static_cast<std::size_t>(m)]);
    out.total_cost = best_cost;
    out.cost_trace = std::move(best_trace);
    return out;
}

/// Throws std::invalid_argument unless `a` is a well-formed labelling of K points.
inline void validate_assignment(const ClusterAssignment& a, int K) {
    if (static_cast<int>(a.labels.size()) != K) throw std::invalid_argument("cluster labels: wrong length");
    if (a.C < 1) throw std::invalid_argument("cluster count must be >= 1");
    std::vector<int> count(static_cast<std::size_t>(a.C), 0);
    for (int l : a.labels) {
        if (l < 0 || l >= a.C) throw std::invalid_argument("cluster label out of range");
        ++count[static_cast<std::size_t>(l)];
    }
    for (int c : count)
        if (c == 0) throw std::invalid_argument("empty cluster");
}

/**
 * Silhouette s(i) = (b - a) / max(a, b): a is the mean distance to the rest
 * of i's cluster, b the smallest mean distance to another cluster. Points in
 * singleton clusters, and points with a = b = 0, score 0.
 */
inline SilhouetteReport silhouette(const Matrix& features, const ClusterAssignment& assignment) {
    const int K = static_cast<int>(features.rows());
    validate_assignment(assignment, K);
    const Matrix dist = distance_matrix(features);
    const auto sizes = assignment.sizes();
    const int C = assignment.C;

    SilhouetteReport report;
    report.per_point.assign(static_cast<std::size_t>(K), 0.0);
    std::vector<double> sums(static_cast<std::size_t>(C));
    for (int i = 0; i < K; ++i) {
        const int own = assignment.labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] <= 1 || C < 2) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < K; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(assignment.labels[static_cast<std::size_t>(j)])] += dist(i, j);
        }
        const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            if (c == own) continue;
            b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
        }
        const double denom = std::max(a, b);
        report.per_point[static_cast<std::size_t>(i)] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    double total = 0.0;
    for (double s : report.per_point) total += s;
    report.mean = total / K;
    return report;
}

struct ClusterCountSelection {
    int C = 0;
    ClusterAssignment assignment;
    std::vector<double> mean_silhouette;  ///< index i holds the score for C = i + 2
};

/**
 * Scans C = 2 .. min(K - 1, max_clusters), clustering each with k_medoids and
 * keeping the highest mean silhouette; ties go to the smaller C. Each
 * candidate gets its own derived stream, so candidates are independent of
 * evaluation order.
 */
inline ClusterCountSelection select_cluster_count(const Matrix& features, Rng& rng, int max_clusters = 10) {
    const int K = static_cast<int>(features.rows());
    if (K < 3) throw std::invalid_argument("select_cluster_count: need at least 3 points");
    const int upper = std::min(K - 1, max_clusters);
    const std::uint64_t base = rng.next_u64();

    ClusterCountSelection best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int C = 2; C <= upper; ++C) {
        Rng candidate_rng(derive_seed({base, static_cast<std::uint64_t>(C)}));
        auto assignment = k_medoids(features, C, candidate_rng);
        const double score = silhouette(features, assignment).mean;
        best.mean_silhouette.push_back(score);
        if (score > best_score) {
            best_score = score;
            best.C = C;
            best.assignment = std::move(assignment);
        }
    }
    return best;
}

inline void write_assignment_csv(std::ostream& out, const ClusterAssignment& a) {
    out << "device_index,cluster_label\n";
    for (std::size_t k = 0; k < a.labels.size(); ++k) out << k << ',' << a.labels[k] << '\n';
}

}  // namespace greenai
