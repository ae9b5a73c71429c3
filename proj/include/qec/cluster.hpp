// Copyright 2026 The qec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/corpus.hpp"

namespace qec {

/// Sparse term-frequency vector, sorted by keyword id.
using ResultVector = std::vector<std::pair<KeywordId, double>>;

[[nodiscard]] inline ResultVector result_vector(ResultUniverse const& u, ResultIndex r) {
    ResultVector v;
    for (auto [k, n] : u.terms(r)) {
        v.emplace_back(k, static_cast<double>(n));
    }
    return v;
}

[[nodiscard]] inline double norm(ResultVector const& v) {
    double s = 0.0;
    for (auto const& [k, x] : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

[[nodiscard]] inline double dot(ResultVector const& a, ResultVector const& b) {
    double s = 0.0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            s += i->second * j->second;
            ++i;
            ++j;
        }
    }
    return s;
}

[[nodiscard]] inline double cosine(ResultVector const& a, ResultVector const& b) {
    auto na = norm(a);
    auto nb = norm(b);
    if (na <= 0.0 || nb <= 0.0) {
        throw Error("cosine of a zero-norm vector");
    }
    return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

/// Disjoint nonempty clusters covering a universe.
struct ClusterPartition {
    std::vector<ResultSet> clusters;

    [[nodiscard]] std::size_t size() const noexcept { return clusters.size(); }

    /// Throws unless the clusters are nonempty, disjoint and cover u.
    void validate(ResultUniverse const& u) const {
        if (clusters.empty()) {
            throw Error("partition has no clusters");
        }
        auto seen = u.none();
        for (auto const& c : clusters) {
            if (c.width() != u.size()) {
                throw Error("partition does not match the universe");
            }
            if (c.empty()) {
                throw Error("partition has an empty cluster");
            }
            if (c.intersects(seen)) {
                throw Error("partition clusters overlap");
            }
            seen |= c;
        }
        if (seen != u.all()) {
            throw Error("partition does not cover the universe");
        }
    }
};

[[nodiscard]] inline nlohmann::json partition_to_json(ClusterPartition const& p, ResultUniverse const& u) {
    nlohmann::json clusters = nlohmann::json::array();
    for (auto const& c : p.clusters) {
        clusters.push_back(u.ids_of(c));
    }
    return {{"clusters", clusters}};
}

[[nodiscard]] inline ClusterPartition partition_from_json(nlohmann::json const& j, ResultUniverse const& u) {
    if (!j.contains("clusters") || !j["clusters"].is_array()) {
        throw Error("partition needs array field \"clusters\"");
    }
    ClusterPartition p;
    for (auto const& c : j["clusters"]) {
        p.clusters.push_back(u.set_of(c.get<std::vector<std::string>>()));
    }
    p.validate(u);
    return p;
}

[[nodiscard]] inline ClusterPartition load_partition(std::string const& path, ResultUniverse const& u) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read partition file " + path);
    }
    try {
        return partition_from_json(nlohmann::json::parse(in), u);
    } catch (nlohmann::json::exception const& e) {
        throw Error("malformed partition file " + path + ": " + e.what());
    }
}

struct KMeansOptions {
    std::size_t max_iterations = 100;
    std::size_t restarts = 10;  ///< independent seedings; the lowest final objective wins
};

namespace detail {

/// Unit-normalized copy of a sparse vector.
inline ResultVector normalized(ResultVector v) {
    auto n = norm(v);
    if (n <= 0.0) {
        throw Error("cannot cluster a result with no terms");
    }
    for (auto& [k, x] : v) {
        x /= n;
    }
    return v;
}

inline double dot_dense(ResultVector const& v, std::vector<double> const& dense) {
    double s = 0.0;
    for (auto const& [k, x] : v) {
        s += x * dense[k];
    }
    return s;
}

inline double norm_dense(std::vector<double> const& dense) {
    double s = 0.0;
    for (double x : dense) {
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace detail

namespace detail {

/// One seeded Lloyd run. Returns the assignment; appends the objective trace.
inline std::vector<std::size_t> lloyd(std::vector<ResultVector> const& points, std::size_t dim, std::size_t k,
                                      std::uint64_t seed, std::size_t max_iterations,
                                      std::vector<double>& objective) {
    auto const n = points.size();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> seeds{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
    std::vector<double> nearest(n, 1.0);
    std::vector<bool> chosen(n, false);
    chosen[seeds[0]] = true;
    while (seeds.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], 1.0 - std::clamp(dot(points[i], points[seeds.back()]), 0.0, 1.0));
            if (!chosen[i]) {
                total += nearest[i];
            }
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || nearest[i] <= 0.0) {
                    continue;
                }
                pick = i;
                target -= nearest[i];
                if (target < 0.0) {
                    break;
                }
            }
        } else {
            // Every remaining point duplicates a seed; take the first unused one.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        chosen[pick] = true;
        seeds.push_back(pick);
    }

    std::vector<std::vector<double>> centroids(k, std::vector<double>(dim, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        for (auto const& [key, x] : points[seeds[c]]) {
            centroids[c][key] = x;
        }
    }
    std::vector<double> centroid_norm(k, 1.0);

    auto distance = [&](std::size_t i, std::size_t c) {
        if (centroid_norm[c] <= 0.0) {
            return 1.0;
        }
        return 1.0 - std::clamp(dot_dense(points[i], centroids[c]) / centroid_norm[c], 0.0, 1.0);
    };

    std::vector<std::size_t> assign(n, k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = distance(i, 0);
            for (std::size_t c = 1; c < k; ++c) {
                if (auto d = distance(i, c); d < best_d) {
                    best = c;
                    best_d = d;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }

        std::vector<std::size_t> sizes(k, 0);
        for (auto c : assign) {
            ++sizes[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) {
                continue;
            }
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[assign[i]] > 1) {
                    if (auto d = distance(i, assign[i]); d > far_d) {
                        far = i;
                        far_d = d;
                    }
                }
            }
            --sizes[assign[far]];
            assign[far] = c;
            sizes[c] = 1;
            changed = true;
        }

        for (auto& centroid : centroids) {
            std::fill(centroid.begin(), centroid.end(), 0.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (auto const& [key, x] : points[i]) {
                centroids[assign[i]][key] += x / static_cast<double>(sizes[assign[i]]);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            centroid_norm[c] = norm_dense(centroids[c]);
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += distance(i, assign[i]);
        }
        objective.push_back(total / static_cast<double>(n));
        if (!changed) {
            break;
        }
    }

    return assign;
}

}  // namespace detail

/**
 * Lloyd's k-means with cosine distance over term-frequency vectors.
 *
 * Seeding picks k distinct results, the first uniformly and each next one
 * with probability proportional to its cosine distance from the nearest
 * chosen seed. A cluster left empty by an assignment step takes the point
 * farthest from its own centroid. Stops when assignments are stable or at
 * options.max_iterations. The whole procedure runs options.restarts times
 * from different seedings and keeps the run with the lowest mean cosine
 * distance. If objective is given, it receives that run's mean distance
 * after every centroid update.
 */
[[nodiscard]] inline ClusterPartition kmeans(ResultUniverse const& u, std::size_t k, std::uint64_t seed,
                                             KMeansOptions options = {},
                                             std::vector<double>* objective = nullptr) {
    auto const n = u.size();
    if (k == 0 || k > n) {
        throw Error("k must be between 1 and the number of results");
    }
    if (options.max_iterations == 0) {
        throw Error("k-means needs at least one iteration");
    }
    std::vector<ResultVector> points;
    points.reserve(n);
    for (ResultIndex r = 0; r < n; ++r) {
        points.push_back(detail::normalized(result_vector(u, r)));
    }
    auto const dim = u.vocabulary().size();

    std::vector<std::size_t> best;
    std::vector<double> best_trace;
    for (std::size_t run = 0; run < std::max<std::size_t>(1, options.restarts); ++run) {
        std::vector<double> trace;
        auto assign = detail::lloyd(points, dim, k, seed + run * 0x9e3779b97f4a7c15ULL, options.max_iterations, trace);
        // Strict improvement only, so earlier runs win ties.
        if (best.empty() || (!trace.empty() && trace.back() < best_trace.back())) {
            best = std::move(assign);
            best_trace = std::move(trace);
        }
    }
    if (objective != nullptr) {
        objective->insert(objective->end(), best_trace.begin(), best_trace.end());
    }
    auto const& assign = best;

    ClusterPartition p;
    p.clusters.assign(k, u.none());
    for (std::size_t i = 0; i < n; ++i) {
        p.clusters[assign[i]].set(static_cast<ResultIndex>(i));
    }
    std::sort(p.clusters.begin(), p.clusters.end(),
              [](ResultSet const& a, ResultSet const& b) { return a.members().front() < b.members().front(); });
    return p;
}

}  // namespace qec
