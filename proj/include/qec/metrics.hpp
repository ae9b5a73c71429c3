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
#include <span>

#include "qec/corpus.hpp"

namespace qec {

/// S(set): sum of rank scores of the members.
[[nodiscard]] inline double total_score(ResultSet const& set, ResultUniverse const& u) {
    double s = 0.0;
    set.for_each([&](ResultIndex r) { s += u.score(r); });
    return s;
}

struct QueryEvaluation {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

/**
 * Weighted F-measure parts. With a = S(R & C), r = S(R), c = S(C), the
 * F-measure is 2a / (r + c); keeping the parts lets callers compare two
 * queries by cross-multiplication, which is exact for integral weights.
 */
struct FParts {
    double hit = 0.0;        ///< S(R(q) & C)
    double retrieved = 0.0;  ///< S(R(q))
    double cluster = 0.0;    ///< S(C)

    [[nodiscard]] double f() const noexcept {
        return hit > 0.0 ? 2.0 * hit / (retrieved + cluster) : 0.0;
    }
    /// Exact strict comparison for integral weights.
    [[nodiscard]] bool better_than(FParts const& o) const noexcept {
        return hit * (o.retrieved + o.cluster) > o.hit * (retrieved + cluster);
    }
    [[nodiscard]] bool same_as(FParts const& o) const noexcept {
        return hit * (o.retrieved + o.cluster) == o.hit * (retrieved + cluster);
    }
};

[[nodiscard]] inline FParts f_parts(ResultSet const& retrieved, ResultSet const& cluster,
                                    ResultUniverse const& u) {
    return {total_score(retrieved & cluster, u), total_score(retrieved, u), total_score(cluster, u)};
}

/// Precision, recall and F of a result set against cluster C. An empty (or
/// zero-weight) result set scores 0 on all three.
[[nodiscard]] inline QueryEvaluation evaluate(ResultSet const& retrieved, ResultSet const& cluster,
                                              ResultUniverse const& u) {
    if (cluster.empty()) {
        throw Error("cannot evaluate against an empty cluster");
    }
    auto parts = f_parts(retrieved, cluster, u);
    if (parts.retrieved <= 0.0 || parts.cluster <= 0.0) {
        return {};
    }
    return {parts.hit / parts.retrieved, parts.hit / parts.cluster, parts.f()};
}

/// Harmonic mean of the per-cluster F-measures; 0 when any of them is 0.
[[nodiscard]] inline double collective_score(std::span<double const> fs) {
    if (fs.empty()) {
        throw Error("collective score of no queries");
    }
    if (std::all_of(fs.begin(), fs.end(), [&](double f) { return f == fs.front(); })) {
        return std::max(fs.front(), 0.0);
    }
    double inv = 0.0;
    for (double f : fs) {
        if (f <= 0.0) {
            return 0.0;
        }
        inv += 1.0 / f;
    }
    return static_cast<double>(fs.size()) / inv;
}

}  // namespace qec
