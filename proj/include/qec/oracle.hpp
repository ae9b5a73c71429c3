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
#include <cstddef>
#include <span>
#include <vector>

#include "qec/corpus.hpp"
#include "qec/iskr.hpp"
#include "qec/metrics.hpp"

namespace qec::oracle {

inline constexpr std::size_t max_pool = 20;

struct OracleResult {
    Query best_query;
    std::vector<KeywordId> expansion;
    FParts parts;
    double best_f = 0.0;
    std::size_t evaluated_count = 0;
};

/**
 * Exhaustive search over every expansion of at most max_len pool keywords.
 * Subsets are visited by size, then in keyword order, and only strict
 * improvements replace the incumbent, so ties go to fewer keywords and then
 * to the lexicographically smaller keyword list.
 */
[[nodiscard]] inline OracleResult brute_force_best(ResultUniverse const& u, ResultSet const& c,
                                                   ResultSet const& others, std::span<KeywordId const> pool_in,
                                                   std::size_t max_len = 4) {
    if (c.empty()) {
        throw Error("cluster is empty");
    }
    auto const pool = iskr::clean_pool(u, pool_in);
    if (pool.size() > max_pool) {
        throw Error("oracle pool too large: " + std::to_string(pool.size()) + " keywords (max " +
                    std::to_string(max_pool) + ")");
    }
    max_len = std::min(max_len, pool.size());

    auto const base = evaluate_query(u.query(), u) & (c | others);
    OracleResult best;
    bool have = false;
    std::vector<KeywordId> chosen;

    auto visit = [&](ResultSet const& retrieved) {
        auto parts = f_parts(retrieved, c, u);
        ++best.evaluated_count;
        if (!have || parts.better_than(best.parts)) {
            best.parts = parts;
            best.expansion = chosen;
            have = true;
        }
    };
    // Lexicographic combinations of the given size, carrying the retrieved set.
    auto combos = [&](auto&& self, std::size_t from, std::size_t left, ResultSet const& retrieved) -> void {
        if (left == 0) {
            visit(retrieved);
            return;
        }
        for (std::size_t i = from; i + left <= pool.size(); ++i) {
            chosen.push_back(pool[i]);
            self(self, i + 1, left - 1, retrieved & u.postings(pool[i]));
            chosen.pop_back();
        }
    };
    for (std::size_t size = 0; size <= max_len; ++size) {
        combos(combos, 0, size, base);
    }
    best.best_f = best.parts.f();
    best.best_query = iskr::to_query(u, best.expansion);
    return best;
}

}  // namespace qec::oracle
