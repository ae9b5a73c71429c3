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
#include <optional>
#include <span>
#include <vector>

#include "qec/cluster.hpp"
#include "qec/corpus.hpp"
#include "qec/iskr.hpp"
#include "qec/metrics.hpp"

namespace qec::baselines {

struct WordScore {
    KeywordId keyword = 0;
    double score = 0.0;
};

/// F parts of uq + expansion, evaluated inside c | others.
[[nodiscard]] inline FParts query_parts(ResultUniverse const& u, ResultSet const& c, ResultSet const& others,
                                        std::span<KeywordId const> expansion) {
    auto retrieved = evaluate_query(u.query(), u) & u.retrieve(expansion) & (c | others);
    return f_parts(retrieved, c, u);
}

/**
 * Single-keyword refinement driven by the change in F-measure: every round
 * re-scores every possible addition and removal and applies the one with
 * the largest strictly positive gain.
 */
[[nodiscard]] inline Query refine_fmeasure(ResultUniverse const& u, ResultSet const& c, ResultSet const& others,
                                           std::span<KeywordId const> pool_in, std::size_t max_moves = 0) {
    if (c.empty()) {
        throw Error("cluster is empty");
    }
    auto const pool = iskr::clean_pool(u, pool_in);
    std::vector<KeywordId> expansion;
    auto current = query_parts(u, c, others, expansion);
    auto const cap = max_moves != 0 ? max_moves : 4 * pool.size();
    for (std::size_t moves = 0; moves < cap; ++moves) {
        std::optional<std::vector<KeywordId>> best;
        FParts best_parts;
        for (auto k : pool) {
            auto next = expansion;
            if (auto it = std::find(next.begin(), next.end(), k); it != next.end()) {
                next.erase(it);
            } else {
                next.insert(std::lower_bound(next.begin(), next.end(), k), k);
            }
            auto parts = query_parts(u, c, others, next);
            if (!best || parts.better_than(best_parts)) {
                best = std::move(next);
                best_parts = parts;
            }
        }
        if (!best || !best_parts.better_than(current)) {
            break;
        }
        expansion = std::move(*best);
        current = best_parts;
    }
    return iskr::to_query(u, expansion);
}

/// Importance of every non-query word: sum over results r containing w of
/// rank(r) * tf(w, r) * ln(N / df(w)). Sorted by score desc, then keyword.
[[nodiscard]] inline std::vector<WordScore> data_clouds_scores(ResultUniverse const& u) {
    std::vector<double> score(u.vocabulary().size(), 0.0);
    auto const n = static_cast<double>(u.size());
    for (ResultIndex r = 0; r < u.size(); ++r) {
        for (auto [k, tf] : u.terms(r)) {
            auto df = static_cast<double>(u.postings(k).count());
            score[k] += u.score(r) * tf * std::log(n / df);
        }
    }
    std::vector<WordScore> out;
    for (KeywordId k = 0; k < score.size(); ++k) {
        if (!u.in_query(k)) {
            out.push_back({k, score[k]});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](auto const& a, auto const& b) { return a.score > b.score; });
    return out;
}

/// One query uq + {w} for each of the m most important words.
[[nodiscard]] inline std::vector<Query> data_clouds(ResultUniverse const& u, std::size_t m) {
    if (m == 0) {
        throw Error("data clouds needs m >= 1");
    }
    std::vector<Query> out;
    for (auto const& w : data_clouds_scores(u)) {
        if (out.size() == m) {
            break;
        }
        std::vector<KeywordId> one{w.keyword};
        out.push_back(iskr::to_query(u, one));
    }
    return out;
}

/// tf(w, cluster) * ln(k / cf(w)) for the words of one cluster, sorted by
/// score desc, then keyword.
[[nodiscard]] inline std::vector<WordScore> tficf_scores(ClusterPartition const& p, std::size_t which,
                                                         ResultUniverse const& u) {
    auto const nk = u.vocabulary().size();
    std::vector<std::vector<double>> tf(p.size(), std::vector<double>(nk, 0.0));
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.clusters[i].for_each([&](ResultIndex r) {
            for (auto [k, n] : u.terms(r)) {
                tf[i][k] += n;
            }
        });
    }
    std::vector<WordScore> out;
    for (KeywordId k = 0; k < nk; ++k) {
        if (u.in_query(k) || tf.at(which)[k] <= 0.0) {
            continue;
        }
        auto cf = std::count_if(tf.begin(), tf.end(), [&](auto const& row) { return row[k] > 0.0; });
        out.push_back({k, tf[which][k] * std::log(static_cast<double>(p.size()) / static_cast<double>(cf))});
    }
    std::stable_sort(out.begin(), out.end(), [](auto const& a, auto const& b) { return a.score > b.score; });
    return out;
}

/// Cluster labels as queries: uq plus the top m positive-scoring words of each cluster.
[[nodiscard]] inline std::vector<Query> cs_labels(ClusterPartition const& p, ResultUniverse const& u,
                                                  std::size_t m = 3) {
    if (m == 0) {
        throw Error("label length must be >= 1");
    }
    std::vector<Query> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto scores = tficf_scores(p, i, u);
        std::vector<KeywordId> words;
        // Zero-score words (present in every cluster) say nothing about this one.
        for (std::size_t j = 0; j < std::min(m, scores.size()) && scores[j].score > 0.0; ++j) {
            words.push_back(scores[j].keyword);
        }
        out.push_back(iskr::to_query(u, words));
    }
    return out;
}

}  // namespace qec::baselines
