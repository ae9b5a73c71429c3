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
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/corpus.hpp"
#include "qec/metrics.hpp"

/**
 * Iterative single-keyword refinement.
 *
 * Starting from the user query, repeatedly apply the single keyword addition
 * or removal with the highest benefit/cost ratio until no move has a ratio
 * above 1. For an addition, benefit is the score of retrieved results the
 * keyword drops from U and cost the score it drops from C. For a removal,
 * benefit is the score regained in C and cost the score regained in U.
 *
 * After a move with delta results D, an addition entry changes only if its
 * keyword is missing from some result of D, so only those entries are
 * recomputed. Removal entries depend on the other query keywords and are
 * recomputed after every move.
 */
namespace qec::iskr {

enum class Direction { add, remove };

[[nodiscard]] inline char const* to_string(Direction d) { return d == Direction::add ? "add" : "remove"; }

/// benefit / cost, +inf for a free positive move, 0 when both are 0.
[[nodiscard]] inline double value(double benefit, double cost) {
    if (cost > 0.0) {
        return benefit / cost;
    }
    return benefit > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

/// Three-way comparison of benefit/cost ratios without dividing.
[[nodiscard]] inline int compare_value(double b1, double c1, double b2, double c2) {
    bool const inf1 = c1 <= 0.0 && b1 > 0.0;
    bool const inf2 = c2 <= 0.0 && b2 > 0.0;
    if (inf1 || inf2) {
        return static_cast<int>(inf1) - static_cast<int>(inf2);
    }
    // Finite: a zero cost here means benefit 0 too, i.e. value 0 == 0 / 1.
    double const lhs = b1 * (c2 > 0.0 ? c2 : 1.0);
    double const rhs = b2 * (c1 > 0.0 ? c1 : 1.0);
    return (lhs > rhs) - (lhs < rhs);
}

struct KeywordEntry {
    KeywordId keyword = 0;
    double benefit = 0.0;
    double cost = 0.0;
    Direction direction = Direction::add;

    [[nodiscard]] double value() const { return iskr::value(benefit, cost); }
    /// value > 1, without rounding.
    [[nodiscard]] bool improves() const { return benefit > cost; }

    friend bool operator==(KeywordEntry const&, KeywordEntry const&) = default;
};

/// Strict weak order putting the best entry first: value desc, benefit desc,
/// cost asc, keyword asc.
struct EntryOrder {
    bool operator()(KeywordEntry const& a, KeywordEntry const& b) const {
        if (int v = compare_value(a.benefit, a.cost, b.benefit, b.cost); v != 0) {
            return v > 0;
        }
        if (a.benefit != b.benefit) {
            return a.benefit > b.benefit;
        }
        if (a.cost != b.cost) {
            return a.cost < b.cost;
        }
        return a.keyword < b.keyword;
    }
};

/// Priority structure over keyword entries, one entry per keyword.
class CandidateTable {
  public:
    explicit CandidateTable(std::size_t vocabulary_size) : slots_(vocabulary_size) {}

    void put(KeywordEntry const& e) {
        erase(e.keyword);
        slots_.at(e.keyword) = order_.insert(e).first;
    }
    void erase(KeywordId k) {
        if (auto& slot = slots_.at(k)) {
            order_.erase(*slot);
            slot.reset();
        }
    }
    [[nodiscard]] bool empty() const noexcept { return order_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }
    [[nodiscard]] KeywordEntry const& top() const { return *order_.begin(); }
    [[nodiscard]] std::optional<KeywordEntry> find(KeywordId k) const {
        if (auto const& slot = slots_.at(k)) {
            return **slot;
        }
        return std::nullopt;
    }
    /// Entries in priority order.
    [[nodiscard]] std::vector<KeywordEntry> entries() const { return {order_.begin(), order_.end()}; }

  private:
    using Order = std::set<KeywordEntry, EntryOrder>;
    Order order_;
    std::vector<std::optional<Order::iterator>> slots_;
};

/// The current query and what it retrieves inside C and U.
struct RefineState {
    std::vector<bool> in_query;  ///< indexed by keyword id; expansion keywords only
    std::vector<KeywordId> expansion;
    ResultSet retained_c;
    ResultSet retained_u;

    [[nodiscard]] ResultSet retained() const { return retained_c | retained_u; }
};

/// R(uq + expansion) restricted to C and U, computed from scratch.
[[nodiscard]] inline std::pair<ResultSet, ResultSet> retrieve_in(ResultUniverse const& u,
                                                                 std::span<KeywordId const> expansion,
                                                                 ResultSet const& c, ResultSet const& cu) {
    auto r = evaluate_query(u.query(), u);
    r &= u.retrieve(expansion);
    return {r & c, r & cu};
}

[[nodiscard]] inline RefineState initial_state(ResultUniverse const& u, ResultSet const& c, ResultSet const& others) {
    RefineState s;
    s.in_query.assign(u.vocabulary().size(), false);
    std::tie(s.retained_c, s.retained_u) = retrieve_in(u, {}, c, others);
    return s;
}

/**
 * Delta results of a move. Adding k loses retained(q) & E(k); removing k
 * gains R(q \ k) \ R(q), both restricted to C and U.
 */
[[nodiscard]] inline ResultSet delta_results(ResultUniverse const& u, RefineState const& s, KeywordId k,
                                             Direction d, ResultSet const& c, ResultSet const& others) {
    if (d == Direction::add) {
        if (s.in_query.at(k) || u.in_query(k)) {
            throw Error("cannot add keyword \"" + u.keyword(k) + "\" already in the query");
        }
        return s.retained() - u.postings(k);
    }
    if (!s.in_query.at(k)) {
        throw Error("cannot remove keyword \"" + u.keyword(k) + "\" not in the expansion");
    }
    std::vector<KeywordId> rest;
    std::copy_if(s.expansion.begin(), s.expansion.end(), std::back_inserter(rest),
                 [&](KeywordId j) { return j != k; });
    auto [rc, ru] = retrieve_in(u, rest, c, others);
    return (rc | ru) - s.retained();
}

/// (benefit, cost) of a move given its delta results.
[[nodiscard]] inline KeywordEntry entry_from_delta(ResultUniverse const& u, KeywordId k, Direction d,
                                                   ResultSet const& delta, ResultSet const& c,
                                                   ResultSet const& others) {
    auto in_c = total_score(delta & c, u);
    auto in_u = total_score(delta & others, u);
    if (d == Direction::add) {
        return {k, in_u, in_c, d};
    }
    return {k, in_c, in_u, d};
}

[[nodiscard]] inline KeywordEntry benefit_cost(ResultUniverse const& u, RefineState const& s, KeywordId k,
                                               Direction d, ResultSet const& c, ResultSet const& others) {
    return entry_from_delta(u, k, d, delta_results(u, s, k, d, c, others), c, others);
}

/// Pool keywords missing from at least one delta result.
[[nodiscard]] inline std::vector<KeywordId> affected_keywords(ResultSet const& delta,
                                                              std::span<KeywordId const> pool,
                                                              ResultUniverse const& u) {
    std::vector<KeywordId> out;
    if (delta.empty()) {
        return out;
    }
    for (auto k : pool) {
        if (!delta.is_subset_of(u.postings(k))) {
            out.push_back(k);
        }
    }
    return out;
}

/// One applied move, as recorded in a trace.
struct Move {
    KeywordEntry entry;
};

/// Passed to RefineOptions::observer after the initial table is built and
/// after every applied move.
struct RefineSnapshot {
    RefineState const& state;
    CandidateTable const& table;
    std::optional<KeywordEntry> move;  ///< empty for the initial snapshot
    ResultSet const* delta = nullptr;  ///< delta results of move
};

struct RefineOptions {
    /// Hard cap on applied moves; 0 means 4 * |pool|.
    std::size_t max_moves = 0;
    std::vector<Move>* trace = nullptr;
    std::function<void(RefineSnapshot const&)> observer;
};

/// Pool minus user-query keywords and duplicates, in id order.
[[nodiscard]] inline std::vector<KeywordId> clean_pool(ResultUniverse const& u, std::span<KeywordId const> pool) {
    std::vector<KeywordId> out;
    for (auto k : pool) {
        if (!u.in_query(k)) {
            out.push_back(k);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

[[nodiscard]] inline Query to_query(ResultUniverse const& u, std::span<KeywordId const> expansion) {
    Query q = u.query();
    for (auto k : expansion) {
        q.add(u.keyword(k));
    }
    return q;
}

/// Runs the refinement and returns the final state.
[[nodiscard]] inline RefineState refine_state(ResultUniverse const& u, ResultSet const& c, ResultSet const& others,
                                              std::span<KeywordId const> pool_in, RefineOptions const& options = {}) {
    if (c.empty()) {
        throw Error("cluster is empty");
    }
    auto const pool = clean_pool(u, pool_in);
    auto s = initial_state(u, c, others);
    CandidateTable table(u.vocabulary().size());
    for (auto k : pool) {
        table.put(benefit_cost(u, s, k, Direction::add, c, others));
    }
    if (options.observer) {
        options.observer({s, table, std::nullopt, nullptr});
    }

    auto const cap = options.max_moves != 0 ? options.max_moves : 4 * pool.size();
    for (std::size_t moves = 0; moves < cap && !table.empty(); ++moves) {
        auto const best = table.top();
        if (!best.improves()) {
            break;
        }
        auto const k = best.keyword;
        auto const delta = delta_results(u, s, k, best.direction, c, others);
        if (best.direction == Direction::add) {
            s.retained_c -= delta;
            s.retained_u -= delta;
            s.in_query[k] = true;
            s.expansion.insert(std::lower_bound(s.expansion.begin(), s.expansion.end(), k), k);
        } else {
            s.retained_c |= delta & c;
            s.retained_u |= delta & others;
            s.in_query[k] = false;
            s.expansion.erase(std::find(s.expansion.begin(), s.expansion.end(), k));
        }
        if (options.trace != nullptr) {
            options.trace->push_back({best});
        }

        for (auto j : affected_keywords(delta, pool, u)) {
            if (!s.in_query[j] && j != k) {
                table.put(benefit_cost(u, s, j, Direction::add, c, others));
            }
        }
        if (best.direction == Direction::remove) {
            table.put(benefit_cost(u, s, k, Direction::add, c, others));
        }
        for (auto j : s.expansion) {
            table.put(benefit_cost(u, s, j, Direction::remove, c, others));
        }
        if (options.observer) {
            options.observer({s, table, best, &delta});
        }
    }
    return s;
}

/// Expanded query for cluster c against the other results.
[[nodiscard]] inline Query refine(ResultUniverse const& u, ResultSet const& c, ResultSet const& others,
                                  std::span<KeywordId const> pool, RefineOptions const& options = {}) {
    auto s = refine_state(u, c, others, pool, options);
    return to_query(u, s.expansion);
}

[[nodiscard]] inline nlohmann::json trace_to_json(std::span<Move const> trace, ResultUniverse const& u) {
    auto out = nlohmann::json::array();
    for (auto const& m : trace) {
        auto v = m.entry.value();
        out.push_back({{"move", to_string(m.entry.direction)},
                       {"keyword", u.keyword(m.entry.keyword)},
                       {"benefit", m.entry.benefit},
                       {"cost", m.entry.cost},
                       {"value", std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v)}});
    }
    return out;
}

}  // namespace qec::iskr
