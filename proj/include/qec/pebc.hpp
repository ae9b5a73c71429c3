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

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/corpus.hpp"
#include "qec/iskr.hpp"
#include "qec/metrics.hpp"

/**
 * Partial elimination based convergence.
 *
 * A sample query for percentage x keeps as much of C as it can while
 * eliminating about x% of U. Samples are taken on a grid over [0, 100]; the
 * adjacent pair with the best mean F-measure becomes the next interval.
 */
namespace qec::pebc {

/// Whether x% refers to the rank-score weight of U or to its result count.
enum class TargetMetric { weighted, count };

/// Chooses one result among the candidates (ascending indices).
using ResultPicker = std::function<ResultIndex(std::span<ResultIndex const>)>;

/// One keyword choice made by partial_eliminate.
struct Selection {
    ResultIndex picked = 0;
    KeywordId keyword = 0;
    double benefit = 0.0;
    double cost = 0.0;
};

struct Elimination {
    std::vector<KeywordId> expansion;  ///< in selection order
    ResultSet eliminated_u;
    double achieved_percent = 0.0;
};

namespace detail {

inline double weight(ResultSet const& s, ResultUniverse const& u, TargetMetric m) {
    return m == TargetMetric::count ? static_cast<double>(s.count()) : total_score(s, u);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Uniform picker over a seeded stream.
[[nodiscard]] inline ResultPicker uniform_picker(std::uint64_t stream_seed) {
    auto rng = std::make_shared<std::mt19937_64>(stream_seed);
    return [rng](std::span<ResultIndex const> candidates) {
        return candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(*rng)];
    };
}

/// Stream seed for the sample at x in the given iteration.
[[nodiscard]] inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t iteration, double x) {
    auto h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(iteration));
    return detail::splitmix64(h ^ std::bit_cast<std::uint64_t>(x));
}

/**
 * Builds a query eliminating as close to x% of U as the randomized
 * single-result procedure gets.
 *
 * Each round picks an un-eliminated result of U and adds the pool keyword
 * missing from it with the best benefit/cost against what is still retrieved
 * (ties: fewer U results eliminated, then keyword order). Once the target is
 * met the last keyword is dropped unless keeping it lands strictly closer.
 * Results no candidate keyword can eliminate are skipped.
 */
[[nodiscard]] inline Elimination partial_eliminate(ResultUniverse const& u, ResultSet const& c,
                                                   ResultSet const& others, std::span<KeywordId const> pool_in,
                                                   double x, TargetMetric metric, ResultPicker const& pick,
                                                   std::vector<Selection>* steps = nullptr) {
    if (!(x >= 0.0 && x <= 100.0)) {
        throw Error("elimination percentage must be in [0, 100]");
    }
    auto const pool = iskr::clean_pool(u, pool_in);
    auto [cur_c, cur_u] = iskr::retrieve_in(u, {}, c, others);
    auto const start_u = cur_u;
    auto const total = detail::weight(others, u, metric);
    auto const target = x / 100.0 * total;
    auto eliminated = total - detail::weight(cur_u, u, metric);
    // Absorbs rounding in x / 100 * total, e.g. 70% of 10.
    auto const reached = [&](double w) { return w >= target - 1e-9 * std::max(1.0, total); };

    Elimination out;
    std::vector<bool> used(u.vocabulary().size(), false);
    auto stuck = u.none();
    while (!reached(eliminated)) {
        auto const open = cur_u - stuck;
        if (open.empty()) {
            break;
        }
        auto const candidates = open.members();
        auto const r = pick(candidates);
        if (!open.test(r)) {
            throw Error("picker returned a result that is not a candidate");
        }

        std::optional<Selection> best;
        std::size_t best_count = 0;
        for (auto k : pool) {
            if (used[k] || u.postings(k).test(r)) {
                continue;
            }
            auto const gone_u = cur_u - u.postings(k);
            Selection cand{r, k, detail::weight(gone_u, u, metric), detail::weight(cur_c - u.postings(k), u, metric)};
            auto const n = gone_u.count();
            if (!best) {
                best = cand;
                best_count = n;
                continue;
            }
            int v = iskr::compare_value(cand.benefit, cand.cost, best->benefit, best->cost);
            if (v > 0 || (v == 0 && n < best_count)) {
                best = cand;
                best_count = n;
            }
        }
        if (!best) {
            stuck.set(r);
            continue;
        }

        auto const before = eliminated;
        used[best->keyword] = true;
        out.expansion.push_back(best->keyword);
        cur_u -= u.elimination(best->keyword);
        cur_c -= u.elimination(best->keyword);
        eliminated = total - detail::weight(cur_u, u, metric);
        if (steps != nullptr) {
            steps->push_back(*best);
        }
        if (reached(eliminated)) {
            // Equidistant: drop, keeping more of C.
            if (std::abs(before - target) <= std::abs(eliminated - target)) {
                out.expansion.pop_back();
                cur_u = iskr::retrieve_in(u, out.expansion, c, others).second;
                eliminated = before;
            }
            break;
        }
    }
    out.eliminated_u = start_u - cur_u;
    out.achieved_percent = total > 0.0 ? 100.0 * eliminated / total : 0.0;
    return out;
}

struct SamplePoint {
    double x = 0.0;
    std::size_t iteration = 0;  ///< iteration that first evaluated this x
    std::vector<KeywordId> expansion;
    FParts parts;

    [[nodiscard]] double f() const { return parts.f(); }
};

/// Adjacent pair with the highest mean F; ties go to the leftmost pair.
[[nodiscard]] inline std::pair<double, double> pick_zoom_interval(std::span<SamplePoint const> samples) {
    if (samples.size() < 2) {
        throw Error("zooming needs at least two samples");
    }
    std::size_t best = 0;
    double best_sum = -1.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (!(samples[i].x < samples[i + 1].x)) {
            throw Error("sample percentages must be strictly increasing");
        }
        if (auto sum = samples[i].f() + samples[i + 1].f(); sum > best_sum) {
            best = i;
            best_sum = sum;
        }
    }
    return {samples[best].x, samples[best + 1].x};
}

struct ConvergeConfig {
    std::size_t nseg = 2;
    std::size_t nit = 3;
    std::uint64_t seed = 0;
    TargetMetric target_metric = TargetMetric::weighted;
};

/// One (iteration, x) evaluation, for traces.
struct TraceEntry {
    std::size_t iteration = 0;
    SamplePoint sample;
};

struct ConvergeResult {
    Query query;
    SamplePoint best;
    std::vector<TraceEntry> trace;
    std::map<double, SamplePoint> samples;  ///< every x ever evaluated
};

[[nodiscard]] inline ConvergeResult converge_detailed(ResultUniverse const& u, ResultSet const& c,
                                                      ResultSet const& others, std::span<KeywordId const> pool,
                                                      ConvergeConfig const& config = {}) {
    if (c.empty()) {
        throw Error("cluster is empty");
    }
    if (config.nseg == 0 || config.nit == 0) {
        throw Error("nseg and nit must be positive");
    }
    ConvergeResult out;
    auto const scope = c | others;
    auto sample_at = [&](double x, std::size_t iteration) -> SamplePoint const& {
        if (auto it = out.samples.find(x); it != out.samples.end()) {
            return it->second;
        }
        auto picker = uniform_picker(sample_seed(config.seed, iteration, x));
        auto elim = partial_eliminate(u, c, others, pool, x, config.target_metric, picker);
        SamplePoint s{x, iteration, std::move(elim.expansion), {}};
        std::sort(s.expansion.begin(), s.expansion.end());
        auto retrieved = evaluate_query(u.query(), u) & u.retrieve(s.expansion) & scope;
        s.parts = f_parts(retrieved, c, u);
        return out.samples.emplace(x, std::move(s)).first->second;
    };

    double left = 0.0;
    double right = 100.0;
    for (std::size_t it = 0; it < config.nit; ++it) {
        double const step = (right - left) / static_cast<double>(config.nseg);
        std::vector<SamplePoint> batch;
        for (std::size_t i = 0; i <= config.nseg; ++i) {
            double const x = i == config.nseg ? right : left + static_cast<double>(i) * step;
            if (!batch.empty() && !(x > batch.back().x)) {
                continue;  // interval narrowed below double resolution
            }
            batch.push_back(sample_at(x, it));
            out.trace.push_back({it, batch.back()});
        }
        if (batch.size() < 2) {
            break;
        }
        std::tie(left, right) = pick_zoom_interval(batch);
    }

    // Samples are keyed by x, so taking only strict improvements keeps the smaller x on ties.
    SamplePoint const* best = nullptr;
    for (auto const& [x, s] : out.samples) {
        if (best == nullptr || s.parts.better_than(best->parts)) {
            best = &s;
        }
    }
    out.best = *best;
    out.query = iskr::to_query(u, best->expansion);
    return out;
}

/// Expanded query for cluster c: the best sample found.
[[nodiscard]] inline Query converge(ResultUniverse const& u, ResultSet const& c, ResultSet const& others,
                                    std::span<KeywordId const> pool, ConvergeConfig const& config = {}) {
    return converge_detailed(u, c, others, pool, config).query;
}

[[nodiscard]] inline nlohmann::json trace_to_json(std::span<TraceEntry const> trace, ResultUniverse const& u) {
    auto out = nlohmann::json::array();
    for (auto const& e : trace) {
        std::vector<std::string> words;
        for (auto const& k : iskr::to_query(u, e.sample.expansion).keywords()) {
            words.push_back(k);
        }
        out.push_back({{"iteration", e.iteration}, {"x", e.sample.x}, {"query", words}, {"f", e.sample.f()}});
    }
    return out;
}

}  // namespace qec::pebc
