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

#include <cmath>
#include <deque>

#include <gtest/gtest.h>

#include "qec/pebc.hpp"
#include "support/plain_instance.hpp"

using namespace qec;

namespace {

Instance elimination_instance() { return load_instance(QEC_DATA_DIR "/elimination_instance.json"); }

/// Picks the named results in order, then falls back to the first candidate.
pebc::ResultPicker scripted(ResultUniverse const& u, std::vector<std::string> names) {
    auto queue = std::make_shared<std::deque<ResultIndex>>();
    for (auto const& n : names) {
        queue->push_back(*u.index_of(n));
    }
    return [queue](std::span<ResultIndex const> candidates) {
        if (queue->empty()) {
            return candidates.front();
        }
        auto r = queue->front();
        queue->pop_front();
        return r;
    };
}

std::vector<std::string> words(ResultUniverse const& u, std::vector<KeywordId> const& ids) {
    std::vector<std::string> out;
    for (auto k : ids) {
        out.push_back(u.keyword(k));
    }
    return out;
}

pebc::SamplePoint sample(double x, std::int64_t hit, std::int64_t retrieved) {
    pebc::SamplePoint s;
    s.x = x;
    s.parts = {static_cast<double>(hit), static_cast<double>(retrieved), 10.0};
    return s;
}

}  // namespace

TEST(PartialEliminate, ZeroPercentKeepsUserQuery) {
    auto inst = elimination_instance();
    auto e = pebc::partial_eliminate(inst.universe, inst.cluster, inst.others, inst.pool, 0.0,
                                     pebc::TargetMetric::weighted, pebc::uniform_picker(1));
    EXPECT_TRUE(e.expansion.empty());
    EXPECT_TRUE(e.eliminated_u.empty());
    EXPECT_EQ(e.achieved_percent, 0.0);
}

TEST(PartialEliminate, EliminationInstanceScriptedPicks) {
    auto inst = elimination_instance();
    auto const& u = inst.universe;
    std::vector<pebc::Selection> steps;
    auto e = pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, 70.0, pebc::TargetMetric::weighted,
                                     scripted(u, {"R5", "R1"}), &steps);
    // R5: k2 and k4 both score 6/6 = 4/4; k4 eliminates fewer of U.
    EXPECT_EQ(words(u, e.expansion), (std::vector<std::string>{"k4", "k1"}));
    EXPECT_EQ(u.ids_of(e.eliminated_u), (std::vector<std::string>{"R1", "R2", "R3", "R4", "R5", "R6", "R7"}));
    EXPECT_DOUBLE_EQ(e.achieved_percent, 70.0);
    ASSERT_EQ(steps.size(), 2U);
    EXPECT_EQ(steps[0].benefit, 4.0);
    EXPECT_EQ(steps[0].cost, 4.0);
    EXPECT_EQ(steps[1].benefit, 3.0);
    EXPECT_EQ(steps[1].cost, 2.0);
}

TEST(PartialEliminate, FullEliminationAndRange) {
    auto inst = elimination_instance();
    auto const& u = inst.universe;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto e = pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, 100.0,
                                         pebc::TargetMetric::weighted, pebc::uniform_picker(seed));
        EXPECT_EQ(e.eliminated_u, inst.others) << "seed " << seed;
        EXPECT_DOUBLE_EQ(e.achieved_percent, 100.0);
    }
    EXPECT_THROW((void)pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, 101.0,
                                               pebc::TargetMetric::weighted, pebc::uniform_picker(0)),
                 Error);
    EXPECT_THROW((void)pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, -1.0,
                                               pebc::TargetMetric::weighted, pebc::uniform_picker(0)),
                 Error);
    auto bad = [&](std::span<ResultIndex const>) { return *u.index_of("c1"); };
    EXPECT_THROW((void)pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, 50.0,
                                               pebc::TargetMetric::weighted, bad),
                 Error);
}

TEST(PartialEliminate, SelectionsMatchScratchProperty) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto plain = reference::random_instance(seed);
        auto inst = parse_instance(plain.to_json());
        auto const& u = inst.universe;
        double x = static_cast<double>(seed % 11) * 10.0;
        std::vector<pebc::Selection> steps;
        auto e = pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, x, pebc::TargetMetric::count,
                                         pebc::uniform_picker(seed), &steps);
        std::set<std::string> chosen;
        for (auto const& s : steps) {
            auto const& kw = u.keyword(s.keyword);
            auto const& picked = u.id(s.picked);
            auto before = plain.retrieve(chosen);
            ASSERT_TRUE(before.contains(picked));
            EXPECT_TRUE(plain.others.contains(picked));
            EXPECT_TRUE(plain.eliminates.at(kw).contains(picked));
            // Recount benefit and cost against what the plain model still retrieves.
            double b = 0, c = 0;
            for (auto const& r : before) {
                if (plain.eliminates.at(kw).contains(r)) {
                    (plain.cluster.contains(r) ? c : b) += 1;
                }
            }
            EXPECT_EQ(s.benefit, b);
            EXPECT_EQ(s.cost, c);
            // No other eligible keyword has a strictly better ratio.
            for (auto const& [other, elim] : plain.eliminates) {
                if (chosen.contains(other) || other == kw || !elim.contains(picked)) {
                    continue;
                }
                double ob = 0, oc = 0;
                for (auto const& r : before) {
                    if (elim.contains(r)) {
                        (plain.cluster.contains(r) ? oc : ob) += 1;
                    }
                }
                EXPECT_LE(iskr::compare_value(ob, oc, b, c), 0) << "seed " << seed;
            }
            chosen.insert(kw);
        }
        // The returned expansion is the selections, possibly minus the last one.
        EXPECT_GE(e.expansion.size() + 1, steps.size());
        EXPECT_LE(e.expansion.size(), steps.size());
        std::set<std::string> final_words;
        for (auto k : e.expansion) {
            final_words.insert(u.keyword(k));
        }
        auto kept = plain.retrieve(final_words);
        std::size_t gone = 0;
        for (auto const& r : plain.others) {
            gone += kept.contains(r) ? 0 : 1;
        }
        EXPECT_EQ(e.eliminated_u.count(), gone);
    }
}

TEST(Zoom, Examples) {
    std::vector<pebc::SamplePoint> five{sample(0, 5, 10), sample(25, 6, 10), sample(50, 4, 10), sample(75, 8, 10),
                                        sample(100, 1, 10)};
    // F values 0.5, 0.6, 0.4, 0.8, 0.1: pair (50, 75) averages 0.6.
    EXPECT_EQ(pebc::pick_zoom_interval(five), (std::pair<double, double>{50, 75}));
    std::vector<pebc::SamplePoint> two{sample(0, 1, 10), sample(100, 9, 10)};
    EXPECT_EQ(pebc::pick_zoom_interval(two), (std::pair<double, double>{0, 100}));
    std::vector<pebc::SamplePoint> tie{sample(0, 5, 10), sample(50, 5, 10), sample(100, 5, 10)};
    EXPECT_EQ(pebc::pick_zoom_interval(tie), (std::pair<double, double>{0, 50}));
    EXPECT_THROW((void)pebc::pick_zoom_interval(std::span<pebc::SamplePoint const>(two.data(), 1)), Error);
    std::vector<pebc::SamplePoint> unordered{sample(50, 1, 10), sample(0, 1, 10)};
    EXPECT_THROW((void)pebc::pick_zoom_interval(unordered), Error);
}

TEST(Converge, EmptyOthersReturnsUserQuery) {
    auto plain = reference::random_instance(4);
    plain.cluster.insert(plain.others.begin(), plain.others.end());
    plain.others.clear();
    auto inst = parse_instance(plain.to_json({"uq"}));
    auto r = pebc::converge_detailed(inst.universe, inst.cluster, inst.others, inst.pool);
    EXPECT_EQ(r.query, inst.universe.query());
    EXPECT_EQ(r.best.f(), 1.0);
}

TEST(Converge, GridAndTrace) {
    auto inst = elimination_instance();
    pebc::ConvergeConfig cfg;
    cfg.nseg = 4;
    cfg.nit = 2;
    auto r = pebc::converge_detailed(inst.universe, inst.cluster, inst.others, inst.pool, cfg);
    ASSERT_EQ(r.trace.size(), 10U);
    for (std::size_t i = 0; i <= 4; ++i) {
        EXPECT_EQ(r.trace[i].sample.x, 25.0 * static_cast<double>(i));
        EXPECT_EQ(r.trace[i].iteration, 0U);
    }
    auto width = r.trace[9].sample.x - r.trace[5].sample.x;
    EXPECT_DOUBLE_EQ(width, 25.0);
    for (auto const& [x, s] : r.samples) {
        EXPECT_LE(s.f(), r.best.f());
    }
    auto json = pebc::trace_to_json(r.trace, inst.universe);
    EXPECT_EQ(json.size(), 10U);
    EXPECT_THROW((void)pebc::converge(inst.universe, inst.cluster, inst.others, inst.pool, {0, 3, 0, {}}), Error);
}

TEST(Converge, DeterministicAndNoWorseThanUserQueryProperty) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto plain = reference::random_instance(seed);
        auto inst = parse_instance(plain.to_json());
        auto const& u = inst.universe;
        pebc::ConvergeConfig cfg;
        cfg.seed = seed;
        auto a = pebc::converge_detailed(u, inst.cluster, inst.others, inst.pool, cfg);
        auto b = pebc::converge_detailed(u, inst.cluster, inst.others, inst.pool, cfg);
        EXPECT_EQ(a.query, b.query);
        // x = 0 is always sampled and yields the user query.
        EXPECT_GE(a.best.f(), plain.f({}).value() - 1e-12);
        std::set<std::string> expansion(a.query.expansion.begin(), a.query.expansion.end());
        EXPECT_DOUBLE_EQ(a.best.f(), plain.f(expansion).value());
    }
}

TEST(PartialEliminate, KeepDropRuleProperty) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto inst = parse_instance(reference::random_instance(seed).to_json());
        auto const& u = inst.universe;
        double x = 5.0 + static_cast<double>(seed % 19) * 5.0;
        std::vector<pebc::Selection> steps;
        auto e = pebc::partial_eliminate(u, inst.cluster, inst.others, inst.pool, x, pebc::TargetMetric::count,
                                         pebc::uniform_picker(seed), &steps);
        double const total = static_cast<double>(inst.others.count());
        double const target = x / 100.0 * total;
        auto gone = [&](std::size_t n) {
            std::vector<KeywordId> ids;
            for (std::size_t i = 0; i < n; ++i) {
                ids.push_back(steps[i].keyword);
            }
            return static_cast<double>((inst.others - u.retrieve(ids)).count());
        };
        if (steps.empty()) {
            continue;
        }
        double with = gone(steps.size());
        double without = gone(steps.size() - 1);
        if (with + 1e-9 < target) {
            EXPECT_EQ(e.expansion.size(), steps.size());  // ran out of options
        } else if (std::abs(without - target) <= std::abs(with - target)) {
            EXPECT_EQ(e.expansion.size(), steps.size() - 1) << "seed " << seed;
        } else {
            EXPECT_EQ(e.expansion.size(), steps.size()) << "seed " << seed;
        }
    }
}
