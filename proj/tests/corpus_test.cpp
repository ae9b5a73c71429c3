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
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qec/corpus.hpp"
#include "support/plain_instance.hpp"

using namespace qec;

namespace {

std::vector<Document> parse(std::string const& text, CorpusFormat f = CorpusFormat::jsonl_text) {
    std::istringstream in(text);
    return parse_corpus(in, f);
}

std::vector<std::string> ids(ResultUniverse const& u, ResultSet const& s) { return u.ids_of(s); }

}  // namespace

TEST(ResultSet, AlgebraAcrossWordBoundary) {
    ResultSet a(130);
    ResultSet b(130);
    for (ResultIndex i : {0U, 63U, 64U, 129U}) {
        a.set(i);
    }
    b.set(64);
    b.set(100);
    EXPECT_EQ((a & b).members(), std::vector<ResultIndex>{64});
    EXPECT_EQ((a | b).count(), 5U);
    EXPECT_EQ((a - b).members(), (std::vector<ResultIndex>{0, 63, 129}));
    EXPECT_EQ(a.complement().count(), 126U);
    EXPECT_TRUE(ResultSet::full(130).complement().empty());
    EXPECT_TRUE((a & b).is_subset_of(b));
    EXPECT_THROW(a &= ResultSet(10), std::invalid_argument);
    EXPECT_THROW(a.set(130), std::out_of_range);
}

TEST(Tokenize, TextLowercasesAndSplits) {
    EXPECT_EQ(tokenize_text("San Jose, CA"), (std::vector<Keyword>{"san", "jose", "ca"}));
    EXPECT_TRUE(tokenize_text("").empty());
    EXPECT_TRUE(tokenize_text(" ,;-- ").empty());
    EXPECT_EQ(tokenize_text("the cat", {"the"}), std::vector<Keyword>{"cat"});
}

TEST(Tokenize, TripletYieldsAtomAndComponents) {
    std::vector<Triplet> f{{"user", "name", "iPad"}};
    EXPECT_EQ(tokenize_triplets(f), (std::vector<Keyword>{"user:name:ipad", "user", "name", "ipad"}));
}

TEST(Tokenize, CanonicalizeIsIdempotent) {
    for (std::string s : {"Apple", "TV:Brand:LG", "x1", ""}) {
        EXPECT_EQ(canonicalize(canonicalize(s)), canonicalize(s));
    }
}

TEST(LoadCorpus, TextLine) {
    auto docs = parse(R"({"id":"d1","text":"Apple fruit"})");
    ASSERT_EQ(docs.size(), 1U);
    EXPECT_EQ(docs[0].id, "d1");
    EXPECT_EQ(docs[0].kind, DocumentKind::text);
    EXPECT_EQ(docs[0].tokens, (std::vector<Keyword>{"apple", "fruit"}));
    EXPECT_EQ(docs[0].rank_score, 1.0);
}

TEST(LoadCorpus, StructuredLine) {
    auto docs = parse(R"({"id":"d2","features":[["tv","brand","LG"]],"score":0.5})", CorpusFormat::jsonl_structured);
    ASSERT_EQ(docs.size(), 1U);
    EXPECT_EQ(docs[0].kind, DocumentKind::structured);
    EXPECT_EQ(docs[0].tokens, (std::vector<Keyword>{"tv:brand:lg", "tv", "brand", "lg"}));
    EXPECT_EQ(docs[0].rank_score, 0.5);
}

TEST(LoadCorpus, Errors) {
    try {
        (void)parse("{\"id\":\"a\",\"text\":\"x\"}\n{\"text\":\"no id\"}\n");
        FAIL() << "missing id accepted";
    } catch (Error const& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)parse("{not json"), Error);
    EXPECT_THROW((void)parse(R"({"id":"a","text":"x","score":-1})"), Error);
    EXPECT_THROW((void)parse("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}"), Error);
    EXPECT_THROW((void)parse(R"({"id":"a","features":[["x","y"]]})", CorpusFormat::jsonl_structured), Error);
    EXPECT_THROW((void)load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::jsonl_text), Error);
    EXPECT_EQ(parse("\n  \n").size(), 0U);
}

TEST(BuildUniverse, UniformScores) {
    auto docs = parse("{\"id\":\"a\",\"text\":\"apple pie\"}\n{\"id\":\"b\",\"text\":\"apple tree\"}\n"
                      "{\"id\":\"c\",\"text\":\"apple store\"}\n{\"id\":\"d\",\"text\":\"pear\"}");
    auto u = build_universe(docs, Query({"apple"}));
    EXPECT_EQ(u.size(), 3U);
    for (ResultIndex r = 0; r < u.size(); ++r) {
        EXPECT_EQ(u.score(r), 1.0);
    }
    EXPECT_EQ(evaluate_query(Query({"apple"}), u), u.all());
    EXPECT_TRUE(u.elimination(*u.find("apple")).empty());
    EXPECT_THROW((void)build_universe(docs, Query({"zzz"})), Error);
}

TEST(BuildUniverse, TfidfSumRankScore) {
    // D = 4 documents, "apple" in 3: idf = ln(1 + 4/3); b holds apple twice.
    auto docs = parse("{\"id\":\"a\",\"text\":\"apple pie\"}\n{\"id\":\"b\",\"text\":\"apple apple\"}\n"
                      "{\"id\":\"c\",\"text\":\"apple store\"}\n{\"id\":\"d\",\"text\":\"pear\"}");
    auto u = build_universe(docs, Query({"apple"}), Ranking::tfidf_sum);
    double idf = std::log(1.0 + 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(u.score(*u.index_of("a")), idf);
    EXPECT_DOUBLE_EQ(u.score(*u.index_of("b")), 2 * idf);
}

TEST(BuildUniverse, AppleInstanceEliminationTable) {
    // Each result holds apple plus every keyword that does not eliminate it.
    auto j = reference::read_json(QEC_DATA_DIR "/apple_instance.json");
    auto plain = reference::plain_from_json(j);
    std::string lines;
    for (auto const* group : {&plain.cluster, &plain.others}) {
        for (auto const& id : *group) {
            std::string text = "apple";
            for (auto const& [k, gone] : plain.eliminates) {
                if (!gone.contains(id)) {
                    text += " " + k;
                }
            }
            lines += nlohmann::json{{"id", id}, {"text", text}}.dump() + "\n";
        }
    }
    auto docs = parse(lines);
    auto u = build_universe(docs, Query({"apple"}));
    auto c = u.set_of(j["cluster"].get<std::vector<std::string>>());
    auto other = u.set_of(j["others"].get<std::vector<std::string>>());
    auto job = *u.find("job");
    EXPECT_EQ(ids(u, u.elimination(job) & c), (std::vector<std::string>{"R1", "R2", "R3", "R4", "R5", "R6"}));
    EXPECT_EQ((u.elimination(job) & other).count(), 8U);
    EXPECT_FALSE((u.elimination(job) & other).test(*u.index_of("R'9")));

    Query q({"apple"});
    q.expansion = {"job", "store", "location"};
    auto r = evaluate_query(q, u);
    EXPECT_EQ(ids(u, r & c), (std::vector<std::string>{"R7", "R8"}));
    EXPECT_TRUE((r & other).empty());
}

TEST(EvaluateQuery, UnknownKeywordRetrievesNothing) {
    auto docs = parse("{\"id\":\"a\",\"text\":\"apple pie\"}");
    auto u = build_universe(docs, Query({"apple"}));
    Query q({"apple"});
    q.expansion = {"banana"};
    EXPECT_TRUE(evaluate_query(q, u).empty());
    EXPECT_TRUE(evaluate_query(q, std::span<Document const>(docs)).empty());
    EXPECT_THROW((void)evaluate_query(Query{}, std::span<Document const>(docs)), Error);
}

TEST(EvaluateQuery, ConjunctiveMonotonicityProperty) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto inst = parse_instance(reference::random_instance(seed).to_json());
        auto const& u = inst.universe;
        std::mt19937_64 rng(seed);
        std::vector<KeywordId> q;
        for (auto k : inst.pool) {
            if (rng() % 2 == 0) {
                q.push_back(k);
            }
        }
        auto base = u.retrieve(q);
        for (auto k : inst.pool) {
            EXPECT_EQ(u.postings(k) | u.elimination(k), u.all());
            EXPECT_TRUE((u.postings(k) & u.elimination(k)).empty());
            auto with = q;
            with.push_back(k);
            EXPECT_EQ(u.retrieve(with), base - u.elimination(k));
            EXPECT_TRUE(u.retrieve(with).is_subset_of(base));
        }
    }
}

TEST(CandidatePool, CeilingTieBreakAndIdfZero) {
    // Ten distinct non-query words. "common" occurs everywhere (idf 0).
    std::string lines;
    for (int i = 0; i < 10; ++i) {
        lines += nlohmann::json{{"id", "d" + std::to_string(i)}, {"text", "q common w" + std::to_string(i)}}.dump() + "\n";
    }
    lines += nlohmann::json{{"id", "d10"}, {"text", "q common"}}.dump() + "\n";
    auto docs = parse(lines);
    auto u = build_universe(docs, Query({"q"}));
    // 11 non-query words; fraction 0.2 -> ceil(2.2) = 3.
    auto pool = candidate_pool(u, 0.2);
    ASSERT_EQ(pool.size(), 3U);
    // w0..w9 all score ln(11); lexicographic order wins.
    EXPECT_EQ(u.keyword(pool[0]), "w0");
    EXPECT_EQ(u.keyword(pool[1]), "w1");
    auto all = candidate_pool(u, 1.0);
    ASSERT_EQ(all.size(), 11U);
    EXPECT_EQ(u.keyword(all.back()), "common");
    EXPECT_EQ(candidate_pool(u, 1.0), all);
    EXPECT_THROW((void)candidate_pool(u, 0.0), Error);
}

TEST(CandidatePool, TwoOfTen) {
    std::string lines;
    for (int i = 0; i < 10; ++i) {
        lines += nlohmann::json{{"id", "d" + std::to_string(i)}, {"text", "q w" + std::to_string(i)}}.dump() + "\n";
    }
    auto u = build_universe(parse(lines), Query({"q"}));
    EXPECT_EQ(candidate_pool(u, 0.2).size(), 2U);
}

TEST(TopK, TruncatesByScoreThenId) {
    std::string lines;
    for (int i = 0; i < 100; ++i) {
        lines += nlohmann::json{{"id", "d" + std::to_string(100 + i)}, {"text", "q w" + std::to_string(i)},
                                {"score", static_cast<double>(i % 7)}}
                     .dump() +
                 "\n";
    }
    auto docs = parse(lines);
    auto u = build_universe(docs, Query({"q"}), Ranking::document);
    auto top = top_k_results(u, 30);
    EXPECT_EQ(top.size(), 30U);
    double min_kept = 1e9;
    for (ResultIndex r = 0; r < top.size(); ++r) {
        min_kept = std::min(min_kept, top.score(r));
    }
    std::size_t strictly_better = 0;
    for (ResultIndex r = 0; r < u.size(); ++r) {
        strictly_better += u.score(r) > min_kept ? 1 : 0;
    }
    EXPECT_LE(strictly_better, 30U);
    // Vocabulary rebuilt: only words of kept results remain.
    EXPECT_EQ(top.vocabulary().size(), 31U);
    EXPECT_EQ(top_k_results(u, 1000).size(), 100U);

    auto uniform = build_universe(docs, Query({"q"}));
    auto first = top_k_results(uniform, 3);
    EXPECT_EQ(first.ids(), (std::vector<std::string>{"d100", "d101", "d102"}));
    EXPECT_THROW((void)top_k_results(u, 0), Error);
}

TEST(Instance, ParsesAppleInstance) {
    auto inst = load_instance(QEC_DATA_DIR "/apple_instance.json");
    EXPECT_EQ(inst.universe.size(), 18U);
    EXPECT_EQ(inst.cluster.count(), 8U);
    EXPECT_EQ(inst.others.count(), 10U);
    EXPECT_EQ(inst.pool.size(), 4U);
    EXPECT_TRUE(inst.universe.in_query(*inst.universe.find("apple")));
    EXPECT_THROW((void)parse_instance(nlohmann::json::parse(R"({"cluster":["a"],"others":["a"],"eliminates":{}})")),
                 Error);
    EXPECT_THROW(
        (void)parse_instance(nlohmann::json::parse(R"({"cluster":["a"],"others":[],"eliminates":{"k":["zz"]}})")),
        Error);
}
