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
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/result_set.hpp"

namespace qec {

/// Raised for bad input: malformed files, empty universes, invalid partitions.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Keyword = std::string;

/// Handle of a keyword inside one ResultUniverse. Ids follow the lexicographic
/// order of the keyword strings, so comparing ids compares keywords.
using KeywordId = std::uint32_t;

/// Lowercases a token or serialized triplet. Idempotent.
[[nodiscard]] inline Keyword canonicalize(std::string_view token) {
    Keyword out(token);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

enum class DocumentKind { text, structured };

using Triplet = std::array<std::string, 3>;

struct Document {
    std::string id;
    DocumentKind kind = DocumentKind::text;
    std::string text;
    std::vector<Triplet> features;
    double rank_score = 1.0;
    std::vector<Keyword> tokens;
};

/// Lowercase, split on non-alphanumeric characters, drop empty tokens and stopwords.
[[nodiscard]] inline std::vector<Keyword>
tokenize_text(std::string_view text, std::unordered_set<Keyword> const& stopwords = {}) {
    std::vector<Keyword> tokens;
    Keyword current;
    auto flush = [&] {
        if (!current.empty() && !stopwords.contains(current)) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) != 0) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

/// Each triplet yields "entity:attribute:value" plus its three components.
[[nodiscard]] inline std::vector<Keyword> tokenize_triplets(std::span<Triplet const> features) {
    std::vector<Keyword> tokens;
    tokens.reserve(features.size() * 4);
    for (auto const& [entity, attribute, value] : features) {
        tokens.push_back(canonicalize(entity + ":" + attribute + ":" + value));
        tokens.push_back(canonicalize(entity));
        tokens.push_back(canonicalize(attribute));
        tokens.push_back(canonicalize(value));
    }
    return tokens;
}

[[nodiscard]] inline std::vector<Keyword>
tokenize(Document const& doc, std::unordered_set<Keyword> const& stopwords = {}) {
    if (doc.kind == DocumentKind::text) {
        return tokenize_text(doc.text, stopwords);
    }
    return tokenize_triplets(doc.features);
}

enum class CorpusFormat { jsonl_text, jsonl_structured };

namespace detail {

[[noreturn]] inline void malformed(std::size_t line_no, std::string const& why) {
    throw Error("malformed corpus line " + std::to_string(line_no) + ": " + why);
}

inline bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace detail

/// Parses one JSONL corpus from a stream. line_no in errors is 1-based.
[[nodiscard]] inline std::vector<Document> parse_corpus(std::istream& in, CorpusFormat format,
                                                        std::unordered_set<Keyword> const& stopwords = {}) {
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::blank(line)) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (nlohmann::json::parse_error const& e) {
            detail::malformed(line_no, e.what());
        }
        if (!j.is_object()) {
            detail::malformed(line_no, "not a JSON object");
        }
        Document doc;
        if (!j.contains("id") || !j["id"].is_string()) {
            detail::malformed(line_no, "missing string field \"id\"");
        }
        doc.id = j["id"].get<std::string>();
        if (j.contains("score")) {
            if (!j["score"].is_number() || j["score"].get<double>() < 0.0) {
                detail::malformed(line_no, "\"score\" must be a non-negative number");
            }
            doc.rank_score = j["score"].get<double>();
        }
        if (format == CorpusFormat::jsonl_text) {
            if (!j.contains("text") || !j["text"].is_string()) {
                detail::malformed(line_no, "missing string field \"text\"");
            }
            doc.kind = DocumentKind::text;
            doc.text = j["text"].get<std::string>();
        } else {
            if (!j.contains("features") || !j["features"].is_array()) {
                detail::malformed(line_no, "missing array field \"features\"");
            }
            doc.kind = DocumentKind::structured;
            for (auto const& f : j["features"]) {
                if (!f.is_array() || f.size() != 3 ||
                    !std::all_of(f.begin(), f.end(), [](auto const& s) { return s.is_string(); })) {
                    detail::malformed(line_no, "feature must be [entity, attribute, value]");
                }
                doc.features.push_back({f[0].get<std::string>(), f[1].get<std::string>(), f[2].get<std::string>()});
            }
        }
        if (!seen.insert(doc.id).second) {
            throw Error("duplicate document id \"" + doc.id + "\" on line " + std::to_string(line_no));
        }
        doc.tokens = tokenize(doc, stopwords);
        docs.push_back(std::move(doc));
    }
    return docs;
}

[[nodiscard]] inline std::vector<Document> load_corpus(std::string const& path, CorpusFormat format,
                                                       std::unordered_set<Keyword> const& stopwords = {}) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read corpus file " + path);
    }
    return parse_corpus(in, format, stopwords);
}

/// A user query plus the keywords added to it.
struct Query {
    std::set<Keyword> original;
    std::set<Keyword> expansion;

    Query() = default;
    explicit Query(std::set<Keyword> uq) : original(std::move(uq)) {}

    [[nodiscard]] std::set<Keyword> keywords() const {
        auto all = original;
        all.insert(expansion.begin(), expansion.end());
        return all;
    }
    [[nodiscard]] bool contains(Keyword const& k) const {
        return original.contains(k) || expansion.contains(k);
    }
    void add(Keyword const& k) {
        if (!original.contains(k)) {
            expansion.insert(k);
        }
    }

    friend bool operator==(Query const&, Query const&) = default;
};

/// Builds a Query from raw user keywords, canonicalizing each.
[[nodiscard]] inline Query make_query(std::span<std::string const> words) {
    Query q;
    for (auto const& w : words) {
        q.original.insert(canonicalize(w));
    }
    return q;
}

/// Term counts of one result: (keyword, occurrences), sorted by keyword.
using TermCounts = std::vector<std::pair<KeywordId, std::uint32_t>>;

/**
 * The results of a user query under AND semantics.
 *
 * Holds the result ids, their rank scores, and a posting bitset per keyword.
 * The elimination set of a keyword is the complement of its postings.
 * Immutable once built.
 */
class ResultUniverse {
  public:
    struct Row {
        std::string id;
        double score = 1.0;
        std::map<Keyword, std::uint32_t> terms;
    };

    ResultUniverse() = default;

    /// Every row must contain every keyword of uq. extra_vocabulary adds
    /// keywords that may occur in no row (their postings are empty).
    [[nodiscard]] static ResultUniverse from_rows(Query uq, std::vector<Row> rows,
                                                  std::span<Keyword const> extra_vocabulary = {}) {
        ResultUniverse u;
        u.query_ = std::move(uq);
        std::set<Keyword> vocab(extra_vocabulary.begin(), extra_vocabulary.end());
        std::unordered_set<std::string> seen;
        for (auto const& row : rows) {
            if (!seen.insert(row.id).second) {
                throw Error("duplicate result id \"" + row.id + "\"");
            }
            if (!(row.score >= 0.0) || !std::isfinite(row.score)) {
                throw Error("rank score of \"" + row.id + "\" must be finite and non-negative");
            }
            for (auto const& k : u.query_.original) {
                if (!row.terms.contains(k)) {
                    throw Error("result \"" + row.id + "\" does not contain query keyword \"" + k + "\"");
                }
            }
            for (auto const& [k, n] : row.terms) {
                if (n > 0) {
                    vocab.insert(k);
                }
            }
        }
        u.vocabulary_.assign(vocab.begin(), vocab.end());
        for (KeywordId i = 0; i < u.vocabulary_.size(); ++i) {
            u.lookup_.emplace(u.vocabulary_[i], i);
        }
        auto const n = rows.size();
        u.postings_.assign(u.vocabulary_.size(), ResultSet(n));
        u.terms_.resize(n);
        for (ResultIndex r = 0; r < n; ++r) {
            auto& row = rows[r];
            u.ids_.push_back(std::move(row.id));
            u.scores_.push_back(row.score);
            for (auto const& [k, count] : row.terms) {
                if (count == 0) {
                    continue;
                }
                auto id = u.lookup_.at(k);
                u.postings_[id].set(r);
                u.terms_[r].emplace_back(id, count);
            }
        }
        for (ResultIndex r = 0; r < n; ++r) {
            u.index_.emplace(u.ids_[r], r);
        }
        return u;
    }

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
    [[nodiscard]] Query const& query() const noexcept { return query_; }

    [[nodiscard]] std::string const& id(ResultIndex r) const { return ids_.at(r); }
    [[nodiscard]] std::vector<std::string> const& ids() const noexcept { return ids_; }
    [[nodiscard]] double score(ResultIndex r) const { return scores_.at(r); }
    [[nodiscard]] std::span<double const> scores() const noexcept { return scores_; }
    [[nodiscard]] std::optional<ResultIndex> index_of(std::string const& id) const {
        if (auto it = index_.find(id); it != index_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::vector<Keyword> const& vocabulary() const noexcept { return vocabulary_; }
    [[nodiscard]] Keyword const& keyword(KeywordId k) const { return vocabulary_.at(k); }
    [[nodiscard]] std::optional<KeywordId> find(Keyword const& k) const {
        if (auto it = lookup_.find(k); it != lookup_.end()) {
            return it->second;
        }
        return std::nullopt;
    }
    [[nodiscard]] bool in_query(KeywordId k) const { return query_.original.contains(keyword(k)); }

    [[nodiscard]] ResultSet const& postings(KeywordId k) const { return postings_.at(k); }
    /// E(k): results of the universe that do not contain k.
    [[nodiscard]] ResultSet elimination(KeywordId k) const { return postings_.at(k).complement(); }
    [[nodiscard]] TermCounts const& terms(ResultIndex r) const { return terms_.at(r); }

    [[nodiscard]] ResultSet all() const { return ResultSet::full(size()); }
    [[nodiscard]] ResultSet none() const { return ResultSet(size()); }

    /// Results containing every given keyword.
    [[nodiscard]] ResultSet retrieve(std::span<KeywordId const> keywords) const {
        auto out = all();
        for (auto k : keywords) {
            out &= postings(k);
        }
        return out;
    }

    /// Builds a set from result ids; unknown ids throw.
    [[nodiscard]] ResultSet set_of(std::span<std::string const> ids) const {
        auto out = none();
        for (auto const& id : ids) {
            auto r = index_of(id);
            if (!r) {
                throw Error("unknown result id \"" + id + "\"");
            }
            out.set(*r);
        }
        return out;
    }
    [[nodiscard]] std::vector<std::string> ids_of(ResultSet const& set) const {
        std::vector<std::string> out;
        set.for_each([&](ResultIndex r) { out.push_back(ids_[r]); });
        return out;
    }

    /// Rows reconstructing this universe, optionally restricted to a subset.
    [[nodiscard]] std::vector<Row> rows(std::span<ResultIndex const> which) const {
        std::vector<Row> out;
        out.reserve(which.size());
        for (auto r : which) {
            Row row{ids_.at(r), scores_.at(r), {}};
            for (auto [k, n] : terms_[r]) {
                row.terms.emplace(vocabulary_[k], n);
            }
            out.push_back(std::move(row));
        }
        return out;
    }

    /// Copy with replaced rank scores; postings unchanged.
    [[nodiscard]] ResultUniverse with_scores(std::vector<double> scores) const {
        if (scores.size() != size()) {
            throw Error("score vector does not match universe size");
        }
        auto copy = *this;
        copy.scores_ = std::move(scores);
        return copy;
    }

  private:
    Query query_;
    std::vector<std::string> ids_;
    std::vector<double> scores_;
    std::vector<Keyword> vocabulary_;
    std::unordered_map<Keyword, KeywordId> lookup_;
    std::vector<ResultSet> postings_;
    std::vector<TermCounts> terms_;
    std::unordered_map<std::string, ResultIndex> index_;
};

/// Maps keyword strings to universe ids. Keywords outside the vocabulary
/// have empty postings, so any query holding one retrieves nothing.
[[nodiscard]] inline std::optional<std::vector<KeywordId>> resolve(Query const& q, ResultUniverse const& u) {
    std::vector<KeywordId> out;
    for (auto const& k : q.keywords()) {
        auto id = u.find(k);
        if (!id) {
            return std::nullopt;
        }
        out.push_back(*id);
    }
    return out;
}

/// R(q) within a universe: the universe minus the union of E(k) over q.
[[nodiscard]] inline ResultSet evaluate_query(Query const& q, ResultUniverse const& u) {
    auto ids = resolve(q, u);
    if (!ids) {
        return u.none();
    }
    return u.retrieve(*ids);
}

/// R(q) over a document collection; bit i stands for documents[i].
[[nodiscard]] inline ResultSet evaluate_query(Query const& q, std::span<Document const> documents) {
    auto keywords = q.keywords();
    if (keywords.empty()) {
        throw Error("cannot evaluate an empty query");
    }
    ResultSet out(documents.size());
    for (ResultIndex i = 0; i < documents.size(); ++i) {
        std::unordered_set<std::string_view> tokens(documents[i].tokens.begin(), documents[i].tokens.end());
        if (std::all_of(keywords.begin(), keywords.end(), [&](auto const& k) { return tokens.contains(k); })) {
            out.set(i);
        }
    }
    return out;
}

/// uniform: every result scores 1. document: the "score" field of the corpus
/// line. tfidf_sum: see build_universe.
enum class Ranking { uniform, document, tfidf_sum };

/**
 * Retrieves the documents matching uq and builds their universe.
 *
 * Under tfidf_sum, the rank score of a result is the sum over k in uq of
 * tf(k, r) * ln(1 + D / df(k)), with D and df taken over the whole collection.
 */
[[nodiscard]] inline ResultUniverse build_universe(std::span<Document const> documents, Query const& uq,
                                                   Ranking ranking = Ranking::uniform) {
    if (uq.keywords().empty()) {
        throw Error("user query is empty");
    }
    auto hits = evaluate_query(uq, documents);
    if (hits.empty()) {
        throw Error("query matches no document");
    }
    std::map<Keyword, double> idf;
    if (ranking == Ranking::tfidf_sum) {
        for (auto const& k : uq.keywords()) {
            std::size_t df = 0;
            for (auto const& doc : documents) {
                df += std::find(doc.tokens.begin(), doc.tokens.end(), k) != doc.tokens.end() ? 1 : 0;
            }
            idf[k] = std::log(1.0 + static_cast<double>(documents.size()) / static_cast<double>(df));
        }
    }
    std::vector<ResultUniverse::Row> rows;
    hits.for_each([&](ResultIndex i) {
        auto const& doc = documents[i];
        ResultUniverse::Row row{doc.id, ranking == Ranking::document ? doc.rank_score : 1.0, {}};
        for (auto const& t : doc.tokens) {
            ++row.terms[t];
        }
        if (ranking == Ranking::tfidf_sum) {
            row.score = 0.0;
            for (auto const& [k, w] : idf) {
                row.score += static_cast<double>(row.terms.at(k)) * w;
            }
        }
        rows.push_back(std::move(row));
    });
    return ResultUniverse::from_rows(uq, std::move(rows));
}

/// tf (total occurrences over the universe) times ln(N / df).
[[nodiscard]] inline std::vector<double> keyword_tfidf(ResultUniverse const& u) {
    std::vector<double> tf(u.vocabulary().size(), 0.0);
    for (ResultIndex r = 0; r < u.size(); ++r) {
        for (auto [k, n] : u.terms(r)) {
            tf[k] += n;
        }
    }
    std::vector<double> out(tf.size(), 0.0);
    auto const n = static_cast<double>(u.size());
    for (KeywordId k = 0; k < out.size(); ++k) {
        auto df = static_cast<double>(u.postings(k).count());
        out[k] = df > 0 ? tf[k] * std::log(n / df) : 0.0;
    }
    return out;
}

/// Top ceil(fraction * |non-uq vocabulary|) keywords by tfidf; ties by keyword.
[[nodiscard]] inline std::vector<KeywordId> candidate_pool(ResultUniverse const& u, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error("candidate fraction must be in (0, 1]");
    }
    auto score = keyword_tfidf(u);
    std::vector<KeywordId> words;
    for (KeywordId k = 0; k < u.vocabulary().size(); ++k) {
        if (!u.in_query(k) && u.postings(k).any()) {
            words.push_back(k);
        }
    }
    std::stable_sort(words.begin(), words.end(), [&](KeywordId a, KeywordId b) { return score[a] > score[b]; });
    // Guard the ceiling against products like 0.1 * 30 = 3.0000000000000004.
    auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(words.size()) - 1e-9));
    words.resize(std::min(take, words.size()));
    return words;
}

/// The K highest-scored results (ties by id), postings rebuilt over them.
[[nodiscard]] inline ResultUniverse top_k_results(ResultUniverse const& u, std::size_t k) {
    if (k == 0) {
        throw Error("top-k must be positive");
    }
    if (k >= u.size()) {
        return u;
    }
    std::vector<ResultIndex> order(u.size());
    std::iota(order.begin(), order.end(), ResultIndex{0});
    std::sort(order.begin(), order.end(), [&](ResultIndex a, ResultIndex b) {
        if (u.score(a) != u.score(b)) {
            return u.score(a) > u.score(b);
        }
        return u.id(a) < u.id(b);
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return ResultUniverse::from_rows(u.query(), u.rows(order));
}

/// A bare algorithm-level instance: target cluster, the other results, and
/// the elimination set of every candidate keyword.
struct Instance {
    ResultUniverse universe;
    ResultSet cluster;
    ResultSet others;
    std::vector<KeywordId> pool;
};

/**
 * Parses {"cluster": [...], "others": [...], "scores": {...}, "eliminates":
 * {kw: [...]}, "query": [...]}. "scores" and "query" are optional.
 */
[[nodiscard]] inline Instance parse_instance(nlohmann::json const& j) {
    auto id_list = [&](char const* field) {
        if (!j.contains(field) || !j[field].is_array()) {
            throw Error(std::string("instance needs array field \"") + field + "\"");
        }
        return j[field].get<std::vector<std::string>>();
    };
    auto cluster = id_list("cluster");
    auto others = id_list("others");
    if (!j.contains("eliminates") || !j["eliminates"].is_object()) {
        throw Error("instance needs object field \"eliminates\"");
    }
    Query uq;
    if (j.contains("query")) {
        for (auto const& w : j["query"].get<std::vector<std::string>>()) {
            uq.original.insert(canonicalize(w));
        }
    }
    std::map<Keyword, std::set<std::string>> eliminates;
    for (auto const& [k, ids] : j["eliminates"].items()) {
        auto key = canonicalize(k);
        if (uq.original.contains(key)) {
            throw Error("query keyword \"" + key + "\" cannot eliminate results");
        }
        auto list = ids.get<std::vector<std::string>>();
        eliminates[key].insert(list.begin(), list.end());
    }
    std::vector<ResultUniverse::Row> rows;
    for (auto const* group : {&cluster, &others}) {
        for (auto const& id : *group) {
            ResultUniverse::Row row{id, 1.0, {}};
            for (auto const& k : uq.original) {
                row.terms[k] = 1;
            }
            for (auto const& [k, gone] : eliminates) {
                if (!gone.contains(id)) {
                    row.terms[k] = 1;
                }
            }
            rows.push_back(std::move(row));
        }
    }
    if (j.contains("scores")) {
        auto scores = j["scores"].get<std::map<std::string, double>>();
        for (auto& row : rows) {
            if (auto it = scores.find(row.id); it != scores.end()) {
                row.score = it->second;
            }
        }
        for (auto const& [id, s] : scores) {
            if (std::none_of(rows.begin(), rows.end(), [&](auto const& r) { return r.id == id; })) {
                throw Error("score given for unknown result \"" + id + "\"");
            }
        }
    }
    std::vector<Keyword> pool_words;
    for (auto const& [k, gone] : eliminates) {
        pool_words.push_back(k);
    }
    Instance inst;
    inst.universe = ResultUniverse::from_rows(uq, std::move(rows), pool_words);
    for (auto const& [k, gone] : eliminates) {
        for (auto const& id : gone) {
            if (!inst.universe.index_of(id)) {
                throw Error("keyword \"" + k + "\" eliminates unknown result \"" + id + "\"");
            }
        }
        inst.pool.push_back(*inst.universe.find(k));
    }
    inst.cluster = inst.universe.set_of(cluster);
    inst.others = inst.universe.set_of(others);
    return inst;
}

[[nodiscard]] inline Instance load_instance(std::string const& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read instance file " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (nlohmann::json::parse_error const& e) {
        throw Error("malformed instance file " + path + ": " + e.what());
    }
    return parse_instance(j);
}

}  // namespace qec
