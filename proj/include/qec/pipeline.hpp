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
#include <chrono>
#include <cstdint>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qec/baselines.hpp"
#include "qec/cluster.hpp"
#include "qec/corpus.hpp"
#include "qec/iskr.hpp"
#include "qec/metrics.hpp"
#include "qec/oracle.hpp"
#include "qec/pebc.hpp"
#include "qec/synthetic.hpp"

namespace qec {

enum class Algorithm { iskr, pebc, fmeasure, dataclouds, cs, oracle };
enum class InputFormat { jsonl_text, jsonl_structured, instance };

[[nodiscard]] inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::iskr: return "iskr";
    case Algorithm::pebc: return "pebc";
    case Algorithm::fmeasure: return "fmeasure";
    case Algorithm::dataclouds: return "dataclouds";
    case Algorithm::cs: return "cs";
    case Algorithm::oracle: return "oracle";
    }
    return "?";
}

[[nodiscard]] inline std::string to_string(Ranking r) {
    switch (r) {
    case Ranking::uniform: return "uniform";
    case Ranking::document: return "document";
    case Ranking::tfidf_sum: return "tfidf-sum";
    }
    return "?";
}

[[nodiscard]] inline std::string to_string(InputFormat f) {
    switch (f) {
    case InputFormat::jsonl_text: return "jsonl-text";
    case InputFormat::jsonl_structured: return "jsonl-structured";
    case InputFormat::instance: return "instance";
    }
    return "?";
}

struct PipelineConfig {
    std::string corpus_path;
    InputFormat format = InputFormat::jsonl_text;
    std::vector<std::string> query;
    std::size_t k_clusters = 3;
    std::size_t top_k = 30;
    double candidate_fraction = 0.2;
    std::size_t max_queries = 5;
    Algorithm algorithm = Algorithm::iskr;
    Ranking ranking = Ranking::tfidf_sum;
    std::uint64_t seed = 0;
    std::size_t nseg = 2;
    std::size_t nit = 3;
    std::optional<std::string> partition_path;
    std::size_t oracle_max_len = 4;
    std::size_t label_length = 3;
    bool parallel = true;

    void validate() const {
        if (k_clusters == 0 || top_k == 0 || max_queries == 0 || nseg == 0 || nit == 0 || label_length == 0) {
            throw Error("counts in the configuration must be positive");
        }
        if (!(candidate_fraction > 0.0 && candidate_fraction <= 1.0)) {
            throw Error("candidate fraction must be in (0, 1]");
        }
    }
};

struct ClusterReport {
    std::size_t cluster = 0;
    std::size_t cluster_size = 0;
    Query query;
    std::optional<QueryEvaluation> evaluation;  ///< empty for cluster-free methods
};

struct ExpansionReport {
    PipelineConfig config;
    std::size_t universe_size = 0;
    std::size_t pool_size = 0;
    std::vector<ClusterReport> clusters;
    std::optional<double> collective_score;
    double clustering_ms = 0.0;
    double expansion_ms = 0.0;
};

/// A universe and the clusters to expand for, ready for the algorithms.
struct PreparedInput {
    ResultUniverse universe;
    ClusterPartition partition;
    std::vector<KeywordId> pool;
    double clustering_ms = 0.0;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline nlohmann::json query_json(Query const& q) {
    return {{"original", std::vector<std::string>(q.original.begin(), q.original.end())},
            {"expansion", std::vector<std::string>(q.expansion.begin(), q.expansion.end())}};
}

}  // namespace detail

/// Truncates, clusters (or validates the injected partition) and builds the
/// candidate pool for a document collection.
[[nodiscard]] inline PreparedInput prepare(PipelineConfig const& config, std::span<Document const> documents) {
    config.validate();
    PreparedInput in;
    auto universe = build_universe(documents, make_query(config.query), config.ranking);
    in.universe = top_k_results(universe, config.top_k);
    auto const start = std::chrono::steady_clock::now();
    if (config.partition_path) {
        in.partition = load_partition(*config.partition_path, in.universe);
    } else {
        auto k = std::min({config.k_clusters, config.max_queries, in.universe.size()});
        in.partition = kmeans(in.universe, k, config.seed);
    }
    in.clustering_ms = detail::elapsed_ms(start);
    in.pool = candidate_pool(in.universe, config.candidate_fraction);
    return in;
}

/// Bare instances expand for their one target cluster against "others",
/// with the instance keywords as the pool.
[[nodiscard]] inline PreparedInput prepare(Instance const& inst) {
    PreparedInput in{inst.universe, {}, inst.pool, 0.0};
    in.partition.clusters.push_back(inst.cluster);
    return in;
}

[[nodiscard]] inline ExpansionReport run_prepared(PipelineConfig const& config, PreparedInput const& in,
                                                  ResultSet const* others_override = nullptr) {
    config.validate();
    auto const& u = in.universe;
    ExpansionReport report;
    report.config = config;
    report.universe_size = u.size();
    report.pool_size = in.pool.size();
    report.clustering_ms = in.clustering_ms;

    auto const start = std::chrono::steady_clock::now();
    std::vector<Query> queries;
    if (config.algorithm == Algorithm::dataclouds) {
        queries = baselines::data_clouds(u, config.max_queries);
    } else if (config.algorithm == Algorithm::cs) {
        queries = baselines::cs_labels(in.partition, u, config.label_length);
    } else {
        auto expand = [&](std::size_t i) {
            auto const& c = in.partition.clusters[i];
            auto const others = others_override != nullptr ? *others_override : u.all() - c;
            switch (config.algorithm) {
            case Algorithm::iskr: return iskr::refine(u, c, others, in.pool);
            case Algorithm::pebc:
                return pebc::converge(u, c, others, in.pool,
                                      {config.nseg, config.nit, config.seed + i, pebc::TargetMetric::weighted});
            case Algorithm::fmeasure: return baselines::refine_fmeasure(u, c, others, in.pool);
            case Algorithm::oracle:
                return oracle::brute_force_best(u, c, others, in.pool, config.oracle_max_len).best_query;
            default: throw Error("unreachable algorithm");
            }
        };
        if (config.parallel && in.partition.size() > 1) {
            std::vector<std::future<Query>> jobs;
            for (std::size_t i = 0; i < in.partition.size(); ++i) {
                jobs.push_back(std::async(std::launch::async, expand, i));
            }
            for (auto& job : jobs) {
                queries.push_back(job.get());
            }
        } else {
            for (std::size_t i = 0; i < in.partition.size(); ++i) {
                queries.push_back(expand(i));
            }
        }
    }
    report.expansion_ms = detail::elapsed_ms(start);

    if (config.algorithm == Algorithm::dataclouds) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            report.clusters.push_back({i, 0, queries[i], std::nullopt});
        }
        return report;
    }
    std::vector<double> fs;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto const& c = in.partition.clusters[i];
        auto const scope = others_override != nullptr ? c | *others_override : u.all();
        auto eval = evaluate(evaluate_query(queries[i], u) & scope, c, u);
        fs.push_back(eval.f_measure);
        report.clusters.push_back({i, c.count(), queries[i], eval});
    }
    report.collective_score = collective_score(fs);
    return report;
}

/// Loads the configured input and runs the whole pipeline.
[[nodiscard]] inline ExpansionReport run_pipeline(PipelineConfig const& config) {
    config.validate();
    if (config.format == InputFormat::instance) {
        auto inst = load_instance(config.corpus_path);
        return run_prepared(config, prepare(inst), &inst.others);
    }
    auto docs = load_corpus(config.corpus_path, config.format == InputFormat::jsonl_text
                                                    ? CorpusFormat::jsonl_text
                                                    : CorpusFormat::jsonl_structured);
    return run_prepared(config, prepare(config, docs));
}

[[nodiscard]] inline ExpansionReport run_pipeline(PipelineConfig const& config, std::span<Document const> documents) {
    return run_prepared(config, prepare(config, documents));
}

[[nodiscard]] inline nlohmann::json config_json(PipelineConfig const& c) {
    nlohmann::json j = {{"corpus", c.corpus_path},
                        {"format", to_string(c.format)},
                        {"query", c.query},
                        {"k_clusters", c.k_clusters},
                        {"top_k", c.top_k},
                        {"candidate_fraction", c.candidate_fraction},
                        {"max_queries", c.max_queries},
                        {"algorithm", to_string(c.algorithm)},
                        {"ranking", to_string(c.ranking)},
                        {"seed", c.seed},
                        {"nseg", c.nseg},
                        {"nit", c.nit}};
    if (c.partition_path) {
        j["partition"] = *c.partition_path;
    }
    return j;
}

[[nodiscard]] inline nlohmann::json to_json(ExpansionReport const& r, bool with_timings = true) {
    nlohmann::json clusters = nlohmann::json::array();
    for (auto const& c : r.clusters) {
        nlohmann::json entry = {{"cluster", c.cluster}, {"query", detail::query_json(c.query)}};
        if (c.evaluation) {
            entry["cluster_size"] = c.cluster_size;
            entry["precision"] = c.evaluation->precision;
            entry["recall"] = c.evaluation->recall;
            entry["f"] = c.evaluation->f_measure;
        }
        clusters.push_back(std::move(entry));
    }
    nlohmann::json j = {{"algorithm", to_string(r.config.algorithm)},
                        {"config", config_json(r.config)},
                        {"universe_size", r.universe_size},
                        {"pool_size", r.pool_size},
                        {"clusters", clusters},
                        {"collective_score", r.collective_score ? nlohmann::json(*r.collective_score) : nlohmann::json(nullptr)}};
    if (with_timings) {
        j["timings_ms"] = {{"clustering", r.clustering_ms}, {"expansion", r.expansion_ms}};
    }
    return j;
}

/// Aligned plain-text rendering of a report.
inline void print_text(std::ostream& os, ExpansionReport const& r, bool with_timings = true) {
    os << "algorithm: " << to_string(r.config.algorithm) << "  results: " << r.universe_size
       << "  pool: " << r.pool_size << "\n";
    os << std::left << std::setw(8) << "cluster" << std::setw(7) << "size" << std::setw(11) << "precision"
       << std::setw(9) << "recall" << std::setw(9) << "f" << "query\n";
    os << std::fixed << std::setprecision(4);
    for (auto const& c : r.clusters) {
        std::ostringstream q;
        bool first = true;
        for (auto const& k : c.query.original) {
            q << (first ? "" : " ") << k;
            first = false;
        }
        for (auto const& k : c.query.expansion) {
            q << (first ? "+" : " +") << k;
            first = false;
        }
        os << std::setw(8) << c.cluster;
        if (c.evaluation) {
            os << std::setw(7) << c.cluster_size << std::setw(11) << c.evaluation->precision << std::setw(9)
               << c.evaluation->recall << std::setw(9) << c.evaluation->f_measure;
        } else {
            os << std::setw(7) << "-" << std::setw(11) << "-" << std::setw(9) << "-" << std::setw(9) << "-";
        }
        os << q.str() << "\n";
    }
    if (r.collective_score) {
        os << "collective score: " << *r.collective_score << "\n";
    } else {
        os << "collective score: n/a (no per-cluster queries)\n";
    }
    if (with_timings) {
        os << "time (ms): clustering " << std::setprecision(3) << r.clustering_ms << ", expansion "
           << r.expansion_ms << "\n";
    }
    os.unsetf(std::ios::floatfield);
}

struct BenchRow {
    std::size_t size = 0;
    Algorithm algorithm = Algorithm::iskr;
    double clustering_ms = 0.0;
    double expansion_ms = 0.0;
};

/// Runs the pipeline on a generated corpus of each size, once per algorithm.
/// Truncation is disabled so each run sees all `size` results.
[[nodiscard]] inline std::vector<BenchRow> bench_scalability(PipelineConfig config, std::span<std::size_t const> sizes,
                                                             std::span<Algorithm const> algorithms,
                                                             synthetic::CorpusShape const& shape = {}) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw Error("benchmark sizes must be ascending");
    }
    config.query = {shape.query_word};
    config.partition_path.reset();
    std::vector<BenchRow> rows;
    for (auto n : sizes) {
        auto docs = synthetic::generate_corpus(n, config.seed, shape);
        config.top_k = n;
        auto prepared = prepare(config, docs);
        for (auto a : algorithms) {
            config.algorithm = a;
            auto report = run_prepared(config, prepared);
            rows.push_back({n, a, prepared.clustering_ms, report.expansion_ms});
        }
    }
    return rows;
}

inline void write_bench_csv(std::ostream& os, std::span<BenchRow const> rows) {
    os << "size,algorithm,clustering_ms,expansion_ms\n";
    for (auto const& r : rows) {
        os << r.size << ',' << to_string(r.algorithm) << ',' << r.clustering_ms << ',' << r.expansion_ms << '\n';
    }
}

}  // namespace qec
