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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qec/qec.hpp"

namespace {

std::map<std::string, qec::Algorithm> const algorithms = {
    {"iskr", qec::Algorithm::iskr},         {"pebc", qec::Algorithm::pebc},
    {"fmeasure", qec::Algorithm::fmeasure}, {"dataclouds", qec::Algorithm::dataclouds},
    {"cs", qec::Algorithm::cs},             {"oracle", qec::Algorithm::oracle}};
std::map<std::string, qec::Ranking> const rankings = {
    {"uniform", qec::Ranking::uniform}, {"document", qec::Ranking::document}, {"tfidf-sum", qec::Ranking::tfidf_sum}};
std::map<std::string, qec::InputFormat> const formats = {{"jsonl-text", qec::InputFormat::jsonl_text},
                                                         {"jsonl-structured", qec::InputFormat::jsonl_structured},
                                                         {"instance", qec::InputFormat::instance}};

/// Help text for a name-to-enum option: "{a,b,c} [default]".
template <class Map>
std::string choices(Map const& names, std::string const& fallback) {
    std::string out = "{";
    for (auto const& [name, value] : names) {
        out += (out.size() > 1 ? "," : "") + name;
    }
    return out + "} [" + fallback + "]";
}

std::uint64_t default_seed() {
    if (char const* env = std::getenv("QEC_SEED")) {
        try {
            return std::stoull(env);
        } catch (std::exception const&) {
            throw qec::Error(std::string("QEC_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

void add_input_options(CLI::App& app, qec::PipelineConfig& c) {
    app.add_option("-i,--input", c.corpus_path, "JSONL corpus or bare instance file")->required();
    app.add_option("-f,--format", c.format, "Input format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
        ->option_text(choices(formats, "jsonl-text"));
    app.add_option("-q,--query", c.query, "User query keywords");
    app.add_option("-k,--clusters", c.k_clusters, "Number of clusters")->default_val(c.k_clusters);
    app.add_option("--top-k", c.top_k, "Results kept after ranking")->default_val(c.top_k);
    app.add_option("--fraction", c.candidate_fraction, "Share of result words used as candidates")
        ->default_val(c.candidate_fraction);
    app.add_option("--max-queries", c.max_queries, "Cap on expanded queries")->default_val(c.max_queries);
    app.add_option("--ranking", c.ranking, "Result rank score")
        ->transform(CLI::CheckedTransformer(rankings, CLI::ignore_case).description(""))
        ->option_text(choices(rankings, "tfidf-sum"));
    app.add_option("--seed", c.seed, "Random seed (default: $QEC_SEED or 0)");
    app.add_option("--nseg", c.nseg, "PEBC segments per iteration")->default_val(c.nseg);
    app.add_option("--nit", c.nit, "PEBC iterations")->default_val(c.nit);
    app.add_option("--partition", c.partition_path, "Clustering to use instead of k-means");
    app.add_option("--oracle-max-len", c.oracle_max_len, "Largest expansion the oracle tries")
        ->default_val(c.oracle_max_len);
}

qec::PreparedInput load(qec::PipelineConfig const& c, std::optional<qec::ResultSet>& others) {
    if (c.format == qec::InputFormat::instance) {
        auto inst = qec::load_instance(c.corpus_path);
        others = inst.others;
        return qec::prepare(inst);
    }
    auto docs = qec::load_corpus(c.corpus_path, c.format == qec::InputFormat::jsonl_text
                                                    ? qec::CorpusFormat::jsonl_text
                                                    : qec::CorpusFormat::jsonl_structured);
    return qec::prepare(c, docs);
}

qec::ResultSet others_for(qec::PreparedInput const& in, std::optional<qec::ResultSet> const& others,
                          std::size_t i) {
    return others ? *others : in.universe.all() - in.partition.clusters[i];
}

nlohmann::json traces(qec::PipelineConfig const& c, qec::PreparedInput const& in,
                      std::optional<qec::ResultSet> const& others) {
    auto out = nlohmann::json::array();
    for (std::size_t i = 0; i < in.partition.size(); ++i) {
        auto const& cluster = in.partition.clusters[i];
        auto rest = others_for(in, others, i);
        if (c.algorithm == qec::Algorithm::iskr) {
            std::vector<qec::iskr::Move> moves;
            (void)qec::iskr::refine(in.universe, cluster, rest, in.pool, {0, &moves, {}});
            out.push_back({{"cluster", i}, {"trace", qec::iskr::trace_to_json(moves, in.universe)}});
        } else if (c.algorithm == qec::Algorithm::pebc) {
            auto res = qec::pebc::converge_detailed(in.universe, cluster, rest, in.pool,
                                                    {c.nseg, c.nit, c.seed + i, qec::pebc::TargetMetric::weighted});
            out.push_back({{"cluster", i}, {"trace", qec::pebc::trace_to_json(res.trace, in.universe)}});
        }
    }
    return out;
}

std::vector<std::size_t> parse_sizes(std::string const& text) {
    std::vector<std::size_t> sizes;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        auto part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!part.empty()) {
            sizes.push_back(std::stoul(part));
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    return sizes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query expansion from clustered search results"};
    app.require_subcommand(1);

    qec::PipelineConfig run_cfg;
    std::string output = "text";
    std::string trace_path;
    auto* run = app.add_subcommand("run", "Cluster the results and expand one query per cluster");
    add_input_options(*run, run_cfg);
    run->add_option("-a,--algorithm", run_cfg.algorithm, "Expansion method")
        ->transform(CLI::CheckedTransformer(algorithms, CLI::ignore_case).description(""))
        ->option_text(choices(algorithms, "iskr"));
    run->add_option("-o,--output", output, "Report format")->check(CLI::IsMember({"text", "json"}));
    run->add_option("--trace", trace_path, "Write ISKR move or PEBC sample traces as JSON");
    run->add_flag("--no-timings", "Omit timings from the report");

    qec::PipelineConfig oracle_cfg;
    auto* orc = app.add_subcommand("oracle", "Exact best expansion per cluster by exhaustive search");
    add_input_options(*orc, oracle_cfg);

    qec::PipelineConfig eval_cfg;
    std::string queries_path;
    auto* eval = app.add_subcommand("eval", "Score a supplied query per cluster");
    add_input_options(*eval, eval_cfg);
    eval->add_option("--queries", queries_path, "JSON {\"queries\": [[keyword, ...], ...]}, one per cluster")
        ->required();

    qec::PipelineConfig bench_cfg;
    bench_cfg.ranking = qec::Ranking::uniform;
    std::string sizes_text = "100,200,300,400,500";
    std::vector<std::string> bench_algos = {"iskr", "pebc"};
    std::string csv_path;
    auto* bench = app.add_subcommand("bench", "Time clustering and expansion on generated corpora");
    bench->add_option("--sizes", sizes_text, "Comma-separated result counts, ascending")->default_val(sizes_text);
    bench->add_option("-a,--algorithm", bench_algos, "Algorithms to time")->default_str("iskr pebc");
    bench->add_option("-k,--clusters", bench_cfg.k_clusters, "Number of clusters")->default_val(bench_cfg.k_clusters);
    bench->add_option("--fraction", bench_cfg.candidate_fraction, "Share of result words used as candidates")
        ->default_val(bench_cfg.candidate_fraction);
    bench->add_option("--seed", bench_cfg.seed, "Random seed (default: $QEC_SEED or 0)");
    bench->add_option("--csv", csv_path, "Write CSV here instead of stdout");

    try {
        auto const seed = default_seed();
        for (auto* c : {&run_cfg, &oracle_cfg, &eval_cfg, &bench_cfg}) {
            c->seed = seed;
        }
    } catch (qec::Error const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::optional<qec::ResultSet> others;
            auto in = load(run_cfg, others);
            auto report = qec::run_prepared(run_cfg, in, others ? &*others : nullptr);
            if (output == "json") {
                std::cout << qec::to_json(report, run->count("--no-timings") == 0).dump(2) << "\n";
            } else {
                qec::print_text(std::cout, report, run->count("--no-timings") == 0);
            }
            if (!trace_path.empty()) {
                std::ofstream out(trace_path);
                if (!out) {
                    throw qec::Error("cannot write trace file " + trace_path);
                }
                out << traces(run_cfg, in, others).dump(2) << "\n";
            }
        } else if (orc->parsed()) {
            std::optional<qec::ResultSet> others;
            auto in = load(oracle_cfg, others);
            auto clusters = nlohmann::json::array();
            for (std::size_t i = 0; i < in.partition.size(); ++i) {
                auto best = qec::oracle::brute_force_best(in.universe, in.partition.clusters[i],
                                                          others_for(in, others, i), in.pool,
                                                          oracle_cfg.oracle_max_len);
                clusters.push_back({{"cluster", i},
                                    {"expansion", std::vector<std::string>(best.best_query.expansion.begin(),
                                                                           best.best_query.expansion.end())},
                                    {"f", best.best_f},
                                    {"evaluated", best.evaluated_count}});
            }
            std::cout << nlohmann::json{{"clusters", clusters}}.dump(2) << "\n";
        } else if (eval->parsed()) {
            std::optional<qec::ResultSet> others;
            auto in = load(eval_cfg, others);
            std::ifstream qf(queries_path);
            if (!qf) {
                throw qec::Error("cannot read queries file " + queries_path);
            }
            auto j = nlohmann::json::parse(qf);
            auto lists = j.at("queries").get<std::vector<std::vector<std::string>>>();
            if (lists.size() != in.partition.size()) {
                throw qec::Error("expected " + std::to_string(in.partition.size()) + " queries, got " +
                                 std::to_string(lists.size()));
            }
            auto clusters = nlohmann::json::array();
            std::vector<double> fs;
            for (std::size_t i = 0; i < lists.size(); ++i) {
                auto const& c = in.partition.clusters[i];
                auto q = in.universe.query();
                for (auto const& w : lists[i]) {
                    q.add(qec::canonicalize(w));
                }
                auto scope = c | others_for(in, others, i);
                auto e = qec::evaluate(qec::evaluate_query(q, in.universe) & scope, c, in.universe);
                fs.push_back(e.f_measure);
                clusters.push_back({{"cluster", i},
                                    {"expansion", std::vector<std::string>(q.expansion.begin(), q.expansion.end())},
                                    {"precision", e.precision},
                                    {"recall", e.recall},
                                    {"f", e.f_measure}});
            }
            std::cout << nlohmann::json{{"clusters", clusters}, {"collective_score", qec::collective_score(fs)}}.dump(2)
                      << "\n";
        } else if (bench->parsed()) {
            std::vector<qec::Algorithm> algos;
            for (auto const& name : bench_algos) {
                auto it = algorithms.find(name);
                if (it == algorithms.end()) {
                    throw qec::Error("unknown algorithm " + name);
                }
                algos.push_back(it->second);
            }
            auto sizes = parse_sizes(sizes_text);
            auto rows = qec::bench_scalability(bench_cfg, sizes, algos);
            if (csv_path.empty()) {
                qec::write_bench_csv(std::cout, rows);
            } else {
                std::ofstream out(csv_path);
                if (!out) {
                    throw qec::Error("cannot write " + csv_path);
                }
                qec::write_bench_csv(out, rows);
            }
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
