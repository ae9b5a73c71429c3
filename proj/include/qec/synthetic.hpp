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
#include <cstdint>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "qec/corpus.hpp"

namespace qec::synthetic {

/**
 * Shape of a generated corpus with planted cluster structure.
 *
 * Every document contains query_word. Document i belongs to group i % groups
 * and draws signature_per_doc distinct words from its group's
 * signature_words-word vocabulary plus noise_per_doc words from a shared
 * noise_words-word vocabulary. Each drawn word occurs 1 to max_tf times.
 */
struct CorpusShape {
    std::string query_word = "query";
    std::size_t groups = 3;
    std::size_t signature_words = 12;
    std::size_t signature_per_doc = 6;
    std::size_t noise_words = 60;
    std::size_t noise_per_doc = 4;
    std::uint32_t max_tf = 3;
};

[[nodiscard]] inline std::vector<Document> generate_corpus(std::size_t n, std::uint64_t seed,
                                                           CorpusShape const& shape = {}) {
    std::mt19937_64 rng(seed);
    auto draw = [&](std::size_t vocab, std::size_t count) {
        std::vector<std::size_t> all(vocab);
        for (std::size_t i = 0; i < vocab; ++i) {
            all[i] = i;
        }
        std::vector<std::size_t> out;
        std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
        return out;
    };
    std::uniform_int_distribution<std::uint32_t> tf(1, shape.max_tf);
    std::vector<Document> docs;
    docs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto group = i % shape.groups;
        std::string text = shape.query_word;
        auto emit = [&](std::string const& word) {
            for (auto t = tf(rng); t > 0; --t) {
                text += ' ';
                text += word;
            }
        };
        for (auto w : draw(shape.signature_words, shape.signature_per_doc)) {
            emit("g" + std::to_string(group) + "w" + std::to_string(w));
        }
        for (auto w : draw(shape.noise_words, shape.noise_per_doc)) {
            emit("noise" + std::to_string(w));
        }
        Document doc;
        doc.id = "s" + std::to_string(i);
        doc.text = std::move(text);
        doc.tokens = tokenize(doc);
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace qec::synthetic
