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
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qec {

/// Index of a result inside a ResultUniverse.
using ResultIndex = std::uint32_t;

/**
 * Fixed-width bitset over the results of one universe.
 *
 * All binary operations require both operands to have the same width;
 * mixing sets from different universes is a programming error and throws.
 */
class ResultSet {
  public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    ResultSet() = default;
    explicit ResultSet(std::size_t width, bool filled = false)
        : width_(width), words_((width + word_bits - 1) / word_bits, filled ? ~word_type{0} : 0) {
        trim();
    }

    static ResultSet full(std::size_t width) { return ResultSet(width, true); }

    [[nodiscard]] std::size_t width() const noexcept { return width_; }

    [[nodiscard]] bool test(ResultIndex i) const {
        check_index(i);
        return (words_[i / word_bits] >> (i % word_bits)) & 1U;
    }
    void set(ResultIndex i) {
        check_index(i);
        words_[i / word_bits] |= word_type{1} << (i % word_bits);
    }
    void reset(ResultIndex i) {
        check_index(i);
        words_[i / word_bits] &= ~(word_type{1} << (i % word_bits));
    }

    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : words_) {
            n += static_cast<std::size_t>(std::popcount(w));
        }
        return n;
    }
    [[nodiscard]] bool empty() const noexcept {
        for (auto w : words_) {
            if (w != 0) {
                return false;
            }
        }
        return true;
    }
    [[nodiscard]] bool any() const noexcept { return !empty(); }

    /// True iff this and other share at least one member.
    [[nodiscard]] bool intersects(ResultSet const& other) const {
        check_width(other);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & other.words_[i]) != 0) {
                return true;
            }
        }
        return false;
    }
    /// True iff every member of this is also in other.
    [[nodiscard]] bool is_subset_of(ResultSet const& other) const {
        check_width(other);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if ((words_[i] & ~other.words_[i]) != 0) {
                return false;
            }
        }
        return true;
    }

    ResultSet& operator&=(ResultSet const& other) {
        check_width(other);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] &= other.words_[i];
        }
        return *this;
    }
    ResultSet& operator|=(ResultSet const& other) {
        check_width(other);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] |= other.words_[i];
        }
        return *this;
    }
    /// Set difference: removes every member of other.
    ResultSet& operator-=(ResultSet const& other) {
        check_width(other);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] &= ~other.words_[i];
        }
        return *this;
    }

    friend ResultSet operator&(ResultSet lhs, ResultSet const& rhs) { return lhs &= rhs; }
    friend ResultSet operator|(ResultSet lhs, ResultSet const& rhs) { return lhs |= rhs; }
    friend ResultSet operator-(ResultSet lhs, ResultSet const& rhs) { return lhs -= rhs; }

    /// Complement within the width.
    [[nodiscard]] ResultSet complement() const {
        ResultSet out = *this;
        for (auto& w : out.words_) {
            w = ~w;
        }
        out.trim();
        return out;
    }

    /// Calls fn(index) for every member in ascending order.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            word_type w = words_[wi];
            while (w != 0) {
                auto bit = static_cast<std::size_t>(std::countr_zero(w));
                fn(static_cast<ResultIndex>(wi * word_bits + bit));
                w &= w - 1;
            }
        }
    }

    [[nodiscard]] std::vector<ResultIndex> members() const {
        std::vector<ResultIndex> out;
        out.reserve(count());
        for_each([&](ResultIndex i) { out.push_back(i); });
        return out;
    }

    friend bool operator==(ResultSet const&, ResultSet const&) = default;

  private:
    void trim() noexcept {
        if (auto tail = width_ % word_bits; tail != 0 && !words_.empty()) {
            words_.back() &= (word_type{1} << tail) - 1;
        }
    }
    void check_index(ResultIndex i) const {
        if (i >= width_) {
            throw std::out_of_range("result index out of range");
        }
    }
    void check_width(ResultSet const& other) const {
        if (other.width_ != width_) {
            throw std::invalid_argument("result sets of different universes");
        }
    }

    std::size_t width_ = 0;
    std::vector<word_type> words_;
};

}  // namespace qec
