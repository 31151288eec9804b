// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/common.hpp"
#include "thermo/parallel.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace thermo {

class Subshift {
public:
    Subshift() = default;

    int q() const { return q_; }
    int mixing_gap() const { return mixing_gap_; }
    bool allowed(int a, int b) const { return adj_[std::size_t(a) * q_ + b] != 0; }
    const std::vector<std::uint8_t>& adjacency() const { return adj_; }

    bool admissible(const Word& w) const {
        for (auto s : w)
            if (s >= q_) return false;
        for (std::size_t i = 1; i < w.size(); ++i)
            if (!allowed(w[i - 1], w[i])) return false;
        return true;
    }

    // Admissible and last -> first allowed, so the word repeats periodically.
    bool cyclically_admissible(const Word& w) const {
        return !w.empty() && admissible(w) && allowed(w.back(), w.front());
    }

    std::vector<std::vector<int>> adjacency_rows() const {
        std::vector<std::vector<int>> rows(q_, std::vector<int>(q_));
        for (int a = 0; a < q_; ++a)
            for (int b = 0; b < q_; ++b) rows[a][b] = allowed(a, b);
        return rows;
    }

private:
    friend Subshift new_subshift(int q, const std::vector<std::vector<int>>& adjacency);

    int q_ = 0;
    int mixing_gap_ = 0;
    std::vector<std::uint8_t> adj_;
};

namespace detail {
inline std::vector<std::uint8_t> bool_product(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y,
                                              int q) {
    std::vector<std::uint8_t> out(std::size_t(q) * q, 0);
    for (int i = 0; i < q; ++i)
        for (int k = 0; k < q; ++k)
            if (x[std::size_t(i) * q + k])
                for (int j = 0; j < q; ++j)
                    if (y[std::size_t(k) * q + j]) out[std::size_t(i) * q + j] = 1;
    return out;
}
} // namespace detail

inline Subshift new_subshift(int q, const std::vector<std::vector<int>>& adjacency) {
    if (q < 1 || q > 255) throw Error(ErrorKind::InvalidArgument, "alphabet size must be in [1, 255]");
    if (int(adjacency.size()) != q) throw Error(ErrorKind::InvalidArgument, "adjacency must have q rows");
    Subshift s;
    s.q_ = q;
    s.adj_.assign(std::size_t(q) * q, 0);
    for (int a = 0; a < q; ++a) {
        if (int(adjacency[a].size()) != q) throw Error(ErrorKind::InvalidArgument, "adjacency must be square");
        for (int b = 0; b < q; ++b) {
            int v = adjacency[a][b];
            if (v != 0 && v != 1) throw Error(ErrorKind::InvalidArgument, "adjacency entries must be 0 or 1");
            s.adj_[std::size_t(a) * q + b] = std::uint8_t(v);
        }
    }
    for (int a = 0; a < q; ++a) {
        bool row = false, col = false;
        for (int b = 0; b < q; ++b) {
            row = row || s.allowed(a, b);
            col = col || s.allowed(b, a);
        }
        if (!row || !col) throw Error(ErrorKind::ZeroRowOrColumn, "symbol " + std::to_string(a + 1));
    }
    auto power = s.adj_;
    for (int e = 1; e <= q * q; ++e) {
        bool positive = true;
        for (auto v : power) positive = positive && v;
        if (positive) {
            s.mixing_gap_ = e - 1;
            return s;
        }
        power = detail::bool_product(power, s.adj_, q);
    }
    throw Error(ErrorKind::NonPrimitive, "no power up to q^2 is entrywise positive");
}

inline Subshift full_shift(int q) { return new_subshift(q, std::vector<std::vector<int>>(q, std::vector<int>(q, 1))); }

constexpr std::uint64_t kCountSaturated = std::numeric_limits<std::uint64_t>::max();

// Sum of entries of adjacency^(n-1); saturates at kCountSaturated.
inline std::uint64_t count_words(const Subshift& s, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "word length must be >= 1");
    const int q = s.q();
    std::vector<std::uint64_t> ends(q, 1);
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<std::uint64_t> next(q, 0);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                if (s.allowed(a, b)) {
                    if (next[b] > kCountSaturated - ends[a]) return kCountSaturated;
                    next[b] += ends[a];
                }
        ends = std::move(next);
    }
    std::uint64_t total = 0;
    for (auto v : ends) {
        if (total > kCountSaturated - v) return kCountSaturated;
        total += v;
    }
    return total;
}

// Depth-first walk below `prefix` carrying a per-node state. visit(word, state)
// fires for every word strictly longer than the prefix, up to length n, in
// lexicographic preorder.
template<typename State, typename Extend, typename Visit>
void grow_words(const Subshift& s, std::size_t n, Word& word, const State& state, Extend& extend, Visit& visit) {
    if (word.size() >= n) return;
    for (int a = 0; a < s.q(); ++a) {
        if (!word.empty() && !s.allowed(word.back(), a)) continue;
        word.push_back(Symbol(a));
        State next = extend(state, word);
        visit(word, next);
        grow_words(s, n, word, next, extend, visit);
        word.pop_back();
    }
}

// Calls f(word) for each admissible extension of `prefix` to length n.
template<typename F>
void for_each_extension(const Subshift& s, const Word& prefix, std::size_t n, F&& f) {
    if (prefix.size() == n) {
        f(prefix);
        return;
    }
    Word w = prefix;
    auto extend = [](int, const Word&) { return 0; };
    auto visit = [&](const Word& x, int) {
        if (x.size() == n) f(x);
    };
    grow_words(s, n, w, 0, extend, visit);
}

template<typename F>
void for_each_word(const Subshift& s, std::size_t n, F&& f) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "word length must be >= 1");
    for_each_extension(s, Word{}, n, f);
}

inline std::vector<Word> enumerate_words(const Subshift& s, std::size_t n) {
    std::vector<Word> out;
    auto c = count_words(s, n);
    if (c < (std::uint64_t(1) << 26)) out.reserve(std::size_t(c));
    for_each_word(s, n, [&](const Word& w) { out.push_back(w); });
    return out;
}

// Prefixes used to split enumeration of length-n words into chunks. The split
// depends only on (s, n), never on the thread count.
inline std::vector<Word> chunk_prefixes(const Subshift& s, std::size_t n, std::uint64_t target_chunks = 256) {
    std::size_t k = 1;
    while (k < n && count_words(s, k) < target_chunks) ++k;
    return enumerate_words(s, k);
}

// Parallel enumeration; chunk results are concatenated in prefix order, so the
// output matches enumerate_words exactly.
inline std::vector<Word> enumerate_words_parallel(const Subshift& s, std::size_t n) {
    auto prefixes = chunk_prefixes(s, n);
    std::vector<std::vector<Word>> parts(prefixes.size());
    parallel_for(prefixes.size(), [&](std::size_t i) {
        for_each_extension(s, prefixes[i], n, [&](const Word& w) { parts[i].push_back(w); });
    });
    std::vector<Word> out;
    for (auto& p : parts)
        for (auto& w : p) out.push_back(std::move(w));
    return out;
}

// All K of length k with i K j admissible.
inline std::vector<Word> joining_words(const Subshift& s, int i, int j, std::size_t k) {
    std::vector<Word> out;
    if (k == 0) {
        if (s.allowed(i, j)) out.emplace_back();
        return out;
    }
    Word start{Symbol(i)};
    for_each_extension(s, start, k + 1, [&](const Word& w) {
        if (s.allowed(w.back(), j)) out.emplace_back(w.begin() + 1, w.end());
    });
    return out;
}

} // namespace thermo
