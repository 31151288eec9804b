// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorKind {
    NonPrimitive,
    ZeroRowOrColumn,
    InvalidArgument,
    IllConditioned,
    DegenerateGap,
    EnumerationCap,
    InsufficientGrid,
    NonConvexInput,
    DimensionUnsupported,
    NoConvergence,
    Reducible,
    SearchExhausted,
    Validation,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::NonPrimitive: return "NonPrimitive";
    case ErrorKind::ZeroRowOrColumn: return "ZeroRowOrColumn";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::DegenerateGap: return "DegenerateGap";
    case ErrorKind::EnumerationCap: return "EnumerationCap";
    case ErrorKind::InsufficientGrid: return "InsufficientGrid";
    case ErrorKind::NonConvexInput: return "NonConvexInput";
    case ErrorKind::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::Validation: return "Validation";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Symbols are 0-based internally.
using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

inline std::string format_word(const Word& w, int q = 9) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (q > 9 && i > 0) out += '.';
        out += std::to_string(int(w[i]) + 1);
    }
    return out;
}

// Accepts "121" (q <= 9) or "1.2.1".
inline Word parse_word(const std::string& s) {
    Word w;
    if (s.find('.') != std::string::npos) {
        std::size_t pos = 0;
        while (pos <= s.size()) {
            auto next = s.find('.', pos);
            if (next == std::string::npos) next = s.size();
            int v = std::stoi(s.substr(pos, next - pos));
            if (v < 1 || v > 255) throw Error(ErrorKind::InvalidArgument, "symbol out of range in word " + s);
            w.push_back(Symbol(v - 1));
            pos = next + 1;
        }
    } else {
        for (char ch : s) {
            if (ch < '1' || ch > '9') throw Error(ErrorKind::InvalidArgument, "bad symbol in word " + s);
            w.push_back(Symbol(ch - '1'));
        }
    }
    return w;
}

// Counter-based generator: output k of stream s is a pure function of (seed, s, k).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace thermo
