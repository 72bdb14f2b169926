#pragma once

// Chain model, the gluing rule table and overlay scoring.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "biphoton/errors.hpp"

namespace biphoton {

enum class MonoblockType { A, B };

inline char type_char(MonoblockType t) { return t == MonoblockType::A ? 'a' : 'b'; }

/// A forward (+1) or back (-1) displacement of an attached monoblock.
class Shift {
   public:
    /// Displacement magnitude in monoblock lengths. Documentary only.
    static constexpr double kMagnitude = 0.25;

    constexpr Shift() = default;
    constexpr explicit Shift(int sign) : sign_(sign) {
        if (sign != 1 && sign != -1) throw Error("shift sign must be +1 or -1");
    }
    static constexpr Shift forward() { return Shift(+1); }
    static constexpr Shift back() { return Shift(-1); }

    constexpr int sign() const { return sign_; }
    constexpr Shift flipped() const { return Shift(-sign_); }
    char symbol() const { return sign_ > 0 ? '+' : '-'; }

    friend constexpr bool operator==(Shift, Shift) = default;

   private:
    int sign_ = +1;
};

struct Block {
    MonoblockType type = MonoblockType::A;
    Shift shift;
    friend bool operator==(const Block &, const Block &) = default;
};

struct Chain {
    std::vector<Block> blocks;

    std::size_t length() const { return blocks.size(); }
    friend bool operator==(const Chain &, const Chain &) = default;
};

struct SegmentPair {
    MonoblockType c1, c2;
    Shift s1, s2;
};

struct OverlayReport {
    std::size_t length = 0;
    std::size_t noncritical_count = 0;
    long long cr_sum = 0;
    double noncr_fraction = 0;
};

/// -1 for the (b, a) type pair, +1 otherwise.
constexpr int type_pair_sign(MonoblockType c1, MonoblockType c2) {
    return (c1 == MonoblockType::B && c2 == MonoblockType::A) ? -1 : +1;
}

/// +1 when the superimposed pair glues well.
///
/// Good: aa, ab, bb with equal shifts; ba with opposite shifts.
inline int criticality(const SegmentPair &seg) {
    const bool same_shift = seg.s1 == seg.s2;
    const bool ba = seg.c1 == MonoblockType::B && seg.c2 == MonoblockType::A;
    return (same_shift != ba) ? +1 : -1;
}

/// (1 + cr)/2.
inline double noncr_indicator(int cr) {
    if (cr != 1 && cr != -1) throw Error("criticality index must be +1 or -1, got " + std::to_string(cr));
    return (1.0 + cr) / 2.0;
}

inline OverlayReport overlay(const Chain &chain1, const Chain &chain2) {
    if (chain1.length() != chain2.length()) {
        throw LengthMismatch("chain lengths differ: " + std::to_string(chain1.length()) + " vs " +
                             std::to_string(chain2.length()));
    }
    if (chain1.length() == 0) throw EmptyChains("cannot overlay empty chains");
    OverlayReport r;
    r.length = chain1.length();
    for (std::size_t j = 0; j < r.length; ++j) {
        const auto &x = chain1.blocks[j];
        const auto &y = chain2.blocks[j];
        r.cr_sum += criticality({x.type, y.type, x.shift, y.shift});
    }
    r.noncritical_count = static_cast<std::size_t>((static_cast<long long>(r.length) + r.cr_sum) / 2);
    r.noncr_fraction = static_cast<double>(r.noncritical_count) / static_cast<double>(r.length);
    return r;
}

// Text form: one block per line, "<type><sign>", e.g. "a+" or "b-".

inline std::string block_text(const Block &b) { return {type_char(b.type), b.shift.symbol()}; }

inline std::optional<Block> parse_block(std::string_view s) {
    if (s.size() != 2) return std::nullopt;
    Block b;
    switch (s[0]) {
        case 'a': b.type = MonoblockType::A; break;
        case 'b': b.type = MonoblockType::B; break;
        default: return std::nullopt;
    }
    switch (s[1]) {
        case '+': b.shift = Shift::forward(); break;
        case '-': b.shift = Shift::back(); break;
        default: return std::nullopt;
    }
    return b;
}

inline void write_chain(std::ostream &out, const Chain &chain) {
    for (const auto &b : chain.blocks) out << type_char(b.type) << b.shift.symbol() << '\n';
}

/// Blank lines and a trailing '\r' are tolerated; anything else malformed throws ParseError.
inline Chain read_chain(std::istream &in) {
    Chain chain;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto b = parse_block(line);
        if (!b) throw ParseError("line " + std::to_string(lineno) + ": bad block '" + line + "'");
        chain.blocks.push_back(*b);
    }
    return chain;
}

}  // namespace biphoton
