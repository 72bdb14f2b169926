#pragma once

// One-way controllers: deterministic local rules, shared randomness over
// them, and biphoton measurement. Exact values, the 16-strategy enumeration
// and Monte Carlo assembly runs.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "biphoton/assembly.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/quantum.hpp"
#include "biphoton/random.hpp"

namespace biphoton {

inline constexpr MonoblockType kTypes[2] = {MonoblockType::A, MonoblockType::B};

/// Shift sign chosen at one site as a function of the local monoblock type.
struct LocalRule {
    int on_a = +1;
    int on_b = +1;

    int operator()(MonoblockType t) const { return t == MonoblockType::A ? on_a : on_b; }
    friend bool operator==(const LocalRule &, const LocalRule &) = default;
};

struct DeterministicStrategy {
    LocalRule site1, site2;

    /// Position in enumerate_deterministic(): 8*[s1a=-] + 4*[s1b=-] + 2*[s2a=-] + [s2b=-].
    std::size_t index() const {
        return (site1.on_a < 0 ? 8u : 0u) + (site1.on_b < 0 ? 4u : 0u) + (site2.on_a < 0 ? 2u : 0u) +
               (site2.on_b < 0 ? 1u : 0u);
    }
    static DeterministicStrategy from_index(std::size_t i) {
        auto sign = [&](unsigned bit) { return (i >> bit) & 1u ? -1 : +1; };
        return {{sign(3), sign(2)}, {sign(1), sign(0)}};
    }
    friend bool operator==(const DeterministicStrategy &, const DeterministicStrategy &) = default;
};

/// Shared randomness: the CPU draws one deterministic strategy per step.
class RandomizedClassicalStrategy {
   public:
    /// Weights indexed as DeterministicStrategy::index(). Throws Error unless
    /// they are nonnegative and sum to 1 within 1e-12.
    explicit RandomizedClassicalStrategy(const std::array<double, 16> &weights) : weights_(weights) {
        double total = 0;
        for (double w : weights_) {
            if (!(w >= 0)) throw Error("mixture weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > kStructuralTol) throw Error("mixture weights must sum to 1");
    }

    static RandomizedClassicalStrategy uniform() {
        std::array<double, 16> w;
        w.fill(1.0 / 16);
        return RandomizedClassicalStrategy(w);
    }

    const std::array<double, 16> &weights() const { return weights_; }

    DeterministicStrategy pick(double u) const {
        double cdf = 0;
        for (std::size_t i = 0; i < 15; ++i) {
            cdf += weights_[i];
            if (u < cdf) return DeterministicStrategy::from_index(i);
        }
        // Zero-weight tail entries are never picked.
        std::size_t last = 15;
        while (last > 0 && weights_[last] == 0) --last;
        return DeterministicStrategy::from_index(last);
    }

   private:
    std::array<double, 16> weights_;
};

struct QuantumStrategy {
    BiphotonState state = BiphotonState::phi_plus();
    MeasurementSettings settings = MeasurementSettings::corrected();

    const Observable &site1_observable(MonoblockType t) const {
        return t == MonoblockType::A ? settings.a1 : settings.b1;
    }
    const Observable &site2_observable(MonoblockType t) const {
        return t == MonoblockType::A ? settings.a2 : settings.b2;
    }
};

using Strategy = std::variant<DeterministicStrategy, RandomizedClassicalStrategy, QuantumStrategy>;

struct StrategyValue {
    double exact_noncr = 0;
    double chsh_S = 0;
};

/// E(NonCr) = (1 + S/4)/2.
constexpr double noncr_from_chsh(double s) { return (1.0 + s / 4.0) / 2.0; }

inline StrategyValue exact_value(const DeterministicStrategy &d) {
    double noncr = 0;
    for (auto c1 : kTypes)
        for (auto c2 : kTypes)
            noncr += noncr_indicator(criticality({c1, c2, Shift(d.site1(c1)), Shift(d.site2(c2))}));
    const int a1 = d.site1.on_a, b1 = d.site1.on_b, a2 = d.site2.on_a, b2 = d.site2.on_b;
    return {noncr / 4.0, static_cast<double>(a1 * b2 + b1 * b2 + a1 * a2 - b1 * a2)};
}

inline StrategyValue exact_value(const RandomizedClassicalStrategy &r) {
    StrategyValue v;
    for (std::size_t i = 0; i < 16; ++i) {
        const auto d = exact_value(DeterministicStrategy::from_index(i));
        v.exact_noncr += r.weights()[i] * d.exact_noncr;
        v.chsh_S += r.weights()[i] * d.chsh_S;
    }
    return v;
}

inline StrategyValue exact_value(const QuantumStrategy &q) {
    const double s = chsh(q.state, q.settings);
    return {noncr_from_chsh(s), s};
}

inline StrategyValue exact_value(const Strategy &s) {
    return std::visit([](const auto &x) { return exact_value(x); }, s);
}

/// Probability of good gluing averaged over the four type pairs, computed
/// from the Born-rule joint distributions rather than the CHSH shortcut.
inline double noncr_from_distributions(const QuantumStrategy &q) {
    double total = 0;
    for (auto c1 : kTypes)
        for (auto c2 : kTypes) {
            const auto d = joint_distribution(q.state, q.site1_observable(c1), q.site2_observable(c2));
            for (int s1 : {+1, -1})
                for (int s2 : {+1, -1})
                    total += d.at(s1, s2) * noncr_indicator(criticality({c1, c2, Shift(s1), Shift(s2)}));
        }
    return total / 4.0;
}

inline std::vector<std::pair<DeterministicStrategy, StrategyValue>> enumerate_deterministic() {
    std::vector<std::pair<DeterministicStrategy, StrategyValue>> out;
    out.reserve(16);
    for (std::size_t i = 0; i < 16; ++i) {
        const auto d = DeterministicStrategy::from_index(i);
        out.emplace_back(d, exact_value(d));
    }
    return out;
}

/// Shift signs chosen by the controller for one step.
template <BitStream64 G>
OutcomePair step(const Strategy &strategy, MonoblockType c1, MonoblockType c2, G &rng) {
    struct Visitor {
        MonoblockType c1, c2;
        G &rng;
        OutcomePair operator()(const DeterministicStrategy &d) const { return {d.site1(c1), d.site2(c2)}; }
        OutcomePair operator()(const RandomizedClassicalStrategy &r) const {
            return (*this)(r.pick(unit_uniform(rng)));
        }
        OutcomePair operator()(const QuantumStrategy &q) const {
            return sample(q.state, q.site1_observable(c1), q.site2_observable(c2), rng);
        }
    };
    return std::visit(Visitor{c1, c2, rng}, strategy);
}

/// Types for one step: site 1 coin, then site 2 coin.
template <BitStream64 G>
std::pair<MonoblockType, MonoblockType> draw_types(G &rng) {
    const auto c1 = coin(rng) ? MonoblockType::B : MonoblockType::A;
    const auto c2 = coin(rng) ? MonoblockType::B : MonoblockType::A;
    return {c1, c2};
}

template <BitStream64 G>
std::pair<Chain, Chain> run_assembly(const Strategy &strategy, std::size_t steps, G &rng) {
    std::pair<Chain, Chain> chains;
    chains.first.blocks.reserve(steps);
    chains.second.blocks.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto [c1, c2] = draw_types(rng);
        const auto o = step(strategy, c1, c2, rng);
        chains.first.blocks.push_back({c1, Shift(o.s1)});
        chains.second.blocks.push_back({c2, Shift(o.s2)});
    }
    return chains;
}

struct Estimate {
    double mean = 0;
    double standard_error = 0;
};

inline double binomial_stderr(double mean, std::size_t n) {
    return std::sqrt(mean * (1.0 - mean) / static_cast<double>(n));
}

template <BitStream64 G>
Estimate estimate_mc(const Strategy &strategy, std::size_t steps, G &rng) {
    if (steps < 1) throw Error("steps must be >= 1");
    const auto [c1, c2] = run_assembly(strategy, steps, rng);
    const double mean = overlay(c1, c2).noncr_fraction;
    return {mean, binomial_stderr(mean, steps)};
}

// Strategy spec text: "det:<s1a><s1b><s2a><s2b>", "mix:<16 weights>",
// "quantum:corrected" or "quantum:paper-verbatim".

namespace detail {

// Accepts '+', '-' and U+2212. Advances `pos`.
inline int parse_sign(std::string_view s, std::size_t &pos) {
    if (pos < s.size() && s[pos] == '+') return ++pos, +1;
    if (pos < s.size() && s[pos] == '-') return ++pos, -1;
    if (s.substr(pos, 3) == "\xE2\x88\x92") return pos += 3, -1;
    throw ParseError("expected '+' or '-' in strategy spec");
}

}  // namespace detail

inline Strategy parse_strategy(std::string_view spec) {
    if (spec.starts_with("det:")) {
        const auto body = spec.substr(4);
        std::size_t pos = 0;
        DeterministicStrategy d;
        d.site1.on_a = detail::parse_sign(body, pos);
        d.site1.on_b = detail::parse_sign(body, pos);
        d.site2.on_a = detail::parse_sign(body, pos);
        d.site2.on_b = detail::parse_sign(body, pos);
        if (pos != body.size()) throw ParseError("trailing characters in det: spec");
        return d;
    }
    if (spec.starts_with("mix:")) {
        std::array<double, 16> w{};
        std::string body(spec.substr(4));
        std::size_t start = 0, n = 0;
        while (true) {
            const auto comma = body.find(',', start);
            const auto field = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (n >= 16) throw ParseError("mix: spec needs exactly 16 weights");
            std::size_t used = 0;
            try {
                w[n] = std::stod(field, &used);
            } catch (const std::exception &) {
                throw ParseError("bad weight '" + field + "' in mix: spec");
            }
            if (used != field.size()) throw ParseError("bad weight '" + field + "' in mix: spec");
            ++n;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (n != 16) throw ParseError("mix: spec needs exactly 16 weights");
        double total = 0;
        for (double x : w) {
            if (!(x >= 0) || !std::isfinite(x)) throw ParseError("mix: weights must be finite and nonnegative");
            total += x;
        }
        if (std::abs(total - 1.0) > kSpectralTol) throw ParseError("mix: weights must sum to 1");
        for (double &x : w) x /= total;
        return RandomizedClassicalStrategy(w);
    }
    if (spec == "quantum:corrected") return QuantumStrategy{};
    if (spec == "quantum:paper-verbatim") {
        return QuantumStrategy{BiphotonState::phi_plus(), MeasurementSettings::paper_verbatim()};
    }
    throw ParseError("unrecognized strategy spec '" + std::string(spec) + "'");
}

inline std::string format_strategy(const Strategy &s) {
    struct Visitor {
        std::string operator()(const DeterministicStrategy &d) const {
            auto c = [](int v) { return v > 0 ? '+' : '-'; };
            return std::string("det:") + c(d.site1.on_a) + c(d.site1.on_b) + c(d.site2.on_a) + c(d.site2.on_b);
        }
        std::string operator()(const RandomizedClassicalStrategy &r) const {
            std::string out = "mix:";
            char buf[32];
            for (std::size_t i = 0; i < 16; ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", r.weights()[i]);
                out += (i ? "," : "");
                out += buf;
            }
            return out;
        }
        std::string operator()(const QuantumStrategy &q) const {
            return std::string("quantum:") + variant_name(q.settings.variant);
        }
    };
    return std::visit(Visitor{}, s);
}

}  // namespace biphoton
