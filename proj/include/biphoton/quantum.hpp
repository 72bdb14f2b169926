#pragma once

// Two-qubit state-vector kernels: dichotomic observables, Born-rule joint
// distributions, correlated outcome sampling and CHSH values.
//
// Basis order is |00>, |01>, |10>, |11> with site 1 as the left qubit.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "biphoton/errors.hpp"
#include "biphoton/random.hpp"

namespace biphoton {

using Complex = std::complex<double>;
using Matrix2 = std::array<std::array<Complex, 2>, 2>;

inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kSpectralTol = 1e-9;
inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;

/// A +-1 valued single-qubit measurement n.sigma with |n| = 1.
class Observable {
   public:
    Observable() = default;

    double nx() const { return n_[0]; }
    double ny() const { return n_[1]; }
    double nz() const { return n_[2]; }
    const std::array<double, 3> &bloch() const { return n_; }
    const std::string &label() const { return label_; }

    /// nx*sx + ny*sy + nz*sz.
    Matrix2 matrix() const {
        return {{{Complex{n_[2], 0}, Complex{n_[0], -n_[1]}},
                 {Complex{n_[0], n_[1]}, Complex{-n_[2], 0}}}};
    }

    Observable negated() const {
        Observable o = *this;
        for (auto &c : o.n_) c = -c;
        o.label_ = "-" + label_;
        return o;
    }

    friend Observable observable_from_bloch(std::array<double, 3> n, std::string label);

   private:
    std::array<double, 3> n_{0.0, 0.0, 1.0};
    std::string label_ = "sz";
};

/// Rejects anything further than 1e-9 from the unit sphere. Components are
/// stored as given; nothing is renormalized.
inline Observable observable_from_bloch(std::array<double, 3> n, std::string label = {}) {
    const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (!(std::abs(norm - 1.0) <= kSpectralTol)) {
        throw NonUnitBloch("Bloch vector norm " + std::to_string(norm) + " is not 1");
    }
    Observable o;
    o.n_ = n;
    o.label_ = std::move(label);
    return o;
}

inline Observable sigma_x() { return observable_from_bloch({1, 0, 0}, "sx"); }
inline Observable sigma_z() { return observable_from_bloch({0, 0, 1}, "sz"); }

/// Normalized two-qubit pure state.
class BiphotonState {
   public:
    using Amplitudes = std::array<Complex, 4>;

    /// Throws Error unless sum |amp|^2 is 1 within 1e-12.
    explicit BiphotonState(const Amplitudes &amps) : amps_(amps) {
        double total = 0;
        for (const auto &a : amps_) total += std::norm(a);
        if (std::abs(total - 1.0) > kStructuralTol) {
            throw Error("biphoton state is not normalized (norm^2 = " + std::to_string(total) + ")");
        }
    }

    /// (|00> + |11>)/sqrt(2).
    static BiphotonState phi_plus() {
        const double h = std::numbers::sqrt2 / 2;
        return BiphotonState({Complex{h, 0}, Complex{0, 0}, Complex{0, 0}, Complex{h, 0}});
    }

    const Amplitudes &amplitudes() const { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }

   private:
    Amplitudes amps_;
};

enum class SettingsVariant { PaperVerbatim, Corrected };

struct MeasurementSettings {
    Observable a1, b1, a2, b2;
    SettingsVariant variant = SettingsVariant::Corrected;

    /// a1 = sx, b1 = sz, a2 = (sz - sx)/sqrt2, b2 = -(sx + sz)/sqrt2.
    static MeasurementSettings paper_verbatim() {
        const double h = std::numbers::sqrt2 / 2;
        return {sigma_x(), sigma_z(), observable_from_bloch({-h, 0, h}, "a2"),
                observable_from_bloch({-h, 0, -h}, "b2"), SettingsVariant::PaperVerbatim};
    }

    /// Verbatim settings with both site-2 observables negated.
    static MeasurementSettings corrected() {
        const double h = std::numbers::sqrt2 / 2;
        return {sigma_x(), sigma_z(), observable_from_bloch({h, 0, -h}, "a2"),
                observable_from_bloch({h, 0, h}, "b2"), SettingsVariant::Corrected};
    }

    static MeasurementSettings of(SettingsVariant v) {
        return v == SettingsVariant::Corrected ? corrected() : paper_verbatim();
    }
};

inline const char *variant_name(SettingsVariant v) {
    return v == SettingsVariant::Corrected ? "corrected" : "paper-verbatim";
}

struct OutcomePair {
    int s1 = +1;
    int s2 = +1;
    friend bool operator==(const OutcomePair &, const OutcomePair &) = default;
};

/// Born-rule probabilities indexed by sign: at(+1, -1) etc.
struct JointDistribution {
    // Storage order ++, +-, -+, --; this is also the sampling CDF order.
    std::array<double, 4> p{};

    static constexpr std::size_t index(int s1, int s2) {
        return (s1 > 0 ? 0u : 2u) + (s2 > 0 ? 0u : 1u);
    }
    double at(int s1, int s2) const { return p[index(s1, s2)]; }

    double correlation() const { return p[0] - p[1] - p[2] + p[3]; }
    double marginal1() const { return p[0] + p[1] - p[2] - p[3]; }
    double marginal2() const { return p[0] - p[1] + p[2] - p[3]; }
    double agreement() const { return p[0] + p[3]; }
};

namespace detail {

// (A (x) B)|psi> without forming the 4x4 Kronecker product.
inline BiphotonState::Amplitudes apply_local(const Matrix2 &a, const Matrix2 &b,
                                             const BiphotonState::Amplitudes &psi) {
    BiphotonState::Amplitudes out{};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            Complex acc{};
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) acc += a[i][k] * b[j][l] * psi[2 * k + l];
            out[2 * i + j] = acc;
        }
    return out;
}

inline Complex inner(const BiphotonState::Amplitudes &x, const BiphotonState::Amplitudes &y) {
    Complex acc{};
    for (std::size_t i = 0; i < 4; ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}

inline double real_expectation(const Complex &v) {
    if (std::abs(v.imag()) > kSpectralTol) {
        throw Error("expectation value has imaginary part " + std::to_string(v.imag()));
    }
    return v.real();
}

// (I + s*A)/2.
inline Matrix2 projector(const Observable &obs, int s) {
    Matrix2 m = obs.matrix();
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) m[i][j] = (static_cast<double>(s) * m[i][j] + (i == j ? 1.0 : 0.0)) / 2.0;
    return m;
}

inline Matrix2 identity2() { return {{{Complex{1, 0}, Complex{0, 0}}, {Complex{0, 0}, Complex{1, 0}}}}; }

}  // namespace detail

/// <psi| A (x) B |psi>.
inline double expectation(const BiphotonState &state, const Observable &a, const Observable &b) {
    const auto v = detail::inner(state.amplitudes(), detail::apply_local(a.matrix(), b.matrix(), state.amplitudes()));
    return detail::real_expectation(v);
}

/// <psi| A (x) I |psi>.
inline double expectation_site1(const BiphotonState &state, const Observable &a) {
    const auto v = detail::inner(state.amplitudes(),
                                 detail::apply_local(a.matrix(), detail::identity2(), state.amplitudes()));
    return detail::real_expectation(v);
}

/// <psi| I (x) B |psi>.
inline double expectation_site2(const BiphotonState &state, const Observable &b) {
    const auto v = detail::inner(state.amplitudes(),
                                 detail::apply_local(detail::identity2(), b.matrix(), state.amplitudes()));
    return detail::real_expectation(v);
}

inline JointDistribution joint_distribution(const BiphotonState &state, const Observable &a,
                                            const Observable &b) {
    JointDistribution d;
    for (int s1 : {+1, -1})
        for (int s2 : {+1, -1}) {
            const auto proj = detail::apply_local(detail::projector(a, s1), detail::projector(b, s2),
                                                  state.amplitudes());
            double p = detail::real_expectation(detail::inner(state.amplitudes(), proj));
            // Roundoff can push an exact zero slightly negative.
            if (p < 0 && p > -kStructuralTol) p = 0;
            d.p[JointDistribution::index(s1, s2)] = p;
        }
    return d;
}

/// Inverse-CDF draw over (++, +-, -+, --) from a single uniform.
inline OutcomePair sample_from(const JointDistribution &d, double u) {
    static constexpr OutcomePair order[4] = {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
    double cdf = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        cdf += d.p[i];
        if (u < cdf) return order[i];
    }
    return order[3];
}

template <BitStream64 G>
OutcomePair sample(const BiphotonState &state, const Observable &a, const Observable &b, G &rng) {
    return sample_from(joint_distribution(state, a, b), unit_uniform(rng));
}

/// E(a1 b2) + E(b1 b2) + E(a1 a2) - E(b1 a2).
inline double chsh(const BiphotonState &state, const MeasurementSettings &s) {
    return expectation(state, s.a1, s.b2) + expectation(state, s.b1, s.b2) + expectation(state, s.a1, s.a2) -
           expectation(state, s.b1, s.a2);
}

}  // namespace biphoton
