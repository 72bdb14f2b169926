#include "biphoton/assembly.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace biphoton;

namespace {

// Quads written "c1 c2 s1 s2", each entry standing for itself and its
// shift-flipped twin, e.g. "aa++" covers aa++ and aa--.
const std::vector<std::string> kGoodList = {"aa++", "ab++", "bb++", "ba+-"};
// Bad list as listed; the last entry repeats a good one.
const std::vector<std::string> kBadListAsPrinted = {"aa+-", "ab+-", "bb+-", "ab++"};

SegmentPair seg(const std::string &q) {
    auto t = [](char c) { return c == 'a' ? MonoblockType::A : MonoblockType::B; };
    auto s = [](char c) { return Shift(c == '+' ? +1 : -1); };
    return {t(q[0]), t(q[1]), s(q[2]), s(q[3])};
}

std::string flip(const std::string &q) {
    std::string f = q;
    for (std::size_t i = 2; i < 4; ++i) f[i] = q[i] == '+' ? '-' : '+';
    return f;
}

std::vector<std::string> all_quads() {
    std::vector<std::string> out;
    for (char c1 : {'a', 'b'})
        for (char c2 : {'a', 'b'})
            for (char s1 : {'+', '-'})
                for (char s2 : {'+', '-'}) out.push_back({c1, c2, s1, s2});
    return out;
}

// Expands a list with the shift-flip pairing into a full set of quads.
std::set<std::string> expand(const std::vector<std::string> &list) {
    std::set<std::string> out;
    for (const auto &q : list) {
        out.insert(q);
        out.insert(flip(q));
    }
    return out;
}

// A labelling is consistent when good and bad lists are disjoint and cover
// all 16 quads.
bool consistent(const std::set<std::string> &good, const std::set<std::string> &bad) {
    for (const auto &q : good)
        if (bad.count(q)) return false;
    return good.size() + bad.size() == 16;
}

// Coefficient of s1*s2 in the average Cr for a type pair, or 0 when Cr is
// not of the form k*s1*s2 under the labelling.
int coefficient(const std::set<std::string> &good, char c1, char c2) {
    auto cr = [&](char s1, char s2) { return good.count({c1, c2, s1, s2}) ? +1 : -1; };
    const int k = cr('+', '+');
    for (char s1 : {'+', '-'})
        for (char s2 : {'+', '-'}) {
            const int prod = (s1 == s2) ? 1 : -1;
            if (cr(s1, s2) != k * prod) return 0;
        }
    return k;
}

}  // namespace

TEST(Criticality, listed_examples) {
    EXPECT_EQ(criticality(seg("aa++")), +1);
    EXPECT_EQ(criticality(seg("ba+-")), +1);
    EXPECT_EQ(criticality(seg("ba++")), -1);
    EXPECT_EQ(criticality(seg("ab+-")), -1);
}

TEST(Criticality, matches_good_list_and_corrected_bad_list) {
    auto bad = kBadListAsPrinted;
    bad.back() = "ba++";
    const auto good_set = expand(kGoodList);
    const auto bad_set = expand(bad);
    ASSERT_TRUE(consistent(good_set, bad_set));
    for (const auto &q : all_quads()) {
        EXPECT_EQ(criticality(seg(q)), good_set.count(q) ? +1 : -1) << q;
    }
}

TEST(Criticality, bad_list_with_duplicate_entry_is_inconsistent) {
    EXPECT_FALSE(consistent(expand(kGoodList), expand(kBadListAsPrinted)));
}

TEST(Criticality, only_one_single_entry_repair_reproduces_the_sign_pattern) {
    // Try every replacement of the duplicated bad entry; each candidate names a
    // quad and its shift-flipped twin, so 8 distinct candidates.
    const auto good_set = expand(kGoodList);
    std::vector<std::string> working;
    for (const auto &q : all_quads()) {
        if (q[2] == '-') continue;  // one representative per flip pair
        auto bad = kBadListAsPrinted;
        bad.back() = q;
        const auto bad_set = expand(bad);
        if (!consistent(good_set, bad_set)) continue;
        // Required average pattern: +aa, +ab, +bb, -ba.
        if (coefficient(good_set, 'a', 'a') == 1 && coefficient(good_set, 'a', 'b') == 1 &&
            coefficient(good_set, 'b', 'b') == 1 && coefficient(good_set, 'b', 'a') == -1) {
            working.push_back(q);
        }
    }
    EXPECT_EQ(working, std::vector<std::string>{"ba++"});
}

TEST(Criticality, exhaustive_table_properties) {
    int good = 0;
    for (const auto &q : all_quads()) {
        const auto s = seg(q);
        const int cr = criticality(s);
        good += cr == 1;
        EXPECT_EQ(cr, criticality({s.c1, s.c2, s.s1.flipped(), s.s2.flipped()})) << q;
        EXPECT_EQ(cr, type_pair_sign(s.c1, s.c2) * s.s1.sign() * s.s2.sign()) << q;
    }
    EXPECT_EQ(good, 8);
}

TEST(NoncrIndicator, values_and_domain) {
    EXPECT_EQ(noncr_indicator(+1), 1.0);
    EXPECT_EQ(noncr_indicator(-1), 0.0);
    EXPECT_THROW(noncr_indicator(0), Error);
    EXPECT_THROW(noncr_indicator(2), Error);
}

TEST(Shift, rejects_bad_sign) {
    EXPECT_THROW(Shift(0), Error);
    EXPECT_THROW(Shift(3), Error);
    EXPECT_EQ(Shift::forward().sign(), 1);
    EXPECT_EQ(Shift::back().flipped(), Shift::forward());
}

TEST(Overlay, examples) {
    const Chain x{{{MonoblockType::A, Shift(+1)}, {MonoblockType::B, Shift(+1)}}};
    const auto r = overlay(x, x);
    EXPECT_EQ(r.length, 2u);
    EXPECT_EQ(r.noncritical_count, 2u);
    EXPECT_EQ(r.cr_sum, 2);
    EXPECT_EQ(r.noncr_fraction, 1.0);

    const Chain b{{{MonoblockType::B, Shift(+1)}}};
    const Chain a{{{MonoblockType::A, Shift(+1)}}};
    const auto r2 = overlay(b, a);
    EXPECT_EQ(r2.noncr_fraction, 0.0);
    EXPECT_EQ(r2.cr_sum, -1);
}

TEST(Overlay, errors) {
    EXPECT_THROW(overlay(Chain{}, Chain{}), EmptyChains);
    const Chain one{{{MonoblockType::A, Shift(+1)}}};
    EXPECT_THROW(overlay(one, Chain{}), LengthMismatch);
}

TEST(Overlay, report_invariants_and_permutation_invariance) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + gen() % 50;
        Chain x, y;
        for (std::size_t k = 0; k < n; ++k) {
            x.blocks.push_back({gen() & 1 ? MonoblockType::B : MonoblockType::A, Shift(gen() & 1 ? 1 : -1)});
            y.blocks.push_back({gen() & 1 ? MonoblockType::B : MonoblockType::A, Shift(gen() & 1 ? 1 : -1)});
        }
        const auto r = overlay(x, y);
        EXPECT_EQ(static_cast<long long>(r.noncritical_count) * 2, static_cast<long long>(r.length) + r.cr_sum);
        EXPECT_DOUBLE_EQ(r.noncr_fraction, static_cast<double>(r.noncritical_count) / r.length);

        std::vector<std::size_t> perm(n);
        for (std::size_t k = 0; k < n; ++k) perm[k] = k;
        std::shuffle(perm.begin(), perm.end(), gen);
        Chain px, py;
        for (auto k : perm) {
            px.blocks.push_back(x.blocks[k]);
            py.blocks.push_back(y.blocks[k]);
        }
        const auto rp = overlay(px, py);
        EXPECT_EQ(rp.noncritical_count, r.noncritical_count);
        EXPECT_EQ(rp.cr_sum, r.cr_sum);
    }
}

TEST(ChainText, round_trip_property) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        Chain c;
        const std::size_t n = gen() % 40;
        for (std::size_t k = 0; k < n; ++k) {
            c.blocks.push_back({gen() & 1 ? MonoblockType::B : MonoblockType::A, Shift(gen() & 1 ? 1 : -1)});
        }
        std::stringstream ss;
        write_chain(ss, c);
        EXPECT_EQ(read_chain(ss), c);
    }
}

TEST(ChainText, format_and_errors) {
    const Chain c{{{MonoblockType::A, Shift(+1)}, {MonoblockType::B, Shift(-1)}}};
    std::ostringstream out;
    write_chain(out, c);
    EXPECT_EQ(out.str(), "a+\nb-\n");

    std::istringstream crlf("a+\r\n\nb-\r\n");
    EXPECT_EQ(read_chain(crlf), c);

    for (const char *bad : {"c+\n", "a*\n", "a+ \n", "a\n"}) {
        std::istringstream in(bad);
        EXPECT_THROW(read_chain(in), ParseError) << bad;
    }
}
