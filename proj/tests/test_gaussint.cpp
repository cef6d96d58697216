#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gdiv/gaussint.hpp"
#include "gdiv/numeric.hpp"

using namespace gdiv;

namespace {

std::vector<GaussInt> all_with_norm_at_most(i64 n)
{
    std::vector<GaussInt> out;
    const i64 r = isqrt(n);
    for (i64 y = -r; y <= r; ++y)
        for (i64 x = -r; x <= r; ++x)
            if (x * x + y * y <= n && (x || y)) out.push_back({x, y});
    return out;
}

// Every divisor of both a and b, found by trial division.
GaussInt brute_gcd(GaussInt a, GaussInt b)
{
    GaussInt best{1, 0};
    for (auto d : all_with_norm_at_most(std::max(norm(a), norm(b))))
        if (divides(d, a) && divides(d, b) && norm(d) > norm(best)) best = d;
    return canonical(best);
}

} // namespace

TEST(GaussIntBasics, NormIsMultiplicativeAndDefinite)
{
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<i64> dist(-100000, 100000);
    for (int i = 0; i < 10000; ++i) {
        const GaussInt z{dist(rng), dist(rng)}, w{dist(rng), dist(rng)};
        ASSERT_EQ(norm(z * w), norm(z) * norm(w));
        ASSERT_GE(norm(z), 0);
    }
    EXPECT_EQ(norm(GaussInt{0, 0}), 0);
    EXPECT_EQ(norm(GaussInt{0, 1}), 1);
}

TEST(GaussIntBasics, InnerProduct)
{
    EXPECT_EQ(inner({1, 2}, {3, 4}), 11);
    EXPECT_EQ(inner({3, 4}, {3, 4}), 25);
    const GaussInt z{2, 1}, w{1, -1};
    EXPECT_EQ(inner(z.times_i(), w.times_i()), inner(z, w));
    EXPECT_EQ(inner(z, w), 1);
}

TEST(GaussIntBasics, CanonicalAssociate)
{
    EXPECT_EQ(canonical(GaussInt{0, 1}), (GaussInt{1, 0}));
    EXPECT_EQ(canonical(GaussInt{-2, -1}), (GaussInt{2, 1}));
    EXPECT_EQ(canonical(GaussInt{1, -2}), (GaussInt{2, 1}));
    for (auto z : all_with_norm_at_most(50)) {
        const GaussInt c = canonical(z);
        EXPECT_TRUE(c.re > 0 && c.im >= 0) << z;
        EXPECT_EQ(norm(c), norm(z));
    }
}

TEST(Euclid, DivModContract)
{
    for (GaussInt b : {GaussInt{1, 1}, GaussInt{1, 0}, GaussInt{2, 1}, GaussInt{-3, 5}}) {
        for (auto a : all_with_norm_at_most(200)) {
            const auto dm = euclid_divmod(a, b);
            ASSERT_EQ(dm.quot * b + dm.rem, a);
            ASSERT_LE(2 * norm(dm.rem), norm(b));
        }
    }
    const auto unit = euclid_divmod({7, -3}, {1, 0});
    EXPECT_EQ(unit.quot, (GaussInt{7, -3}));
    EXPECT_EQ(unit.rem, (GaussInt{0, 0}));
    const auto five = euclid_divmod({5, 0}, {1, 1});
    EXPECT_LE(norm(five.rem), 1);
    const auto seven = euclid_divmod({7, 2}, {2, 1});
    EXPECT_EQ(seven.quot * GaussInt(2, 1) + seven.rem, GaussInt(7, 2));
    EXPECT_LE(norm(seven.rem), 2);
}

TEST(Euclid, GcdExamples)
{
    EXPECT_EQ(gcd({2, 0}, {1, 1}), (GaussInt{1, 1}));
    EXPECT_EQ(gcd({3, 4}, {5, 0}), canonical({2, 1}));
    EXPECT_EQ(brute_gcd({3, 4}, {5, 0}), canonical({2, 1}));
    for (auto z : all_with_norm_at_most(30)) EXPECT_EQ(gcd(z, {1, 0}), (GaussInt{1, 0}));
}

TEST(Euclid, GcdMatchesTrialDivision)
{
    const auto pts = all_with_norm_at_most(25);
    for (std::size_t i = 0; i < pts.size(); i += 3)
        for (std::size_t j = 0; j < pts.size(); j += 5) ASSERT_EQ(gcd(pts[i], pts[j]), brute_gcd(pts[i], pts[j]));
}

TEST(FundamentalDomain, Membership)
{
    for (auto q : all_with_norm_at_most(40)) EXPECT_TRUE(in_Bq({0, 0}, q));
    EXPECT_FALSE(in_Bq({1, 0}, {1, 1}));
    EXPECT_TRUE(in_Bq({0, 1}, {1, 1}));

    const GaussInt q{1, 2};
    std::set<GaussInt> found;
    for (auto x : all_with_norm_at_most(4 * norm(q)))
        if (in_Bq(x, q)) found.insert(x);
    found.insert({0, 0});
    const std::set<GaussInt> expected{{0, 0}, {0, 1}, {0, 2}, {-1, 1}, {-1, 2}};
    EXPECT_EQ(found, expected);
}

TEST(FundamentalDomain, EnumerationSizes)
{
    const auto b = enumerate_Bq({1, 1});
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0], (GaussInt{0, 0}));
    EXPECT_EQ(b[1], (GaussInt{0, 1}));
    EXPECT_EQ(enumerate_Bq({2, 0}).size(), 4u);
    for (auto q : all_with_norm_at_most(100)) ASSERT_EQ(static_cast<i64>(enumerate_Bq(q).size()), norm(q)) << q;
}

TEST(FundamentalDomain, ReductionIsABijectionOnResidues)
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<i64> dist(-50, 50);
    for (auto q : all_with_norm_at_most(64)) {
        const auto bq = enumerate_Bq(q);
        const std::set<GaussInt> domain(bq.begin(), bq.end());
        // Shift each representative by a random multiple of q: a complete residue system.
        std::set<GaussInt> image;
        for (auto x : bq) {
            const GaussInt shifted = x + GaussInt{dist(rng), dist(rng)} * q;
            const GaussInt r = reduce_mod(shifted, q);
            ASSERT_TRUE(in_Bq(r, q));
            ASSERT_EQ(r, x);
            image.insert(r);
        }
        ASSERT_EQ(image, domain);
    }
}

TEST(ReducedResidues, PhiExamples)
{
    EXPECT_EQ(enumerate_Aq({1, 0}), std::vector<GaussInt>(1, GaussInt{0, 0}));
    EXPECT_EQ(euler_phi({1, 0}), 1);
    EXPECT_EQ(enumerate_Aq({1, 1}), (std::vector<GaussInt>{{0, 1}}));
    EXPECT_EQ(euler_phi({1, 1}), 1);
    EXPECT_EQ(euler_phi({1, 2}), 4);
    EXPECT_EQ(enumerate_Aq({1, 2}).size(), 4u);
}

TEST(ReducedResidues, PhiMatchesCount)
{
    for (auto q : all_with_norm_at_most(500)) ASSERT_EQ(euler_phi(q), static_cast<i64>(enumerate_Aq(q).size())) << q;
}

TEST(Rational, UniqueRepresentation)
{
    // i/(1+i) and 1/(1-i) are the same torus point.
    const ReducedRational a({0, 1}, {1, 1}), b({1, 0}, {1, -1});
    EXPECT_EQ(a, b);
    EXPECT_DOUBLE_EQ(a.torus().x, 0.5);
    EXPECT_DOUBLE_EQ(a.torus().y, 0.5);
    EXPECT_THROW(ReducedRational({2, 0}, {1, 1}), PreconditionError);
    EXPECT_THROW(ReducedRational({1, 0}, {0, 0}), PreconditionError);

    // Distinct reduced residues of canonical q give distinct torus points.
    for (auto q : canonical_moduli(1, 60)) {
        std::set<std::pair<long long, long long>> pts;
        for (auto r : enumerate_Aq(q)) {
            const auto t = ReducedRational(r, q).torus();
            pts.insert({std::llround(t.x * norm(q)), std::llround(t.y * norm(q))});
        }
        ASSERT_EQ(static_cast<i64>(pts.size()), euler_phi(q));
    }
}

TEST(Torus, DistanceToLattice)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const TorusPoint p(u(rng), u(rng));
        EXPECT_GE(p.dist_to_lattice(), 0.0);
        EXPECT_LE(p.dist_to_lattice(), std::sqrt(0.5) + 1e-15);
    }
    EXPECT_NEAR(TorusPoint(0.5, 0.5).dist_to_lattice(), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(TorusPoint(0.9, -0.1).dist_to_lattice(), std::sqrt(0.02), 1e-12);
}

TEST(Ramanujan, SmallModuli)
{
    for (auto n : all_with_norm_at_most(30)) EXPECT_NEAR(ramanujan_tau({1, 0}, n), 1.0, 1e-12);
    EXPECT_NEAR(ramanujan_tau({1, 1}, {0, 0}), 1.0, 1e-12);
    EXPECT_NEAR(ramanujan_tau({1, 1}, {1, 0}), -1.0, 1e-12);
    EXPECT_NEAR(ramanujan_tau({1, 1}, {1, 1}), 1.0, 1e-12);
    for (auto n : all_with_norm_at_most(30))
        EXPECT_NEAR(ramanujan_tau({1, 1}, n), ((n.re + n.im) % 2 == 0) ? 1.0 : -1.0, 1e-12);
}

TEST(Ramanujan, AtZeroIsPhi)
{
    for (auto q : all_with_norm_at_most(50))
        EXPECT_NEAR(ramanujan_tau(q, {0, 0}), static_cast<double>(euler_phi(q)), 1e-9) << q;
}

TEST(Ramanujan, NearIntegerAndPeriodic)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<i64> dist(-1000, 1000);
    for (auto q : canonical_moduli(1, 200)) {
        RamanujanTable table(q);
        for (int i = 0; i < 100; ++i) {
            const GaussInt n{dist(rng), dist(rng)};
            const double t = ramanujan_tau(q, n);
            ASSERT_NEAR(t, std::round(t), 1e-9);
            ASSERT_EQ(table(n), std::llround(t));
            const GaussInt z{dist(rng) % 7, dist(rng) % 7};
            ASSERT_NEAR(ramanujan_tau(q, n + z * q.conj()), t, 1e-9);
        }
    }
}

TEST(Dirichlet, ExactRationalsAreRecovered)
{
    const ReducedRational r({1, 0}, {2, 1});
    const auto got = dirichlet_approx(r.torus(), 10);
    EXPECT_EQ(got.rational, r);
    EXPECT_NEAR(got.error, 0.0, 1e-24);

    const auto half = dirichlet_approx(TorusPoint(0.5, 0.5), 2);
    EXPECT_EQ(half.rational, ReducedRational({0, 1}, {1, 1}));
    EXPECT_NEAR(half.error, 0.0, 1e-24);
}

TEST(Dirichlet, OptimalAgainstEnumeration)
{
    std::mt19937_64 rng(5);
    std::vector<std::pair<TorusPoint, i64>> all;
    for (auto q : canonical_moduli(1, 100))
        for (auto a : enumerate_Aq(q)) all.push_back({ReducedRational(a, q).torus(), norm(q)});
    for (int i = 0; i < 100; ++i) {
        const TorusPoint alpha(uniform01(rng), uniform01(rng));
        const auto got = dirichlet_approx(alpha, 100);
        double best = 1e9;
        for (const auto& [t, qn] : all) best = std::min(best, (alpha - t).norm());
        ASSERT_LE(got.error, best + 1e-15);
        ASSERT_NEAR(got.error, (alpha - got.rational.torus()).norm(), 1e-12);
    }
}

TEST(Shells, ShellIndex)
{
    EXPECT_EQ(ReducedRational({0, 0}, {1, 0}).shell(), 0);
    EXPECT_EQ(ReducedRational({0, 1}, {1, 1}).shell(), 1);
    EXPECT_EQ(ReducedRational({1, 0}, {2, 1}).shell(), 2);
    EXPECT_EQ(ReducedRational({1, 0}, {2, 2 + 1}).shell(), 3);
}
