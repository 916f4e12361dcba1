#include <gtest/gtest.h>

#include <random>

#include "cmimp/error.hpp"
#include "cmimp/network.hpp"
#include "oracles.hpp"

using namespace cmimp;
using oracle::rel_err;

namespace {

AbcdMatrix random_matrix(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {{n(rng), n(rng)}, {50 * n(rng), 50 * n(rng)}, {0.02 * n(rng), 0.02 * n(rng)}, {n(rng), n(rng)}};
}

AbcdSweep random_sweep(const FrequencyGrid& g, std::mt19937_64& rng) {
    std::vector<AbcdMatrix> m;
    for (std::size_t i = 0; i < g.size(); ++i) m.push_back(random_matrix(rng));
    return AbcdSweep(g, m, false);
}

double matrix_rel_err(const AbcdMatrix& x, const AbcdMatrix& y) {
    double scale = std::abs(y.a) + std::abs(y.b) + std::abs(y.c) + std::abs(y.d);
    return (std::abs(x.a - y.a) + std::abs(x.b - y.b) + std::abs(x.c - y.c) + std::abs(x.d - y.d)) / scale;
}

}  // namespace

TEST(FrequencyGrid, DefaultSweepSpansConductedBand) {
    auto g = FrequencyGrid::default_sweep();
    EXPECT_EQ(g.size(), 201u);
    EXPECT_EQ(g.front(), 150e3);
    EXPECT_EQ(g.back(), 30e6);
    EXPECT_EQ(g.spacing(), Spacing::logarithmic);
}

TEST(FrequencyGrid, RejectsBadPoints) {
    EXPECT_THROW(FrequencyGrid::from_points({}), Error);
    EXPECT_THROW(FrequencyGrid::from_points({1.0, 1.0}), Error);
    EXPECT_THROW(FrequencyGrid::from_points({2.0, 1.0}), Error);
    EXPECT_THROW(FrequencyGrid::from_points({0.0, 1.0}), Error);
    EXPECT_THROW(FrequencyGrid::from_points({1.0, std::numeric_limits<double>::infinity()}), Error);
    EXPECT_THROW(FrequencyGrid::from_points({std::nan(""), 1.0}), Error);
}

TEST(FrequencyGrid, FirstMismatch) {
    auto a = FrequencyGrid::from_points({1, 2, 3});
    EXPECT_FALSE(a.first_mismatch(FrequencyGrid::from_points({1, 2, 3})));
    EXPECT_EQ(a.first_mismatch(FrequencyGrid::from_points({1, 2.5, 3})), 1u);
    EXPECT_EQ(a.first_mismatch(FrequencyGrid::from_points({1, 2})), 2u);
}

TEST(ReferenceImpedance, MustBePositive) {
    EXPECT_THROW(ReferenceImpedance(0.0), Error);
    EXPECT_THROW(ReferenceImpedance(-50.0), Error);
    EXPECT_THROW(ReferenceImpedance(std::numeric_limits<double>::infinity()), Error);
    EXPECT_EQ(ReferenceImpedance(50.0).ohms(), 50.0);
}

TEST(Cascade, IdentityIsNeutral) {
    std::mt19937_64 rng(1);
    auto g = FrequencyGrid::logarithmic(1e5, 1e7, 7);
    auto x = random_sweep(g, rng);
    auto left = cascade(AbcdSweep::identity(g), x);
    auto right = cascade(x, AbcdSweep::identity(g));
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LE(matrix_rel_err(left[i], x[i]), 1e-15);
        EXPECT_LE(matrix_rel_err(right[i], x[i]), 1e-15);
    }
}

TEST(Cascade, SeriesImpedancesAdd) {
    auto g = FrequencyGrid::from_points({1e6});
    AbcdSweep z1(g, {abcd_of_series({10.0, 5.0})}, true);
    AbcdSweep z2(g, {abcd_of_series({3.0, -2.0})}, true);
    auto n = cascade(z1, z2);
    EXPECT_EQ(n[0].a, Complex(1.0));
    EXPECT_EQ(n[0].b, Complex(13.0, 3.0));
    EXPECT_EQ(n[0].c, Complex(0.0));
    EXPECT_EQ(n[0].d, Complex(1.0));
    EXPECT_TRUE(n.reciprocal());
}

TEST(Cascade, ReciprocalFlagIsConjunction) {
    auto g = FrequencyGrid::from_points({1e6});
    AbcdSweep r(g, {abcd_of_series(1.0)}, true);
    AbcdSweep nr(g, {AbcdMatrix{2.0, 0.0, 0.0, 1.0}}, false);
    EXPECT_FALSE(cascade(r, nr).reciprocal());
    EXPECT_TRUE(cascade(r, r).reciprocal());
}

TEST(Cascade, GridMismatchNamesIndex) {
    auto a = AbcdSweep::identity(FrequencyGrid::from_points({1, 2, 3}));
    auto b = AbcdSweep::identity(FrequencyGrid::from_points({1, 2, 4}));
    try {
        cascade(a, b);
        FAIL() << "expected GridMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::grid_mismatch);
        EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
    }
}

TEST(Cascade, Associative) {
    std::mt19937_64 rng(7);
    auto g = FrequencyGrid::logarithmic(1e5, 1e7, 11);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_sweep(g, rng), y = random_sweep(g, rng), z = random_sweep(g, rng);
        auto l = cascade(cascade(x, y), z);
        auto r = cascade(x, cascade(y, z));
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(matrix_rel_err(l[i], r[i]), 1e-12);
    }
}

TEST(Cascade, ReciprocityPreserved) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    auto g = FrequencyGrid::from_points({1e6});
    AbcdSweep acc = AbcdSweep::identity(g);
    for (int i = 0; i < 40; ++i) {
        AbcdMatrix m = (i % 2) ? abcd_of_series({10 * n(rng), 10 * n(rng)})
                               : abcd_of_shunt({0.01 * n(rng), 0.01 * n(rng)});
        acc = cascade(acc, AbcdSweep(g, {m}, true));
        EXPECT_LE(std::abs(acc[0].determinant() - 1.0), 1e-12);
    }
    EXPECT_TRUE(acc.reciprocal());
}

TEST(ElementarySections, ZeroIsIdentity) {
    auto s = abcd_of_series(0.0);
    auto p = abcd_of_shunt(0.0);
    EXPECT_EQ(s.a, 1.0);
    EXPECT_EQ(s.b, 0.0);
    EXPECT_EQ(s.c, 0.0);
    EXPECT_EQ(s.d, 1.0);
    EXPECT_EQ(p.a, 1.0);
    EXPECT_EQ(p.b, 0.0);
    EXPECT_EQ(p.c, 0.0);
    EXPECT_EQ(p.d, 1.0);
}

TEST(ElementarySections, UnitDeterminant) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(abcd_of_series({n(rng), n(rng)}).determinant(), Complex(1.0));
        EXPECT_EQ(abcd_of_shunt({n(rng), n(rng)}).determinant(), Complex(1.0));
        EXPECT_TRUE(abcd_of_series({n(rng), n(rng)}).is_reciprocal());
    }
    EXPECT_THROW(abcd_of_series({std::nan(""), 0.0}), Error);
}

TEST(InputImpedance, Examples) {
    EXPECT_EQ(input_impedance(AbcdMatrix::identity(), 50.0).value(), Complex(50.0));
    // Series j100 followed by a 50 ohm load is 50 + j100 by inspection.
    auto z = input_impedance(abcd_of_series({0.0, 100.0}), 50.0);
    EXPECT_LE(rel_err(z.value(), {50.0, 100.0}), 1e-15);
    EXPECT_TRUE(input_impedance(AbcdMatrix::identity(), Impedance::open()).is_open());
    // Shunt 0.01 S with open load: a / c = 1 / 0.01.
    auto zo = input_impedance(abcd_of_shunt(0.01), Impedance::open());
    EXPECT_FALSE(zo.is_open());
    EXPECT_NEAR(zo.value().real(), 100.0, 1e-12);
}

TEST(InputImpedance, SingularTerminationIsFlaggedNotThrown) {
    // c z + d = 0 with c = 1 S, d = -50, z = 50.
    AbcdMatrix m{1.0, 0.0, 1.0, -50.0};
    EXPECT_TRUE(input_impedance(m, 50.0).is_open());
}

TEST(InputImpedance, TelescopesOverCascade) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        AbcdMatrix x = abcd_of_series({10 * n(rng), 10 * n(rng)}) * abcd_of_shunt({0.01 * n(rng), 0.01 * n(rng)});
        AbcdMatrix y = abcd_of_shunt({0.01 * n(rng), 0.01 * n(rng)}) * abcd_of_series({10 * n(rng), 10 * n(rng)});
        Complex zl{std::abs(50 * n(rng)), 50 * n(rng)};
        auto whole = input_impedance(x * y, zl);
        auto nested = input_impedance(x, input_impedance(y, zl));
        ASSERT_FALSE(whole.is_open());
        EXPECT_LE(rel_err(whole.value(), nested.value()), 1e-12);
    }
}

TEST(Reflection, Examples) {
    ReferenceImpedance z0(50.0);
    EXPECT_EQ(*gamma_from_z(50.0, z0), Complex(0.0));
    EXPECT_EQ(*gamma_from_z(0.0, z0), Complex(-1.0));
    EXPECT_EQ(*gamma_from_z(Impedance::open(), z0), Complex(1.0));
    EXPECT_NEAR(gamma_from_z(100.0, z0)->real(), 1.0 / 3.0, 1e-16);
    EXPECT_FALSE(gamma_from_z(-50.0, z0).has_value());

    EXPECT_EQ(z_from_gamma(0.0, z0).value(), Complex(50.0));
    EXPECT_EQ(z_from_gamma(-1.0, z0).value(), Complex(0.0));
    EXPECT_TRUE(z_from_gamma(1.0, z0).is_open());
}

TEST(Reflection, InvolutionOnDisc) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ReferenceImpedance z0(50.0);
    for (int i = 0; i < 10000; ++i) {
        // Uniform on the disc of radius 0.999.
        Complex g = std::polar(0.999 * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng));
        Impedance z = z_from_gamma(g, z0);
        ASSERT_FALSE(z.is_open());
        EXPECT_LE(rel_err(z_from_gamma(*gamma_from_z(z, z0), z0).value(), z.value()), 1e-12);
    }
}

TEST(ComplexSweep, ActiveReflectionIsFlaggedNotRejected) {
    auto g = FrequencyGrid::from_points({1, 2});
    ComplexSweep s(g, {Complex(1.2, 0.0), Complex(0.5, 0.0)}, SweepRole::reflection);
    EXPECT_EQ(s.point_flags()[0], flags::active);
    EXPECT_EQ(s.point_flags()[1], flags::none);
    EXPECT_THROW(ComplexSweep(g, {Complex(std::nan(""), 0.0), 0.0}, SweepRole::reflection), Error);
    EXPECT_THROW(ComplexSweep(g, {0.0}, SweepRole::reflection), Error);
}

TEST(Flags, StringRoundTrip) {
    for (unsigned f = 0; f < 32; ++f) {
        EXPECT_EQ(flags_from_string(flags_to_string(static_cast<PointFlags>(f))), f);
    }
    EXPECT_THROW(flags_from_string("BOGUS"), Error);
}
