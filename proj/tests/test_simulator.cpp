#include <gtest/gtest.h>

#include <random>

#include "cmimp/error.hpp"
#include "cmimp/extraction.hpp"
#include "cmimp/simulator.hpp"
#include "oracles.hpp"

using namespace cmimp;
using oracle::rel_err;

namespace {

CircuitModel transparent() {
    CircuitModel m;
    m.lisn_cable.z_cm_lisn = impedance_model::Constant{0.0};
    m.lisn_cable.z_cm_cable = impedance_model::SeriesRL{0.0, 0.0};
    return m;
}

}  // namespace

TEST(ProbeAbcd, TransparentLimit) {
    ProbeModel p;
    p.magnetizing_inductance_h = 1e3;
    auto n = probe_abcd(p, FrequencyGrid::from_points({150e3}));
    EXPECT_LE(std::abs(n[0].a - 1.0), 1e-6);
    EXPECT_LE(std::abs(n[0].b), 1e-6);
    EXPECT_LE(std::abs(n[0].c), 1e-6);
    EXPECT_LE(std::abs(n[0].d - 1.0), 1e-6);
    EXPECT_TRUE(n.reciprocal());

    auto ideal = probe_abcd(ProbeModel{}, FrequencyGrid::from_points({150e3}));
    EXPECT_EQ(ideal[0].a, 1.0);
    EXPECT_EQ(ideal[0].b, 0.0);
    EXPECT_EQ(ideal[0].c, 0.0);
    EXPECT_EQ(ideal[0].d, 1.0);
}

TEST(ProbeAbcd, UnitDeterminantForRandomParameters) {
    std::mt19937_64 rng(12);
    auto grid = FrequencyGrid::default_sweep();
    for (int t = 0; t < 100; ++t) {
        auto m = oracle::random_model(rng);
        auto n = probe_abcd(m.probe, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_LE(std::abs(n[i].determinant() - 1.0), 1e-12);
        }
    }
}

TEST(ProbeAbcd, LeakageReactance) {
    // 2 pi * 1 MHz * 159.155 nH = 1.0000 ohm
    const double x = 2 * std::numbers::pi * 1e6 * 159.155e-9;
    EXPECT_NEAR(x, 1.0, 1e-5);
    ProbeModel p;
    p.leakage_inductance_h = 159.155e-9;
    auto n = probe_abcd(p, FrequencyGrid::from_points({1e6}));
    EXPECT_EQ(n[0].b.real(), 0.0);
    EXPECT_NEAR(n[0].b.imag(), 1.0, 1e-5);
}

TEST(ProbeAbcd, RejectsInvalid) {
    ProbeModel p;
    p.turns_ratio = 0.0;
    EXPECT_THROW(probe_abcd(p, FrequencyGrid::default_sweep()), Error);
    p = {};
    p.magnetizing_inductance_h = 0.0;
    EXPECT_THROW(probe_abcd(p, FrequencyGrid::default_sweep()), Error);
    p = {};
    p.leakage_inductance_h = -1e-9;
    EXPECT_THROW(probe_abcd(p, FrequencyGrid::default_sweep()), Error);
}

TEST(LisnCableAbcd, Examples) {
    auto g = FrequencyGrid::from_points({1e6});
    EXPECT_EQ(lisn_cable_abcd(transparent().lisn_cable, g)[0].b, Complex(0.0));

    LisnCableModel m{impedance_model::Constant{25.0}, impedance_model::SeriesRL{0.1, 1e-6}};
    auto n = lisn_cable_abcd(m, g);
    EXPECT_NEAR(n[0].b.real(), 25.1, 1e-12);
    EXPECT_NEAR(n[0].b.imag(), 6.2832, 1e-4);
    EXPECT_EQ(n[0].a, 1.0);
    EXPECT_EQ(n[0].c, 0.0);
    EXPECT_EQ(n[0].d, 1.0);
}

TEST(LisnCableAbcd, TabulatedPassThroughAndSpan) {
    impedance_model::Table t{{1e5, 1e6, 1e7}, {{10, 1}, {20, -3}, {30, 7.5}}};
    LisnCableModel m{t, impedance_model::Constant{0.0}};
    auto n = lisn_cable_abcd(m, FrequencyGrid::from_points({1e5, 1e6, 1e7}));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(n[i].b, t.z_ohm[i]);
    try {
        lisn_cable_abcd(m, FrequencyGrid::from_points({1e5, 2e7}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::span);
    }
}

TEST(SimulateGamma, TransparentChain) {
    auto g = FrequencyGrid::default_sweep();
    auto m = transparent();
    auto matched = simulate_gamma(m, termination::Resistor{50.0}, g);
    auto open = simulate_gamma(m, termination::Open{}, g);
    auto osl = simulate_osl(m, 50.0, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(matched[i], Complex(0.0));
        EXPECT_EQ(open[i], Complex(1.0));
        EXPECT_EQ(osl.open()[i], Complex(1.0));
        EXPECT_EQ(osl.short_circuit()[i], Complex(-1.0));
        EXPECT_EQ(osl.load()[i], Complex(0.0));
    }
}

TEST(SimulateGamma, MatchesLadderReductionOracle) {
    std::mt19937_64 rng(77);
    auto grid = FrequencyGrid::logarithmic(150e3, 30e6, 31);
    for (int t = 0; t < 100; ++t) {
        auto m = oracle::random_model(rng);
        auto term = oracle::random_termination(rng);
        auto sim = simulate_gamma(m, term, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            Complex zin = oracle::ladder_input_impedance(m, grid[i], evaluate(term, grid[i]).value());
            EXPECT_LE(rel_err(sim[i], oracle::gamma_of(zin, 50.0)), 1e-10);
        }
    }
}

TEST(SimulateGamma, PassiveModelsStayInsideUnitDisc) {
    std::mt19937_64 rng(5);
    auto grid = FrequencyGrid::default_sweep();
    for (int t = 0; t < 100; ++t) {
        auto m = oracle::random_model(rng);
        for (const auto& term : {oracle::random_termination(rng), TerminationModel(termination::Open{}),
                                 TerminationModel(termination::Short{})}) {
            auto s = simulate_gamma(m, term, grid);
            for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LE(std::abs(s[i]), 1.0 + 1e-9);
        }
    }
}

TEST(SimulateGamma, NoiseIsDeterministicAndBounded) {
    auto grid = FrequencyGrid::default_sweep();
    CircuitModel m;
    m.probe.magnetizing_inductance_h = 200e-6;
    m.noise = NoiseModel{0.01, 42};
    auto a = simulate_gamma(m, termination::Resistor{10.0}, grid);
    auto b = simulate_gamma(m, termination::Resistor{10.0}, grid);
    auto clean = simulate_gamma(m, termination::Resistor{10.0}, grid, false);
    bool any_diff = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_LE(std::abs(a[i] - clean[i]), 0.01 * std::abs(clean[i]) * (1 + 1e-12));
        any_diff = any_diff || a[i] != clean[i];
    }
    EXPECT_TRUE(any_diff);
    m.noise->seed = 43;
    auto c = simulate_gamma(m, termination::Resistor{10.0}, grid);
    EXPECT_NE(a[0], c[0]);
    // Standards are noise-free unless asked for.
    auto osl = simulate_osl(m, 50.0, grid);
    auto ref = simulate_gamma(m, termination::Resistor{50.0}, grid, false);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(osl.load()[i], ref[i]);
}

TEST(SimulateGamma, CascadeOrderMatters) {
    CircuitModel m;
    m.probe = {2.0, 50e-6, 1e-6, 20e-12, 0.5};
    auto g = FrequencyGrid::from_points({1e6});
    auto forward = cascade(probe_abcd(m.probe, g), lisn_cable_abcd(m.lisn_cable, g));
    auto swapped = cascade(lisn_cable_abcd(m.lisn_cable, g), probe_abcd(m.probe, g));
    EXPECT_GT(std::abs(forward[0].b - swapped[0].b), 1.0);
    // network_abcd uses the probe-first order.
    auto net = network_abcd(m, g);
    EXPECT_EQ(net[0].b, forward[0].b);
}

TEST(SimulateGamma, SapChainIsAbsorbedByCharacterization) {
    CircuitModel m;
    m.probe = {1.5, 300e-6, 0.5e-6, 30e-12, 0.3};
    m.sap_attenuation_db = 9.0;
    auto grid = FrequencyGrid::default_sweep();
    auto sap = sap_chain_abcd(9.0, m.z0, grid);
    EXPECT_LE(std::abs(sap[0].determinant() - 1.0), 1e-12);
    // A matched attenuator terminated in z0 presents z0.
    EXPECT_LE(rel_err(input_impedance(sap[0], 50.0).value(), 50.0), 1e-12);
    auto cal = k_from_osl(simulate_osl(m, 50.0, grid), 50.0);
    auto z = extract_impedance(simulate_gamma(m, termination::SeriesRlc{5.0, 1e-6, std::nullopt}, grid), cal);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_LE(rel_err(z[i], Complex(5.0, 2 * std::numbers::pi * grid[i] * 1e-6)), 1e-6);
    }
}

TEST(Termination, ParseSpecs) {
    EXPECT_TRUE(std::holds_alternative<termination::Open>(parse_termination("open")));
    EXPECT_TRUE(std::holds_alternative<termination::Short>(parse_termination("SHORT")));
    auto r = std::get<termination::Resistor>(parse_termination("R=50"));
    EXPECT_EQ(r.r_ohm, 50.0);
    auto s = std::get<termination::SeriesRlc>(parse_termination("SERIES:R=1,L=1e-6,C=1e-9"));
    EXPECT_EQ(*s.r_ohm, 1.0);
    EXPECT_EQ(*s.l_h, 1e-6);
    EXPECT_EQ(*s.c_f, 1e-9);
    auto p = std::get<termination::ParallelRlc>(parse_termination("parallel:R=1000,C=1e-10"));
    EXPECT_FALSE(p.l_h.has_value());
    for (const char* bad : {"", "R=", "R=-1", "FOO", "SERIES:", "SERIES:X=1", "SERIES:R=abc", "PARALLEL:L=0"}) {
        EXPECT_THROW(parse_termination(bad), Error) << bad;
    }
}

TEST(Termination, Evaluate) {
    const double f = 1e6, w = 2 * std::numbers::pi * f;
    EXPECT_TRUE(evaluate(TerminationModel(termination::Open{}), f).is_open());
    auto z = evaluate(TerminationModel(termination::SeriesRlc{1.0, 1e-6, 1e-9}), f).value();
    EXPECT_LE(rel_err(z, Complex(1.0, w * 1e-6 - 1.0 / (w * 1e-9))), 1e-15);
    auto zp = evaluate(TerminationModel(termination::ParallelRlc{100.0, std::nullopt, 1e-9}), f).value();
    EXPECT_LE(rel_err(zp, oracle::parallel(100.0, 1.0 / Complex(0, w * 1e-9))), 1e-14);
}

TEST(CounterRng, OrderIndependentAndUniformish) {
    CounterRng rng(123);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        double u = rng.symmetric_unit(0, i);
        ASSERT_GE(u, -1.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.0, 0.01);
    EXPECT_EQ(rng.bits(3, 99), CounterRng(123).bits(3, 99));
    EXPECT_NE(rng.bits(0, 1), rng.bits(1, 0));
}
