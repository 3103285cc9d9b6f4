#include <doctest.h>

#include <cmath>
#include <random>

#include "qnrg/model/power.hpp"
#include "qnrg/model/throughput.hpp"

using namespace qnrg;
using namespace qnrg::model;

namespace {

// Small calibrated model used across the dispatch tests.
ThroughputModel test_model(double cw_on = 5.0, double cw_off = 9.0) {
    ThroughputModel m;
    m.impl = "t";
    for (int n = 1; n <= 8; ++n) m.lambda.set(n, 1000.0 + 10.0 * n);
    m.cw_on = cw_on;
    m.cw_off = cw_off;
    for (double f : {1.0, 2.0, 3.4})
        for (int n = 2; n <= 8; ++n) m.hc_lines.set(f, n, {1e4 * f, 20.0 * f});
    return m;
}

const CasCostModel kCas{2e-3, 3e-3, 5e-4};
const MachineTopology kTopo{2, 8};

}  // namespace

TEST_CASE("parallel section time") {
    CHECK(parallel_section_time(0.0, 5.0, 3.4) == 0.0);
    CHECK(parallel_section_time(100.0, 1.0, 10.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(parallel_section_time(3400.0, 250000.0, 3.4) ==
          doctest::Approx(4.0e-3).epsilon(1e-12));
    CHECK_THROWS_AS(parallel_section_time(1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(parallel_section_time(1.0, 1.0, -1.0), DomainError);
}

TEST_CASE("retry loop time") {
    CasCostModel cas{2.0, 3.0, 0.5};
    CHECK(retry_loop_time(5.0, 10.0, false, cas) == doctest::Approx(1.0).epsilon(1e-12));
    // f -> infinity leaves only the non-scalable term.
    CHECK(retry_loop_time(1.0, 1e15, true, cas) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(retry_loop_time(2.0, 2.0, true, cas) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(retry_loop_time(0.0, 1.0, false, cas), DomainError);
}

TEST_CASE("low contention throughput") {
    CHECK(throughput_low_contention(2, 10.0, 1.0) ==
          doctest::Approx(2.0 / 11.0).epsilon(1e-12));
    CHECK(throughput_low_contention(1, 0.0, 1.0) == doctest::Approx(1.0));
    CHECK(throughput_low_contention(8, 4e-3, 0.0) == doctest::Approx(2000.0));
    CHECK_THROWS_AS(throughput_low_contention(1, 0.0, 0.0), DomainError);
}

TEST_CASE("high contention throughput") {
    CHECK(throughput_high_contention(4e6, 1e5, 10.0) == doctest::Approx(5e6));
    CHECK(throughput_high_contention(4e6, 1e5, 0.0) == doctest::Approx(4e6));
    CHECK(throughput_high_contention(1e6, 0.0, 50.0) == doctest::Approx(1e6));
    CHECK_THROWS_AS(throughput_high_contention(1.0, -1.0, 10.0), ExtrapolationError);
}

TEST_CASE("contention regime from retry-loop threshold") {
    // n = 1 never congests.
    ThroughputModel m = test_model();
    for (double pw : {0.0, 1e-6, 1.0, 1e6})
        CHECK(contention_regime({"t", 1, 3.4, pw}, m, kCas, kTopo) == Regime::NonCongested);

    // t_RL = 2us at n = 5 on a wide socket; threshold is 8us.
    MachineTopology wide{2, 16};
    ThroughputModel m2 = test_model(2.0, 2.0);
    CasCostModel cas{1e-6, 1e-6, 0.0};
    model::LambdaTable lam;
    lam.set(5, 1e6);
    m2.lambda = lam;
    // pw for t_PS = 10us at lambda = 1e6, f = 1.
    CHECK(contention_regime({"t", 5, 1.0, 10.0}, m2, cas, wide) == Regime::NonCongested);
    CHECK(contention_regime({"t", 5, 1.0, 5.0}, m2, cas, wide) == Regime::Congested);

    ThroughputModel gap = test_model();
    CHECK_THROWS_AS(contention_regime({"t", 20, 1.0, 1.0}, gap, kCas, kTopo),
                    CalibrationGapError);
}

TEST_CASE("predict throughput composes the pieces") {
    ThroughputModel m;
    m.impl = "t";
    m.lambda.set(2, 1.0);
    m.cw_on = 5.0;
    m.cw_off = 5.0;
    CasCostModel cas{2.0, 2.0, 0.0};
    // t_PS = 100/(1*10) = 10, t_RL = 5*2/10 = 1, threshold = 1.
    CHECK(predict_throughput({"t", 2, 10.0, 100.0}, m, cas, kTopo) ==
          doctest::Approx(2.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("pw sweep crosses the frontier exactly once") {
    ThroughputModel m = test_model();
    for (int n : {2, 4, 6, 8}) {
        for (double f : {1.0, 2.0, 3.4}) {
            double crit = frontier_pw(n, f, m, kCas, kTopo);
            CHECK(crit > 0.0);
            int switches = 0;
            Regime prev = contention_regime({"t", n, f, 0.0}, m, kCas, kTopo);
            CHECK(prev == Regime::Congested);
            const int steps = 4000;
            for (int i = 1; i <= steps; ++i) {
                double pw = 2.0 * crit * i / steps;
                Regime cur = contention_regime({"t", n, f, pw}, m, kCas, kTopo);
                if (cur != prev) {
                    ++switches;
                    CHECK(cur == Regime::NonCongested);
                    // The switch lands where t_PS first reaches the threshold.
                    CHECK(pw >= crit - 1e-9 * crit);
                    CHECK(pw - 2.0 * crit / steps <= crit + 1e-9 * crit);
                }
                prev = cur;
            }
            CHECK(switches == 1);
        }
    }
}

TEST_CASE("non-congested throughput decreases in pw and vanishes asymptotically") {
    ThroughputModel m = test_model();
    double prev = 1e300;
    for (double pw = 1000.0; pw <= 1e9; pw *= 3.0) {
        double t = predict_throughput({"t", 4, 3.4, pw}, m, kCas, kTopo);
        CHECK(t < prev);
        prev = t;
        // Above the frontier the value tracks n*lambda*f/pw.
        double bound = 4.0 * m.lambda.at(4) * 3.4 / pw;
        CHECK(t <= bound * (1.0 + 1e-9));
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("retry ratio") {
    CHECK(retry_ratio(1.6, {"t", 4, 2.0, 4000.0}, 1000.0) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK(retry_ratio(123.0, {"t", 4, 2.0, 0.0}, 1000.0) == doctest::Approx(1.0));
    // Pure parallel-section cycle: T = n*lambda*f/pw -> r = 0.
    CHECK(retry_ratio(4.0 * 1000.0 * 2.0 / 500.0, {"t", 4, 2.0, 500.0}, 1000.0) ==
          doctest::Approx(0.0));
    // Noisy throughput outside the identity range clamps.
    CHECK(retry_ratio(1e12, {"t", 4, 2.0, 4000.0}, 1000.0) == 0.0);
}

TEST_CASE("retry ratio algebraic identity at random points") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        int n = 1 + static_cast<int>(u(rng));
        double lambda = 100.0 * u(rng), f = u(rng), pw = 100.0 * u(rng);
        double t_ps = pw / (lambda * f);
        double t_rl = u(rng) / 100.0;
        double throughput = n / (t_ps + t_rl);
        double expect = t_rl / (t_ps + t_rl);
        double r = retry_ratio(throughput, {"t", n, f, pw}, lambda);
        CHECK(std::fabs(r - expect) <= 1e-12 * std::max(1.0, expect));
    }
}

TEST_CASE("cpu dynamic power") {
    CpuPowerCoefficients cas_row{0.001392, 0.0510, 1.6415};
    double oracle = 0.001392 * std::pow(34.0, 1.6415) + 0.0510;
    double got = cpu_dynamic_power(cas_row, 34.0, 1);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(std::fabs(got - 0.5055) < 1e-3);  // published magnitude
    CHECK(cpu_dynamic_power(cas_row, 34.0, 16) ==
          doctest::Approx(16.0 * got).epsilon(1e-15));
    CHECK(cpu_dynamic_power({0.0, 0.1, 2.0}, 25.0, 3) == doctest::Approx(0.3));
    CHECK_THROWS_AS(cpu_dynamic_power(cas_row, 0.5, 1), DomainError);
    CHECK_THROWS_AS(cpu_dynamic_power(cas_row, 150.0, 1), DomainError);
}

TEST_CASE("memory and uncore dynamic power") {
    MemoryPowerModel m{2.0, 1.0, 0.5, 0.25};
    CHECK(memory_dynamic_power(m, 4, 0.25, false) == doctest::Approx(2.0));
    CHECK(memory_dynamic_power(m, 4, 0.0, false) == 0.0);
    CHECK(memory_dynamic_power(m, 4, 0.25, true) == doctest::Approx(5.0));
    CHECK_THROWS_AS(memory_dynamic_power(m, 4, 1.5, false), DomainError);
    CHECK(uncore_dynamic_power(m, 4, 0.5) == doctest::Approx(0.5 * 4 * 0.5 + 0.25 * 4));
}

namespace {

PowerModel test_power_model() {
    PowerModel p;
    p.static_active.p_stat = {20.0, 5.0, 7.0};
    for (double f : {1.0, 2.0, 3.4}) {
        p.static_active.p_act[0].set(f, 2.0 * f);
        p.static_active.p_act[1].set(f, 0.0);
        p.static_active.p_act[2].set(f, 0.0);
    }
    p.cpu = {0.001, 0.05, 1.7};
    p.memory = {0.3, 0.1, 0.08, 0.05};
    return p;
}

}  // namespace

TEST_CASE("power breakdown structure") {
    ThroughputModel m = test_model();
    PowerModel p = test_power_model();

    auto rep = predict_power_and_energy({"t", 4, 3.4, 1000.0}, m, p, kCas, kTopo);
    double sum = 0.0;
    for (PowerKind k : {PowerKind::Static, PowerKind::Active, PowerKind::Dynamic})
        for (Component c : kComponents) sum += rep.breakdown.cell(k, c);
    CHECK(rep.breakdown.total() == doctest::Approx(sum).epsilon(1e-15));

    double by_comp = 0.0, by_kind = 0.0;
    for (Component c : kComponents) by_comp += rep.breakdown.component_total(c);
    for (PowerKind k : {PowerKind::Static, PowerKind::Active, PowerKind::Dynamic})
        by_kind += rep.breakdown.kind_total(k);
    CHECK(by_comp == doctest::Approx(rep.breakdown.total()));
    CHECK(by_kind == doctest::Approx(rep.breakdown.total()));

    CHECK(rep.energy_per_op * rep.throughput ==
          doctest::Approx(rep.breakdown.total()).epsilon(1e-12));

    // 2n threads drive the dynamic rows; sockets scale the active row.
    CHECK(rep.breakdown.cell(PowerKind::Dynamic, Component::Cpu) ==
          doctest::Approx(cpu_dynamic_power(p.cpu, 34.0, 8)));
    CHECK(rep.breakdown.cell(PowerKind::Active, Component::Cpu) ==
          doctest::Approx(1 * 2.0 * 3.4));
    auto rep2 = predict_power_and_energy({"t", 5, 3.4, 1000.0}, m, p, kCas, kTopo);
    CHECK(rep2.breakdown.cell(PowerKind::Active, Component::Cpu) ==
          doctest::Approx(2 * 2.0 * 3.4));
}

TEST_CASE("large pw starves the occupancy-driven cells") {
    ThroughputModel m = test_model();
    PowerModel p = test_power_model();
    auto rep = predict_power_and_energy({"t", 4, 3.4, 1e11}, m, p, kCas, kTopo);
    CHECK(rep.retry_ratio < 1e-6);
    CHECK(rep.breakdown.cell(PowerKind::Dynamic, Component::Memory) < 1e-5);
    CHECK(rep.breakdown.cell(PowerKind::Dynamic, Component::Uncore) ==
          doctest::Approx(8 * p.memory.uncore_linear).epsilon(1e-4));
}
