#include <doctest.h>

#include "mml/calcium.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace mml;

namespace {

// Steady state of the cytoplasm under constant influx J: the store term
// vanishes and J balances the pump, solved by bisection.
double steady_cytoplasm(double J, const CalciumModelParams &p)
{
    if (J >= p.pump_max_rate)
        return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = 1.0;
    auto pump = [&](double c) {
        const double cn = std::pow(c, p.pump_hill);
        return p.pump_max_rate * cn / (std::pow(p.pump_half_saturation, p.pump_hill) + cn);
    };
    while (pump(hi) < J)
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pump(mid) < J ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

CalciumCellState cell(double w, double b, double a = 1.0)
{
    CalciumCellState c;
    c.weight = w;
    c.bias = b;
    c.activity = a;
    return c;
}

} // namespace

TEST_CASE("rest state does not move")
{
    CalciumModelParams p;
    auto next = step_transient(cell(0.3, 0.0), 0.0, p);
    CHECK(next.cytoplasm == 0.0);
    CHECK(next.store == 0.0);
}

TEST_CASE("without influx the cytoplasm only drains")
{
    CalciumModelParams p;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        auto c = cell(0.5, 0.0, 0.0);
        c.cytoplasm = u(rng);
        c.store = c.cytoplasm * p.store_uptake / p.store_release;  // exchange balanced
        CHECK(transient_rates(c, u(rng) * 1000, p).cytoplasm <= 0.0);
    }
}

TEST_CASE("steady state example: influx 5 settles at 1 uM")
{
    CalciumModelParams p;
    CHECK(steady_cytoplasm(5.0, p) == doctest::Approx(1.0).epsilon(1e-12));
    auto r = simulate_to_saturation(cell(0.0, 5.0), 0.0, p);
    CHECK(r.settled);
    CHECK(std::abs(r.cytoplasm - 1.0) < 1e-3);
    CHECK(std::abs(r.store - r.cytoplasm * p.store_uptake / p.store_release) < 1e-3);

    auto zero = simulate_to_saturation(cell(0.0, 0.0), 1000.0, p);
    CHECK(zero.cytoplasm == 0.0);
}

TEST_CASE("saturation level is monotone in the input")
{
    CalciumModelParams p;
    double prev = -1.0;
    for (double x = 500; x <= 2500; x += 250) {
        auto r = simulate_to_saturation(cell(0.003, 0.169255), x, p);
        CHECK(r.cytoplasm >= prev);
        prev = r.cytoplasm;
    }
}

TEST_CASE("states never go negative")
{
    CalciumModelParams p;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        auto c = cell(u(rng) * 0.01, u(rng), u(rng));
        c.cytoplasm = u(rng) * 10;
        c.store = u(rng) * 10;
        const double x = u(rng) * 3000;
        for (int s = 0; s < 50; ++s) {
            c = step_transient(c, x, p);
            REQUIRE(c.cytoplasm >= 0.0);
            REQUIRE(c.store >= 0.0);
        }
    }
}

TEST_CASE("with the pump off total calcium grows by the influx")
{
    CalciumModelParams p;
    p.pump_max_rate = 0.0;
    p.store_uptake = p.store_release = 0.2;
    auto c = cell(0.002, 0.3, 0.8);
    c.cytoplasm = 0.4;
    const double x = 1200.0;
    const double influx = 0.8 * 0.002 * x + 0.3;
    for (int s = 0; s < 500; ++s) {
        auto next = step_transient(c, x, p);
        CHECK(std::abs((next.cytoplasm + next.store) - (c.cytoplasm + c.store) - influx * p.dt) < 1e-9);
        c = next;
    }
}

TEST_CASE("parameter validation")
{
    CalciumModelParams p;
    p.dt = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    CalciumModelParams q;
    q.pump_hill = 0.5;
    CHECK_THROWS_AS(q.validate(), Error);
    CHECK_THROWS_AS(step_transient(cell(1, 0), -1.0, CalciumModelParams{}), Error);
}

TEST_CASE("bit boundaries")
{
    CHECK(bit_of(0.5, 1.0) == 0);
    CHECK(bit_of(1.0, 1.0) == 1);
    CHECK(bit_of(2.3, 1.0) == 1);
}

TEST_CASE("cell 1 with all-zero labels needs no updates")
{
    CalciumModelParams p;
    std::vector<LabeledSample> s{{750, 0}, {1250, 0}, {1750, 0}, {2250, 0}};
    auto r = train_cell1(cell(0.0, 0.169255), s, 1.0, {}, p);
    CHECK(r.updates.empty());
    CHECK(r.weight == 0.0);
    REQUIRE(r.trace.entries.size() == 1);
    CHECK(r.trace.back().error == 0.0);
}

TEST_CASE("cell 1 training separates the MSB classes")
{
    CalciumModelParams p;
    const double b0 = 0.169255;
    std::vector<LabeledSample> s{{750, 0}, {1250, 0}, {1750, 1}, {2250, 1}};
    auto r = train_cell1(cell(0.0, b0), s, 1.0, {}, p);
    const double w0 = r.weight;
    CHECK(r.trace.back().error == 0.0);

    CHECK(steady_cytoplasm(1750 * w0 + b0, p) >= 1.0);
    CHECK(steady_cytoplasm(1250 * w0 + b0, p) < 1.0);
    // smallest influx that reaches the threshold, by bisection on J
    double jlo = 0.0, jhi = p.pump_max_rate;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (jlo + jhi);
        (steady_cytoplasm(mid, p) >= 1.0 ? jhi : jlo) = mid;
    }
    CHECK(jhi == doctest::Approx(5.0));
    CHECK(1750 * w0 + b0 >= jhi - 1e-9);
    CHECK(1250 * w0 + b0 < jhi);

    for (const auto &u : r.updates) {
        if (u.kind == UpdateKind::false_negative)
            CHECK(u.after >= u.before);
        if (u.kind == UpdateKind::false_positive)
            CHECK(u.after <= u.before);
    }
}

TEST_CASE("cell 2 exception fires at the third interval")
{
    CalciumModelParams p;
    AdcSystem sys;
    sys.cell1.weight = 0.003;
    sys.cell2.weight = 0.004;
    sys.deactivation = 0.0;
    std::vector<LabeledSample> s{{750, 0}, {1250, 1}, {1750, 0}, {2250, 1}};
    auto r = train_cell2(sys, s, {}, p);
    REQUIRE_FALSE(r.updates.empty());
    CHECK(r.updates.front().kind == UpdateKind::exception);
    CHECK(r.updates.front().sample == 2);
    CHECK(r.updates.front().x == 1750);
    CHECK(r.updates.front().after == doctest::Approx(0.05));
    CHECK(r.trace.back().error == 0.0);

    CalciumTrainingConfig frozen;
    frozen.deactivation_step = 0.0;
    frozen.max_epochs = 20;
    try {
        train_cell2(sys, s, frozen, p);
        FAIL("training should not succeed without deactivation steps");
    } catch (const TrainingFailure &e) {
        CHECK(e.kind() == ErrorKind::training_failure);
        CHECK(e.partial().trace.entries.size() == 20);
    }
}

TEST_CASE("a feasible LSB region exists and training lands in it")
{
    CalciumModelParams p;
    AdcSystem sys;
    const double b1 = sys.cell2.bias;
    auto classifies = [&](double w1, double d0) {
        const double xs[4] = {750, 1250, 1750, 2250};
        const int z0[4] = {0, 0, 1, 1}, want[4] = {0, 1, 0, 1};
        for (int k = 0; k < 4; ++k) {
            const double J = (1.0 - d0 * z0[k]) * w1 * xs[k] + b1;
            if ((steady_cytoplasm(J, p) >= 1.0 ? 1 : 0) != want[k])
                return false;
        }
        return true;
    };
    int feasible = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j)
            feasible += classifies(0.0001 * i, 0.01 * j);
    CHECK(feasible > 0);

    auto trained = train_adc(sys, {}, p);
    CHECK(classifies(trained.system.cell2.weight, trained.system.deactivation));
}

TEST_CASE("ADC conversion")
{
    CalciumModelParams p;
    auto trained = train_adc(AdcSystem{}, {}, p).system;
    CHECK(adc_convert(trained, 750, p).code() == "00");
    CHECK(adc_convert(trained, 1250, p).code() == "01");
    CHECK(adc_convert(trained, 1750, p).code() == "10");
    CHECK(adc_convert(trained, 2250, p).code() == "11");
    int prev = -1;
    for (double x = 500; x <= 2500; x += 50) {
        auto c = adc_convert(trained, x, p);
        const int level = 2 * c.msb + c.lsb;
        CHECK(level >= prev);
        prev = level;
    }
    try {
        adc_convert(trained, 9999, p);
        FAIL("out of range accepted");
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::range);
    }
}

TEST_CASE("ADC config text round trip")
{
    CalciumModelParams p;
    p.dt = 0.005;
    AdcSystem sys;
    sys.cell1.weight = 0.003;
    sys.deactivation = 0.35;
    CalciumTrainingConfig cfg;
    cfg.max_epochs = 77;
    const auto text = adc_config_to_text(sys, p, cfg);

    CalciumModelParams p2;
    AdcSystem sys2;
    CalciumTrainingConfig cfg2;
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t k = 0; k < text.size(); ++k)
        if (text[k] == '\n') {
            lines.push_back(text.substr(start, k - start));
            start = k + 1;
        }
    apply_adc_config(lines, "cfg", sys2, p2, cfg2);
    CHECK(p2.dt == 0.005);
    CHECK(sys2.cell1.weight == 0.003);
    CHECK(sys2.deactivation == 0.35);
    CHECK(cfg2.max_epochs == 77);
    CHECK_THROWS_AS(apply_adc_config({"bogus=1"}, "cfg", sys2, p2, cfg2), ParseError);
}
