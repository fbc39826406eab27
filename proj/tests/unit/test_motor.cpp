#include <catch2/catch_amalgamated.hpp>

#include "reflectwave/config.hpp"
#include "reflectwave/drive.hpp"
#include "reflectwave/line.hpp"
#include "reflectwave/motor.hpp"

#include <cmath>
#include <complex>

using namespace reflectwave;
using Catch::Approx;

namespace {

struct Bench {
    Config cfg;
    BergeronLine line;
    MotorNetwork motor;
    double t = 0.0;

    explicit Bench(Config c)
        : cfg(validate(c)),
          line(cfg.cable, cfg.derived.delay_steps),
          motor(cfg.motor, cfg.branch, cfg.derived.dt) {}

    // advance one step; returns power into the motor at the new instant
    double step(double vsrc) {
        t += cfg.derived.dt;
        double p = 0.0;
        line.step(vsrc, cfg.pwm.r_source, [&](const Norton& n) {
            auto r = motor.solve(n);
            p = r.v_mot * r.i_into_motor;
            return EndSolution{r.v_mot, -r.i_into_motor};
        });
        return p;
    }
};

Config lossless() {
    Config c;
    c.cable.r_per_m = 0.0;
    return c;
}

}  // namespace

TEST_CASE("z_eq closed-form spot values", "[motor]") {
    BranchParams b;
    b.r_b = 50;
    CHECK(z_eq(1.0, 0.0, b).magnitude == Approx(50.0).epsilon(1e-14));
    b.r_b = 25;
    CHECK(z_eq(0.5, 0.0, b).magnitude == Approx(50.0).epsilon(1e-14));
    CHECK(z_eq(0.5, 0.0, b).phase == 0.0);

    BranchParams d;
    const double f = 714e3, w = 2 * pi * f;
    auto hand = [&](double duty) {
        const double r = d.r_b / duty;
        return r / std::sqrt(1 + std::pow(w * d.c_b * r, 2));
    };
    CHECK(z_eq(0.25, f, d).magnitude == Approx(hand(0.25)).epsilon(1e-12));
    CHECK(z_eq(0.75, f, d).magnitude == Approx(hand(0.75)).epsilon(1e-12));
    CHECK(z_eq(0.25, f, d).magnitude > z_eq(0.75, f, d).magnitude);
    CHECK(z_eq(0.5, f, d).phase < 0.0);
}

TEST_CASE("z_eq is continuous and strictly decreasing in duty", "[motor]") {
    BranchParams b;
    for (double f : {0.0, 714e3, 5e6}) {
        double prev = INFINITY;
        for (double d = b.d_min; d <= b.d_max; d += 1e-3) {
            const double z = z_eq(d, f, b).magnitude;
            REQUIRE(z < prev);
            const double z2 = z_eq(std::min(d + 1e-9, b.d_max), f, b).magnitude;
            REQUIRE(std::abs(z2 - z) <= 1e-6 * z);
            prev = z;
        }
    }
    CHECK_THROWS(z_eq(0.01, 1e3, b));
    CHECK_THROWS(z_eq(1.5, 1e3, b));
    CHECK_THROWS(z_eq(0.5, -1.0, b));
}

TEST_CASE("matched duty hits Z0", "[motor]") {
    BranchParams b;
    const double f = 714285.7;
    const double d = matched_duty(f, 50.0, b);
    CHECK(z_eq(d, f, b).magnitude == Approx(50.0).epsilon(1e-10));
    CHECK(matched_duty(f, 1e6, b) == b.d_min);
    CHECK(matched_duty(f, 1.0, b) == b.d_max);
}

TEST_CASE("gate arming thresholds", "[motor][gate]") {
    PwmParams pwm;
    BranchParams b;
    CHECK(arm_condition(1.9 * pwm.v_dc, false, pwm, b));
    CHECK_FALSE(arm_condition(0.5 * pwm.v_dc, false, pwm, b));
    CHECK(arm_condition(0.5 * pwm.v_dc, true, pwm, b));
    CHECK(arm_condition(-1.9 * pwm.v_dc, false, pwm, b));

    BranchState st;
    gate_branch(st, {0.5 * pwm.v_dc, false}, pwm, b, 1e-9);
    CHECK_FALSE(st.active);
    gate_branch(st, {1.9 * pwm.v_dc, false}, pwm, b, 1e-9);
    CHECK(st.active);
    CHECK(st.gate == 1.0);
}

TEST_CASE("gate holds off, then ramps down over the release time", "[motor][gate]") {
    PwmParams pwm;
    BranchParams b;
    b.hold_off = 1e-6;
    b.release = 2e-6;
    const double dt = 1e-8;
    BranchState st;
    gate_branch(st, {0, true}, pwm, b, dt);
    REQUIRE(st.active);
    int steps = 0;
    while (!st.releasing && steps < 10000) {
        gate_branch(st, {0.2 * pwm.v_dc, false}, pwm, b, dt);
        ++steps;
    }
    CHECK(steps == Approx(b.hold_off / dt).margin(1));
    int ramp = 0;
    while (st.active && ramp < 10000) {
        const double g0 = st.gate;
        gate_branch(st, {0.2 * pwm.v_dc, false}, pwm, b, dt);
        REQUIRE(st.gate <= g0);
        ++ramp;
    }
    CHECK(ramp == Approx(b.release / dt).margin(1));
    CHECK(st.gate == 0.0);

    // re-arms immediately during a release
    gate_branch(st, {0, true}, pwm, b, dt);
    for (int k = 0; k < 150; ++k) gate_branch(st, {0.2 * pwm.v_dc, false}, pwm, b, dt);
    REQUIRE(st.releasing);
    gate_branch(st, {2 * pwm.v_dc, false}, pwm, b, dt);
    CHECK(st.gate == 1.0);
    CHECK_FALSE(st.releasing);
}

TEST_CASE("inactive branch, fast edge: first peak near 2 V_dc", "[motor][network]") {
    Bench bench(lossless());
    const auto& c = bench.cfg;
    REQUIRE(c.pwm.t_rise <= c.derived.tau / 3);
    std::complex<double> zm = std::complex<double>(0, 2 * pi * c.derived.f_ring * c.motor.l_coil) +
                              z_remainder(c.derived.f_ring, c.motor);
    REQUIRE(std::abs(reflection_coefficient(zm, c.derived.z0)) >= 0.95);
    double peak = 0.0;
    while (bench.t < 3 * c.derived.tau) {
        bench.step(pwm_voltage(bench.t + c.derived.dt, c.pwm));
        peak = std::max(peak, bench.motor.v_mot());
    }
    CHECK(peak >= 1.9 * c.pwm.v_dc);
}

TEST_CASE("branch forced to the matched duty: first peak stays near V_dc", "[motor][network]") {
    Bench bench(lossless());
    const auto& c = bench.cfg;
    auto& br = bench.motor.branch();
    br.d = matched_duty(c.derived.f_ring, c.derived.z0, c.branch);
    br.active = true;
    br.gate = 1.0;
    double peak = 0.0;
    while (bench.t < 3 * c.derived.tau) {
        bench.step(pwm_voltage(bench.t + c.derived.dt, c.pwm));
        peak = std::max(peak, bench.motor.v_mot());
    }
    CHECK(peak <= 1.1 * c.pwm.v_dc);
}

TEST_CASE("zero excitation gives zero outputs", "[motor][network]") {
    Bench bench(Config{});
    for (int k = 0; k < 2000; ++k) REQUIRE(bench.step(0.0) == 0.0);
    CHECK(bench.motor.v_mot() == 0.0);
    CHECK(bench.motor.v_junction() == 0.0);
    CHECK(bench.motor.coil().i_coil == 0.0);
    CHECK(bench.motor.stored_energy() == 0.0);
}

TEST_CASE("passive network energy balance", "[motor][network][oracle]") {
    Bench bench(lossless());
    const auto& c = bench.cfg;
    const double dt = c.derived.dt;
    double e_in = 0.0, e_r = 0.0, p_prev = 0.0, pr_prev = 0.0;
    for (int k = 0; k < 5000; ++k) {
        const double p = bench.step(pwm_voltage(bench.t + dt, c.pwm));
        const double ir = bench.motor.i_remainder();
        const double pr = c.motor.r_term * ir * ir;
        e_in += 0.5 * (p + p_prev) * dt;
        e_r += 0.5 * (pr + pr_prev) * dt;
        p_prev = p;
        pr_prev = pr;
    }
    const double stored = bench.motor.stored_energy();
    REQUIRE(e_in > 0.0);
    CHECK(std::abs(e_in - (stored + e_r)) <= 1e-3 * e_in);
}

TEST_CASE("the first coil takes more than its divider share", "[motor][network]") {
    Bench bench(Config{});
    const auto& c = bench.cfg;
    double vc = 0.0, vm = 0.0;
    while (bench.t < 20 * c.derived.tau) {
        bench.step(pwm_voltage(bench.t + c.derived.dt, c.pwm));
        vc = std::max(vc, std::abs(bench.motor.coil().v_coil));
        vm = std::max(vm, std::abs(bench.motor.v_mot()));
    }
    CHECK(vc / vm > 1.0 / c.motor.n_coils);
}

TEST_CASE("raising the duty pulls the coil voltage down", "[motor][network]") {
    Bench bench(Config{});
    const auto& c = bench.cfg;
    auto& br = bench.motor.branch();
    br.active = true;
    br.gate = 1.0;
    br.d = 0.5;
    while (bench.t < c.derived.tau + 0.5 * c.pwm.t_rise) bench.step(pwm_voltage(bench.t + c.derived.dt, c.pwm));
    REQUIRE(bench.motor.coil().v_coil > 0.0);

    const Norton n = bench.line.receiving_norton();
    MotorNetwork lo = bench.motor, hi = bench.motor;
    hi.branch().d = 0.6;
    lo.solve(n);
    hi.solve(n);
    CHECK(hi.coil().v_coil < lo.coil().v_coil);
}
