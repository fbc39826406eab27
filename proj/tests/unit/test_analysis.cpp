#include <catch2/catch_amalgamated.hpp>

#include "reflectwave/analysis.hpp"
#include "reflectwave/mrac.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

using namespace reflectwave;
using Catch::Approx;

namespace {

const Config& defaults() {
    static const Config c = validate(Config{});
    return c;
}

Trace synthetic(std::size_t n, double dt) {
    Trace t;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < Trace::columns().size(); ++k) t.column(k)->push_back(0.0);
        t.t_s.back() = static_cast<double>(i) * dt;
    }
    return t;
}

}  // namespace

TEST_CASE("ringing frequency of the default unmatched run", "[analysis][ring]") {
    Trace t = run_to_end(defaults(), {Mode::off});
    auto f = ringing_frequency(t, defaults());
    REQUIRE(f);
    CHECK(*f == Approx(714e3).epsilon(0.05));
    CHECK(*f > 0);
}

TEST_CASE("matched run has no ringing", "[analysis][ring]") {
    Trace t = run_to_end(defaults(), {Mode::static_matched});
    CHECK_FALSE(ringing_frequency(t, defaults()).has_value());
}

TEST_CASE("synthetic 500 kHz tone", "[analysis][ring]") {
    const double dt = 2e-9, v = 600.0, f0 = 500e3;
    Trace t = synthetic(20000, dt);
    for (std::size_t i = 0; i < t.size(); ++i) t.v_mot_V[i] = v + 0.5 * v * std::sin(2 * pi * f0 * t.t_s[i]);
    auto f = ringing_frequency(t, v, 0.0, 1.0);
    REQUIRE(f);
    // one sample of jitter on a 2 us interval
    CHECK(std::abs(*f - f0) <= f0 * f0 * dt * 1.01);

    // fewer than three qualifying peaks
    CHECK_FALSE(ringing_frequency(t, v, 0.0, 4.5e-6).has_value());
    // threshold not reached
    for (auto& x : t.v_mot_V) x *= 0.7;
    CHECK_FALSE(ringing_frequency(t, v, 0.0, 1.0).has_value());
}

TEST_CASE("ringing frequency follows 1/(4 tau) on the lossless line", "[analysis][ring]") {
    double prev = INFINITY;
    for (double len : {20.0, 50.0, 70.0, 100.0}) {
        Config c;
        c.cable.length_m = len;
        c.cable.r_per_m = 0.0;
        c.sim.t_end = 40e-6;
        c = validate(c);
        auto f = ringing_frequency(run_to_end(c, {Mode::off}), c);
        REQUIRE(f);
        CHECK(*f == Approx(1.0 / (4 * c.derived.tau)).epsilon(0.05));
        CHECK(*f < prev);
        prev = *f;
    }
}

TEST_CASE("peak ratio", "[analysis]") {
    Trace t = synthetic(10, 1e-9);
    CHECK(peak_ratio(t, 600.0) == 0.0);
    t.v_mot_V[3] = -900.0;
    t.v_mot_V[4] = 600.0;
    CHECK(peak_ratio(t, 600.0) == 1.5);
    CHECK_THROWS(peak_ratio(t, 0.0));

    Config z;
    z.pwm.duty_cmd = 0.0;
    z.sim.t_end = 20e-6;
    z = validate(z);
    CHECK(peak_ratio(run_to_end(z, {Mode::adaptive}), z.pwm.v_dc) == 0.0);
}

TEST_CASE("peak ratio does not depend on the bus voltage", "[analysis]") {
    for (Mode m : {Mode::off, Mode::static_matched}) {
        Config a, b;
        a.sim.t_end = b.sim.t_end = 100e-6;
        b.pwm.v_dc = 300.0;
        a = validate(a);
        b = validate(b);
        const double pa = peak_ratio(run_to_end(a, {m}), a.pwm.v_dc);
        const double pb = peak_ratio(run_to_end(b, {m}), b.pwm.v_dc);
        CHECK(pa == Approx(pb).epsilon(1e-9));
    }
}

TEST_CASE("loss, settle time and clamp count on hand-built traces", "[analysis]") {
    Trace t = synthetic(6, 1.0);
    t.v_coil_V = {10, 10, 10, 10, 10, 10};
    t.i_branch_A = {0, 1, 2, 0, 3, 0};
    CHECK(branch_loss(t) == Approx((10 + 20 + 30) / 3.0));
    // trapezoid of p = {0,10,20,0,30,0}
    CHECK(branch_energy(t) == Approx(5 + 15 + 10 + 15 + 15));

    // |e| = {10, 2, 5, 0.5, 0.2, 0.1}: last sample at or above 10% of 10 is index 2
    t.zeq_ohm = {1, 1, 1, 1, 1, 1};
    t.i_hf_A = {0, 0, 0, 0, 0, 0};
    const double e[] = {10, 2, 5, 0.5, 0.2, 0.1};
    for (int i = 0; i < 6; ++i) t.lyap_J[i] = lyapunov(e[i], 1.0, 0.0);
    CHECK(settle_time(t) == t.t_s[3]);
    auto ae = abs_error(t);
    for (int i = 0; i < 6; ++i) CHECK(ae[i] == Approx(e[i]));

    BranchParams b;
    t.duty = {1.0, 0.8, 1.0, 1.0, 0.05, 0.3};
    CHECK(clamp_count(t, b) == 2);
}

TEST_CASE("metrics invariants on the default runs", "[analysis]") {
    for (Mode m : {Mode::adaptive, Mode::off, Mode::static_matched}) {
        Metrics x = compute_metrics(run_to_end(defaults(), {m}), defaults());
        CHECK(x.peak_ratio >= 1.0 - 1e-3);
        CHECK(x.branch_loss_w >= 0.0);
        if (x.ring_freq_hz) CHECK(*x.ring_freq_hz > 0.0);
        CHECK(x.settle_time_s >= 0.0);
        if (m == Mode::off) CHECK(x.branch_loss_w == 0.0);
    }
}

TEST_CASE("burst windows follow the edge arrivals", "[analysis]") {
    auto a = arrival_times(defaults());
    REQUIRE(a.size() == 20);
    CHECK(a.front() == Approx(defaults().derived.tau));
    CHECK(a[1] == Approx(50e-6 + defaults().derived.tau));
}

TEST_CASE("optimizer never loses to the included hand-tuned point", "[analysis][optimizer]") {
    const auto& c = defaults();
    SearchSpace sp{{1e7, 4e7}, {0.8 * c.mrac.omega, 1.25 * c.mrac.omega}, {50, 400}};
    OptimizeOptions opt;
    opt.seed = 3;
    opt.budget = 6;
    auto r = optimize_refmodel(c, sp, opt);
    const double hand = compute_metrics(run_to_end(c, {Mode::adaptive}), c).branch_loss_w;
    REQUIRE(r.feasible);
    CHECK(r.best.metrics.branch_loss_w <= hand);
    CHECK(r.best.metrics.peak_ratio <= 1.25);
    CHECK(r.log.front().alpha == c.mrac.alpha);
    CHECK(r.log.front().gamma == c.mrac.gamma);
    CHECK(static_cast<int>(r.log.size()) <= opt.budget);
    for (const auto& e : r.log) {
        CHECK(e.alpha >= sp.alpha.lo);
        CHECK(e.alpha <= sp.alpha.hi);
        CHECK(e.omega >= sp.omega.lo);
        CHECK(e.omega <= sp.omega.hi);
        CHECK(e.gamma >= sp.gamma.lo);
        CHECK(e.gamma <= sp.gamma.hi);
    }

    auto again = optimize_refmodel(c, sp, opt);
    REQUIRE(again.log.size() == r.log.size());
    for (std::size_t i = 0; i < r.log.size(); ++i) {
        CHECK(again.log[i].alpha == r.log[i].alpha);
        CHECK(again.log[i].omega == r.log[i].omega);
        CHECK(again.log[i].gamma == r.log[i].gamma);
        CHECK(again.log[i].metrics.branch_loss_w == r.log[i].metrics.branch_loss_w);
    }
}

TEST_CASE("optimizer reports infeasibility over a tiny space", "[analysis][optimizer]") {
    const auto& c = defaults();
    SearchSpace sp{{2e7, 2.02e7}, {c.mrac.omega, c.mrac.omega}, {150, 152}};
    OptimizeOptions opt;
    opt.budget = 5;
    opt.peak_limit = 1.01;
    auto r = optimize_refmodel(c, sp, opt);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.best.valid);
    for (const auto& e : r.log) CHECK(r.best.metrics.peak_ratio <= e.metrics.peak_ratio);

    // exhaustive 3x3 grid confirms nothing in the box meets the constraint
    double best_grid = INFINITY;
    for (double a : {2e7, 2.01e7, 2.02e7})
        for (double g : {150.0, 151.0, 152.0}) {
            Config x = c;
            x.mrac.alpha = a;
            x.mrac.gamma = g;
            x = validate(x);
            best_grid = std::min(best_grid, peak_ratio(run_to_end(x, {Mode::adaptive}), x.pwm.v_dc));
        }
    CHECK(best_grid > 1.01);
}

TEST_CASE("optimizer starts at a seeded point outside the config", "[analysis][optimizer]") {
    Config c = defaults();
    c.sim.t_end = 60e-6;
    c = validate(c);
    SearchSpace sp{{3e7, 4e7}, {c.mrac.omega, c.mrac.omega}, {100, 200}};
    OptimizeOptions opt;
    opt.budget = 3;
    opt.seed = 42;
    auto a = optimize_refmodel(c, sp, opt);
    opt.seed = 43;
    auto b = optimize_refmodel(c, sp, opt);
    REQUIRE(a.log.size() == 3);
    CHECK(a.log.front().alpha >= 3e7);
    CHECK((a.log.front().alpha != b.log.front().alpha || a.log.front().gamma != b.log.front().gamma));

    CHECK_THROWS_AS(optimize_refmodel(c, SearchSpace{{2, 1}, {1, 2}, {1, 2}}, opt), std::invalid_argument);
    opt.budget = 0;
    CHECK_THROWS_AS(optimize_refmodel(c, sp, opt), std::invalid_argument);
}

TEST_CASE("invalid candidates are logged, not fatal", "[analysis][optimizer]") {
    Config c = defaults();
    c.sim.t_end = 20e-6;
    c = validate(c);
    // alpha this large breaks the step-size bound of the reference model
    SearchSpace sp{{1e9, 2e9}, {c.mrac.omega, c.mrac.omega}, {150, 150}};
    OptimizeOptions opt;
    opt.budget = 2;
    auto r = optimize_refmodel(c, sp, opt);
    REQUIRE_FALSE(r.log.empty());
    CHECK_FALSE(r.log.front().valid);
    CHECK_FALSE(r.log.front().error.empty());
    CHECK_FALSE(r.feasible);
}

TEST_CASE("worker pool", "[analysis]") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
        if (i == 7) throw std::runtime_error("boom");
    }));

    setenv("REFLECTWAVE_THREADS", "2", 1);
    CHECK(worker_count(8) == 2);
    CHECK(worker_count(1) == 1);
    setenv("REFLECTWAVE_THREADS", "junk", 1);
    CHECK(worker_count(8) == 8);
    unsetenv("REFLECTWAVE_THREADS");
    CHECK(worker_count() >= 1);
}
