#pragma once

#include <array>
#include <complex>

#include "reflectwave/config.hpp"

namespace reflectwave {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct RefModel {
    Mat2 a_m{};
    Vec2 b_m{};
    Vec2 c_m{1.0, 0.0};
    RefKind kind = RefKind::underdamped;
};

// dc_gain: steady-state V_coilM / V_dc for a unit step input.
RefModel make_underdamped(double alpha, double omega, double dc_gain = 1.0);
RefModel make_critically_damped(double alpha, double dc_gain = 1.0);

std::array<std::complex<double>, 2> eigenvalues(const Mat2& a);
double dc_gain(const RefModel& m);
// Low-frequency group delay of the output, -d(arg H)/dw at w = 0.
double group_delay(const RefModel& m);

// One trapezoidal step of x' = A x + b v_dc u, with u ramping from u_prev.
// Returns the output C_M x.
double ref_step(const RefModel& m, Vec2& x, double v_dc, double u_prev, double u, double dt);

struct IdentityPair {
    double lhs = 0.0;
    double rhs = 0.0;
    double scale = 0.0;  // sum of magnitudes of the terms, for relative checks
};
IdentityPair error_dynamics_identity(const Mat2& a, const Vec2& b, const Vec2& c, const Mat2& a_m, const Vec2& b_m,
                                     const Vec2& c_m, const Vec2& x, const Vec2& x_m, double v_dc);

double lyapunov(double e, double z_eq_mag, double i_hf);

// Single-pole bilinear high-pass.
class HighPass {
public:
    HighPass() = default;
    HighPass(double f_cut, double dt);
    double step(double x);
    double value() const { return y_; }

private:
    double a_ = 0.0, b_ = 0.0, x_prev_ = 0.0, y_ = 0.0;
};

struct MracState {
    Vec2 x_m{};
    double e = 0.0;
    Vec2 eps{};
    double d = 1.0;
    double big_e = 0.0;
    double gamma = 0.0;
    long clamp_count = 0;
    int clamp_side = 0;  // -1 at d_min, +1 at d_max
};

// Normalized MIT-rule update dD/dt = gamma e i (R_b/D^2) / (eps + i^2),
// clamped to [d_min, d_max]. e must already be set on the state.
void adapt_duty(MracState& st, double i_hf, const BranchParams& branch, double epsilon, double dt);

}  // namespace reflectwave
