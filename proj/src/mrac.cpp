#include "reflectwave/mrac.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace reflectwave {

RefModel make_underdamped(double alpha, double omega, double k) {
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
    if (!(omega > 0)) throw std::invalid_argument("omega must be > 0 for an underdamped model");
    RefModel m;
    m.kind = RefKind::underdamped;
    m.a_m = {{{-alpha, omega}, {-omega, -alpha}}};
    // input on the second state only: H(s) = omega b2 / ((s + alpha)^2 + omega^2), no zero
    m.b_m = {0.0, k * (alpha * alpha + omega * omega) / omega};
    m.c_m = {1.0, 0.0};
    return m;
}

RefModel make_critically_damped(double alpha, double k) {
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
    RefModel m;
    m.kind = RefKind::critically_damped;
    m.a_m = {{{-alpha, 0.0}, {0.0, -alpha}}};
    m.b_m = {k * alpha, 0.0};
    m.c_m = {1.0, 0.0};
    return m;
}

std::array<std::complex<double>, 2> eigenvalues(const Mat2& a) {
    double tr = a[0][0] + a[1][1];
    double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4 - det, 0.0));
    return {tr / 2 + disc, tr / 2 - disc};
}

namespace {

// C (sI - A)^-1 b
std::complex<double> transfer(const RefModel& m, std::complex<double> s) {
    std::complex<double> a = s - m.a_m[0][0], b = -m.a_m[0][1], c = -m.a_m[1][0], d = s - m.a_m[1][1];
    std::complex<double> det = a * d - b * c;
    std::complex<double> y0 = (d * m.b_m[0] - b * m.b_m[1]) / det;
    std::complex<double> y1 = (-c * m.b_m[0] + a * m.b_m[1]) / det;
    return m.c_m[0] * y0 + m.c_m[1] * y1;
}

}  // namespace

double dc_gain(const RefModel& m) { return transfer(m, 0.0).real(); }

double group_delay(const RefModel& m) {
    // central difference on the phase, scaled to the model bandwidth
    auto ev = eigenvalues(m.a_m);
    double h = 1e-6 * std::abs(ev[0]);
    double p1 = std::arg(transfer(m, {0.0, h}));
    double p0 = std::arg(transfer(m, {0.0, -h}));
    return -(p1 - p0) / (2 * h);
}

double ref_step(const RefModel& m, Vec2& x, double v_dc, double u_prev, double u, double dt) {
    const double h = dt / 2;
    // (I - hA) x+ = (I + hA) x + h b v (u + u_prev)
    const double p00 = 1 - h * m.a_m[0][0], p01 = -h * m.a_m[0][1];
    const double p10 = -h * m.a_m[1][0], p11 = 1 - h * m.a_m[1][1];
    const double drive = h * v_dc * (u + u_prev);
    const double r0 = x[0] + h * (m.a_m[0][0] * x[0] + m.a_m[0][1] * x[1]) + drive * m.b_m[0];
    const double r1 = x[1] + h * (m.a_m[1][0] * x[0] + m.a_m[1][1] * x[1]) + drive * m.b_m[1];
    const double det = p00 * p11 - p01 * p10;
    x[0] = (r0 * p11 - p01 * r1) / det;
    x[1] = (p00 * r1 - p10 * r0) / det;
    if (!(std::abs(x[0]) <= 1e3 * v_dc && std::abs(x[1]) <= 1e3 * v_dc) && v_dc > 0)
        throw std::runtime_error("reference model state diverged");
    return m.c_m[0] * x[0] + m.c_m[1] * x[1];
}

IdentityPair error_dynamics_identity(const Mat2& a, const Vec2& b, const Vec2& c, const Mat2& am, const Vec2& bm,
                                     const Vec2& cm, const Vec2& x, const Vec2& xm, double v) {
    auto mv = [](const Mat2& m, const Vec2& y) {
        return Vec2{m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]};
    };
    auto dot = [](const Vec2& p, const Vec2& q) { return p[0] * q[0] + p[1] * q[1]; };
    auto row_mat = [](const Vec2& r, const Mat2& m) {
        return Vec2{r[0] * m[0][0] + r[1] * m[1][0], r[0] * m[0][1] + r[1] * m[1][1]};
    };

    // direct form: output derivative of the plant minus that of the model
    const double plant = dot(c, mv(a, x)) + dot(c, b) * v;
    const double model = dot(cm, mv(am, xm)) + dot(cm, bm) * v;
    IdentityPair out;
    out.lhs = plant - model;

    // rearranged form, C_M A_M X added and subtracted
    const Vec2 err{x[0] - xm[0], x[1] - xm[1]};
    const Vec2 ca = row_mat(c, a), cma = row_mat(cm, am);
    const double t1 = dot(cma, err);
    const double t2 = dot(Vec2{ca[0] - cma[0], ca[1] - cma[1]}, x);
    const double t3 = (dot(c, b) - dot(cm, bm)) * v;
    out.rhs = t1 + t2 + t3;
    out.scale = std::abs(plant) + std::abs(model) + std::abs(t1) + std::abs(t2) + std::abs(t3);
    return out;
}

double lyapunov(double e, double z_eq_mag, double i_hf) {
    if (z_eq_mag < 0) throw std::invalid_argument("|Z_eq| must be >= 0");
    return 0.5 * (e * e + z_eq_mag * i_hf * i_hf);
}

HighPass::HighPass(double f_cut, double dt) {
    double rc = 1.0 / (2 * pi * f_cut);
    a_ = 2 * rc / (2 * rc + dt);
    b_ = (2 * rc - dt) / (2 * rc + dt);
}

double HighPass::step(double x) {
    y_ = a_ * (x - x_prev_) + b_ * y_;
    x_prev_ = x;
    return y_;
}

void adapt_duty(MracState& st, double i_hf, const BranchParams& br, double epsilon, double dt) {
    if (!std::isfinite(st.e)) throw std::runtime_error("non-finite tracking error");
    double rate = st.gamma * st.e * i_hf * (br.r_b / (st.d * st.d)) / (epsilon + i_hf * i_hf);
    double d = st.d + dt * rate;
    int side = 0;
    if (d < br.d_min) {
        d = br.d_min;
        side = -1;
    } else if (d > br.d_max) {
        d = br.d_max;
        side = 1;
    }
    if (side != 0 && side != st.clamp_side) ++st.clamp_count;
    st.clamp_side = side;
    st.d = d;
}

}  // namespace reflectwave
