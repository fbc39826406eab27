#include "reflectwave/motor.hpp"

#include <cmath>
#include <stdexcept>

namespace reflectwave {

std::complex<double> z_eq_complex(double d, double f, const BranchParams& b) {
    if (!(d >= b.d_min && d <= b.d_max)) throw std::invalid_argument("duty outside [d_min, d_max]");
    if (f < 0) throw std::invalid_argument("frequency must be >= 0");
    double r = b.r_b / d;
    double x = 2 * pi * f * b.c_b * r;
    // R || 1/(jwC) = R / (1 + jwCR)
    return r / std::complex<double>(1.0, x);
}

Impedance z_eq(double d, double f, const BranchParams& b) {
    auto z = z_eq_complex(d, f, b);
    return {std::abs(z), std::arg(z)};
}

std::complex<double> z_remainder(double f, const MotorHfParams& m) {
    const double w = 2 * pi * f;
    std::complex<double> series(m.r_term, w * (m.n_coils - 1) * m.l_coil);
    if (m.c_junction <= 0 || w == 0) return series;
    std::complex<double> yc(0.0, w * m.c_junction);
    return 1.0 / (yc + 1.0 / series);
}

double matched_duty(double f, double z_target, const BranchParams& b) {
    double lo = b.d_min, hi = b.d_max;
    if (z_eq(lo, f, b).magnitude <= z_target) return lo;
    if (z_eq(hi, f, b).magnitude >= z_target) return hi;
    for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
        double mid = 0.5 * (lo + hi);
        if (z_eq(mid, f, b).magnitude > z_target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double matched_coil_share(double f, double z0, const MotorHfParams& m, const BranchParams& b) {
    double d = matched_duty(f, z0, b);
    auto ze = z_eq_complex(d, f, b);
    // the first coil inductance is an open circuit next to the branch at f
    std::complex<double> zl(0.0, 2 * pi * f * m.l_coil);
    auto zp = ze * zl / (ze + zl);
    return std::abs(zp / (zp + z_remainder(f, m)));
}

MotorNetwork::MotorNetwork(const MotorHfParams& m, const BranchParams& b, double dt)
    : mp_(m), bp_(b), dt_(dt) {
    g_l1_ = dt / (2 * m.l_coil);
    g_cj_ = 2 * m.c_junction / dt;
    g_cb_ = 2 * b.c_b / dt;
    double l2 = (m.n_coils - 1) * m.l_coil;
    g_rem_ = 1.0 / (m.r_term + 2 * l2 / dt);
    k_rem_ = 2 * l2 / dt - m.r_term;
    br_.d = b.d_init;
}

Stamp2 MotorNetwork::stamp() const {
    const double vc = v_t_ - v_m_;
    const double h_l1 = coil_.i_coil + g_l1_ * vc;
    const double g_b = br_.active ? br_.gate * br_.d / bp_.r_b : 0.0;
    const double g_c = br_.active ? g_cb_ : 0.0;
    const double h_cb = br_.active ? -(g_c * br_.v_cb + br_.i_cb) : 0.0;
    const double h_rem = g_rem_ * (v_m_ + k_rem_ * i_rem_);
    const double h_cj = -(g_cj_ * v_m_ + i_cj_);
    const double g = g_l1_ + g_b + g_c;
    Stamp2 s;
    s.g11 = g;
    s.g12 = -g;
    s.g22 = g + g_rem_ + g_cj_;
    s.r1 = -(h_l1 + h_cb);
    s.r2 = h_l1 + h_cb - h_rem - h_cj;
    return s;
}

void MotorNetwork::commit(double v_t, double v_m) {
    const double vc_old = v_t_ - v_m_;
    const double vc = v_t - v_m;
    const double g_b = br_.active ? br_.gate * br_.d / bp_.r_b : 0.0;
    coil_.i_coil = g_l1_ * vc + (coil_.i_coil + g_l1_ * vc_old);
    if (br_.active) {
        br_.i_cb = g_cb_ * vc - (g_cb_ * br_.v_cb + br_.i_cb);
        br_.v_cb = vc;
        br_.i_branch = g_b * vc + br_.i_cb;
    } else {
        br_.i_cb = 0.0;
        br_.v_cb = vc;
        br_.i_branch = 0.0;
    }
    i_rem_ = g_rem_ * v_m + g_rem_ * (v_m_ + k_rem_ * i_rem_);
    i_cj_ = g_cj_ * v_m - (g_cj_ * v_m_ + i_cj_);
    v_t_ = v_t;
    v_m_ = v_m;
    coil_.v_coil = vc;
    coil_.i_phase = coil_.i_coil + br_.i_branch;
}

TerminalResult MotorNetwork::solve(const Norton& line) {
    Stamp2 s = stamp();
    // KCL at T: line current (g v + ih) plus the network's current sum to zero
    const double a11 = s.g11 + line.g;
    const double r1 = s.r1 - line.ih;
    const double det = a11 * s.g22 - s.g12 * s.g12;
    if (det == 0.0 || !std::isfinite(det)) throw std::runtime_error("singular terminal network");
    const double vt = (r1 * s.g22 - s.g12 * s.r2) / det;
    const double vm = (a11 * s.r2 - s.g12 * r1) / det;
    if (!std::isfinite(vt) || !std::isfinite(vm)) throw std::runtime_error("non-finite terminal solution");
    commit(vt, vm);
    return {vt, vm, -(line.g * vt + line.ih)};
}

double MotorNetwork::stored_energy() const {
    double l2 = (mp_.n_coils - 1) * mp_.l_coil;
    double e = 0.5 * mp_.l_coil * coil_.i_coil * coil_.i_coil + 0.5 * l2 * i_rem_ * i_rem_ +
               0.5 * mp_.c_junction * v_m_ * v_m_;
    if (br_.active) e += 0.5 * bp_.c_b * br_.v_cb * br_.v_cb;
    return e;
}

bool arm_condition(double v_mot, bool in_flight, const PwmParams& pwm, const BranchParams& b) {
    return in_flight || std::abs(v_mot) > b.activation_ratio * b.safety * pwm.v_dc;
}

void gate_branch(BranchState& st, const GateInputs& in, const PwmParams& pwm, const BranchParams& b, double dt) {
    if (arm_condition(in.v_mot, in.edge_in_flight, pwm, b)) {
        if (!st.active) {
            st.active = true;
            st.i_cb = 0.0;  // capacitor starts at the coil voltage
        }
        st.gate = 1.0;
        st.releasing = false;
        st.below_time = 0.0;
        return;
    }
    if (!st.active) return;
    if (st.releasing) {
        st.gate -= b.release > 0 ? dt / b.release : 1.0;
        if (st.gate <= 0.0) {
            st.gate = 0.0;
            st.active = false;
            st.releasing = false;
        }
        return;
    }
    if (std::abs(in.v_mot) < 1.1 * pwm.v_dc) {
        st.below_time += dt;
        if (st.below_time >= b.hold_off) {
            if (b.release > 0) {
                st.releasing = true;
            } else {
                st.active = false;
                st.gate = 0.0;
            }
        }
    } else {
        st.below_time = 0.0;
    }
}

}  // namespace reflectwave
