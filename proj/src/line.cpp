#include "reflectwave/line.hpp"

#include <cmath>
#include <stdexcept>

namespace reflectwave {

double surge_impedance(const CableParams& cable) { return std::sqrt(cable.l_per_m / cable.c_per_m); }

double propagation_delay(const CableParams& cable) {
    return cable.length_m * std::sqrt(cable.l_per_m * cable.c_per_m);
}

std::complex<double> reflection_coefficient(std::complex<double> z_term, double z0) {
    if (!(z0 > 0)) throw std::invalid_argument("z0 must be > 0");
    auto den = z_term + z0;
    if (std::abs(den) == 0.0) throw std::invalid_argument("z_term = -z0 is not physical");
    return (z_term - z0) / den;
}

double reflection_coefficient(double z_term, double z0) {
    if (std::isinf(z_term)) return z_term > 0 ? 1.0 : -1.0;
    return reflection_coefficient(std::complex<double>(z_term, 0.0), z0).real();
}

BergeronLine::BergeronLine(const CableParams& cable, std::int64_t delay_steps) {
    if (delay_steps < 1) throw std::invalid_argument("delay must be at least one step");
    double z0 = surge_impedance(cable);
    double r = cable.r_per_m * cable.length_m;
    zc_ = z0 + r / 4;
    h_ = (z0 - r / 4) / (z0 + r / 4);
    auto n = static_cast<std::size_t>(delay_steps);
    vs_hist_.assign(n, 0.0);
    is_hist_.assign(n, 0.0);
    vr_hist_.assign(n, 0.0);
    ir_hist_.assign(n, 0.0);
}

// Dommel's lumped-loss history source; reduces to -(v_m/Z0 + i_m) when R = 0.
double BergeronLine::history(std::size_t k, bool at_send) const {
    double vk = at_send ? vs_hist_[k] : vr_hist_[k];
    double ik = at_send ? is_hist_[k] : ir_hist_[k];
    double vm = at_send ? vr_hist_[k] : vs_hist_[k];
    double im = at_send ? ir_hist_[k] : is_hist_[k];
    return -0.5 * (1 + h_) * (vm / zc_ + h_ * im) - 0.5 * (1 - h_) * (vk / zc_ + h_ * ik);
}

Norton BergeronLine::sending_norton() const { return {1.0 / zc_, history(slot_, true)}; }
Norton BergeronLine::receiving_norton() const { return {1.0 / zc_, history(slot_, false)}; }

void BergeronLine::push(double v_send, double i_send, double v_recv, double i_recv) {
    v_send_ = v_send;
    i_send_ = i_send;
    v_recv_ = v_recv;
    i_recv_ = i_recv;
    vs_hist_[slot_] = v_send;
    is_hist_[slot_] = i_send;
    vr_hist_[slot_] = v_recv;
    ir_hist_[slot_] = i_recv;
    if (++slot_ == vs_hist_.size()) slot_ = 0;
}

void BergeronLine::step(double vs, double rs, const TerminalSolver& recv) {
    Norton ns = sending_norton();
    Norton nr = receiving_norton();
    double v1 = (vs / rs - ns.ih) / (1.0 / rs + ns.g);
    double i1 = ns.g * v1 + ns.ih;
    EndSolution end = recv(nr);
    if (!std::isfinite(end.v) || !std::isfinite(end.i_into_line))
        throw std::runtime_error("terminal solver returned a non-finite value");
    push(v1, i1, end.v, end.i_into_line);
}

bool BergeronLine::quiescent() const {
    for (std::size_t k = 0; k < vs_hist_.size(); ++k)
        if (vs_hist_[k] != 0 || is_hist_[k] != 0 || vr_hist_[k] != 0 || ir_hist_[k] != 0) return false;
    return true;
}

LadderLine::LadderLine(const CableParams& cable, int n_seg, double dt) : n_seg_(n_seg), dt_(dt) {
    if (n_seg < 1) throw std::invalid_argument("n_seg must be >= 1");
    l_seg_ = cable.l_per_m * cable.length_m / n_seg;
    c_seg_ = cable.c_per_m * cable.length_m / n_seg;
    r_seg_ = cable.r_per_m * cable.length_m / n_seg;
    auto n = static_cast<std::size_t>(n_seg);
    v_.assign(n + 1, 0.0);
    ic_.assign(n + 1, 0.0);
    i_.assign(n, 0.0);
    cnode_.assign(n + 1, c_seg_);
    cnode_.front() = cnode_.back() = c_seg_ / 2;
    a_.assign(n + 2, 0.0);
    b_.assign(n + 2, 0.0);
    c_.assign(n + 2, 0.0);
    d_.assign(n + 2, 0.0);
}

std::pair<double, double> LadderLine::step(double vs, double rs, const Stamp2& st) {
    const auto n = static_cast<std::size_t>(n_seg_);
    const double gl = 1.0 / (r_seg_ + 2 * l_seg_ / dt_);
    const double kl = 2 * l_seg_ / dt_ - r_seg_;
    // series branch k (node k -> k+1): i = gl*(v_k - v_k+1) + hl[k]
    std::vector<double>& hl = scratch_hl_;
    hl.resize(n);
    for (std::size_t k = 0; k < n; ++k) hl[k] = gl * ((v_[k] - v_[k + 1]) + kl * i_[k]);

    // unknowns 0..n ladder nodes, n+1 terminal block second node
    const std::size_t m = n + 2;
    std::fill(a_.begin(), a_.end(), 0.0);
    std::fill(b_.begin(), b_.end(), 0.0);
    std::fill(c_.begin(), c_.end(), 0.0);
    std::fill(d_.begin(), d_.end(), 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        double gc = 2 * cnode_[j] / dt_;
        double hc = -(gc * v_[j] + ic_[j]);  // i_c = gc*v + hc
        b_[j] += gc;
        d_[j] -= hc;
    }
    for (std::size_t k = 0; k < n; ++k) {
        b_[k] += gl;
        b_[k + 1] += gl;
        c_[k] -= gl;
        a_[k + 1] -= gl;
        d_[k] -= hl[k];
        d_[k + 1] += hl[k];
    }
    b_[0] += 1.0 / rs;
    d_[0] += vs / rs;
    b_[n] += st.g11;
    c_[n] += st.g12;
    a_[n + 1] += st.g12;
    b_[n + 1] += st.g22;
    d_[n] += st.r1;
    d_[n + 1] += st.r2;
    if (st.g22 == 0.0 && st.g12 == 0.0) b_[n + 1] = 1.0;  // no second node: pin to zero

    // Thomas algorithm
    for (std::size_t j = 1; j < m; ++j) {
        if (b_[j - 1] == 0.0) throw std::runtime_error("singular ladder matrix");
        double w = a_[j] / b_[j - 1];
        b_[j] -= w * c_[j - 1];
        d_[j] -= w * d_[j - 1];
    }
    std::vector<double>& x = scratch_x_;
    x.resize(m);
    x[m - 1] = d_[m - 1] / b_[m - 1];
    for (std::size_t j = m - 1; j-- > 0;) x[j] = (d_[j] - c_[j] * x[j + 1]) / b_[j];

    for (std::size_t j = 0; j <= n; ++j) {
        double gc = 2 * cnode_[j] / dt_;
        ic_[j] = gc * x[j] - (gc * v_[j] + ic_[j]);
    }
    for (std::size_t k = 0; k < n; ++k) i_[k] = gl * (x[k] - x[k + 1]) + hl[k];
    for (std::size_t j = 0; j <= n; ++j) v_[j] = x[j];
    i_term_ = st.g11 * x[n] + st.g12 * x[n + 1] - st.r1;
    return {x[n], x[n + 1]};
}

double LadderLine::energy() const {
    double e = 0.0;
    for (double i : i_) e += 0.5 * l_seg_ * i * i;
    for (std::size_t j = 0; j < v_.size(); ++j) e += 0.5 * cnode_[j] * v_[j] * v_[j];
    return e;
}

}  // namespace reflectwave
