#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "reflectwave/config.hpp"

namespace reflectwave {

double surge_impedance(const CableParams& cable);
double propagation_delay(const CableParams& cable);
std::complex<double> reflection_coefficient(std::complex<double> z_term, double z0);
double reflection_coefficient(double z_term, double z0);

// Line end seen from a terminal: i_into_line = g * v + ih.
struct Norton {
    double g = 0.0;
    double ih = 0.0;
};

struct EndSolution {
    double v = 0.0;
    double i_into_line = 0.0;
};

// Receiving-end callback: given the line Norton, return (v, current into the line).
using TerminalSolver = std::function<EndSolution(const Norton&)>;

// Lossless or lumped-loss (R/4, R/2, R/4) traveling-wave line. Delays are
// exact on the step grid; dt must divide tau.
class BergeronLine {
public:
    BergeronLine(const CableParams& cable, std::int64_t delay_steps);

    Norton sending_norton() const;
    Norton receiving_norton() const;
    void push(double v_send, double i_send, double v_recv, double i_recv);

    // Thevenin source (vs, rs) at the sending end, arbitrary terminal at the
    // receiving end.
    void step(double vs, double rs, const TerminalSolver& recv);

    double v_send() const { return v_send_; }
    double v_recv() const { return v_recv_; }
    double i_send() const { return i_send_; }
    double i_recv() const { return i_recv_; }
    double zc() const { return zc_; }
    std::int64_t depth() const { return static_cast<std::int64_t>(vs_hist_.size()); }
    bool quiescent() const;

private:
    double history(std::size_t slot, bool at_send) const;

    double zc_;
    double h_;
    std::vector<double> vs_hist_, is_hist_, vr_hist_, ir_hist_;
    std::size_t slot_ = 0;
    double v_send_ = 0.0, v_recv_ = 0.0, i_send_ = 0.0, i_recv_ = 0.0;
};

// 2x2 admittance block (nodes T and M) a terminal network adds to a solve.
struct Stamp2 {
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    double r1 = 0.0, r2 = 0.0;
};

// Pi-section LC(R) ladder integrated with the trapezoidal rule. The last
// ladder node is the terminal; an optional two-node terminal block hangs off
// it, so the whole system stays tridiagonal.
class LadderLine {
public:
    LadderLine(const CableParams& cable, int n_seg, double dt);

    int n_seg() const { return n_seg_; }
    // Solve one step. stamp is the terminal network block, its second node
    // is appended after the terminal. Returns (v_terminal, v_second).
    std::pair<double, double> step(double vs, double rs, const Stamp2& stamp);

    double v_send() const { return v_.front(); }
    double v_recv() const { return v_[n_seg_]; }
    // current delivered from the last ladder node into the terminal block
    double i_term() const { return i_term_; }
    double energy() const;

private:
    int n_seg_;
    double dt_;
    double l_seg_, c_seg_, r_seg_;
    std::vector<double> v_;   // node voltages 0..n
    std::vector<double> ic_;  // capacitor currents
    std::vector<double> i_;   // series branch currents 1..n (index k-1)
    std::vector<double> cnode_;
    std::vector<double> a_, b_, c_, d_;  // tridiagonal scratch
    std::vector<double> scratch_hl_, scratch_x_;
    double i_term_ = 0.0;
};

}  // namespace reflectwave
