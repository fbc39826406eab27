#pragma once

#include <complex>

#include "reflectwave/config.hpp"
#include "reflectwave/line.hpp"

namespace reflectwave {

// Duty-averaged branch: R_b/d in parallel with C_b.
struct Impedance {
    double magnitude = 0.0;
    double phase = 0.0;  // rad
};
Impedance z_eq(double d, double f, const BranchParams& branch);
std::complex<double> z_eq_complex(double d, double f, const BranchParams& branch);

// Impedance of everything below the first coil at frequency f.
std::complex<double> z_remainder(double f, const MotorHfParams& motor);

// Duty that makes |Z_eq(d, f)| = z_target, clamped into [d_min, d_max].
double matched_duty(double f, double z_target, const BranchParams& branch);

// Share of the terminal voltage across the first coil when matched at f.
double matched_coil_share(double f, double z0, const MotorHfParams& motor, const BranchParams& branch);

struct BranchState {
    double d = 1.0;
    double v_cb = 0.0;
    double i_cb = 0.0;
    bool active = false;
    double gate = 0.0;  // 1 when fully on, ramps to 0 while releasing
    bool releasing = false;
    double below_time = 0.0;
    double i_branch = 0.0;
};

struct CoilState {
    double i_coil = 0.0;   // inductor current of the first coil
    double v_coil = 0.0;   // T - M
    double i_phase = 0.0;  // coil + branch
};

struct TerminalResult {
    double v_mot = 0.0;
    double v_junction = 0.0;
    double i_into_motor = 0.0;
};

// Terminal node T, first coil (L_coil || branch) to junction M, junction to
// return through C_junction and through (N-1) L_coil + r_term in series.
// Trapezoidal companion models throughout.
class MotorNetwork {
public:
    MotorNetwork(const MotorHfParams& motor, const BranchParams& branch, double dt);

    // Admittance block of the network for the coming step, nodes (T, M).
    Stamp2 stamp() const;
    // Accept the node voltages of the step and update element histories.
    void commit(double v_t, double v_m);

    // One implicit step against a line Norton equivalent at T.
    TerminalResult solve(const Norton& line);

    BranchState& branch() { return br_; }
    const BranchState& branch() const { return br_; }
    const CoilState& coil() const { return coil_; }
    double v_mot() const { return v_t_; }
    double v_junction() const { return v_m_; }
    double i_remainder() const { return i_rem_; }
    double i_junction_cap() const { return i_cj_; }
    // Stored energy in L_coil, remainder inductance, C_junction and C_b.
    double stored_energy() const;
    const BranchParams& params() const { return bp_; }

private:
    MotorHfParams mp_;
    BranchParams bp_;
    double dt_;
    double g_l1_, g_cj_, g_cb_, g_rem_, k_rem_;
    double v_t_ = 0.0, v_m_ = 0.0;
    double i_rem_ = 0.0, i_cj_ = 0.0;
    BranchState br_;
    CoilState coil_;
};

// Branch activation. Arms on an edge arriving at the motor or when |v_mot|
// exceeds activation_ratio*safety*v_dc; after |v_mot| stays below 1.1 v_dc
// for hold_off it releases, ramping the gate to zero over `release`.
struct GateInputs {
    double v_mot = 0.0;
    bool edge_in_flight = false;
};
void gate_branch(BranchState& st, const GateInputs& in, const PwmParams& pwm, const BranchParams& branch,
                 double dt);
bool arm_condition(double v_mot, bool edge_in_flight, const PwmParams& pwm, const BranchParams& branch);

}  // namespace reflectwave
