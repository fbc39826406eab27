#include "reflectwave/drive.hpp"

#include <cmath>

namespace reflectwave {

double pwm_voltage(double t, const PwmParams& p) {
    if (t < 0 || p.duty_cmd <= 0) return 0.0;
    if (p.duty_cmd >= 1) return t < p.t_rise ? p.v_dc * t / p.t_rise : p.v_dc;
    const double period = 1.0 / p.f_sw;
    const double t_on = p.duty_cmd * period;
    double tp = std::fmod(t, period);
    if (tp < p.t_rise) return p.v_dc * tp / p.t_rise;
    if (tp < t_on) return p.v_dc;
    if (tp < t_on + p.t_fall) return p.v_dc * (1.0 - (tp - t_on) / p.t_fall);
    return 0.0;
}

std::vector<EdgeEvent> detect_edges(const PwmParams& p, double t_end) {
    std::vector<EdgeEvent> out;
    if (p.duty_cmd <= 0 || t_end <= 0) return out;
    const double up = p.v_dc / p.t_rise;
    const double down = -p.v_dc / p.t_fall;
    if (p.duty_cmd >= 1) {
        out.push_back({0.0, Polarity::rising, up});
        return out;
    }
    const double period = 1.0 / p.f_sw;
    const double t_on = p.duty_cmd * period;
    for (long k = 0;; ++k) {
        double t0 = static_cast<double>(k) * period;
        if (t0 >= t_end) break;
        out.push_back({t0, Polarity::rising, up});
        if (t0 + t_on < t_end) out.push_back({t0 + t_on, Polarity::falling, down});
    }
    return out;
}

double waveform_from_edges(double t, const std::vector<EdgeEvent>& edges, const PwmParams& p) {
    double v = 0.0;
    for (const auto& e : edges) {
        if (e.t_start > t) break;
        double ramp = e.polarity == Polarity::rising ? p.t_rise : p.t_fall;
        double frac = std::min(1.0, (t - e.t_start) / ramp);
        double from = e.polarity == Polarity::rising ? 0.0 : p.v_dc;
        v = from + e.slope * ramp * frac;
    }
    return v;
}

bool edge_in_flight(double t, double delay, const PwmParams& p) {
    double td = t - delay;
    if (td < 0 || p.duty_cmd <= 0) return false;
    if (p.duty_cmd >= 1) return td < p.t_rise;
    const double period = 1.0 / p.f_sw;
    const double t_on = p.duty_cmd * period;
    double tp = std::fmod(td, period);
    return tp < p.t_rise || (tp >= t_on && tp < t_on + p.t_fall);
}

}  // namespace reflectwave
