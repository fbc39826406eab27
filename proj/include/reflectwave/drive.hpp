#pragma once

#include <vector>

#include "reflectwave/config.hpp"

namespace reflectwave {

enum class Polarity { rising, falling };

struct EdgeEvent {
    double t_start = 0.0;
    Polarity polarity = Polarity::rising;
    double slope = 0.0;  // V/s, signed
};

// Trapezoidal two-level inverter output in [0, v_dc]. Edge times are the full
// linear ramp durations.
double pwm_voltage(double t, const PwmParams& pwm);

std::vector<EdgeEvent> detect_edges(const PwmParams& pwm, double t_end);

// Rebuild the waveform from an edge list (inverse of detect_edges).
double waveform_from_edges(double t, const std::vector<EdgeEvent>& edges, const PwmParams& pwm);

// True if an inverter edge launched delay seconds ago is still ramping.
bool edge_in_flight(double t, double delay, const PwmParams& pwm);

}  // namespace reflectwave
