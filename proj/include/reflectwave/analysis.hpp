#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reflectwave/config.hpp"
#include "reflectwave/sim.hpp"

namespace reflectwave {

struct Metrics {
    double peak_ratio = 0.0;
    std::optional<double> ring_freq_hz;
    double branch_loss_w = 0.0;    // mean v_coil * i_branch over samples where the branch conducts
    double branch_energy_j = 0.0;  // trapezoidal integral of the same product over the whole run
    double settle_time_s = 0.0;
    long clamp_count = 0;
};

double peak_ratio(const Trace& tr, double v_dc);

// Median reciprocal spacing of the local maxima of v_mot above 1.2 v_dc inside
// [t_begin, t_end). Each contiguous excursion above the threshold contributes
// its highest sample.
std::optional<double> ringing_frequency(const Trace& tr, double v_dc, double t_begin, double t_end);
// Window is the first edge's arrival up to the next edge's arrival.
std::optional<double> ringing_frequency(const Trace& tr, const Config& validated);

// |e| recovered from the Lyapunov, |Z_eq| and i_hf columns.
std::vector<double> abs_error(const Trace& tr);

double branch_loss(const Trace& tr);
double branch_energy(const Trace& tr);
double settle_time(const Trace& tr);
long clamp_count(const Trace& tr, const BranchParams& branch);

Metrics compute_metrics(const Trace& tr, const Config& validated);

// Edge arrival times at the motor.
std::vector<double> arrival_times(const Config& validated);

struct BurstStats {
    double t_start = 0.0;
    double peak_abs_e = 0.0;
    double mean_lyap = 0.0;
    double peak_ratio = 0.0;
    double duty_end = 0.0;
};
std::vector<BurstStats> burst_stats(const Trace& tr, const Config& validated, double window);

// --- reference-model search ---

struct SearchRange {
    double lo = 0.0, hi = 0.0;
};
struct SearchSpace {
    SearchRange alpha, omega, gamma;
};

struct OptimizeOptions {
    std::uint64_t seed = 1;
    int budget = 40;
    double peak_limit = 1.25;
    unsigned threads = 0;  // 0: hardware concurrency, capped by REFLECTWAVE_THREADS
};

struct Evaluation {
    int index = 0;
    double alpha = 0.0, omega = 0.0, gamma = 0.0;
    bool valid = false;
    bool feasible = false;
    Metrics metrics;
    std::string error;
};

struct OptimizeResult {
    bool feasible = false;
    Evaluation best;  // best feasible, or the best infeasible candidate when none is
    std::vector<Evaluation> log;
};

// Pattern search with seeded restarts minimizing branch_loss_w subject to
// peak_ratio <= peak_limit. Starts from the config point if it is inside the space.
OptimizeResult optimize_refmodel(const Config& validated, const SearchSpace& space, const OptimizeOptions& opt);

// Worker count: hardware concurrency (or `requested`) capped by REFLECTWAVE_THREADS.
unsigned worker_count(unsigned requested = 0);
// Runs fn(0..n-1) on up to `threads` workers; rethrows the first exception.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace reflectwave
