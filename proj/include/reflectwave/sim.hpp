#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflectwave/config.hpp"
#include "reflectwave/line.hpp"
#include "reflectwave/motor.hpp"
#include "reflectwave/mrac.hpp"

namespace reflectwave {

struct Trace {
    std::vector<double> t_s, v_inv_V, v_mot_V, v_coil_V, i_hf_A, i_branch_A, duty, zeq_ohm, lyap_J;

    std::size_t size() const { return t_s.size(); }
    void reserve(std::size_t n);
    static const std::vector<std::string>& columns();
    std::vector<double>* column(std::size_t k);
    const std::vector<double>* column(std::size_t k) const;
};

enum class LineKind { bergeron, ladder };

struct RunOptions {
    Mode mode = Mode::adaptive;
    LineKind line = LineKind::bergeron;
    int ladder_segments = 200;
};

class SimError : public std::runtime_error {
public:
    SimError(const std::string& what, std::int64_t step) : std::runtime_error(what), step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

// Fixed-step simulation of source, cable, motor terminal network and controller.
class Simulation {
public:
    Simulation(const Config& validated, RunOptions opt);
    ~Simulation();
    Simulation(Simulation&&) noexcept;
    Simulation& operator=(Simulation&&) noexcept;

    void step();
    void run_to_end();
    bool done() const { return step_index_ >= cfg_.derived.steps; }

    const Trace& trace() const { return trace_; }
    Trace take_trace() { return std::move(trace_); }
    double t() const { return static_cast<double>(step_index_) * cfg_.derived.dt; }
    std::int64_t step_index() const { return step_index_; }
    const MracState& controller() const { return mrac_; }
    const MotorNetwork& motor() const { return motor_; }
    const RefModel& reference() const { return ref_; }
    double reference_output() const { return v_ref_; }
    const Config& config() const { return cfg_; }
    std::string state_dump() const;

private:
    void record();

    struct LineHolder;
    Config cfg_;
    RunOptions opt_;
    std::unique_ptr<LineHolder> line_;
    MotorNetwork motor_;
    RefModel ref_;
    MracState mrac_;
    HighPass hp_i_, hp_e_;
    double lead_ = 0.0;
    double u_prev_ = 0.0;
    double v_ref_ = 0.0;
    double i_hf_ = 0.0;
    double v_inv_ = 0.0;
    std::int64_t step_index_ = 0;
    Trace trace_;
};

RefModel reference_model(const Config& validated);

Trace run_to_end(const Config& validated, RunOptions opt = {});

}  // namespace reflectwave
