#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reflectwave {

inline constexpr double pi = 3.14159265358979323846;

struct CableParams {
    double length_m = 70.0;
    double l_per_m = 250e-9;
    double c_per_m = 100e-12;
    double r_per_m = 0.05;  // series loss; 0 gives the lossless line
};

struct MotorHfParams {
    int n_coils = 4;
    double l_coil = 1e-3;
    double r_term = 2000.0;
    // lumped capacitance from the first-coil junction to the return path
    double c_junction = 100e-9;
};

struct BranchParams {
    double r_b = 25.0;
    double c_b = 100e-12;
    double d_min = 0.05;
    double d_max = 1.0;
    double activation_ratio = 2.0;
    double safety = 0.9;
    double hold_off = 1e-6;   // time below 1.1 V_dc before release starts
    double release = 20e-6;   // linear gate-out ramp
    double d_init = 1.0;
};

struct PwmParams {
    double v_dc = 600.0;
    double f_sw = 10e3;
    double duty_cmd = 0.5;
    double t_rise = 100e-9;
    double t_fall = 100e-9;
    double r_source = 0.1;
};

enum class RefKind { underdamped, critically_damped };

struct MracParams {
    RefKind kind = RefKind::underdamped;
    double alpha = 2e7;
    double omega = 2.0 * pi * 714e3;
    double gamma = 150.0;
    double epsilon = 36.0;
    double error_cutoff = 0.0;  // 0 -> half the quarter-wave frequency
    bool freeze_when_inactive = true;
};

struct SimParams {
    double dt = 4e-9;
    double t_end = 1e-3;
    int record_stride = 1;
};

enum class Mode { adaptive, static_matched, off };

// Populated by validate().
struct Derived {
    double z0 = 0.0;
    double tau = 0.0;
    double dt = 0.0;
    std::int64_t delay_steps = 0;
    std::int64_t steps = 0;
    double f_ring = 0.0;
};

struct Config {
    CableParams cable;
    MotorHfParams motor;
    BranchParams branch;
    PwmParams pwm;
    MracParams mrac;
    SimParams sim;
    Derived derived;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

// Every violated invariant, empty when valid.
std::vector<std::string> check(const Config& cfg);

// Derived quantities filled in, dt shrunk so tau/dt is an integer.
// Throws ConfigError listing every violation.
Config validate(Config cfg);

double parse_si(std::string_view text);
std::string format_double(double v);

Config parse_config(std::string_view text);
Config load_config(const std::string& path);
std::string to_ini(const Config& cfg);

// Sets "section.key" (or a bare unique key) from text.
void set_value(Config& cfg, std::string_view key, std::string_view value);
double get_value(const Config& cfg, std::string_view key);

Mode parse_mode(std::string_view s);
std::string_view mode_name(Mode m);
std::string_view kind_name(RefKind k);

}  // namespace reflectwave
