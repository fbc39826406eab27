#include "reflectwave/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace reflectwave {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

bool parse_bool(std::string_view s) {
    std::string t(s);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

RefKind parse_kind(std::string_view s) {
    if (s == "underdamped") return RefKind::underdamped;
    if (s == "critically_damped" || s == "critical") return RefKind::critically_damped;
    throw std::invalid_argument("unknown reference kind '" + std::string(s) + "'");
}

struct Field {
    const char* section;
    const char* key;
    std::function<void(Config&, std::string_view)> set;
    std::function<std::string(const Config&)> get;
    std::function<double(const Config&)> num;  // null for non-numeric fields
};

template <typename S, typename T>
Field num_field(const char* sec, const char* key, S Config::*part, T S::*member) {
    return Field{
        sec, key,
        [=](Config& c, std::string_view v) {
            double x = parse_si(v);
            if constexpr (std::is_integral_v<T>) {
                if (x != std::floor(x)) throw std::invalid_argument(std::string(key) + " must be an integer");
                (c.*part).*member = static_cast<T>(x);
            } else {
                (c.*part).*member = x;
            }
        },
        [=](const Config& c) {
            if constexpr (std::is_integral_v<T>) return std::to_string((c.*part).*member);
            else return format_double((c.*part).*member);
        },
        [=](const Config& c) { return static_cast<double>((c.*part).*member); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(num_field("cable", "length_m", &Config::cable, &CableParams::length_m));
        f.push_back(num_field("cable", "l_per_m", &Config::cable, &CableParams::l_per_m));
        f.push_back(num_field("cable", "c_per_m", &Config::cable, &CableParams::c_per_m));
        f.push_back(num_field("cable", "r_per_m", &Config::cable, &CableParams::r_per_m));
        f.push_back(num_field("motor", "n_coils", &Config::motor, &MotorHfParams::n_coils));
        f.push_back(num_field("motor", "l_coil", &Config::motor, &MotorHfParams::l_coil));
        f.push_back(num_field("motor", "r_term", &Config::motor, &MotorHfParams::r_term));
        f.push_back(num_field("motor", "c_junction", &Config::motor, &MotorHfParams::c_junction));
        f.push_back(num_field("branch", "r_b", &Config::branch, &BranchParams::r_b));
        f.push_back(num_field("branch", "c_b", &Config::branch, &BranchParams::c_b));
        f.push_back(num_field("branch", "d_min", &Config::branch, &BranchParams::d_min));
        f.push_back(num_field("branch", "d_max", &Config::branch, &BranchParams::d_max));
        f.push_back(num_field("branch", "activation_ratio", &Config::branch, &BranchParams::activation_ratio));
        f.push_back(num_field("branch", "safety", &Config::branch, &BranchParams::safety));
        f.push_back(num_field("branch", "hold_off", &Config::branch, &BranchParams::hold_off));
        f.push_back(num_field("branch", "release", &Config::branch, &BranchParams::release));
        f.push_back(num_field("branch", "d_init", &Config::branch, &BranchParams::d_init));
        f.push_back(num_field("pwm", "v_dc", &Config::pwm, &PwmParams::v_dc));
        f.push_back(num_field("pwm", "f_sw", &Config::pwm, &PwmParams::f_sw));
        f.push_back(num_field("pwm", "duty_cmd", &Config::pwm, &PwmParams::duty_cmd));
        f.push_back(num_field("pwm", "t_rise", &Config::pwm, &PwmParams::t_rise));
        f.push_back(num_field("pwm", "t_fall", &Config::pwm, &PwmParams::t_fall));
        f.push_back(num_field("pwm", "r_source", &Config::pwm, &PwmParams::r_source));
        f.push_back(Field{"mrac", "kind",
                          [](Config& c, std::string_view v) { c.mrac.kind = parse_kind(v); },
                          [](const Config& c) { return std::string(kind_name(c.mrac.kind)); }, nullptr});
        f.push_back(num_field("mrac", "alpha", &Config::mrac, &MracParams::alpha));
        f.push_back(num_field("mrac", "omega", &Config::mrac, &MracParams::omega));
        f.push_back(num_field("mrac", "gamma", &Config::mrac, &MracParams::gamma));
        f.push_back(num_field("mrac", "epsilon", &Config::mrac, &MracParams::epsilon));
        f.push_back(num_field("mrac", "error_cutoff", &Config::mrac, &MracParams::error_cutoff));
        f.push_back(Field{"mrac", "freeze_when_inactive",
                          [](Config& c, std::string_view v) { c.mrac.freeze_when_inactive = parse_bool(v); },
                          [](const Config& c) { return std::string(c.mrac.freeze_when_inactive ? "true" : "false"); },
                          nullptr});
        f.push_back(num_field("sim", "dt", &Config::sim, &SimParams::dt));
        f.push_back(num_field("sim", "t_end", &Config::sim, &SimParams::t_end));
        f.push_back(num_field("sim", "record_stride", &Config::sim, &SimParams::record_stride));
        return f;
    }();
    return table;
}

const Field& find_field(std::string_view key) {
    auto dot = key.find('.');
    const Field* hit = nullptr;
    int hits = 0;
    for (const auto& f : fields()) {
        bool match = dot == std::string_view::npos
                         ? key == f.key
                         : key.substr(0, dot) == f.section && key.substr(dot + 1) == f.key;
        if (match) {
            hit = &f;
            ++hits;
        }
    }
    if (hits != 1) throw std::invalid_argument("unknown key '" + std::string(key) + "'");
    return *hit;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

double parse_si(std::string_view text) {
    auto s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    double mult = 1.0;
    // longest suffix first: the micro sign is two bytes in UTF-8
    static const std::pair<std::string_view, double> suffixes[] = {
        {"\xC2\xB5", 1e-6}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6},
        {"m", 1e-3},        {"k", 1e3},   {"M", 1e6},  {"G", 1e9}};
    for (const auto& [suf, m] : suffixes) {
        if (s.size() > suf.size() && s.substr(s.size() - suf.size()) == suf) {
            mult = m;
            s = trim(s.substr(0, s.size() - suf.size()));
            break;
        }
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    v *= mult;
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value: '" + std::string(text) + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::vector<std::string> check(const Config& c) {
    std::vector<std::string> e;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) e.push_back(msg);
    };
    for (const auto& f : fields()) {
        if (f.num && !std::isfinite(f.num(c))) e.push_back(std::string(f.section) + "." + f.key + " must be finite");
    }
    if (!e.empty()) return e;

    need(c.cable.length_m > 0, "length_m must be > 0");
    need(c.cable.l_per_m > 0, "l_per_m must be > 0");
    need(c.cable.c_per_m > 0, "c_per_m must be > 0");
    need(c.cable.r_per_m >= 0, "r_per_m must be >= 0");

    need(c.motor.n_coils >= 2, "n_coils must be >= 2");
    need(c.motor.l_coil > 0, "l_coil must be > 0");
    need(c.motor.r_term > 0, "r_term must be > 0");
    need(c.motor.c_junction >= 0, "c_junction must be >= 0");

    need(c.branch.r_b > 0, "r_b must be > 0");
    need(c.branch.c_b >= 0, "c_b must be >= 0");
    need(c.branch.d_min > 0, "d_min must be > 0");
    need(c.branch.d_max <= 1, "d_max must be <= 1");
    need(c.branch.d_min < c.branch.d_max, "d_min must be < d_max");
    need(c.branch.activation_ratio > 1, "activation_ratio must be > 1");
    need(c.branch.safety > 0 && c.branch.safety <= 1, "safety must be in (0, 1]");
    need(c.branch.hold_off >= 0, "hold_off must be >= 0");
    need(c.branch.release >= 0, "release must be >= 0");
    need(c.branch.d_init >= c.branch.d_min && c.branch.d_init <= c.branch.d_max, "d_init must lie in [d_min, d_max]");

    const auto& p = c.pwm;
    need(p.v_dc > 0, "v_dc must be > 0");
    need(p.f_sw > 0, "f_sw must be > 0");
    need(p.duty_cmd >= 0 && p.duty_cmd <= 1, "duty_cmd must be in [0, 1]");
    need(p.t_rise > 0, "t_rise must be > 0");
    need(p.t_fall > 0, "t_fall must be > 0");
    need(p.r_source > 0, "r_source must be > 0");
    if (p.f_sw > 0) {
        double half = 0.5 / p.f_sw;
        need(p.t_rise < half, "t_rise must be < 1/(2 f_sw)");
        need(p.t_fall < half, "t_fall must be < 1/(2 f_sw)");
        double period = 1.0 / p.f_sw;
        if (p.duty_cmd > 0 && p.duty_cmd < 1) {
            need(p.duty_cmd * period >= p.t_rise, "duty_cmd/f_sw must be >= t_rise");
            need((1 - p.duty_cmd) * period >= p.t_fall, "(1 - duty_cmd)/f_sw must be >= t_fall");
        }
    }

    need(c.mrac.alpha > 0, "alpha must be > 0");
    need(c.mrac.kind != RefKind::underdamped || c.mrac.omega > 0, "omega must be > 0");
    need(c.mrac.gamma >= 0, "gamma must be >= 0");
    need(c.mrac.epsilon > 0, "epsilon must be > 0");
    need(c.mrac.error_cutoff >= 0, "error_cutoff must be >= 0");

    need(c.sim.dt > 0, "dt must be > 0");
    need(c.sim.t_end > 0, "t_end must be > 0");
    need(c.sim.record_stride >= 1, "record_stride must be >= 1");
    if (c.sim.dt > 0 && p.t_rise > 0 && p.t_fall > 0)
        need(c.sim.dt <= std::min(p.t_rise, p.t_fall) / 20 * (1 + 1e-12), "dt must be <= min(t_rise, t_fall)/20");

    if (!e.empty()) return e;

    // checks on derived quantities
    double tau = c.cable.length_m * std::sqrt(c.cable.l_per_m * c.cable.c_per_m);
    double z0 = std::sqrt(c.cable.l_per_m / c.cable.c_per_m);
    need(std::isfinite(z0) && z0 > 0, "surge impedance must be finite and positive");
    need(c.sim.t_end >= 4 * tau, "t_end must be >= 4 tau");
    double wr = 2 * pi / (4 * tau);
    double zl = wr * c.motor.l_coil;
    need(zl > z0, "first-coil reactance at the ringing frequency must exceed Z0");
    double lam = c.mrac.kind == RefKind::underdamped ? std::hypot(c.mrac.alpha, c.mrac.omega) : c.mrac.alpha;
    need(c.sim.dt * lam < 0.1, "dt * |reference eigenvalue| must be < 0.1");
    return e;
}

Config validate(Config c) {
    auto problems = check(c);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    auto& d = c.derived;
    d.z0 = std::sqrt(c.cable.l_per_m / c.cable.c_per_m);
    d.tau = c.cable.length_m * std::sqrt(c.cable.l_per_m * c.cable.c_per_m);
    double ratio = d.tau / c.sim.dt;
    double nearest = std::round(ratio);
    std::int64_t n = std::abs(ratio - nearest) <= 1e-9 * nearest ? static_cast<std::int64_t>(nearest)
                                                               : static_cast<std::int64_t>(std::ceil(ratio));
    if (n < 1) n = 1;
    d.delay_steps = n;
    d.dt = d.tau / static_cast<double>(n);
    c.sim.dt = d.dt;
    d.steps = static_cast<std::int64_t>(std::floor(c.sim.t_end / d.dt + 1e-6));
    d.f_ring = 1.0 / (4 * d.tau);
    return c;
}

Config parse_config(std::string_view text) {
    Config cfg;
    std::vector<std::string> errs;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto line = trim(raw);
        auto hash = line.find_first_of("#;");
        if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errs.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const char* known[] = {"cable", "motor", "branch", "pwm", "mrac", "sim"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                errs.push_back("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errs.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        auto key = std::string(trim(line.substr(0, eq)));
        auto value = trim(line.substr(eq + 1));
        if (section.empty()) {
            errs.push_back("line " + std::to_string(lineno) + ": key '" + key + "' outside a section");
            continue;
        }
        try {
            set_value(cfg, section + "." + key, value);
        } catch (const std::exception& ex) {
            errs.push_back("line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string to_ini(const Config& cfg) {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

void set_value(Config& cfg, std::string_view key, std::string_view value) {
    find_field(key).set(cfg, trim(value));
}

double get_value(const Config& cfg, std::string_view key) {
    const auto& f = find_field(key);
    if (!f.num) throw std::invalid_argument("key '" + std::string(key) + "' is not numeric");
    return f.num(cfg);
}

Mode parse_mode(std::string_view s) {
    if (s == "adaptive") return Mode::adaptive;
    if (s == "static-matched" || s == "static_matched") return Mode::static_matched;
    if (s == "off") return Mode::off;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::adaptive: return "adaptive";
        case Mode::static_matched: return "static-matched";
        case Mode::off: return "off";
    }
    return "?";
}

std::string_view kind_name(RefKind k) {
    return k == RefKind::underdamped ? "underdamped" : "critically_damped";
}

}  // namespace reflectwave
