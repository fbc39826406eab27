// reflectwave: run / sweep / optimize / metrics front end.
// Exit codes: 0 ok, 2 input error, 3 runtime error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "reflectwave/analysis.hpp"
#include "reflectwave/config.hpp"
#include "reflectwave/io.hpp"
#include "reflectwave/sim.hpp"

namespace fs = std::filesystem;
using namespace reflectwave;

namespace {

constexpr int exit_input = 2;
constexpr int exit_runtime = 3;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Config load_or_default(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// KEY=START:STOP:STEPS, or KEY=v1,v2,...
struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

SweepAxis parse_axis(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("bad --sweep '" + arg + "', want KEY=START:STOP:STEPS");
    SweepAxis ax;
    ax.key = arg.substr(0, eq);
    std::string rest = arg.substr(eq + 1);
    try {
        if (rest.find(':') != std::string::npos) {
            std::vector<std::string> parts;
            std::stringstream ss(rest);
            for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
            if (parts.size() != 3) throw InputError("bad --sweep '" + arg + "', want KEY=START:STOP:STEPS");
            double a = parse_si(parts[0]), b = parse_si(parts[1]);
            double n = parse_si(parts[2]);
            if (!(n >= 1) || n != std::floor(n)) throw InputError("sweep '" + ax.key + "' has an empty range");
            const auto steps = static_cast<long>(n);
            for (long k = 0; k < steps; ++k)
                ax.values.push_back(steps == 1 ? a : a + (b - a) * static_cast<double>(k) / (steps - 1));
        } else {
            std::stringstream ss(rest);
            for (std::string p; std::getline(ss, p, ',');)
                if (!p.empty()) ax.values.push_back(parse_si(p));
        }
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError("bad --sweep '" + arg + "': " + e.what());
    }
    if (ax.values.empty()) throw InputError("sweep '" + ax.key + "' has an empty range");
    Config probe;
    try {
        get_value(probe, ax.key);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    return ax;
}

SearchRange parse_range(const std::string& s, double center, double lo_mul, double hi_mul) {
    if (s.empty()) return {center * lo_mul, center * hi_mul};
    auto c = s.find(':');
    if (c == std::string::npos) throw InputError("bad range '" + s + "', want LO:HI");
    return {parse_si(s.substr(0, c)), parse_si(s.substr(c + 1))};
}

std::string metric_cells(const Metrics& m) {
    std::ostringstream os;
    os << format_double(m.peak_ratio) << ',' << (m.ring_freq_hz ? format_double(*m.ring_freq_hz) : "") << ','
       << format_double(m.branch_loss_w) << ',' << format_double(m.branch_energy_j) << ','
       << format_double(m.settle_time_s) << ',' << m.clamp_count;
    return os.str();
}

const char* metric_header = "peak_ratio,ring_freq_hz,branch_loss_w,branch_energy_j,settle_time_s,clamp_count";

std::string csv_escape(std::string s) {
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
    return s;
}

// --------------------------------------------------------------------------

struct RunArgs {
    std::string config, out = "out", mode = "adaptive";
    bool oracle = false;
    std::uint64_t seed = 1;
};

int cmd_run(const RunArgs& a) {
    Config cfg = validate(load_or_default(a.config));
    Mode mode = parse_mode(a.mode);
    ensure_dir(a.out);
    write_file(join_path(a.out, "config.ini"), to_ini(cfg));

    Trace tr = run_to_end(cfg, RunOptions{mode, LineKind::bergeron, 200});
    Metrics m = compute_metrics(tr, cfg);
    write_trace_csv(join_path(a.out, "trace.csv"), tr);
    write_file(join_path(a.out, "metrics.txt"), metrics_text(m));
    write_file(join_path(a.out, "metrics.json"), metrics_json(m));
    std::cout << metrics_text(m);

    if (a.oracle) {
        Trace lad = run_to_end(cfg, RunOptions{mode, LineKind::ladder, 200});
        write_trace_csv(join_path(a.out, "trace_ladder.csv"), lad);
        double div = 0.0;
        for (std::size_t i = 0; i < std::min(tr.size(), lad.size()); ++i)
            div = std::max(div, std::abs(tr.v_mot_V[i] - lad.v_mot_V[i]));
        std::string line = "max_divergence_v = " + format_double(div) +
                           "\nmax_divergence_ratio = " + format_double(div / cfg.pwm.v_dc) + "\n";
        write_file(join_path(a.out, "oracle.txt"), line);
        std::cout << line;
    }
    return 0;
}

struct SweepArgs {
    std::string config, out = "out", mode = "adaptive";
    std::vector<std::string> axes;
    std::uint64_t seed = 1;
};

int cmd_sweep(const SweepArgs& a) {
    Config base = load_or_default(a.config);
    Mode mode = parse_mode(a.mode);
    if (a.axes.empty()) throw InputError("sweep needs at least one --sweep KEY=START:STOP:STEPS");
    std::vector<SweepAxis> axes;
    for (const auto& s : a.axes) axes.push_back(parse_axis(s));

    // Cartesian product, first axis slowest
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.values.size();
    std::vector<std::vector<double>> points(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t r = i;
        points[i].resize(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            points[i][k] = axes[k].values[r % axes[k].values.size()];
            r /= axes[k].values.size();
        }
    }

    std::vector<std::string> rows(total);
    parallel_for(total, worker_count(), [&](std::size_t i) {
        std::ostringstream row;
        row << i;
        for (double v : points[i]) row << ',' << format_double(v);
        try {
            Config c = base;
            for (std::size_t k = 0; k < axes.size(); ++k) set_value(c, axes[k].key, format_double(points[i][k]));
            c = validate(c);
            Trace tr = run_to_end(c, RunOptions{mode, LineKind::bergeron, 200});
            row << ",ok," << metric_cells(compute_metrics(tr, c)) << ',';
        } catch (const std::exception& e) {
            row << ",error,,,,,,," << csv_escape(e.what());
        }
        rows[i] = row.str();
    });

    ensure_dir(a.out);
    write_file(join_path(a.out, "config.ini"), to_ini(base));
    std::ostringstream csv;
    csv << "index";
    for (const auto& ax : axes) csv << ',' << ax.key;
    csv << ",status," << metric_header << ",error\n";
    for (const auto& r : rows) csv << r << '\n';
    write_file(join_path(a.out, "sweep.csv"), csv.str());
    std::cout << csv.str();
    return 0;
}

struct OptArgs {
    std::string config, out = "out", alpha, omega, gamma;
    std::uint64_t seed = 1;
    int budget = 40;
    double peak_limit = 1.25;
};

int cmd_optimize(const OptArgs& a) {
    Config cfg = validate(load_or_default(a.config));
    SearchSpace sp;
    sp.alpha = parse_range(a.alpha, cfg.mrac.alpha, 0.5, 2.0);
    sp.omega = parse_range(a.omega, cfg.mrac.omega, 0.8, 1.25);
    sp.gamma = parse_range(a.gamma, cfg.mrac.gamma, 0.25, 4.0);
    OptimizeOptions opt;
    opt.seed = a.seed;
    opt.budget = a.budget;
    opt.peak_limit = a.peak_limit;
    OptimizeResult res;
    try {
        res = optimize_refmodel(cfg, sp, opt);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    ensure_dir(a.out);
    write_file(join_path(a.out, "config.ini"), to_ini(cfg));
    std::ostringstream log;
    log << "index,alpha,omega,gamma,valid,feasible," << metric_header << ",error\n";
    for (const auto& e : res.log) {
        log << e.index << ',' << format_double(e.alpha) << ',' << format_double(e.omega) << ','
            << format_double(e.gamma) << ',' << e.valid << ',' << e.feasible << ',';
        log << (e.valid ? metric_cells(e.metrics) : std::string(",,,,,")) << ',' << csv_escape(e.error) << '\n';
    }
    write_file(join_path(a.out, "optimize_log.csv"), log.str());

    Config best = cfg;
    best.mrac.alpha = res.best.alpha;
    best.mrac.omega = res.best.omega;
    best.mrac.gamma = res.best.gamma;
    write_file(join_path(a.out, "best_config.ini"), to_ini(best));
    std::ostringstream summary;
    summary << "feasible = " << (res.feasible ? "true" : "false") << '\n'
            << "evaluations = " << res.log.size() << '\n'
            << "alpha = " << format_double(res.best.alpha) << '\n'
            << "omega = " << format_double(res.best.omega) << '\n'
            << "gamma = " << format_double(res.best.gamma) << '\n';
    if (res.best.valid) summary << metrics_text(res.best.metrics);
    write_file(join_path(a.out, "best.txt"), summary.str());
    if (!res.feasible)
        std::cout << "no feasible point: peak_ratio <= " << format_double(a.peak_limit)
                  << " not met; best infeasible candidate follows\n";
    std::cout << summary.str();
    return 0;
}

struct MetricsArgs {
    std::string csv, config, out;
};

int cmd_metrics(const MetricsArgs& a) {
    std::string cfg_path = a.config;
    if (cfg_path.empty()) {
        auto beside = fs::path(a.csv).parent_path() / "config.ini";
        if (fs::exists(beside)) cfg_path = beside.string();
    }
    Config cfg = validate(load_or_default(cfg_path));
    Trace tr = read_trace_csv(a.csv);
    if (tr.size() == 0) throw InputError(a.csv + ": no samples");
    Metrics m = compute_metrics(tr, cfg);
    if (!a.out.empty()) {
        ensure_dir(a.out);
        write_file(join_path(a.out, "metrics.txt"), metrics_text(m));
        write_file(join_path(a.out, "metrics.json"), metrics_json(m));
    }
    std::cout << metrics_text(m);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected-wave overvoltage simulator with an adaptive terminal branch"};
    app.require_subcommand(1);

    RunArgs run;
    auto* r = app.add_subcommand("run", "simulate one configuration");
    r->add_option("--config", run.config, "INI config (defaults when omitted)");
    r->add_option("--out", run.out, "output directory");
    r->add_option("--mode", run.mode, "adaptive | static-matched | off");
    r->add_flag("--oracle", run.oracle, "also run the LC-ladder cross-check");
    r->add_option("--seed", run.seed, "seed (recorded; the run itself is deterministic)");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "metrics over a Cartesian product of parameters");
    s->add_option("--config", sw.config);
    s->add_option("--out", sw.out);
    s->add_option("--mode", sw.mode);
    s->add_option("--sweep", sw.axes, "KEY=START:STOP:STEPS or KEY=v1,v2,...");
    s->add_option("--seed", sw.seed);

    OptArgs op;
    auto* o = app.add_subcommand("optimize", "search reference-model parameters for minimum branch loss");
    o->add_option("--config", op.config);
    o->add_option("--out", op.out);
    o->add_option("--seed", op.seed);
    o->add_option("--budget", op.budget, "maximum number of simulations");
    o->add_option("--alpha", op.alpha, "LO:HI");
    o->add_option("--omega", op.omega, "LO:HI (rad/s)");
    o->add_option("--gamma", op.gamma, "LO:HI");
    o->add_option("--peak-limit", op.peak_limit, "peak_ratio constraint");

    MetricsArgs me;
    auto* m = app.add_subcommand("metrics", "recompute metrics from a trace CSV");
    m->add_option("csv", me.csv)->required();
    m->add_option("--config", me.config, "config (default: config.ini beside the CSV)");
    m->add_option("--out", me.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_input;
    }

    try {
        if (*r) return cmd_run(run);
        if (*s) return cmd_sweep(sw);
        if (*o) return cmd_optimize(op);
        if (*m) return cmd_metrics(me);
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration:\n";
        for (const auto& p : e.problems()) std::cerr << "  - " << p << '\n';
        return exit_input;
    } catch (const CsvError& e) {
        std::cerr << "malformed trace: " << e.what() << '\n';
        return exit_input;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const SimError& e) {
        std::cerr << "simulation aborted at step " << e.step() << ": " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_input;
}
