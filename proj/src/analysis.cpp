#include "reflectwave/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "reflectwave/drive.hpp"

namespace reflectwave {

double peak_ratio(const Trace& tr, double v_dc) {
    if (!(v_dc > 0)) throw std::invalid_argument("v_dc must be > 0");
    double m = 0.0;
    for (double v : tr.v_mot_V) m = std::max(m, std::abs(v));
    return m / v_dc;
}

std::optional<double> ringing_frequency(const Trace& tr, double v_dc, double t_begin, double t_end) {
    const double thr = 1.2 * v_dc;
    std::vector<double> peaks;
    bool in = false;
    double best = 0.0, t_best = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.t_s[i];
        if (t < t_begin) continue;
        if (t >= t_end) break;
        const double v = tr.v_mot_V[i];
        if (v > thr) {
            if (!in || v > best) {
                best = v;
                t_best = t;
            }
            in = true;
        } else if (in) {
            peaks.push_back(t_best);
            in = false;
        }
    }
    // an excursion still open at the window end has no confirmed maximum
    if (peaks.size() < 3) return std::nullopt;
    std::vector<double> f;
    for (std::size_t k = 1; k < peaks.size(); ++k) f.push_back(1.0 / (peaks[k] - peaks[k - 1]));
    std::sort(f.begin(), f.end());
    const std::size_t n = f.size();
    return n % 2 ? f[n / 2] : 0.5 * (f[n / 2 - 1] + f[n / 2]);
}

std::optional<double> ringing_frequency(const Trace& tr, const Config& c) {
    const auto& pwm = c.pwm;
    if (pwm.duty_cmd <= 0) return std::nullopt;
    const double tau = c.derived.tau;
    const double t1 = pwm.duty_cmd >= 1 ? std::numeric_limits<double>::infinity()
                                        : pwm.duty_cmd / pwm.f_sw + tau;
    return ringing_frequency(tr, pwm.v_dc, tau, t1);
}

std::vector<double> abs_error(const Trace& tr) {
    std::vector<double> out(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double i2 = tr.i_hf_A[i] * tr.i_hf_A[i];
        out[i] = std::sqrt(std::max(0.0, 2 * tr.lyap_J[i] - tr.zeq_ohm[i] * i2));
    }
    return out;
}

double branch_loss(const Trace& tr) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.i_branch_A[i] == 0.0) continue;
        sum += tr.v_coil_V[i] * tr.i_branch_A[i];
        ++n;
    }
    return n ? std::max(0.0, sum / static_cast<double>(n)) : 0.0;
}

double branch_energy(const Trace& tr) {
    double e = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double p0 = tr.v_coil_V[i - 1] * tr.i_branch_A[i - 1];
        const double p1 = tr.v_coil_V[i] * tr.i_branch_A[i];
        e += 0.5 * (p0 + p1) * (tr.t_s[i] - tr.t_s[i - 1]);
    }
    return e;
}

double settle_time(const Trace& tr) {
    if (tr.size() == 0) return 0.0;
    const auto e = abs_error(tr);
    const double peak = *std::max_element(e.begin(), e.end());
    if (peak == 0.0) return tr.t_s.front();
    std::size_t j = e.size();
    while (j-- > 0)
        if (e[j] >= 0.1 * peak) break;
    return j + 1 < tr.size() ? tr.t_s[j + 1] : tr.t_s.back();
}

long clamp_count(const Trace& tr, const BranchParams& b) {
    long n = 0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double d = tr.duty[i];
        if ((d == b.d_min || d == b.d_max) && d != tr.duty[i - 1]) ++n;
    }
    return n;
}

Metrics compute_metrics(const Trace& tr, const Config& c) {
    if (tr.size() == 0) throw std::invalid_argument("empty trace");
    Metrics m;
    m.peak_ratio = peak_ratio(tr, c.pwm.v_dc);
    m.ring_freq_hz = ringing_frequency(tr, c);
    m.branch_loss_w = branch_loss(tr);
    m.branch_energy_j = branch_energy(tr);
    m.settle_time_s = settle_time(tr);
    m.clamp_count = clamp_count(tr, c.branch);
    return m;
}

std::vector<double> arrival_times(const Config& c) {
    std::vector<double> out;
    for (const auto& e : detect_edges(c.pwm, c.sim.t_end)) {
        const double t = e.t_start + c.derived.tau;
        if (t < c.sim.t_end) out.push_back(t);
    }
    return out;
}

std::vector<BurstStats> burst_stats(const Trace& tr, const Config& c, double window) {
    const auto e = abs_error(tr);
    std::vector<BurstStats> out;
    std::size_t i = 0;
    for (double a : arrival_times(c)) {
        BurstStats b;
        b.t_start = a;
        double lsum = 0.0;
        std::size_t n = 0;
        while (i < tr.size() && tr.t_s[i] < a) ++i;
        std::size_t k = i;
        for (; k < tr.size() && tr.t_s[k] < a + window; ++k) {
            b.peak_abs_e = std::max(b.peak_abs_e, e[k]);
            b.peak_ratio = std::max(b.peak_ratio, std::abs(tr.v_mot_V[k]) / c.pwm.v_dc);
            lsum += tr.lyap_J[k];
            ++n;
        }
        if (n == 0) continue;
        b.mean_lyap = lsum / static_cast<double>(n);
        b.duty_end = tr.duty[k - 1];
        out.push_back(b);
    }
    return out;
}

unsigned worker_count(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("REFLECTWAVE_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

// ---------------------------------------------------------------------------

namespace {

using Point = std::array<double, 3>;

double to_param(const SearchRange& r, double u) { return r.lo + u * (r.hi - r.lo); }

double to_unit(const SearchRange& r, double v) { return r.hi > r.lo ? (v - r.lo) / (r.hi - r.lo) : 0.0; }

bool inside(const SearchRange& r, double v) { return v >= r.lo && v <= r.hi; }

// true if a ranks strictly ahead of b
bool better(const Evaluation& a, const Evaluation& b) {
    auto rank = [](const Evaluation& e) { return !e.valid ? 2 : (e.feasible ? 0 : 1); };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    if (!a.valid) return false;
    if (a.feasible) return a.metrics.branch_loss_w < b.metrics.branch_loss_w;
    return a.metrics.peak_ratio < b.metrics.peak_ratio;
}

Evaluation evaluate(const Config& base, const SearchSpace& sp, const Point& u, double peak_limit) {
    Evaluation ev;
    ev.alpha = to_param(sp.alpha, u[0]);
    ev.omega = to_param(sp.omega, u[1]);
    ev.gamma = to_param(sp.gamma, u[2]);
    try {
        Config c = base;
        c.mrac.alpha = ev.alpha;
        c.mrac.omega = ev.omega;
        c.mrac.gamma = ev.gamma;
        c = validate(c);
        Trace tr = run_to_end(c, RunOptions{Mode::adaptive, LineKind::bergeron, 200});
        ev.metrics = compute_metrics(tr, c);
        ev.valid = true;
        ev.feasible = ev.metrics.peak_ratio <= peak_limit;
    } catch (const ConfigError& e) {
        ev.error = e.problems().empty() ? "invalid configuration" : e.problems().front();
    } catch (const std::exception& e) {
        ev.error = e.what();
    }
    return ev;
}

}  // namespace

OptimizeResult optimize_refmodel(const Config& base, const SearchSpace& sp, const OptimizeOptions& opt) {
    for (const SearchRange* r : {&sp.alpha, &sp.omega, &sp.gamma})
        if (!(std::isfinite(r->lo) && std::isfinite(r->hi) && r->lo <= r->hi))
            throw std::invalid_argument("search ranges must be finite with lo <= hi");
    if (opt.budget < 1) throw std::invalid_argument("budget must be >= 1");

    std::mt19937_64 rng(opt.seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const std::array<const SearchRange*, 3> ranges{&sp.alpha, &sp.omega, &sp.gamma};
    const unsigned threads = worker_count(opt.threads);

    OptimizeResult res;
    std::map<Point, std::size_t> seen;

    // evaluates the uncached points (up to the budget) and returns log indices for all
    auto batch = [&](const std::vector<Point>& pts) {
        std::vector<Point> todo;
        for (const auto& p : pts)
            if (!seen.count(p) && std::find(todo.begin(), todo.end(), p) == todo.end()) todo.push_back(p);
        const std::size_t room = static_cast<std::size_t>(opt.budget) - res.log.size();
        if (todo.size() > room) todo.resize(room);
        std::vector<Evaluation> evs(todo.size());
        parallel_for(todo.size(), threads,
                     [&](std::size_t i) { evs[i] = evaluate(base, sp, todo[i], opt.peak_limit); });
        for (std::size_t i = 0; i < todo.size(); ++i) {
            evs[i].index = static_cast<int>(res.log.size());
            seen[todo[i]] = res.log.size();
            res.log.push_back(std::move(evs[i]));
        }
        std::vector<std::optional<std::size_t>> idx;
        for (const auto& p : pts) {
            auto it = seen.find(p);
            idx.push_back(it == seen.end() ? std::nullopt : std::optional<std::size_t>(it->second));
        }
        return idx;
    };

    auto random_point = [&] {
        Point p;
        for (int k = 0; k < 3; ++k) p[k] = ranges[k]->hi > ranges[k]->lo ? uniform() : 0.0;
        return p;
    };

    Point center;
    const bool start_inside = inside(sp.alpha, base.mrac.alpha) && inside(sp.omega, base.mrac.omega) &&
                              inside(sp.gamma, base.mrac.gamma);
    if (start_inside)
        center = {to_unit(sp.alpha, base.mrac.alpha), to_unit(sp.omega, base.mrac.omega),
                  to_unit(sp.gamma, base.mrac.gamma)};
    else
        center = random_point();

    const double step0 = 0.25, step_min = 1.0 / 32;
    double step = step0;
    auto c0 = batch({center})[0];
    std::size_t cur = *c0;
    int idle = 0;

    while (res.log.size() < static_cast<std::size_t>(opt.budget) && idle < 1000) {
        const std::size_t before = res.log.size();
        std::vector<Point> poll;
        for (int k = 0; k < 3; ++k) {
            if (!(ranges[k]->hi > ranges[k]->lo)) continue;
            for (double s : {step, -step}) {
                Point p = center;
                p[k] = std::clamp(center[k] + s, 0.0, 1.0);
                if (p != center) poll.push_back(p);
            }
        }
        auto idx = batch(poll);
        std::optional<std::size_t> win;
        for (std::size_t i = 0; i < poll.size(); ++i) {
            if (!idx[i]) continue;
            const auto& cand = res.log[*idx[i]];
            if (better(cand, res.log[cur]) && (!win || better(cand, res.log[*win]))) win = *idx[i];
        }
        if (win) {
            cur = *win;
            for (std::size_t i = 0; i < poll.size(); ++i)
                if (idx[i] == win) center = poll[i];
        } else {
            step /= 2;
            if (step < step_min) {
                Point p = random_point();
                auto r = batch({p})[0];
                if (r) {
                    center = p;
                    cur = *r;
                }
                step = step0;
            }
        }
        idle = res.log.size() == before ? idle + 1 : 0;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < res.log.size(); ++i)
        if (better(res.log[i], res.log[best])) best = i;
    res.best = res.log[best];
    res.feasible = res.best.feasible;
    return res;
}

}  // namespace reflectwave
