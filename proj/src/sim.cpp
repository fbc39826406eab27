#include "reflectwave/sim.hpp"

#include <cmath>
#include <sstream>

#include "reflectwave/drive.hpp"

namespace reflectwave {

void Trace::reserve(std::size_t n) {
    for (std::size_t k = 0; k < columns().size(); ++k) column(k)->reserve(n);
}

const std::vector<std::string>& Trace::columns() {
    static const std::vector<std::string> names = {"t_s",        "v_inv_V", "v_mot_V", "v_coil_V", "i_hf_A",
                                                   "i_branch_A", "duty",    "zeq_ohm", "lyap_J"};
    return names;
}

std::vector<double>* Trace::column(std::size_t k) {
    return const_cast<std::vector<double>*>(static_cast<const Trace*>(this)->column(k));
}

const std::vector<double>* Trace::column(std::size_t k) const {
    switch (k) {
        case 0: return &t_s;
        case 1: return &v_inv_V;
        case 2: return &v_mot_V;
        case 3: return &v_coil_V;
        case 4: return &i_hf_A;
        case 5: return &i_branch_A;
        case 6: return &duty;
        case 7: return &zeq_ohm;
        case 8: return &lyap_J;
        default: return nullptr;
    }
}

struct Simulation::LineHolder {
    std::unique_ptr<BergeronLine> bergeron;
    std::unique_ptr<LadderLine> ladder;
};

RefModel reference_model(const Config& c) {
    double k = matched_coil_share(c.derived.f_ring, c.derived.z0, c.motor, c.branch);
    return c.mrac.kind == RefKind::underdamped ? make_underdamped(c.mrac.alpha, c.mrac.omega, k)
                                               : make_critically_damped(c.mrac.alpha, k);
}

Simulation::Simulation(const Config& cfg, RunOptions opt)
    : cfg_(cfg),
      opt_(opt),
      line_(std::make_unique<LineHolder>()),
      motor_(cfg.motor, cfg.branch, cfg.derived.dt),
      ref_(reference_model(cfg)) {
    if (cfg_.derived.dt <= 0) throw std::invalid_argument("configuration is not validated");
    const double dt = cfg_.derived.dt;
    if (opt_.line == LineKind::bergeron)
        line_->bergeron = std::make_unique<BergeronLine>(cfg_.cable, cfg_.derived.delay_steps);
    else
        line_->ladder = std::make_unique<LadderLine>(cfg_.cable, opt_.ladder_segments, dt);

    auto& br = motor_.branch();
    switch (opt_.mode) {
        case Mode::adaptive: br.d = cfg_.branch.d_init; break;
        case Mode::static_matched:
            br.d = matched_duty(cfg_.derived.f_ring, cfg_.derived.z0, cfg_.branch);
            br.active = true;
            br.gate = 1.0;
            break;
        case Mode::off: br.d = cfg_.branch.d_init; break;
    }
    mrac_.d = br.d;
    mrac_.gamma = cfg_.mrac.gamma;
    hp_i_ = HighPass(10 * cfg_.pwm.f_sw, dt);
    double fe = cfg_.mrac.error_cutoff > 0 ? cfg_.mrac.error_cutoff : cfg_.derived.f_ring / 2;
    hp_e_ = HighPass(fe, dt);
    lead_ = group_delay(ref_);

    auto n = static_cast<std::size_t>(cfg_.derived.steps / cfg_.sim.record_stride + 1);
    trace_.reserve(n);
    record();
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

void Simulation::step() {
    const double dt = cfg_.derived.dt;
    const double tau = cfg_.derived.tau;
    const std::int64_t s = step_index_ + 1;
    const double t = static_cast<double>(s) * dt;
    const auto& pwm = cfg_.pwm;

    try {
        // 1. source
        const double vsrc = pwm_voltage(t, pwm);

        // 2. line with the motor network at the receiving end
        if (line_->bergeron) {
            line_->bergeron->step(vsrc, pwm.r_source, [&](const Norton& n) {
                auto r = motor_.solve(n);
                return EndSolution{r.v_mot, -r.i_into_motor};
            });
            v_inv_ = line_->bergeron->v_send();
        } else {
            auto st = motor_.stamp();
            auto [vt, vm] = line_->ladder->step(vsrc, pwm.r_source, st);
            motor_.commit(vt, vm);
            v_inv_ = line_->ladder->v_send();
        }

        // 3. gating
        auto& br = motor_.branch();
        if (opt_.mode == Mode::adaptive) {
            GateInputs in{motor_.v_mot(), edge_in_flight(t + dt, tau, pwm)};
            gate_branch(br, in, pwm, cfg_.branch, dt);
        }

        // 4. reference model, driven by the edge schedule delayed by the cable
        //    and advanced by the model's own group delay
        const double u = pwm_voltage(t - tau + lead_, pwm) / pwm.v_dc;
        v_ref_ = ref_step(ref_, mrac_.x_m, pwm.v_dc, u_prev_, u, dt);
        u_prev_ = u;

        i_hf_ = hp_i_.step(motor_.coil().i_phase);
        const double v_coil = motor_.coil().v_coil;
        mrac_.e = hp_e_.step(v_coil - v_ref_);
        mrac_.eps = {v_coil - mrac_.x_m[0], motor_.coil().i_phase - mrac_.x_m[1]};

        // 5. adaptation
        if (opt_.mode == Mode::adaptive) {
            bool run = cfg_.mrac.freeze_when_inactive ? (br.active && !br.releasing) : true;
            if (run) {
                mrac_.d = br.d;
                adapt_duty(mrac_, i_hf_, cfg_.branch, cfg_.mrac.epsilon, dt);
                br.d = mrac_.d;
            }
        }
        const double zmag = z_eq(br.d, cfg_.derived.f_ring, cfg_.branch).magnitude;
        mrac_.big_e = lyapunov(mrac_.e, zmag, i_hf_);
        if (!std::isfinite(mrac_.big_e) || !std::isfinite(v_ref_) || !std::isfinite(br.d))
            throw std::runtime_error("non-finite state");
    } catch (const SimError&) {
        throw;
    } catch (const std::exception& ex) {
        throw SimError(std::string(ex.what()) + " at step " + std::to_string(s) + "\n" + state_dump(), s);
    }

    step_index_ = s;
    // 6. record
    if (step_index_ % cfg_.sim.record_stride == 0) record();
}

void Simulation::record() {
    const auto& br = motor_.branch();
    trace_.t_s.push_back(t());
    trace_.v_inv_V.push_back(v_inv_);
    trace_.v_mot_V.push_back(motor_.v_mot());
    trace_.v_coil_V.push_back(motor_.coil().v_coil);
    trace_.i_hf_A.push_back(i_hf_);
    trace_.i_branch_A.push_back(br.i_branch);
    trace_.duty.push_back(br.d);
    trace_.zeq_ohm.push_back(z_eq(br.d, cfg_.derived.f_ring, cfg_.branch).magnitude);
    trace_.lyap_J.push_back(mrac_.big_e);
}

void Simulation::run_to_end() {
    while (!done()) step();
}

std::string Simulation::state_dump() const {
    std::ostringstream os;
    const auto& br = motor_.branch();
    os << "t=" << t() << " v_inv=" << v_inv_ << " v_mot=" << motor_.v_mot() << " v_junction=" << motor_.v_junction()
       << " i_coil=" << motor_.coil().i_coil << " i_branch=" << br.i_branch << " d=" << br.d
       << " active=" << br.active << " gate=" << br.gate << " x_m=[" << mrac_.x_m[0] << "," << mrac_.x_m[1]
       << "] e=" << mrac_.e << " E=" << mrac_.big_e;
    return os.str();
}

Trace run_to_end(const Config& cfg, RunOptions opt) {
    Simulation sim(cfg, opt);
    sim.run_to_end();
    return sim.take_trace();
}

}  // namespace reflectwave
