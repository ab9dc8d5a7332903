#include "planex/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "planex/errors.hpp"

namespace planex {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

bool crisp_literals_hold(const std::vector<Literal>& lits,
                         const std::vector<NumericComparison>& nums,
                         const CrispState& state) {
    for (const Literal& lit : lits)
        if (state.props[lit.prop] != lit.positive) return false;
    for (const NumericComparison& c : nums)
        if (!c.holds(state.fluents)) return false;
    return true;
}

void crisp_apply(const std::vector<PropEffect>& props,
                 const std::vector<NumericEffect>& numeffs, CrispState& state,
                 std::mt19937_64& rng) {
    for (const PropEffect& e : props) {
        if (e.psi >= 1.0)
            state.props[e.prop] = true;
        else if (e.psi <= 0.0)
            state.props[e.prop] = false;
        else
            state.props[e.prop] = uniform01(rng) < e.psi;
    }
    for (const NumericEffect& e : numeffs) {
        const double v = e.value.evaluate(state.fluents);
        switch (e.op) {
        case NumericOp::Assign: state.fluents[e.fluent] = v; break;
        case NumericOp::Increase: state.fluents[e.fluent] += v; break;
        case NumericOp::Decrease: state.fluents[e.fluent] -= v; break;
        }
    }
}

std::vector<PropId> expand_prop_patterns(const std::vector<std::string>& patterns,
                                         const PlanningProblem& problem) {
    std::vector<PropId> out;
    for (const std::string& pattern : patterns) {
        if (!pattern.empty() && pattern.back() == '*') {
            const std::string prefix = pattern.substr(0, pattern.size() - 1);
            for (PropId p = 0; p < problem.propositions.size(); ++p)
                if (problem.propositions[p].rfind(prefix, 0) == 0) out.push_back(p);
        } else {
            auto id = problem.find_prop(pattern);
            if (!id) throw Error("unknown proposition in config: '" + pattern + "'");
            out.push_back(*id);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<FluentId> expand_fluent_patterns(const std::vector<std::string>& patterns,
                                             const PlanningProblem& problem) {
    std::vector<FluentId> out;
    for (const std::string& pattern : patterns) {
        if (!pattern.empty() && pattern.back() == '*') {
            const std::string prefix = pattern.substr(0, pattern.size() - 1);
            for (FluentId f = 0; f < problem.fluents.size(); ++f)
                if (problem.fluents[f].rfind(prefix, 0) == 0) out.push_back(f);
        } else {
            auto id = problem.find_fluent(pattern);
            if (!id) throw Error("unknown fluent in config: '" + pattern + "'");
            out.push_back(*id);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

struct World::Impl {
    struct ExoStream {
        PropId prop;
        double rate;
        double p_true;
        std::mt19937_64 rng;
        double next_time;
    };
    std::vector<ExoStream> streams;
    std::vector<TimedLiteral> tils;
    std::size_t til_pos = 0;
    double next_observation = kInf;
    double observation_period = 0.0;
    std::vector<PropId> visible_props;
    std::vector<FluentId> visible_fluents;
    std::vector<int> dispatch_counts;
    std::mt19937_64 effect_rng;  // only consumed by fractional effects
};

World::World(std::shared_ptr<const PlanningProblem> problem, const WorldConfig& config)
    : problem_(std::move(problem)), config_(config), impl_(std::make_shared<Impl>()) {
    truth_.state = problem_->initial;
    for (const auto& [name, value] : config_.initial_overrides) {
        auto id = problem_->find_prop(name);
        if (!id) throw Error("unknown proposition in initial override: '" + name + "'");
        truth_.state.props[*id] = value;
    }
    impl_->tils = problem_->timed_literals;
    std::sort(impl_->tils.begin(), impl_->tils.end(),
              [](const TimedLiteral& a, const TimedLiteral& b) { return a.time < b.time; });

    for (const ExoEventConfig& exo : config_.exogenous) {
        for (PropId p : expand_prop_patterns({exo.proposition}, *problem_)) {
            Impl::ExoStream s;
            s.prop = p;
            s.rate = exo.rate;
            s.p_true = exo.p_true;
            s.rng.seed(mix(mix(config_.seed, 0x45584fu), p));
            s.next_time = exo.rate > 0.0 ? exponential(s.rng, exo.rate) : kInf;
            impl_->streams.push_back(std::move(s));
        }
    }
    impl_->observation_period = config_.observation.period;
    if (impl_->observation_period > 0.0)
        impl_->next_observation = impl_->observation_period;
    impl_->visible_props =
        expand_prop_patterns(config_.observation.visible_props, *problem_);
    impl_->visible_fluents =
        expand_fluent_patterns(config_.observation.visible_fluents, *problem_);
    impl_->dispatch_counts.assign(problem_->actions.size(), 0);
    impl_->effect_rng.seed(mix(config_.seed, 0xeffec7u));
}

bool World::goal_satisfied() const {
    return crisp_literals_hold(problem_->goal.literals, problem_->goal.numerics,
                               truth_.state);
}

double World::next_event_time() const {
    double t = kInf;
    for (const GroundTruth::Running& r : truth_.running)
        t = std::min(t, r.completion_time);
    if (impl_->til_pos < impl_->tils.size())
        t = std::min(t, impl_->tils[impl_->til_pos].time);
    for (const Impl::ExoStream& s : impl_->streams) t = std::min(t, s.next_time);
    t = std::min(t, impl_->next_observation);
    return t;
}

std::optional<SimEvent> World::dispatch(int action, double prescribed_duration,
                                        double now) {
    if (action < 0 || action >= static_cast<int>(problem_->actions.size()))
        throw ProtocolError("dispatch of unknown action index " + std::to_string(action));
    if (now < truth_.clock - kTimeTolerance)
        throw Error("dispatch in the past");
    truth_.clock = std::max(truth_.clock, now);

    const CompiledAction& c = problem_->compiled[static_cast<std::size_t>(action)];
    SimEvent ev;
    ev.action = action;
    ev.time = now;
    if (!crisp_literals_hold(c.start_literals, c.start_numerics, truth_.state)) {
        ev.kind = SimEvent::Kind::PreconditionViolated;
        return ev;
    }

    const int ordinal = impl_->dispatch_counts[static_cast<std::size_t>(action)]++;
    std::mt19937_64 rng(mix(mix(config_.seed, static_cast<std::uint64_t>(action) + 1),
                            static_cast<std::uint64_t>(ordinal)));
    const bool will_fail = uniform01(rng) < config_.action_failure_prob;
    const double factor = config_.duration_noise_lo +
                          uniform01(rng) *
                              (config_.duration_noise_hi - config_.duration_noise_lo);

    if (!is_durative(problem_->actions[static_cast<std::size_t>(action)])) {
        if (will_fail) {
            ev.kind = SimEvent::Kind::ActionFailed;
            return ev;
        }
        crisp_apply(c.start_props, c.start_numeffs, truth_.state, impl_->effect_rng);
        ev.kind = SimEvent::Kind::ActionCompleted;
        return ev;
    }

    GroundTruth::Running run;
    run.action = action;
    run.start_time = now;
    run.completion_time = now + std::max(0.0, prescribed_duration * factor);
    run.will_fail = will_fail;
    run.prescribed_duration = prescribed_duration;
    if (!will_fail)
        crisp_apply(c.start_props, c.start_numeffs, truth_.state, impl_->effect_rng);
    truth_.running.push_back(run);
    return std::nullopt;  // running; outcome arrives as a step() event
}

std::vector<SimEvent> World::step(double until) {
    if (until < truth_.clock - kTimeTolerance)
        throw Error("step into the past");
    std::vector<SimEvent> events;

    while (true) {
        // Earliest pending event; equal-time ties resolve by category:
        // completions, then timed literals, then flips, then observations.
        double t = kInf;
        int category = -1;
        std::size_t which = 0;
        for (std::size_t i = 0; i < truth_.running.size(); ++i) {
            if (truth_.running[i].completion_time < t - kTimeTolerance) {
                t = truth_.running[i].completion_time;
                category = 0;
                which = i;
            }
        }
        auto consider = [&](double time, int cat, std::size_t idx) {
            if (time < t - kTimeTolerance) {
                t = time;
                category = cat;
                which = idx;
            }
        };
        if (impl_->til_pos < impl_->tils.size())
            consider(impl_->tils[impl_->til_pos].time, 1, impl_->til_pos);
        for (std::size_t i = 0; i < impl_->streams.size(); ++i)
            consider(impl_->streams[i].next_time, 2, i);
        consider(impl_->next_observation, 3, 0);

        if (category < 0 || t > until + kTimeTolerance) break;

        truth_.clock = std::max(truth_.clock, t);
        switch (category) {
        case 0: {
            const GroundTruth::Running run = truth_.running[which];
            truth_.running.erase(truth_.running.begin() +
                                 static_cast<std::ptrdiff_t>(which));
            const CompiledAction& c =
                problem_->compiled[static_cast<std::size_t>(run.action)];
            SimEvent ev;
            ev.time = run.completion_time;
            ev.action = run.action;
            if (run.will_fail ||
                !crisp_literals_hold(c.end_literals, c.end_numerics, truth_.state)) {
                ev.kind = SimEvent::Kind::ActionFailed;
            } else {
                crisp_apply(c.end_props, c.end_numeffs, truth_.state, impl_->effect_rng);
                ev.kind = SimEvent::Kind::ActionCompleted;
            }
            events.push_back(ev);
            break;
        }
        case 1: {
            const TimedLiteral& til = impl_->tils[impl_->til_pos++];
            truth_.state.props[til.prop] = til.value;
            break;
        }
        case 2: {
            Impl::ExoStream& s = impl_->streams[which];
            const bool target = uniform01(s.rng) < s.p_true;
            truth_.state.props[s.prop] = target;
            SimEvent ev;
            ev.kind = SimEvent::Kind::ExogenousFlip;
            ev.time = s.next_time;
            ev.prop = s.prop;
            ev.value = target;
            events.push_back(ev);
            s.next_time += exponential(s.rng, s.rate);
            break;
        }
        case 3: {
            SimEvent ev;
            ev.kind = SimEvent::Kind::ObservationReport;
            ev.time = impl_->next_observation;
            ev.obs.time = impl_->next_observation;
            for (PropId p : impl_->visible_props)
                ev.obs.props.emplace_back(p, truth_.state.props[p]);
            for (FluentId f : impl_->visible_fluents)
                ev.obs.fluents.emplace_back(f, truth_.state.fluents[f]);
            events.push_back(ev);
            impl_->next_observation += impl_->observation_period;
            break;
        }
        default: break;
        }
    }
    truth_.clock = std::max(truth_.clock, until);
    return events;
}

FuzzyState estimate(const FuzzyState& belief, const Observation& obs,
                    const ObservationConfig& config, double elapsed_seconds) {
    FuzzyState next = belief;
    if (config.decay_lambda > 0.0 && elapsed_seconds > 0.0) {
        const double keep = std::pow(1.0 - config.decay_lambda, elapsed_seconds);
        for (double& rho : next.rho) rho = 0.5 + (rho - 0.5) * keep;
    }
    for (const auto& [prop, value] : obs.props) {
        if (prop >= next.rho.size())
            throw MalformedConditionError("observation of unknown proposition");
        next.rho[prop] = value ? config.confidence : 1.0 - config.confidence;
    }
    for (const auto& [fluent, value] : obs.fluents) next.set_numeric(fluent, value);
    return next;
}

}  // namespace planex
