#ifndef PLANEX_SIMULATOR_HPP
#define PLANEX_SIMULATOR_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "planex/model.hpp"

namespace planex {

// One exogenous process: the proposition flips at memoryless times with the
// given rate; each flip targets true with probability p_true.
struct ExoEventConfig {
    std::string proposition;  // name or prefix pattern ending in '*'
    double rate = 0.0;        // flips per second
    double p_true = 0.5;
};

struct ObservationConfig {
    double period = 0.0;  // 0 disables reports
    double confidence = 0.9;
    double decay_lambda = 0.0;  // drift of unobserved rho toward 0.5, per second
    std::vector<std::string> visible_props;    // names or '*'-suffix patterns
    std::vector<std::string> visible_fluents;
};

struct WorldConfig {
    std::uint64_t seed = 0;
    double action_failure_prob = 0.0;
    double duration_noise_lo = 1.0;  // multiplicative on the prescribed duration
    double duration_noise_hi = 1.0;
    std::vector<ExoEventConfig> exogenous;
    ObservationConfig observation;
    // Ground-truth tweaks applied before the episode starts.
    std::vector<std::pair<std::string, bool>> initial_overrides;
};

struct Observation {
    double time = 0.0;
    std::vector<std::pair<PropId, bool>> props;
    std::vector<std::pair<FluentId, double>> fluents;
};

struct SimEvent {
    enum class Kind {
        ActionCompleted,
        ActionFailed,
        PreconditionViolated,
        ExogenousFlip,
        ObservationReport,
    };
    Kind kind;
    double time = 0.0;
    int action = -1;
    PropId prop = 0;   // flips
    bool value = false;
    Observation obs;   // reports
};

// Crisp world state plus everything in flight.
struct GroundTruth {
    CrispState state;
    double clock = 0.0;
    struct Running {
        int action;
        double start_time;
        double completion_time;
        bool will_fail;
        double prescribed_duration;
    };
    std::vector<Running> running;
};

// Deterministic-seeded, non-physics world. Exogenous flip times are drawn
// from per-proposition streams independent of the dispatch history, and
// per-dispatch draws are keyed by (seed, action, dispatch ordinal), so runs
// that dispatch the same action the same number of times face identical
// noise regardless of scheduling differences.
class World {
public:
    World(std::shared_ptr<const PlanningProblem> problem, const WorldConfig& config);

    double clock() const { return truth_.clock; }
    const GroundTruth& truth() const { return truth_; }
    bool idle() const { return truth_.running.empty(); }
    bool goal_satisfied() const;

    // Time of the earliest pending event, or +inf.
    double next_event_time() const;

    // Attempts to start an action now. Returns nullopt when a durative
    // action is accepted and running; otherwise the immediate outcome
    // (PreconditionViolated, or completion/failure of an instantaneous
    // action).
    std::optional<SimEvent> dispatch(int action, double prescribed_duration, double now);

    // Advances the clock to `until`, applying and returning every event in
    // order. Requires until >= clock().
    std::vector<SimEvent> step(double until);

private:
    std::shared_ptr<const PlanningProblem> problem_;
    WorldConfig config_;
    GroundTruth truth_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// State-probability estimator: observed propositions snap to the configured
// confidence, unobserved ones drift toward 0.5 with rate lambda per elapsed
// second, observed fluents are copied crisply.
FuzzyState estimate(const FuzzyState& belief, const Observation& obs,
                    const ObservationConfig& config, double elapsed_seconds);

}  // namespace planex

#endif
