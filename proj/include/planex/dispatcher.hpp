#ifndef PLANEX_DISPATCHER_HPP
#define PLANEX_DISPATCHER_HPP

#include <optional>
#include <string>
#include <vector>

#include "planex/extractor.hpp"
#include "planex/plan_graph.hpp"
#include "planex/simulator.hpp"

namespace planex {

// The replanning triggers: an exhausted ordering set, reported action
// failure, false preconditions at dispatch, or a violated temporal bound.
enum class ReplanReason {
    NoValidOrdering,
    ActionFailure,
    PreconditionFalse,
    TemporalViolation,
};

const char* to_string(ReplanReason reason);

struct Decision {
    enum class Kind { Dispatch, WaitUntil, AwaitEnd, Replan };
    Kind kind;
    int node = -1;          // Dispatch
    double wait_until = 0;  // WaitUntil
    int action = -1;        // AwaitEnd
    ReplanReason reason = ReplanReason::NoValidOrdering;
    std::optional<OrderingResult> chosen;
};

// Live execution state: the pruned adaptable plan, the belief, and the
// bookkeeping the selection policy and feedback handling maintain.
struct ExecutorState {
    PlanNetwork live;
    FuzzyState belief;
    std::vector<std::string> executed;  // node ids in execution order
    double wall_clock = 0.0;            // network time (PlanStart at 0)
    int replan_count = 0;
    int action_count = 0;

    struct Running {
        std::string end_node_id;
        int action;
        double start_time;
    };
    std::vector<Running> running;

    double last_estimate_time = 0.0;
    std::size_t next_timed_literal = 0;  // belief-side TIL cursor
};

ExecutorState make_executor(PlanNetwork live, FuzzyState belief);

// Earliest network time the node can be dispatched: now, pushed by the
// absolute lower bounds anchored at PlanStart.
double earliest_feasible(const PlanNetwork& net, int node, double now);

// The action-selection policy: take the maximum-Q ordering (ties broken by
// the lexicographic node-id sequence) and turn its first node into a
// decision; an empty result set requests replanning.
Decision select_next(const std::vector<OrderingResult>& results, const PlanNetwork& net,
                     const FuzzyState& belief, double now);

struct FeedbackEvent {
    enum class Kind { ActionSucceeded, ActionFailed, Observation, Tick } kind;
    double time = 0.0;        // network time
    std::string action;       // grounded action id for the action kinds
    Observation observation;  // network-time stamped
};

// Dispatches a start or instantaneous node against the belief: applies its
// effects, prunes it from the live plan, and registers durative actions as
// running. The caller has already cleared the node with the simulator.
void apply_dispatch(ExecutorState& ex, int node);

// Routes one feedback event: success prunes the completed end and applies
// its effects, failure clears the running record and asks for replanning,
// observations go through the estimator. Returns the replanning trigger, if
// any. Throws ProtocolError for unknown action ids.
std::optional<ReplanReason> handle_feedback(ExecutorState& ex, const FeedbackEvent& event,
                                            const ObservationConfig& estimator);

// Applies model-known timed initial literals up to `now` to the belief.
void apply_timed_literals(ExecutorState& ex, double now);

}  // namespace planex

#endif
