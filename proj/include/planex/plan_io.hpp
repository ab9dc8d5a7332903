#ifndef PLANEX_PLAN_IO_HPP
#define PLANEX_PLAN_IO_HPP

#include <string>
#include <vector>

#include "planex/model.hpp"

namespace planex {

struct PlanStep {
    double time = 0.0;      // dispatch time t
    int action = -1;        // index into PlanningProblem::actions
    double duration = 0.0;  // prescribed duration d, 0 for instantaneous
};

// A time-triggered plan: the `t: (action args) [d]` tuples emitted by
// PDDL2.1 planners, sorted by dispatch time.
struct TimeTriggeredPlan {
    std::vector<PlanStep> steps;
};

// Parses plan text, one step per line:
//   <time>: (<name> <arg>*) [<duration>]
// The bracketed duration may be omitted for instantaneous actions; `;`
// starts a comment line and blank lines are ignored. Steps are grounded
// against the problem's action table and sorted by time (stable).
// Throws SyntaxError / GroundingError with the offending line number.
TimeTriggeredPlan parse_time_triggered_plan(const std::string& text,
                                            const PlanningProblem& problem);

// Canonical form: three decimals, one step per line, always bracketed
// duration for durative actions. parse(serialize(p)) round-trips exactly.
std::string serialize_time_triggered_plan(const TimeTriggeredPlan& plan,
                                          const PlanningProblem& problem);

struct OrderingResult;
struct PlanNetwork;

// Deterministic ordering dump: one `Q=<prob> : <node id list>` line per
// ordering, sorted by Q descending with lexicographic node-id tie order.
std::string serialize_orderings(const std::vector<OrderingResult>& results,
                                const PlanNetwork& net);

// Shortest round-trip decimal rendering (used by the dump formats).
std::string format_double(double value);

}  // namespace planex

#endif
