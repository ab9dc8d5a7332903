#ifndef PLANEX_PLAN_GRAPH_HPP
#define PLANEX_PLAN_GRAPH_HPP

#include <memory>
#include <string>
#include <vector>

#include "planex/model.hpp"
#include "planex/plan_io.hpp"

namespace planex {

enum class EdgeLabel { Causal, Interference, Duration, Deadline };

const char* to_string(EdgeLabel label);

// Temporal relation lb <= time(dst) - time(src) <= ub.
struct TemporalEdge {
    int src;
    int dst;
    double lb;
    double ub;
    EdgeLabel label;
};

struct PlanNetwork {
    std::shared_ptr<const PlanningProblem> problem;
    std::vector<PlanNode> nodes;  // nodes[0] is the PlanStart anchor
    std::vector<TemporalEdge> edges;
    // Absolute-time bounds measured from the PlanStart anchor (src == 0).
    std::vector<TemporalEdge> deadline_edges;

    int find_node(const std::string& id) const;  // -1 when absent
    std::size_t size() const { return nodes.size(); }
};

// Simulates the plan at its timestamps against the problem's initial state
// and throws InvalidPlanError (citing the first failing node) when some step
// is inapplicable, an over-all condition breaks, or the goal is not reached.
void validate_time_triggered(const TimeTriggeredPlan& plan,
                             const PlanningProblem& problem);

// Converts a time-triggered plan into the partially-ordered plan network:
// one node per instantaneous action, start/end pairs per durative action,
// plus the PlanStart anchor; causal edges from the latest prior achiever of
// each condition literal, duration edges per mated pair, interference edges
// between conflicting nodes, and deadline edges from timed initial literals.
PlanNetwork build_plan_network(const TimeTriggeredPlan& plan,
                               std::shared_ptr<const PlanningProblem> problem);

// Interference edges between two nodes of distinct actions: one edge per
// conflict, directed as in the original schedule. A conflict with an
// over-all condition yields edges against both nodes of the conditioned
// action; the edge into the interval's far boundary is weak (lb 0), all
// other interference bounds are [epsilon, inf).
std::vector<TemporalEdge> detect_interference(const PlanNode& a, const PlanNode& b,
                                              const PlanningProblem& problem);

// The adaptable plan: same nodes, causal edges removed, duration and
// interference edges (and deadline bounds) preserved.
PlanNetwork relax(const PlanNetwork& net);

// Removes executed (and skipped) nodes with their incident edges. Duration
// edges of in-flight actions (start done, end pending) are rewritten as
// absolute windows from PlanStart using the recorded start times.
PlanNetwork prune_executed(const PlanNetwork& net, const std::vector<int>& done,
                           const std::vector<int>& skipped,
                           const std::vector<ExecutingAction>& executing);

// Line-based dump: `node <id> <kind> <action>` then
// `edge <src> <dst> <lb> <ub> <label>`.
std::string dump_network(const PlanNetwork& net);

}  // namespace planex

#endif
