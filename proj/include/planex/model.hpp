#ifndef PLANEX_MODEL_HPP
#define PLANEX_MODEL_HPP

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace planex {

using PropId = std::uint32_t;
using FluentId = std::uint32_t;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Separation enforced for strict temporal inequalities; matches the
// timestamp granularity planners use in their plan listings.
constexpr double kEpsilon = 0.001;

// Slack for floating-point comparisons of temporal values.
constexpr double kTimeTolerance = 1e-9;

// Temporal qualifier of a condition or effect within a durative action.
enum class TimeTag { AtStart, OverAll, AtEnd, Untimed };

const char* to_string(TimeTag tag);

struct Literal {
    PropId prop;
    bool positive;
};

enum class Comparator { Less, LessEq, Eq, GreaterEq, Greater };

// Grounded arithmetic expression over numeric fluents. Immutable; children
// are shared so conditions stay cheap to copy.
struct FluentExpr {
    enum class Kind { Constant, FluentRef, Add, Sub, Mul, Div };

    Kind kind = Kind::Constant;
    double constant = 0.0;
    FluentId fluent = 0;
    std::shared_ptr<const FluentExpr> lhs;
    std::shared_ptr<const FluentExpr> rhs;

    static FluentExpr make_constant(double value);
    static FluentExpr make_fluent(FluentId id);
    static FluentExpr make_binary(Kind op, FluentExpr left, FluentExpr right);

    double evaluate(const std::vector<double>& numerics) const;
    // True when the expression references no fluent outside `dynamic`.
    bool references_fluent() const;
};

struct NumericComparison {
    FluentExpr lhs;
    Comparator cmp;
    FluentExpr rhs;

    bool holds(const std::vector<double>& numerics) const;
};

struct Condition {
    std::vector<Literal> literals;
    std::vector<NumericComparison> numerics;
    TimeTag timing = TimeTag::Untimed;

    bool empty() const { return literals.empty() && numerics.empty(); }
};

enum class NumericOp { Assign, Increase, Decrease };

// Propositional effect with success probability psi: 1 is a deterministic
// add, 0 a deterministic delete, intermediate values are noisy effects.
struct PropEffect {
    PropId prop;
    double psi;
};

struct NumericEffect {
    FluentId fluent;
    NumericOp op;
    FluentExpr value;
};

struct Effect {
    std::vector<PropEffect> props;
    std::vector<NumericEffect> numerics;
    TimeTag timing = TimeTag::Untimed;

    bool empty() const { return props.empty() && numerics.empty(); }
};

struct Interval {
    double lb = 0.0;
    double ub = kInf;
};

// Flattened per-action tables used by the hot evaluation paths. Built once
// when a problem is finalized.
struct CompiledAction {
    // Start applicability merges at-start and over-all conditions; end
    // applicability uses at-end conditions only.
    std::vector<Literal> start_literals;
    std::vector<NumericComparison> start_numerics;
    std::vector<Literal> end_literals;
    std::vector<NumericComparison> end_numerics;
    std::vector<Literal> overall_literals;  // subset of start_literals
    std::vector<PropEffect> start_props;
    std::vector<NumericEffect> start_numeffs;
    std::vector<PropEffect> end_props;
    std::vector<NumericEffect> end_numeffs;
};

struct DurativeAction {
    std::string id;  // grounded name with parameters, e.g. "goto r0 wp1 m0"
    std::vector<Condition> conditions;  // tags AtStart / OverAll / AtEnd
    std::vector<Effect> effects;        // tags AtStart / AtEnd
    Interval duration;
    // Set when the duration constraint could not be resolved to static
    // bounds at grounding time (it references fluents some action writes);
    // the prescribed duration from the input plan is used instead.
    bool duration_is_dynamic = false;
};

struct InstantaneousAction {
    std::string id;
    Condition precondition;  // Untimed
    Effect effect;           // Untimed
};

using GroundAction = std::variant<DurativeAction, InstantaneousAction>;

const std::string& action_id(const GroundAction& action);
bool is_durative(const GroundAction& action);

// Timed initial literal: `prop` acquires `value` at absolute time `time`.
struct TimedLiteral {
    double time;
    PropId prop;
    bool value;
};

struct CrispState {
    std::vector<bool> props;      // indexed by PropId
    std::vector<double> fluents;  // indexed by FluentId
};

struct ObjectDecl {
    std::string name;
    std::string type;
};

struct PlanningProblem {
    std::vector<std::string> propositions;  // index is the PropId
    std::vector<std::string> fluents;       // index is the FluentId
    std::vector<GroundAction> actions;
    CrispState initial;
    Condition goal;  // Untimed
    std::vector<TimedLiteral> timed_literals;

    // Source metadata, kept so problem snapshots can be re-serialized.
    std::string domain_name;
    std::string problem_name;
    std::vector<ObjectDecl> objects;

    std::unordered_map<std::string, PropId> prop_index;
    std::unordered_map<std::string, FluentId> fluent_index;
    std::unordered_map<std::string, int> action_index;

    std::vector<CompiledAction> compiled;

    // Rebuilds the lookup maps and compiled tables; call after mutation.
    void finalize();

    std::optional<PropId> find_prop(const std::string& name) const;
    std::optional<FluentId> find_fluent(const std::string& name) const;
    std::optional<int> find_action(const std::string& id) const;
};

// A durative action in execution: keyed by the pending end node (stable
// across pruning of the already-executed start), with the wall-clock start
// time when known (0 in search).
struct ExecutingAction {
    int end_node;
    int action;
    double start_time;
};

// Probabilistic belief state: rho maps every proposition to the probability
// it holds; numeric fluents are crisp. Copy-on-write numerics keep state
// cloning cheap during search, where numeric effects are rare.
struct FuzzyState {
    std::vector<double> rho;
    std::shared_ptr<const std::vector<double>> numerics;
    std::vector<ExecutingAction> executing;

    static FuzzyState from_crisp(const CrispState& state);

    const std::vector<double>& numeric_values() const { return *numerics; }
    void set_numeric(FluentId id, double value);

    const ExecutingAction* find_executing(int end_node) const;
};

enum class NodeKind { PlanStart, Instantaneous, ActionStart, ActionEnd };

const char* to_string(NodeKind kind);

// One node of a plan network: the plan start, an instantaneous action, or
// the start or end of a durative action.
struct PlanNode {
    std::string id;
    NodeKind kind = NodeKind::PlanStart;
    int index = 0;      // position within the owning network
    int action = -1;    // index into PlanningProblem::actions
    int mate = -1;      // ActionStart <-> ActionEnd pairing
    int step = -1;      // originating step of the time-triggered plan
    // Scheduled event time in the source plan: dispatch t for starts and
    // instantaneous actions, t + d for ends, 0 for the plan start.
    double dispatch_time = 0.0;
    double prescribed_duration = 0.0;  // d from the plan, on start nodes
    int event_order = 0;  // tie-breaking rank of the original schedule
};

// Joint probability of a condition under the belief state: the product of
// rho(p) over positive literals and 1 - rho(p) over negative ones; numeric
// comparisons contribute 1 when they hold on the crisp valuation, else 0.
// Throws MalformedConditionError on out-of-range identifiers.
double joint_probability(const Condition& cond, const FuzzyState& state);

// Same product over a flattened literal/comparison list (hot path).
double joint_probability(const std::vector<Literal>& literals,
                         const std::vector<NumericComparison>& numerics,
                         const FuzzyState& state);

// Applies a node's timing-relevant effects, returning the successor state.
// Start nodes register the action as executing, end nodes retire it.
// Throws InconsistentApplicationError when ending a non-executing action.
FuzzyState apply_node(const FuzzyState& state, const PlanNode& node,
                      const PlanningProblem& problem, double start_time = 0.0);

// Applicability probability of a node in a state, or nullopt when the node
// cannot be offered: q <= threshold, or an end of a non-executing action.
std::optional<double> node_applicable(const PlanNode& node, const FuzzyState& state,
                                      const PlanningProblem& problem,
                                      double threshold = 0.0);

}  // namespace planex

#endif
