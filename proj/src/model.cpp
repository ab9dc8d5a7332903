#include "planex/model.hpp"

#include <algorithm>
#include <cmath>

#include "planex/errors.hpp"

namespace planex {

const char* to_string(TimeTag tag) {
    switch (tag) {
    case TimeTag::AtStart: return "at-start";
    case TimeTag::OverAll: return "over-all";
    case TimeTag::AtEnd: return "at-end";
    case TimeTag::Untimed: return "untimed";
    }
    return "?";
}

const char* to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::PlanStart: return "plan_start";
    case NodeKind::Instantaneous: return "instantaneous";
    case NodeKind::ActionStart: return "action_start";
    case NodeKind::ActionEnd: return "action_end";
    }
    return "?";
}

FluentExpr FluentExpr::make_constant(double value) {
    FluentExpr e;
    e.kind = Kind::Constant;
    e.constant = value;
    return e;
}

FluentExpr FluentExpr::make_fluent(FluentId id) {
    FluentExpr e;
    e.kind = Kind::FluentRef;
    e.fluent = id;
    return e;
}

FluentExpr FluentExpr::make_binary(Kind op, FluentExpr left, FluentExpr right) {
    FluentExpr e;
    e.kind = op;
    e.lhs = std::make_shared<const FluentExpr>(std::move(left));
    e.rhs = std::make_shared<const FluentExpr>(std::move(right));
    return e;
}

double FluentExpr::evaluate(const std::vector<double>& numerics) const {
    switch (kind) {
    case Kind::Constant:
        return constant;
    case Kind::FluentRef:
        if (fluent >= numerics.size())
            throw MalformedConditionError("unknown fluent id " + std::to_string(fluent));
        return numerics[fluent];
    case Kind::Add: return lhs->evaluate(numerics) + rhs->evaluate(numerics);
    case Kind::Sub: return lhs->evaluate(numerics) - rhs->evaluate(numerics);
    case Kind::Mul: return lhs->evaluate(numerics) * rhs->evaluate(numerics);
    case Kind::Div: return lhs->evaluate(numerics) / rhs->evaluate(numerics);
    }
    return 0.0;
}

bool FluentExpr::references_fluent() const {
    switch (kind) {
    case Kind::Constant: return false;
    case Kind::FluentRef: return true;
    default: return lhs->references_fluent() || rhs->references_fluent();
    }
}

bool NumericComparison::holds(const std::vector<double>& numerics) const {
    const double a = lhs.evaluate(numerics);
    const double b = rhs.evaluate(numerics);
    switch (cmp) {
    case Comparator::Less: return a < b;
    case Comparator::LessEq: return a <= b;
    case Comparator::Eq: return a == b;
    case Comparator::GreaterEq: return a >= b;
    case Comparator::Greater: return a > b;
    }
    return false;
}

const std::string& action_id(const GroundAction& action) {
    if (const auto* d = std::get_if<DurativeAction>(&action)) return d->id;
    return std::get<InstantaneousAction>(action).id;
}

bool is_durative(const GroundAction& action) {
    return std::holds_alternative<DurativeAction>(action);
}

namespace {

void append_condition(const Condition& cond, std::vector<Literal>& lits,
                      std::vector<NumericComparison>& nums) {
    lits.insert(lits.end(), cond.literals.begin(), cond.literals.end());
    nums.insert(nums.end(), cond.numerics.begin(), cond.numerics.end());
}

CompiledAction compile(const GroundAction& action) {
    CompiledAction c;
    if (const auto* d = std::get_if<DurativeAction>(&action)) {
        for (const Condition& cond : d->conditions) {
            switch (cond.timing) {
            case TimeTag::AtStart:
                append_condition(cond, c.start_literals, c.start_numerics);
                break;
            case TimeTag::OverAll:
                append_condition(cond, c.start_literals, c.start_numerics);
                c.overall_literals.insert(c.overall_literals.end(),
                                          cond.literals.begin(), cond.literals.end());
                break;
            case TimeTag::AtEnd:
            case TimeTag::Untimed:
                append_condition(cond, c.end_literals, c.end_numerics);
                break;
            }
        }
        for (const Effect& eff : d->effects) {
            if (eff.timing == TimeTag::AtEnd) {
                c.end_props.insert(c.end_props.end(), eff.props.begin(), eff.props.end());
                c.end_numeffs.insert(c.end_numeffs.end(), eff.numerics.begin(),
                                     eff.numerics.end());
            } else {
                c.start_props.insert(c.start_props.end(), eff.props.begin(),
                                     eff.props.end());
                c.start_numeffs.insert(c.start_numeffs.end(), eff.numerics.begin(),
                                       eff.numerics.end());
            }
        }
    } else {
        const auto& inst = std::get<InstantaneousAction>(action);
        append_condition(inst.precondition, c.start_literals, c.start_numerics);
        c.start_props = inst.effect.props;
        c.start_numeffs = inst.effect.numerics;
    }
    return c;
}

}  // namespace

void PlanningProblem::finalize() {
    prop_index.clear();
    fluent_index.clear();
    action_index.clear();
    for (PropId i = 0; i < propositions.size(); ++i) prop_index[propositions[i]] = i;
    for (FluentId i = 0; i < fluents.size(); ++i) fluent_index[fluents[i]] = i;
    for (int i = 0; i < static_cast<int>(actions.size()); ++i)
        action_index[action_id(actions[i])] = i;
    compiled.clear();
    compiled.reserve(actions.size());
    for (const GroundAction& a : actions) compiled.push_back(compile(a));
}

std::optional<PropId> PlanningProblem::find_prop(const std::string& name) const {
    auto it = prop_index.find(name);
    if (it == prop_index.end()) return std::nullopt;
    return it->second;
}

std::optional<FluentId> PlanningProblem::find_fluent(const std::string& name) const {
    auto it = fluent_index.find(name);
    if (it == fluent_index.end()) return std::nullopt;
    return it->second;
}

std::optional<int> PlanningProblem::find_action(const std::string& id) const {
    auto it = action_index.find(id);
    if (it == action_index.end()) return std::nullopt;
    return it->second;
}

FuzzyState FuzzyState::from_crisp(const CrispState& state) {
    FuzzyState s;
    s.rho.reserve(state.props.size());
    for (bool v : state.props) s.rho.push_back(v ? 1.0 : 0.0);
    s.numerics = std::make_shared<const std::vector<double>>(state.fluents);
    return s;
}

void FuzzyState::set_numeric(FluentId id, double value) {
    auto copy = std::make_shared<std::vector<double>>(*numerics);
    if (id >= copy->size())
        throw MalformedConditionError("unknown fluent id " + std::to_string(id));
    (*copy)[id] = value;
    numerics = std::move(copy);
}

const ExecutingAction* FuzzyState::find_executing(int end_node) const {
    for (const ExecutingAction& e : executing)
        if (e.end_node == end_node) return &e;
    return nullptr;
}

double joint_probability(const std::vector<Literal>& literals,
                         const std::vector<NumericComparison>& numerics,
                         const FuzzyState& state) {
    double q = 1.0;
    for (const Literal& lit : literals) {
        if (lit.prop >= state.rho.size())
            throw MalformedConditionError("unknown proposition id " +
                                          std::to_string(lit.prop));
        const double p = state.rho[lit.prop];
        q *= lit.positive ? p : 1.0 - p;
        if (q == 0.0) return 0.0;
    }
    for (const NumericComparison& cmp : numerics) {
        if (!cmp.holds(state.numeric_values())) return 0.0;
    }
    return q;
}

double joint_probability(const Condition& cond, const FuzzyState& state) {
    return joint_probability(cond.literals, cond.numerics, state);
}

namespace {

void apply_effects(const std::vector<PropEffect>& props,
                   const std::vector<NumericEffect>& numeffs, FuzzyState& state) {
    for (const PropEffect& e : props) {
        if (e.prop >= state.rho.size())
            throw MalformedConditionError("unknown proposition id " +
                                          std::to_string(e.prop));
        state.rho[e.prop] = e.psi;
    }
    if (numeffs.empty()) return;
    auto values = std::make_shared<std::vector<double>>(state.numeric_values());
    for (const NumericEffect& e : numeffs) {
        if (e.fluent >= values->size())
            throw MalformedConditionError("unknown fluent id " + std::to_string(e.fluent));
        const double v = e.value.evaluate(*values);
        switch (e.op) {
        case NumericOp::Assign: (*values)[e.fluent] = v; break;
        case NumericOp::Increase: (*values)[e.fluent] += v; break;
        case NumericOp::Decrease: (*values)[e.fluent] -= v; break;
        }
    }
    state.numerics = std::move(values);
}

}  // namespace

FuzzyState apply_node(const FuzzyState& state, const PlanNode& node,
                      const PlanningProblem& problem, double start_time) {
    FuzzyState next = state;
    if (node.kind == NodeKind::PlanStart) return next;
    const CompiledAction& c = problem.compiled.at(static_cast<std::size_t>(node.action));
    switch (node.kind) {
    case NodeKind::Instantaneous:
        apply_effects(c.start_props, c.start_numeffs, next);
        break;
    case NodeKind::ActionStart:
        if (node.mate < 0)
            throw InconsistentApplicationError("start node '" + node.id +
                                               "' has no mated end");
        apply_effects(c.start_props, c.start_numeffs, next);
        next.executing.push_back(ExecutingAction{node.mate, node.action, start_time});
        break;
    case NodeKind::ActionEnd: {
        auto it = std::find_if(next.executing.begin(), next.executing.end(),
                               [&](const ExecutingAction& e) {
                                   return e.end_node == node.index;
                               });
        if (it == next.executing.end())
            throw InconsistentApplicationError("ending action '" +
                                               action_id(problem.actions[node.action]) +
                                               "' which is not executing");
        next.executing.erase(it);
        apply_effects(c.end_props, c.end_numeffs, next);
        break;
    }
    case NodeKind::PlanStart:
        break;
    }
    return next;
}

std::optional<double> node_applicable(const PlanNode& node, const FuzzyState& state,
                                      const PlanningProblem& problem, double threshold) {
    double q = 1.0;
    switch (node.kind) {
    case NodeKind::PlanStart:
        return std::nullopt;
    case NodeKind::Instantaneous:
    case NodeKind::ActionStart: {
        const CompiledAction& c = problem.compiled.at(static_cast<std::size_t>(node.action));
        q = joint_probability(c.start_literals, c.start_numerics, state);
        break;
    }
    case NodeKind::ActionEnd: {
        if (state.find_executing(node.index) == nullptr) return std::nullopt;
        const CompiledAction& c = problem.compiled.at(static_cast<std::size_t>(node.action));
        q = joint_probability(c.end_literals, c.end_numerics, state);
        break;
    }
    }
    if (q <= threshold) return std::nullopt;
    return q;
}

}  // namespace planex
