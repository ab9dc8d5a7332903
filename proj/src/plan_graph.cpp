#include "planex/plan_graph.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <unordered_set>

#include "planex/errors.hpp"

namespace planex {

const char* to_string(EdgeLabel label) {
    switch (label) {
    case EdgeLabel::Causal: return "causal";
    case EdgeLabel::Interference: return "interference";
    case EdgeLabel::Duration: return "duration";
    case EdgeLabel::Deadline: return "deadline";
    }
    return "?";
}

int PlanNetwork::find_node(const std::string& id) const {
    for (const PlanNode& n : nodes)
        if (n.id == id) return n.index;
    return -1;
}

namespace {

std::string sanitize(const std::string& action) {
    std::string out = action;
    for (char& c : out)
        if (c == ' ') c = '_';
    return out;
}

std::string step_prefix(int step) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d_", step);
    return buf;
}

// Nodes of the network in index order: PlanStart first, then per step.
std::vector<PlanNode> make_nodes(const TimeTriggeredPlan& plan,
                                 const PlanningProblem& problem) {
    std::vector<PlanNode> nodes;
    PlanNode start;
    start.id = "start";
    start.kind = NodeKind::PlanStart;
    start.index = 0;
    nodes.push_back(start);
    for (int s = 0; s < static_cast<int>(plan.steps.size()); ++s) {
        const PlanStep& step = plan.steps[static_cast<std::size_t>(s)];
        const GroundAction& action = problem.actions[static_cast<std::size_t>(step.action)];
        const std::string base = step_prefix(s) + sanitize(action_id(action));
        if (is_durative(action)) {
            PlanNode a;
            a.id = base + "_start";
            a.kind = NodeKind::ActionStart;
            a.index = static_cast<int>(nodes.size());
            a.action = step.action;
            a.step = s;
            a.dispatch_time = step.time;
            a.prescribed_duration = step.duration;
            PlanNode b;
            b.id = base + "_end";
            b.kind = NodeKind::ActionEnd;
            b.index = a.index + 1;
            b.action = step.action;
            b.step = s;
            b.dispatch_time = step.time + step.duration;
            a.mate = b.index;
            b.mate = a.index;
            nodes.push_back(a);
            nodes.push_back(b);
        } else {
            PlanNode a;
            a.id = base;
            a.kind = NodeKind::Instantaneous;
            a.index = static_cast<int>(nodes.size());
            a.action = step.action;
            a.step = s;
            a.dispatch_time = step.time;
            nodes.push_back(a);
        }
    }
    // Event rank of the original schedule: by time, then step, ends after
    // starts of the same step (relevant only for zero durations).
    std::vector<int> order(nodes.size() == 0 ? 0 : nodes.size() - 1);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i + 1);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const PlanNode& a = nodes[static_cast<std::size_t>(x)];
        const PlanNode& b = nodes[static_cast<std::size_t>(y)];
        if (a.dispatch_time != b.dispatch_time) return a.dispatch_time < b.dispatch_time;
        if (a.step != b.step) return a.step < b.step;
        return a.kind != NodeKind::ActionEnd && b.kind == NodeKind::ActionEnd;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        nodes[static_cast<std::size_t>(order[rank])].event_order = static_cast<int>(rank + 1);
    return nodes;
}

// A literal occurrence attached to a node, with the tag that scopes it.
struct TimedLiteralRef {
    Literal lit;
    bool overall;
};

// Timed view of the conditions and effects a single node carries.
struct NodeView {
    std::vector<TimedLiteralRef> literals;            // checked at this node
    std::vector<NumericComparison> numerics;          // point numerics
    std::vector<NumericComparison> overall_numerics;  // start nodes only
    std::vector<PropEffect> effects;
    std::vector<NumericEffect> numeric_effects;
};

NodeView node_view(const PlanNode& node, const PlanningProblem& problem) {
    NodeView v;
    if (node.action < 0) return v;
    const GroundAction& action = problem.actions[static_cast<std::size_t>(node.action)];
    if (const auto* d = std::get_if<DurativeAction>(&action)) {
        for (const Condition& cond : d->conditions) {
            const bool overall = cond.timing == TimeTag::OverAll;
            const bool at_this =
                (node.kind == NodeKind::ActionStart &&
                 (cond.timing == TimeTag::AtStart || overall)) ||
                (node.kind == NodeKind::ActionEnd &&
                 (cond.timing == TimeTag::AtEnd || cond.timing == TimeTag::Untimed));
            if (!at_this) continue;
            for (const Literal& lit : cond.literals)
                v.literals.push_back(TimedLiteralRef{lit, overall});
            if (overall)
                v.overall_numerics.insert(v.overall_numerics.end(), cond.numerics.begin(),
                                          cond.numerics.end());
            else
                v.numerics.insert(v.numerics.end(), cond.numerics.begin(),
                                  cond.numerics.end());
        }
        for (const Effect& eff : d->effects) {
            const bool at_this = (node.kind == NodeKind::ActionStart &&
                                  eff.timing != TimeTag::AtEnd) ||
                                 (node.kind == NodeKind::ActionEnd &&
                                  eff.timing == TimeTag::AtEnd);
            if (!at_this) continue;
            v.effects.insert(v.effects.end(), eff.props.begin(), eff.props.end());
            v.numeric_effects.insert(v.numeric_effects.end(), eff.numerics.begin(),
                                     eff.numerics.end());
        }
    } else {
        const auto& inst = std::get<InstantaneousAction>(action);
        for (const Literal& lit : inst.precondition.literals)
            v.literals.push_back(TimedLiteralRef{lit, false});
        v.numerics = inst.precondition.numerics;
        v.effects = inst.effect.props;
        v.numeric_effects = inst.effect.numerics;
    }
    return v;
}

void collect_fluents(const FluentExpr& e, std::vector<FluentId>& out) {
    switch (e.kind) {
    case FluentExpr::Kind::Constant: return;
    case FluentExpr::Kind::FluentRef: out.push_back(e.fluent); return;
    default:
        collect_fluents(*e.lhs, out);
        collect_fluents(*e.rhs, out);
    }
}

std::vector<FluentId> referenced_fluents(const std::vector<NumericComparison>& cmps) {
    std::vector<FluentId> out;
    for (const NumericComparison& c : cmps) {
        collect_fluents(c.lhs, out);
        collect_fluents(c.rhs, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool effect_breaks_literal(const PropEffect& eff, const Literal& lit) {
    if (eff.prop != lit.prop) return false;
    return lit.positive ? eff.psi < 1.0 : eff.psi > 0.0;
}

// Original-schedule order of two nodes.
bool before(const PlanNode& a, const PlanNode& b) {
    return a.event_order < b.event_order;
}

struct EdgeKey {
    int src, dst;
    EdgeLabel label;
    bool operator<(const EdgeKey& o) const {
        if (src != o.src) return src < o.src;
        if (dst != o.dst) return dst < o.dst;
        return static_cast<int>(label) < static_cast<int>(o.label);
    }
};

// Merges parallel edges keeping the tightest bounds.
class EdgeBag {
public:
    void add(int src, int dst, double lb, double ub, EdgeLabel label) {
        if (src == dst) return;
        auto [it, fresh] = merged_.try_emplace(EdgeKey{src, dst, label},
                                               TemporalEdge{src, dst, lb, ub, label});
        if (!fresh) {
            it->second.lb = std::max(it->second.lb, lb);
            it->second.ub = std::min(it->second.ub, ub);
        }
    }
    std::vector<TemporalEdge> take() const {
        std::vector<TemporalEdge> out;
        out.reserve(merged_.size());
        for (const auto& [key, edge] : merged_) out.push_back(edge);
        return out;
    }

private:
    std::map<EdgeKey, TemporalEdge> merged_;
};

// Sentinel achiever ids: plan start, or a timed initial literal.
constexpr int kNoAchiever = -1;

struct Achiever {
    int node = kNoAchiever;  // node index, 0 for PlanStart
    double til_time = -1.0;  // >= 0 when achieved by a timed literal
};

struct SimulationOutcome {
    // Causal support actually used by the schedule, one entry per literal
    // occurrence: (supporter, consumer, weak) where weak marks over-all
    // consumption (or PlanStart support).
    struct Support {
        Achiever achiever;
        int consumer;
        bool overall;
    };
    std::vector<Support> supports;
};

// Replays the plan at its timestamps, recording the achiever of every
// condition literal. Throws InvalidPlanError on the first failing node.
SimulationOutcome simulate_schedule(const std::vector<PlanNode>& nodes,
                                    const PlanningProblem& problem) {
    SimulationOutcome outcome;
    FuzzyState state = FuzzyState::from_crisp(problem.initial);

    std::vector<Achiever> pos(problem.propositions.size());
    std::vector<Achiever> neg(problem.propositions.size());
    for (PropId p = 0; p < problem.propositions.size(); ++p) {
        if (problem.initial.props[p])
            pos[p] = Achiever{0, -1.0};
        else
            neg[p] = Achiever{0, -1.0};
    }

    std::vector<int> order;
    for (const PlanNode& n : nodes)
        if (n.kind != NodeKind::PlanStart) order.push_back(n.index);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return nodes[static_cast<std::size_t>(a)].event_order <
               nodes[static_cast<std::size_t>(b)].event_order;
    });

    // Timed initial literals interleave with plan events; at equal times the
    // plan event goes first, so an effect exactly at a deadline still counts.
    std::vector<TimedLiteral> tils = problem.timed_literals;
    std::sort(tils.begin(), tils.end(),
              [](const TimedLiteral& a, const TimedLiteral& b) { return a.time < b.time; });
    std::size_t til_pos = 0;

    struct OpenInterval {
        int start_node;
        std::vector<Literal> lits;
        std::vector<NumericComparison> nums;
    };
    std::vector<OpenInterval> open;

    auto apply_til = [&](const TimedLiteral& til) {
        state.rho[til.prop] = til.value ? 1.0 : 0.0;
        if (til.value)
            pos[til.prop] = Achiever{kNoAchiever, til.time};
        else
            neg[til.prop] = Achiever{kNoAchiever, til.time};
    };

    auto check_open_intervals = [&](const PlanNode& at) {
        for (const OpenInterval& iv : open) {
            if (joint_probability(iv.lits, iv.nums, state) <= 0.0)
                throw InvalidPlanError(
                    "input plan violates an over-all condition of node '" +
                    nodes[static_cast<std::size_t>(iv.start_node)].id + "' at node '" +
                    at.id + "'");
        }
    };

    for (int idx : order) {
        const PlanNode& node = nodes[static_cast<std::size_t>(idx)];
        while (til_pos < tils.size() &&
               tils[til_pos].time < node.dispatch_time - kTimeTolerance)
            apply_til(tils[til_pos++]);

        if (!node_applicable(node, state, problem))
            throw InvalidPlanError("input plan is not executable: node '" + node.id +
                                   "' is not applicable at time " +
                                   format_double(node.dispatch_time));

        const NodeView view = node_view(node, problem);
        for (const TimedLiteralRef& ref : view.literals) {
            const Achiever& a = ref.lit.positive ? pos[ref.lit.prop] : neg[ref.lit.prop];
            assert(a.node != kNoAchiever || a.til_time >= 0.0);
            outcome.supports.push_back(
                SimulationOutcome::Support{a, node.index, ref.overall});
        }

        state = apply_node(state, node, problem, node.dispatch_time);
        for (const PropEffect& eff : view.effects) {
            if (eff.psi > 0.0) pos[eff.prop] = Achiever{node.index, -1.0};
            if (eff.psi < 1.0) neg[eff.prop] = Achiever{node.index, -1.0};
        }

        if (node.kind == NodeKind::ActionStart) {
            OpenInterval iv;
            iv.start_node = node.index;
            for (const TimedLiteralRef& ref : view.literals)
                if (ref.overall) iv.lits.push_back(ref.lit);
            iv.nums = view.overall_numerics;
            open.push_back(iv);
        } else if (node.kind == NodeKind::ActionEnd) {
            open.erase(std::remove_if(open.begin(), open.end(),
                                      [&](const OpenInterval& iv) {
                                          return iv.start_node == node.mate;
                                      }),
                       open.end());
        }
        check_open_intervals(node);
    }
    while (til_pos < tils.size()) apply_til(tils[til_pos++]);

    if (joint_probability(problem.goal, state) <= 0.0)
        throw InvalidPlanError("input plan does not achieve the goal");
    return outcome;
}

}  // namespace

void validate_time_triggered(const TimeTriggeredPlan& plan,
                             const PlanningProblem& problem) {
    simulate_schedule(make_nodes(plan, problem), problem);
}

std::vector<TemporalEdge> detect_interference(const PlanNode& a, const PlanNode& b,
                                              const PlanningProblem& problem) {
    EdgeBag bag;
    if (a.step == b.step && a.step >= 0) return {};

    const NodeView va = node_view(a, problem);
    const NodeView vb = node_view(b, problem);

    auto ordered = [&](const PlanNode& x, const PlanNode& y, double lb) {
        if (before(x, y))
            bag.add(x.index, y.index, lb, kInf, EdgeLabel::Interference);
        else
            bag.add(y.index, x.index, lb, kInf, EdgeLabel::Interference);
    };

    // Point-to-point conflicts (effect vs effect, effect vs point condition).
    auto point_conflicts = [&](const PlanNode& nx, const NodeView& vx,
                               const PlanNode& ny, const NodeView& vy) {
        const auto read = referenced_fluents(vy.numerics);
        for (const PropEffect& ex : vx.effects) {
            for (const PropEffect& ey : vy.effects)
                if (ex.prop == ey.prop && ex.psi != ey.psi) ordered(nx, ny, kEpsilon);
            for (const TimedLiteralRef& ly : vy.literals)
                if (!ly.overall && effect_breaks_literal(ex, ly.lit))
                    ordered(nx, ny, kEpsilon);
        }
        for (const NumericEffect& ex : vx.numeric_effects) {
            for (const NumericEffect& ey : vy.numeric_effects) {
                const bool commutative = ex.op != NumericOp::Assign &&
                                         ey.op != NumericOp::Assign;
                if (ex.fluent == ey.fluent && !commutative) ordered(nx, ny, kEpsilon);
            }
            if (std::binary_search(read.begin(), read.end(), ex.fluent))
                ordered(nx, ny, kEpsilon);
        }
    };
    point_conflicts(a, va, b, vb);
    point_conflicts(b, vb, a, va);

    // Over-all conditions: an edge is generated against both the start and
    // end node of the conditioned action. When the effect follows the
    // protected interval, the boundary at the interval's end is weak: the
    // schedule may place the effect exactly at the interval's close.
    auto overall_conflicts = [&](const PlanNode& holder, const NodeView& vh,
                                 const PlanNode& other, const NodeView& vo) {
        if (holder.kind != NodeKind::ActionStart || holder.mate < 0) return;
        bool conflict = false;
        for (const TimedLiteralRef& ref : vh.literals) {
            if (!ref.overall) continue;
            for (const PropEffect& eff : vo.effects)
                if (effect_breaks_literal(eff, ref.lit)) conflict = true;
        }
        const auto held = referenced_fluents(vh.overall_numerics);
        for (const NumericEffect& eff : vo.numeric_effects)
            if (std::binary_search(held.begin(), held.end(), eff.fluent)) conflict = true;
        if (!conflict) return;

        if (before(other, holder)) {
            bag.add(other.index, holder.index, kEpsilon, kInf, EdgeLabel::Interference);
            bag.add(other.index, holder.mate, kEpsilon, kInf, EdgeLabel::Interference);
        } else {
            bag.add(holder.index, other.index, kEpsilon, kInf, EdgeLabel::Interference);
            bag.add(holder.mate, other.index, 0.0, kInf, EdgeLabel::Interference);
        }
    };
    overall_conflicts(a, va, b, vb);
    overall_conflicts(b, vb, a, va);

    return bag.take();
}

PlanNetwork build_plan_network(const TimeTriggeredPlan& plan,
                               std::shared_ptr<const PlanningProblem> problem) {
    PlanNetwork net;
    net.problem = problem;
    net.nodes = make_nodes(plan, *problem);

    const SimulationOutcome sim = simulate_schedule(net.nodes, *problem);

    EdgeBag edges;
    EdgeBag deadline;

    // Causal support: supporter -> consumer. PlanStart support and over-all
    // consumption allow zero separation; point conditions achieved by an
    // action event need strictly positive separation.
    for (const auto& sup : sim.supports) {
        if (sup.achiever.node == kNoAchiever) {
            // Achieved by a timed initial literal: a window that opens at an
            // absolute time, anchored at PlanStart.
            edges.add(0, sup.consumer, sup.achiever.til_time + kEpsilon, kInf,
                      EdgeLabel::Causal);
            continue;
        }
        double lb = kEpsilon;
        if (sup.achiever.node == 0 || sup.overall) lb = 0.0;
        edges.add(sup.achiever.node, sup.consumer, lb, kInf, EdgeLabel::Causal);
    }

    // Duration edges between mated pairs.
    for (const PlanNode& n : net.nodes) {
        if (n.kind != NodeKind::ActionStart) continue;
        const auto& action =
            std::get<DurativeAction>(problem->actions[static_cast<std::size_t>(n.action)]);
        Interval bounds = action.duration;
        if (action.duration_is_dynamic)
            bounds = Interval{n.prescribed_duration, n.prescribed_duration};
        edges.add(n.index, n.mate, bounds.lb, bounds.ub, EdgeLabel::Duration);
    }

    // Interference edges over node pairs of distinct steps.
    for (std::size_t i = 1; i < net.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < net.nodes.size(); ++j) {
            if (net.nodes[i].step == net.nodes[j].step) continue;
            for (const TemporalEdge& e :
                 detect_interference(net.nodes[i], net.nodes[j], *problem))
                edges.add(e.src, e.dst, e.lb, e.ub, e.label);
        }
    }

    // Deadline edges: a timed literal that breaks a condition literal bounds
    // the consuming node from above. Over-all conditions bound both nodes.
    for (std::size_t i = 1; i < net.nodes.size(); ++i) {
        const PlanNode& node = net.nodes[i];
        const NodeView view = node_view(node, *problem);
        for (const TimedLiteralRef& ref : view.literals) {
            double cutoff = kInf;
            for (const TimedLiteral& til : problem->timed_literals) {
                if (til.prop != ref.lit.prop) continue;
                const bool breaks = ref.lit.positive ? !til.value : til.value;
                if (!breaks) continue;
                if (til.time >= node.dispatch_time - kTimeTolerance)
                    cutoff = std::min(cutoff, til.time);
            }
            if (cutoff == kInf) continue;
            deadline.add(0, node.index, 0.0, cutoff, EdgeLabel::Deadline);
            if (ref.overall && node.mate >= 0)
                deadline.add(0, node.mate, 0.0, cutoff, EdgeLabel::Deadline);
        }
    }

    net.edges = edges.take();
    net.deadline_edges = deadline.take();
    return net;
}

PlanNetwork relax(const PlanNetwork& net) {
    PlanNetwork out;
    out.problem = net.problem;
    out.nodes = net.nodes;
    out.deadline_edges = net.deadline_edges;
    out.edges.reserve(net.edges.size());
    for (const TemporalEdge& e : net.edges)
        if (e.label != EdgeLabel::Causal) out.edges.push_back(e);
    return out;
}

PlanNetwork prune_executed(const PlanNetwork& net, const std::vector<int>& done,
                           const std::vector<int>& skipped,
                           const std::vector<ExecutingAction>& executing) {
    std::vector<char> removed(net.nodes.size(), 0);
    auto mark = [&](int idx) {
        if (idx < 0 || idx >= static_cast<int>(net.nodes.size()))
            throw Error("prune_executed: node index out of range");
        if (idx == 0) return;  // the PlanStart anchor is never pruned
        removed[static_cast<std::size_t>(idx)] = 1;
    };
    for (int idx : done) mark(idx);
    for (int idx : skipped) mark(idx);

    // Starts removed while their end survives must have an execution record;
    // their duration window is re-anchored at the recorded start time.
    std::vector<TemporalEdge> anchors;
    for (std::size_t i = 1; i < net.nodes.size(); ++i) {
        const PlanNode& n = net.nodes[i];
        if (!removed[i]) {
            if (n.kind == NodeKind::ActionEnd && n.mate >= 0 &&
                removed[static_cast<std::size_t>(n.mate)]) {
                const ExecutingAction* rec = nullptr;
                for (const ExecutingAction& e : executing)
                    if (e.end_node == n.index) rec = &e;
                if (rec == nullptr)
                    throw InconsistentApplicationError(
                        "pruned start of '" + n.id +
                        "' without an execution record for its pending end");
                for (const TemporalEdge& e : net.edges) {
                    if (e.label == EdgeLabel::Duration && e.dst == n.index &&
                        e.src == n.mate)
                        anchors.push_back(TemporalEdge{0, n.index,
                                                       rec->start_time + e.lb,
                                                       rec->start_time + e.ub,
                                                       EdgeLabel::Deadline});
                }
            }
            continue;
        }
        if (n.kind == NodeKind::ActionEnd && n.mate >= 0 &&
            !removed[static_cast<std::size_t>(n.mate)])
            throw InconsistentApplicationError("pruning end '" + n.id +
                                               "' while its start is still pending");
    }

    PlanNetwork out;
    out.problem = net.problem;
    std::vector<int> remap(net.nodes.size(), -1);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        if (removed[i]) continue;
        PlanNode n = net.nodes[i];
        n.index = static_cast<int>(out.nodes.size());
        remap[i] = n.index;
        out.nodes.push_back(std::move(n));
    }
    for (PlanNode& n : out.nodes) {
        if (n.mate >= 0) n.mate = remap[static_cast<std::size_t>(n.mate)];
    }
    for (const TemporalEdge& e : net.edges) {
        const int s = remap[static_cast<std::size_t>(e.src)];
        const int d = remap[static_cast<std::size_t>(e.dst)];
        if (s >= 0 && d >= 0)
            out.edges.push_back(TemporalEdge{s, d, e.lb, e.ub, e.label});
    }
    for (const TemporalEdge& e : net.deadline_edges) {
        const int d = remap[static_cast<std::size_t>(e.dst)];
        if (d >= 0) out.deadline_edges.push_back(TemporalEdge{0, d, e.lb, e.ub, e.label});
    }
    for (const TemporalEdge& e : anchors) {
        const int d = remap[static_cast<std::size_t>(e.dst)];
        if (d >= 0) out.deadline_edges.push_back(TemporalEdge{0, d, e.lb, e.ub, e.label});
    }
    return out;
}

std::string dump_network(const PlanNetwork& net) {
    std::string out;
    for (const PlanNode& n : net.nodes) {
        out += "node ";
        out += n.id;
        out += ' ';
        out += to_string(n.kind);
        out += ' ';
        out += n.action >= 0
                   ? action_id(net.problem->actions[static_cast<std::size_t>(n.action)])
                   : std::string("-");
        out += '\n';
    }
    auto dump_edge = [&](const TemporalEdge& e) {
        out += "edge ";
        out += net.nodes[static_cast<std::size_t>(e.src)].id;
        out += ' ';
        out += net.nodes[static_cast<std::size_t>(e.dst)].id;
        out += ' ';
        out += format_double(e.lb);
        out += ' ';
        out += e.ub == kInf ? "inf" : format_double(e.ub);
        out += ' ';
        out += to_string(e.label);
        out += '\n';
    };
    for (const TemporalEdge& e : net.edges) dump_edge(e);
    for (const TemporalEdge& e : net.deadline_edges) dump_edge(e);
    return out;
}

}  // namespace planex
