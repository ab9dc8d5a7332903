#include "planex/dispatcher.hpp"

#include <algorithm>

#include "planex/errors.hpp"

namespace planex {

const char* to_string(ReplanReason reason) {
    switch (reason) {
    case ReplanReason::NoValidOrdering: return "no-valid-ordering";
    case ReplanReason::ActionFailure: return "action-failure";
    case ReplanReason::PreconditionFalse: return "precondition-false";
    case ReplanReason::TemporalViolation: return "temporal-violation";
    }
    return "?";
}

ExecutorState make_executor(PlanNetwork live, FuzzyState belief) {
    ExecutorState ex;
    ex.live = std::move(live);
    ex.belief = std::move(belief);
    return ex;
}

double earliest_feasible(const PlanNetwork& net, int node, double now) {
    double t = now;
    for (const TemporalEdge& e : net.deadline_edges)
        if (e.dst == node) t = std::max(t, e.lb);
    for (const TemporalEdge& e : net.edges)
        if (e.src == 0 && e.dst == node) t = std::max(t, e.lb);
    return t;
}

namespace {

bool id_sequence_less(const OrderingResult& a, const OrderingResult& b,
                      const PlanNetwork& net) {
    return std::lexicographical_compare(
        a.sequence.begin(), a.sequence.end(), b.sequence.begin(), b.sequence.end(),
        [&](int x, int y) {
            return net.nodes[static_cast<std::size_t>(x)].id <
                   net.nodes[static_cast<std::size_t>(y)].id;
        });
}

// Refreshes the belief's executing records after the live plan was pruned
// and re-indexed.
void sync_executing(ExecutorState& ex) {
    ex.belief.executing.clear();
    for (const ExecutorState::Running& run : ex.running) {
        const int end = ex.live.find_node(run.end_node_id);
        if (end < 0)
            throw InconsistentApplicationError("running action lost its end node '" +
                                               run.end_node_id + "'");
        ex.belief.executing.push_back(ExecutingAction{end, run.action, run.start_time});
    }
}

void prune_live(ExecutorState& ex, const std::vector<int>& done) {
    ex.live = prune_executed(ex.live, done, {}, ex.belief.executing);
    sync_executing(ex);
}

}  // namespace

Decision select_next(const std::vector<OrderingResult>& results, const PlanNetwork& net,
                     const FuzzyState& belief, double now) {
    Decision d;
    if (results.empty()) {
        d.kind = Decision::Kind::Replan;
        d.reason = ReplanReason::NoValidOrdering;
        return d;
    }
    const OrderingResult* best = &results.front();
    for (const OrderingResult& r : results) {
        if (r.q_total > best->q_total ||
            (r.q_total == best->q_total && id_sequence_less(r, *best, net)))
            best = &r;
    }
    d.chosen = *best;
    if (best->sequence.empty()) {
        // The belief already satisfies the goal; idle briefly and let new
        // observations (or the harness's goal check) settle it.
        d.kind = Decision::Kind::WaitUntil;
        d.wait_until = now + 1.0;
        return d;
    }
    const PlanNode& first = net.nodes[static_cast<std::size_t>(best->sequence.front())];
    if (first.kind == NodeKind::ActionEnd) {
        d.kind = belief.find_executing(first.index) != nullptr
                     ? Decision::Kind::AwaitEnd
                     : Decision::Kind::Replan;
        d.action = first.action;
        d.reason = ReplanReason::NoValidOrdering;
        return d;
    }
    const double feasible = earliest_feasible(net, first.index, now);
    if (feasible > now + kTimeTolerance) {
        d.kind = Decision::Kind::WaitUntil;
        d.wait_until = feasible;
        return d;
    }
    d.kind = Decision::Kind::Dispatch;
    d.node = first.index;
    d.action = first.action;
    return d;
}

void apply_dispatch(ExecutorState& ex, int node) {
    const PlanNode n = ex.live.nodes.at(static_cast<std::size_t>(node));
    if (n.kind != NodeKind::ActionStart && n.kind != NodeKind::Instantaneous)
        throw Error("apply_dispatch expects a start or instantaneous node");
    ex.belief = apply_node(ex.belief, n, *ex.live.problem, ex.wall_clock);
    ex.executed.push_back(n.id);
    if (n.kind == NodeKind::ActionStart) {
        ex.running.push_back(ExecutorState::Running{
            ex.live.nodes[static_cast<std::size_t>(n.mate)].id, n.action,
            ex.wall_clock});
    } else {
        ++ex.action_count;
    }
    prune_live(ex, {node});
}

std::optional<ReplanReason> handle_feedback(ExecutorState& ex, const FeedbackEvent& event,
                                            const ObservationConfig& estimator) {
    switch (event.kind) {
    case FeedbackEvent::Kind::Tick:
        ex.wall_clock = std::max(ex.wall_clock, event.time);
        apply_timed_literals(ex, ex.wall_clock);
        return std::nullopt;

    case FeedbackEvent::Kind::Observation: {
        ex.wall_clock = std::max(ex.wall_clock, event.time);
        apply_timed_literals(ex, ex.wall_clock);
        const double elapsed = event.time - ex.last_estimate_time;
        ex.belief = estimate(ex.belief, event.observation, estimator,
                             std::max(0.0, elapsed));
        ex.last_estimate_time = event.time;
        return std::nullopt;
    }

    case FeedbackEvent::Kind::ActionSucceeded:
    case FeedbackEvent::Kind::ActionFailed: {
        ex.wall_clock = std::max(ex.wall_clock, event.time);
        apply_timed_literals(ex, ex.wall_clock);
        if (!ex.live.problem->find_action(event.action))
            throw ProtocolError("feedback for unknown action '" + event.action + "'");
        // earliest-started running record of that action
        int best = -1;
        for (int i = 0; i < static_cast<int>(ex.running.size()); ++i) {
            const auto& run = ex.running[static_cast<std::size_t>(i)];
            if (action_id(ex.live.problem->actions[static_cast<std::size_t>(run.action)]) !=
                event.action)
                continue;
            if (best < 0 ||
                run.start_time < ex.running[static_cast<std::size_t>(best)].start_time)
                best = i;
        }
        if (event.kind == FeedbackEvent::Kind::ActionFailed) {
            if (best >= 0) {
                ex.running.erase(ex.running.begin() + best);
                sync_executing(ex);
            }
            return ReplanReason::ActionFailure;
        }
        if (best < 0)
            throw ProtocolError("completion for action '" + event.action +
                                "' which is not running");
        const ExecutorState::Running run = ex.running[static_cast<std::size_t>(best)];
        const int end = ex.live.find_node(run.end_node_id);
        if (end < 0)
            throw InconsistentApplicationError("end node '" + run.end_node_id +
                                               "' missing from the live plan");

        // Duration/deadline window of the pending end, before pruning.
        std::optional<ReplanReason> violation;
        for (const TemporalEdge& e : ex.live.deadline_edges) {
            if (e.dst != end) continue;
            if (event.time > e.ub + kTimeTolerance ||
                event.time < e.lb - kTimeTolerance)
                violation = ReplanReason::TemporalViolation;
        }

        ex.belief = apply_node(ex.belief,
                               ex.live.nodes[static_cast<std::size_t>(end)],
                               *ex.live.problem, event.time);
        ex.executed.push_back(run.end_node_id);
        ex.running.erase(ex.running.begin() + best);
        ++ex.action_count;
        prune_live(ex, {end});
        return violation;
    }
    }
    return std::nullopt;
}

void apply_timed_literals(ExecutorState& ex, double now) {
    const auto& tils = ex.live.problem->timed_literals;
    while (ex.next_timed_literal < tils.size() &&
           tils[ex.next_timed_literal].time <= now + kTimeTolerance) {
        const TimedLiteral& til = tils[ex.next_timed_literal++];
        ex.belief.rho[til.prop] = til.value ? 1.0 : 0.0;
    }
}

}  // namespace planex
