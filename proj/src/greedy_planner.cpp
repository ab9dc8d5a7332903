#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "planex/errors.hpp"
#include "planex/harness.hpp"

namespace planex {

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

struct DeliveryState {
    std::vector<std::string> robots;
    std::vector<std::string> machines;
    std::map<std::string, std::string> pos;   // robot -> waypoint
    std::map<std::string, double> avail;      // robot -> earliest free time
    std::set<std::string> on;                 // machines switched on
    std::set<std::string> loaded;             // robots carrying an item
    std::map<std::string, std::string> requested;  // robot -> waypoint asked at
    const PlanningProblem* problem = nullptr;

    double travel(const std::string& a, const std::string& b) const {
        auto id = problem->find_fluent("travel_time " + a + " " + b);
        if (!id) throw PlannerError("missing travel_time between " + a + " and " + b);
        return problem->initial.fluents[*id];
    }
};

struct Emitter {
    TimeTriggeredPlan plan;
    void add(double t, const std::string& id, double d) {
        (void)id;
        PlanStep step;
        step.time = round3(t);
        step.duration = d;
        step.action = -1;  // resolved later
        plan.steps.push_back(step);
        ids.push_back(id);
    }
    std::vector<std::string> ids;
};

// Walks a robot to `to` if needed; returns the arrival time.
double ensure_at(DeliveryState& st, Emitter& em, const std::string& robot,
                 const std::string& to) {
    if (st.pos[robot] == to) return st.avail[robot];
    const double start = round3(st.avail[robot] + kEpsilon);
    const double tt = st.travel(st.pos[robot], to);
    em.add(start, "goto " + robot + " " + st.pos[robot] + " " + to, tt);
    st.pos[robot] = to;
    st.avail[robot] = round3(start + tt);
    return st.avail[robot];
}

// Final ask/wait leg from the destination; the robot is already loaded.
double deliver_leg(DeliveryState& st, Emitter& em, const std::string& robot,
                   const std::string& dest, bool ask_needed) {
    const double arrival = ensure_at(st, em, robot, dest);
    double t = arrival;
    if (ask_needed) {
        const double ask_start = round3(t + kEpsilon);
        em.add(ask_start, "ask_unload " + robot + " " + dest, kAskDuration);
        t = round3(ask_start + kAskDuration);
    }
    const double wait_start = round3(t + kEpsilon);
    em.add(wait_start, "wait_unload " + robot + " " + dest, kWaitDuration);
    t = round3(wait_start + kWaitDuration);
    st.avail[robot] = t;
    st.loaded.erase(robot);
    st.requested.erase(robot);
    return t;
}

struct ChainPlanEstimate {
    double delivery = kInf;
    std::string helper, machine;
};

// Projected delivery time of a full collect-and-deliver chain without
// mutating the state.
ChainPlanEstimate estimate_chain(const DeliveryState& st, const std::string& carrier,
                                 const std::string& helper, const std::string& machine,
                                 const std::string& dest) {
    ChainPlanEstimate est;
    est.helper = helper;
    est.machine = machine;
    double c_arr = st.pos.at(carrier) == machine
                       ? st.avail.at(carrier)
                       : round3(round3(st.avail.at(carrier) + kEpsilon) +
                                st.travel(st.pos.at(carrier), machine));
    double h_arr = st.pos.at(helper) == machine
                       ? st.avail.at(helper)
                       : round3(round3(st.avail.at(helper) + kEpsilon) +
                                st.travel(st.pos.at(helper), machine));
    double ready = std::max(c_arr, h_arr);
    if (!st.on.count(machine)) {
        const double sw_start = round3(c_arr + kEpsilon);
        ready = std::max(ready, round3(sw_start + kSwitchDuration));
    }
    const double load_start = round3(ready + kEpsilon);
    const double load_end = round3(load_start + kLoadDuration);
    const double g_start = round3(load_end + kEpsilon);
    const double arr_w = round3(g_start + st.travel(machine, dest));
    const double ask_start = round3(arr_w + kEpsilon);
    const double wait_start = round3(ask_start + kAskDuration + kEpsilon);
    est.delivery = round3(wait_start + kWaitDuration);
    return est;
}

void emit_chain(DeliveryState& st, Emitter& em, const std::string& carrier,
                const std::string& helper, const std::string& machine,
                const std::string& dest) {
    const double c_arr = ensure_at(st, em, carrier, machine);
    const double h_arr = ensure_at(st, em, helper, machine);
    double ready = std::max(c_arr, h_arr);
    if (!st.on.count(machine)) {
        const double sw_start = round3(c_arr + kEpsilon);
        em.add(sw_start, "switch_on " + carrier + " " + machine, kSwitchDuration);
        ready = std::max(ready, round3(sw_start + kSwitchDuration));
        st.on.insert(machine);
    }
    const double load_start = round3(ready + kEpsilon);
    em.add(load_start,
           "load_at_machine " + carrier + " " + helper + " " + machine, kLoadDuration);
    const double load_end = round3(load_start + kLoadDuration);
    st.avail[helper] = load_end;
    st.avail[carrier] = load_end;
    st.loaded.insert(carrier);
    deliver_leg(st, em, carrier, dest, true);
}

}  // namespace

TimeTriggeredPlan greedy_plan(const PlanningProblem& problem) {
    DeliveryState st;
    st.problem = &problem;
    std::vector<std::string> waypoints;
    for (const ObjectDecl& o : problem.objects) {
        if (o.type == "robot") st.robots.push_back(o.name);
        if (o.type == "machine") st.machines.push_back(o.name);
        if (o.type == "machine" || o.type == "waypoint") waypoints.push_back(o.name);
    }
    if (st.robots.empty()) throw PlannerError("no robots in the instance");

    for (const std::string& r : st.robots) {
        st.avail[r] = 0.0;
        for (const std::string& w : waypoints) {
            auto id = problem.find_prop("robot_at " + r + " " + w);
            if (id && problem.initial.props[*id]) st.pos[r] = w;
        }
        if (!st.pos.count(r)) throw PlannerError("robot " + r + " has no position");
        auto lid = problem.find_prop("loaded " + r);
        if (lid && problem.initial.props[*lid]) st.loaded.insert(r);
        for (const std::string& w : waypoints) {
            auto uid = problem.find_prop("unload_requested " + r + " " + w);
            if (uid && problem.initial.props[*uid]) st.requested[r] = w;
        }
    }
    for (const std::string& m : st.machines) {
        auto id = problem.find_prop("machine_on " + m);
        if (id && problem.initial.props[*id]) st.on.insert(m);
    }

    // Order deadlines from can_deliver cutoffs.
    std::map<std::string, double> deadline;
    for (const TimedLiteral& til : problem.timed_literals) {
        const std::string& name = problem.propositions[til.prop];
        if (!til.value && name.rfind("can_deliver ", 0) == 0) {
            const std::string w = name.substr(12);
            auto it = deadline.find(w);
            if (it == deadline.end() || til.time < it->second) deadline[w] = til.time;
        }
    }

    // Undelivered order destinations, earliest deadline first.
    std::vector<std::string> orders;
    for (const Literal& lit : problem.goal.literals) {
        if (!lit.positive) throw PlannerError("unsupported goal literal");
        const std::string& name = problem.propositions[lit.prop];
        if (name.rfind("delivered_at ", 0) != 0)
            throw PlannerError("unsupported goal predicate in '" + name + "'");
        if (problem.initial.props[lit.prop]) continue;
        const std::string w = name.substr(13);
        auto cd = problem.find_prop("can_deliver " + w);
        if (!cd || !problem.initial.props[*cd])
            throw PlannerError("order at " + w + " can no longer be delivered");
        orders.push_back(w);
    }
    std::sort(orders.begin(), orders.end(), [&](const std::string& a, const std::string& b) {
        const double da = deadline.count(a) ? deadline[a] : kInf;
        const double db = deadline.count(b) ? deadline[b] : kInf;
        if (da != db) return da < db;
        return a < b;
    });

    Emitter em;
    std::string carrier;  // kept across orders once chosen
    for (const std::string& w : orders) {
        double delivery = kInf;

        // Resume a delivery that already asked for unloading at w.
        std::string resume_requested;
        for (const std::string& r : st.robots)
            if (st.requested.count(r) && st.requested[r] == w) {
                resume_requested = r;
                break;
            }
        if (!resume_requested.empty()) {
            delivery = deliver_leg(st, em, resume_requested, w, false);
        } else {
            // A robot already carrying an item delivers directly.
            std::string loaded_robot;
            for (const std::string& r : st.robots)
                if (st.loaded.count(r)) {
                    loaded_robot = r;
                    break;
                }
            if (!loaded_robot.empty()) {
                delivery = deliver_leg(st, em, loaded_robot, w, true);
            } else {
                if (st.robots.size() < 2)
                    throw PlannerError("collecting an order needs two robots");
                if (st.machines.empty()) throw PlannerError("no machines in the instance");

                ChainPlanEstimate best;
                std::string best_carrier;
                auto consider_carrier = [&](const std::string& c) {
                    if (st.loaded.count(c)) return;
                    for (const std::string& h : st.robots) {
                        if (h == c) continue;
                        for (const std::string& m : st.machines) {
                            const ChainPlanEstimate est = estimate_chain(st, c, h, m, w);
                            if (est.delivery < best.delivery) {
                                best = est;
                                best_carrier = c;
                            }
                        }
                    }
                };
                if (carrier.empty()) {
                    for (const std::string& c : st.robots) consider_carrier(c);
                } else {
                    consider_carrier(carrier);
                    if (best.delivery == kInf)
                        for (const std::string& c : st.robots) consider_carrier(c);
                }
                if (best.delivery == kInf)
                    throw PlannerError("no feasible collection for order at " + w);
                carrier = best_carrier;
                emit_chain(st, em, best_carrier, best.helper, best.machine, w);
                delivery = st.avail[best_carrier];
            }
        }
        auto dl = deadline.find(w);
        if (dl != deadline.end() && delivery > dl->second + kTimeTolerance)
            throw PlannerError("order at " + w + " misses its deadline (" +
                               format_double(delivery) + " > " +
                               format_double(dl->second) + ")");
    }

    // Resolve action ids and sort by dispatch time.
    for (std::size_t i = 0; i < em.plan.steps.size(); ++i) {
        auto idx = problem.find_action(em.ids[i]);
        if (!idx) throw PlannerError("planner produced unknown action '" + em.ids[i] + "'");
        em.plan.steps[i].action = *idx;
    }
    std::stable_sort(em.plan.steps.begin(), em.plan.steps.end(),
                     [](const PlanStep& a, const PlanStep& b) { return a.time < b.time; });
    return em.plan;
}

}  // namespace planex
