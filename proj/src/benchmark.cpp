#include <cmath>
#include <random>

#include "planex/errors.hpp"
#include "planex/harness.hpp"
#include "planex/pddl.hpp"

namespace planex {

const std::string& robot_delivery_domain() {
    static const std::string text = R"((define (domain robot-delivery)
  (:requirements :typing :durative-actions :fluents :duration-inequalities
                 :timed-initial-literals :negative-preconditions :equality)
  (:types robot waypoint - object
          machine - waypoint)
  (:predicates
    (robot_at ?r - robot ?w - waypoint)
    (machine_on ?m - machine)
    (loaded ?r - robot)
    (unload_requested ?r - robot ?w - waypoint)
    (delivered_at ?w - waypoint)
    (can_deliver ?w - waypoint))
  (:functions
    (travel_time ?a - waypoint ?b - waypoint))

  (:durative-action goto
    :parameters (?r - robot ?from - waypoint ?to - waypoint)
    :duration (and (>= ?duration (* 0.7 (travel_time ?from ?to)))
                   (<= ?duration (* 1.4 (travel_time ?from ?to))))
    :condition (and (at start (robot_at ?r ?from))
                    (at start (not (= ?from ?to))))
    :effect (and (at start (not (robot_at ?r ?from)))
                 (at end (robot_at ?r ?to))))

  (:durative-action switch_on
    :parameters (?r - robot ?m - machine)
    :duration (and (>= ?duration 3.5) (<= ?duration 7))
    :condition (and (at start (not (machine_on ?m)))
                    (over all (robot_at ?r ?m)))
    :effect (and (at end (machine_on ?m))))

  (:durative-action load_at_machine
    :parameters (?r - robot ?h - robot ?m - machine)
    :duration (and (>= ?duration 10.5) (<= ?duration 21))
    :condition (and (at start (not (= ?r ?h)))
                    (at start (machine_on ?m))
                    (at start (not (loaded ?r)))
                    (over all (machine_on ?m))
                    (over all (robot_at ?r ?m))
                    (over all (robot_at ?h ?m)))
    :effect (and (at end (loaded ?r))))

  (:durative-action ask_unload
    :parameters (?r - robot ?w - waypoint)
    :duration (and (>= ?duration 3.5) (<= ?duration 7))
    :condition (and (at start (loaded ?r))
                    (over all (robot_at ?r ?w)))
    :effect (and (at end (unload_requested ?r ?w))))

  (:durative-action wait_unload
    :parameters (?r - robot ?w - waypoint)
    :duration (and (>= ?duration 10.5) (<= ?duration 21))
    :condition (and (at start (unload_requested ?r ?w))
                    (at end (can_deliver ?w))
                    (over all (robot_at ?r ?w)))
    :effect (and (at end (delivered_at ?w))
                 (at end (not (loaded ?r)))
                 (at end (not (unload_requested ?r ?w)))))
)
)";
    return text;
}

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string fmt3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

struct Point {
    double x, y;
};

std::string problem_text(const BenchmarkSpec& spec, const std::vector<std::string>& wps,
                         const std::vector<std::vector<double>>& travel,
                         const std::vector<int>& robot_pos,
                         const std::vector<int>& order_dests, double deadline) {
    std::string out;
    out += "(define (problem rd-" + std::to_string(spec.robots) + "-" +
           std::to_string(spec.machines) + "-" + std::to_string(spec.delivery_locations) +
           "-" + std::to_string(spec.orders) + "-" + std::to_string(spec.seed) + ")\n";
    out += "  (:domain robot-delivery)\n";
    out += "  (:objects\n   ";
    for (int r = 0; r < spec.robots; ++r) out += " r" + std::to_string(r);
    out += " - robot\n   ";
    for (int m = 0; m < spec.machines; ++m) out += " m" + std::to_string(m);
    out += " - machine\n   ";
    for (int l = 0; l < spec.delivery_locations; ++l) out += " wp" + std::to_string(l);
    out += " - waypoint)\n";
    out += "  (:init\n";
    for (int r = 0; r < spec.robots; ++r)
        out += "    (robot_at r" + std::to_string(r) + " " +
               wps[static_cast<std::size_t>(robot_pos[static_cast<std::size_t>(r)])] +
               ")\n";
    for (const std::string& w : wps) out += "    (can_deliver " + w + ")\n";
    for (std::size_t a = 0; a < wps.size(); ++a)
        for (std::size_t b = 0; b < wps.size(); ++b)
            out += "    (= (travel_time " + wps[a] + " " + wps[b] + ") " +
                   fmt3(travel[a][b]) + ")\n";
    if (deadline > 0.0)
        for (int d : order_dests)
            out += "    (at " + fmt3(deadline) + " (not (can_deliver " +
                   wps[static_cast<std::size_t>(d)] + ")))\n";
    out += "  )\n";
    out += "  (:goal (and\n";
    for (int d : order_dests)
        out += "    (delivered_at " + wps[static_cast<std::size_t>(d)] + ")\n";
    out += "  ))\n";
    out += ")\n";
    return out;
}

}  // namespace

GeneratedInstance generate_benchmark(const BenchmarkSpec& spec) {
    if (spec.robots < 1 || spec.machines < 1 || spec.delivery_locations < 1 ||
        spec.orders < 1)
        throw Error("benchmark spec counts must be positive");
    if (spec.orders > spec.delivery_locations)
        throw Error("more orders than delivery locations");
    if (spec.deadline_factor && *spec.deadline_factor <= 1.0)
        throw Error("deadline factor must exceed 1");

    std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ull + 0xd1f3u);

    // Machines first, then delivery locations, on a 50x50 euclidean map.
    const int total = spec.machines + spec.delivery_locations;
    std::vector<Point> coords;
    coords.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i)
        coords.push_back(Point{round3(uniform01(rng) * 50.0),
                               round3(uniform01(rng) * 50.0)});

    std::vector<std::string> wps;
    for (int m = 0; m < spec.machines; ++m) wps.push_back("m" + std::to_string(m));
    for (int l = 0; l < spec.delivery_locations; ++l)
        wps.push_back("wp" + std::to_string(l));

    std::vector<std::vector<double>> travel(
        static_cast<std::size_t>(total), std::vector<double>(static_cast<std::size_t>(total), 0.0));
    for (int a = 0; a < total; ++a)
        for (int b = 0; b < total; ++b) {
            if (a == b) continue;
            const double dx = coords[static_cast<std::size_t>(a)].x -
                              coords[static_cast<std::size_t>(b)].x;
            const double dy = coords[static_cast<std::size_t>(a)].y -
                              coords[static_cast<std::size_t>(b)].y;
            travel[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                round3(std::max(1.0, std::hypot(dx, dy)));
        }

    // Robots start at delivery locations.
    std::vector<int> robot_pos;
    for (int r = 0; r < spec.robots; ++r)
        robot_pos.push_back(spec.machines +
                            static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                          spec.delivery_locations)));

    // Distinct order destinations.
    std::vector<int> locs;
    for (int l = 0; l < spec.delivery_locations; ++l) locs.push_back(spec.machines + l);
    for (std::size_t i = locs.size(); i > 1; --i)
        std::swap(locs[i - 1], locs[rng() % i]);
    std::vector<int> order_dests(locs.begin(), locs.begin() + spec.orders);
    std::sort(order_dests.begin(), order_dests.end());

    GeneratedInstance out;
    out.id = "rd-r" + std::to_string(spec.robots) + "-m" + std::to_string(spec.machines) +
             "-l" + std::to_string(spec.delivery_locations) + "-o" +
             std::to_string(spec.orders) + "-s" + std::to_string(spec.seed) +
             (spec.deadline_factor ? "-dl" : "");
    out.domain_text = robot_delivery_domain();
    out.problem_text = problem_text(spec, wps, travel, robot_pos, order_dests, 0.0);

    // Reference makespan from the builtin planner on the deadline-free text.
    PlanningProblem problem = parse_domain_problem(out.domain_text, out.problem_text);
    const TimeTriggeredPlan plan = greedy_plan(problem);
    double makespan = 0.0;
    for (const PlanStep& s : plan.steps) makespan = std::max(makespan, s.time + s.duration);
    out.reference_makespan = makespan;

    if (spec.deadline_factor) {
        const double deadline = round3(*spec.deadline_factor * makespan);
        out.problem_text =
            problem_text(spec, wps, travel, robot_pos, order_dests, deadline);
    }
    return out;
}

}  // namespace planex
