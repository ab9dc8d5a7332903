#ifndef PLANEX_HARNESS_HPP
#define PLANEX_HARNESS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "planex/dispatcher.hpp"
#include "planex/model.hpp"
#include "planex/plan_io.hpp"
#include "planex/simulator.hpp"

namespace planex {

// ---------------------------------------------------------------------------
// Robot Delivery benchmark

struct BenchmarkSpec {
    int robots = 3;
    int machines = 3;
    int delivery_locations = 4;
    int orders = 2;
    std::optional<double> deadline_factor;  // e.g. 1.5
    std::uint64_t seed = 0;
};

struct GeneratedInstance {
    std::string id;
    std::string domain_text;
    std::string problem_text;
    double reference_makespan = 0.0;  // builtin planner's makespan, no deadlines
};

// The static Robot Delivery domain.
const std::string& robot_delivery_domain();

// Nominal durations the domain's envelopes are built around.
constexpr double kSwitchDuration = 5.0;
constexpr double kLoadDuration = 15.0;
constexpr double kAskDuration = 5.0;
constexpr double kWaitDuration = 15.0;
constexpr double kEnvelopeLo = 0.7;
constexpr double kEnvelopeHi = 1.4;

// Seeded euclidean-map instance generator; bit-identical for equal specs.
// With a deadline factor, per-order deadlines are emitted as timed initial
// literals at factor times the builtin planner's reference makespan.
GeneratedInstance generate_benchmark(const BenchmarkSpec& spec);

// Domain-specific sequential planner for Robot Delivery. Handles arbitrary
// reachable snapshots (loaded robots, pending unload requests, machines
// already on). Throws PlannerError when some order cannot meet its deadline.
TimeTriggeredPlan greedy_plan(const PlanningProblem& problem);

// ---------------------------------------------------------------------------
// Planner adapters

class PlanProvider {
public:
    virtual ~PlanProvider() = default;
    // Returns a plan for the problem; `problem_text` is the canonical PDDL
    // snapshot (used for hashing / external planners).
    virtual TimeTriggeredPlan plan(const PlanningProblem& problem,
                                   const std::string& problem_text) = 0;
};

class BuiltinPlanner : public PlanProvider {
public:
    TimeTriggeredPlan plan(const PlanningProblem& problem,
                           const std::string& problem_text) override;
};

// Serves stored plan texts keyed by the fnv1a hash of the problem text.
class FixturePlanner : public PlanProvider {
public:
    void add(const std::string& problem_text, const std::string& plan_text);
    TimeTriggeredPlan plan(const PlanningProblem& problem,
                           const std::string& problem_text) override;

private:
    std::vector<std::pair<std::uint64_t, std::string>> fixtures_;
};

// Spawns `command <domain-file> <problem-file>` and parses the plan from its
// stdout (lines matching the time-triggered format; other lines ignored).
class ExternalPlanner : public PlanProvider {
public:
    ExternalPlanner(std::string command, std::string domain_text,
                    double timeout_seconds = 60.0);
    TimeTriggeredPlan plan(const PlanningProblem& problem,
                           const std::string& problem_text) override;

private:
    std::string command_;
    std::string domain_text_;
    double timeout_;
};

std::uint64_t fnv1a(const std::string& text);

// Plans and validates against the problem; planner output that fails the
// simulate-check is a PlannerError.
TimeTriggeredPlan provide_validated_plan(PlanProvider& provider,
                                         const PlanningProblem& problem,
                                         const std::string& problem_text);

// ---------------------------------------------------------------------------
// Episodes

enum class ExecMode { RO, RP };

const char* to_string(ExecMode mode);

struct EpisodeConfig {
    WorldConfig world;
    ExtractionOptions extraction;
    // Belief tweaks applied at episode start (proposition name -> rho).
    std::vector<std::pair<std::string, double>> belief_overrides;
    int max_replans = 20;
    double max_wall_time = 3000.0;
    double idle_step = 1.0;  // wait granularity when nothing is pending
};

struct EpisodeMetrics {
    bool success = false;
    int replans = 0;
    int actions_executed = 0;
    int extraction_calls = 0;
    double extract_ms_total = 0.0;
    double extract_ms_max = 0.0;
    std::size_t orderings_max = 0;
    std::size_t orderings_total = 0;
    std::string failure;  // empty on success
};

struct Instance {
    std::string id;
    std::string domain_text;
    std::string problem_text;
    std::shared_ptr<const PlanningProblem> problem;  // parsed lazily if null
};

Instance make_instance(const GeneratedInstance& generated);
Instance make_instance(std::string id, std::string domain_text,
                       std::string problem_text);

// Runs one episode: RO executes the adaptable plan through extraction and
// the selection policy; RP walks the unrelaxed plan in its fixed order.
// Both replan through the provider on failure triggers and share world
// seeding, so paired runs face identical stochastic worlds.
EpisodeMetrics run_episode(ExecMode mode, const Instance& instance,
                           PlanProvider& provider, const EpisodeConfig& config,
                           std::uint64_t seed, std::string* trace = nullptr);

// ---------------------------------------------------------------------------
// Suite

struct SuiteConfig {
    int instances = 30;
    int robots = 3;
    int machines_min = 3, machines_max = 5;
    int locations_min = 4, locations_max = 8;
    int orders_min = 2, orders_max = 3;
    int deadline_instances = 0;      // extra instances with deadlines
    double deadline_factor = 1.5;
    int repetitions = 10;
    std::vector<ExecMode> modes = {ExecMode::RO, ExecMode::RP};
    std::uint64_t seed = 1;
    EpisodeConfig episode;
    int workers = 0;  // 0: hardware concurrency
};

struct EpisodeRow {
    std::string instance_id;
    ExecMode mode;
    std::uint64_t seed;
    int orders = 0;
    bool deadline = false;
    EpisodeMetrics metrics;
};

struct SuiteResult {
    std::vector<EpisodeRow> rows;
    std::string episodes_csv;      // full schema, includes wall-time columns
    std::string episodes_det_csv;  // deterministic columns only
    std::string summary;
};

SuiteConfig load_suite_config(const std::string& json_text);
WorldConfig load_world_config(const std::string& json_text);
EpisodeConfig load_episode_config(const std::string& json_text);

SuiteResult run_suite(const SuiteConfig& config);
void write_suite_outputs(const SuiteResult& result, const std::string& out_dir);

// ---------------------------------------------------------------------------
// Extraction-time scaling study

struct ScalingRow {
    std::string instance_id;
    int nodes = 0;
    double build_ms = 0.0;
    double extract_ms = 0.0;
    std::size_t orderings = 0;
};

// Sweeps harness-generated plans of growing node count (up to ~128 nodes)
// plus paper-range instances, timing one full extraction per plan.
std::vector<ScalingRow> run_scaling(std::uint64_t seed, int max_orders = 12,
                                    std::size_t ordering_cap = 1000000);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace planex

#endif
