#ifndef PLANEX_EXTRACTOR_HPP
#define PLANEX_EXTRACTOR_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "planex/model.hpp"
#include "planex/plan_graph.hpp"

namespace planex {

// One valid totally-ordered plan induced by an adaptable partially-ordered
// plan: the executed node sequence with its success probability.
struct OrderingResult {
    double q_total = 1.0;
    std::vector<int> sequence;          // node indices, in execution order
    std::vector<double> step_probs;     // applicability probability per step
    std::vector<int> skipped;           // nodes dropped as necessary predecessors
};

struct ExtractionOptions {
    double threshold = 0.0;        // q must exceed this to be offered
    std::size_t max_results = 100000;  // CapacityError beyond this
};

struct ExtractionStats {
    std::size_t prefixes_explored = 0;
    std::size_t results = 0;
};

// Enumerates every valid totally-ordered plan executable from s0 under the
// adaptable plan: each returned ordering is applicable step by step with
// q above the threshold, temporally consistent, and ends at the first
// goal-satisfying prefix. The result order is the deterministic search
// discovery order. Throws CapacityError past options.max_results and Error
// when the network still carries causal edges.
std::vector<OrderingResult> generate_plans(const FuzzyState& s0, const PlanNetwork& plan,
                                           const ExtractionOptions& options = {},
                                           ExtractionStats* stats = nullptr);

// Expansion step: every open node applicable in the state (q above the
// threshold, ends only for executing actions), paired with q, ordered by
// node index. `open` holds one flag per network node.
std::vector<std::pair<double, int>> valid_nodes(const FuzzyState& state,
                                                const std::vector<char>& open,
                                                const PlanNetwork& net,
                                                double threshold = 0.0);

struct SkipSet {
    std::vector<int> nodes;  // open nodes necessarily preceding the candidate
    bool conflict = false;   // a pending end of an executing action is inside
};

// Open nodes with a directed edge path to `candidate` of positive length
// (they can no longer be executed once the candidate runs), closed under
// the mate rule. `conflict` rejects the branch when such a node is the
// pending end of an executing action.
SkipSet predecessors_to_skip(int candidate, const std::vector<char>& open,
                             const FuzzyState& state, const PlanNetwork& net);

// True iff some time assignment places the prefix in order (PlanStart at 0,
// nondecreasing along the sequence) while satisfying every network edge
// between prefix nodes and every deadline bound into a prefix node. This is
// the full from-scratch check; the search uses an incremental variant.
bool check_temporal_consistency(const std::vector<int>& prefix, const PlanNetwork& net);

}  // namespace planex

#endif
