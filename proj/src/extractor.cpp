#include "planex/extractor.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_set>

#include "planex/errors.hpp"

namespace planex {

namespace {

// Distance-graph view of the network: an edge lb <= t(dst) - t(src) <= ub
// contributes t(dst) <= t(src) + ub and t(src) <= t(dst) - lb. Shortest
// paths from PlanStart are latest feasible times; a negative cycle means
// the constraints are unsatisfiable.
struct DistArc {
    int to;
    double weight;
};

struct DistanceGraph {
    int n = 0;
    std::vector<std::vector<DistArc>> out;  // per node, constraint arcs
    std::vector<std::vector<DistArc>> in;   // reverse view for fast appends
    std::vector<double> start_lb;           // absolute lower bound per node
    std::vector<double> start_ub;           // absolute upper bound per node

    explicit DistanceGraph(const PlanNetwork& net) {
        n = static_cast<int>(net.nodes.size());
        out.assign(static_cast<std::size_t>(n), {});
        in.assign(static_cast<std::size_t>(n), {});
        start_lb.assign(static_cast<std::size_t>(n), 0.0);
        start_ub.assign(static_cast<std::size_t>(n), kInf);
        auto arc = [&](int from, int to, double w) {
            out[static_cast<std::size_t>(from)].push_back(DistArc{to, w});
            in[static_cast<std::size_t>(to)].push_back(DistArc{from, w});
        };
        for (const TemporalEdge& e : net.edges) {
            if (e.src == 0) {
                start_lb[static_cast<std::size_t>(e.dst)] =
                    std::max(start_lb[static_cast<std::size_t>(e.dst)], e.lb);
                start_ub[static_cast<std::size_t>(e.dst)] =
                    std::min(start_ub[static_cast<std::size_t>(e.dst)], e.ub);
                continue;
            }
            if (e.ub != kInf) arc(e.src, e.dst, e.ub);
            arc(e.dst, e.src, -e.lb);
        }
        for (const TemporalEdge& e : net.deadline_edges) {
            start_lb[static_cast<std::size_t>(e.dst)] =
                std::max(start_lb[static_cast<std::size_t>(e.dst)], e.lb);
            start_ub[static_cast<std::size_t>(e.dst)] =
                std::min(start_ub[static_cast<std::size_t>(e.dst)], e.ub);
        }
    }
};

// Incremental latest-time labels over the prefix. Appending a node adds its
// arcs and relabels by queue-based relaxation; relabelling any node more
// than the prefix size times flags a negative cycle.
class IncrementalStn {
public:
    explicit IncrementalStn(const DistanceGraph& graph)
        : graph_(&graph),
          dist_(static_cast<std::size_t>(graph.n), kInf),
          in_prefix_(static_cast<std::size_t>(graph.n), 0),
          seq_prev_(static_cast<std::size_t>(graph.n), -1),
          last_(0) {
        dist_[0] = 0.0;
        in_prefix_[0] = 1;
        prefix_size_ = 1;
    }

    // Clones are cheap enough to own per search branch.
    IncrementalStn(const IncrementalStn&) = default;
    IncrementalStn& operator=(const IncrementalStn&) = default;

    bool append(int v) {
        const auto vi = static_cast<std::size_t>(v);
        in_prefix_[vi] = 1;
        seq_prev_[vi] = last_;
        last_ = v;
        ++prefix_size_;

        // in-arcs store the source node in `to`
        double dv = graph_->start_ub[vi];
        for (const DistArc& arc : graph_->in[vi]) {
            if (!in_prefix_[static_cast<std::size_t>(arc.to)]) continue;
            dv = std::min(dv, dist_[static_cast<std::size_t>(arc.to)] + arc.weight);
        }
        dist_[vi] = dv;

        std::vector<int> queue{v};
        std::vector<int> relax_count(static_cast<std::size_t>(graph_->n), 0);
        while (!queue.empty()) {
            const int x = queue.back();
            queue.pop_back();
            const auto xi = static_cast<std::size_t>(x);
            const double dx = dist_[xi];
            if (dx < graph_->start_lb[xi] - kTimeTolerance) return false;
            auto relax = [&](int y, double w) -> bool {
                if (y != 0 && !in_prefix_[static_cast<std::size_t>(y)]) return true;
                const double nd = dx + w;
                if (y == 0) return nd >= -kTimeTolerance;  // PlanStart pinned at 0
                auto yi = static_cast<std::size_t>(y);
                if (nd < dist_[yi] - kTimeTolerance) {
                    dist_[yi] = nd;
                    if (++relax_count[yi] > prefix_size_ + 1) return false;
                    queue.push_back(y);
                }
                return true;
            };
            for (const DistArc& arc : graph_->out[xi])
                if (!relax(arc.to, arc.weight)) return false;
            if (x != 0 && !relax(seq_prev_[xi], 0.0)) return false;
        }
        return true;
    }

private:
    const DistanceGraph* graph_;
    std::vector<double> dist_;
    std::vector<char> in_prefix_;
    std::vector<int> seq_prev_;
    int last_;
    int prefix_size_ = 0;
};

struct SequenceHash {
    std::size_t operator()(const std::vector<int>& seq) const {
        std::size_t h = 1469598103934665603ull;
        for (int v : seq) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

class Searcher {
public:
    Searcher(const PlanNetwork& net, const ExtractionOptions& options,
             ExtractionStats* stats)
        : net_(net), problem_(*net.problem), options_(options), stats_(stats),
          graph_(net) {
        goal_ = &problem_.goal;
        pred_.assign(net.nodes.size(), {});
        for (const TemporalEdge& e : net.edges) {
            if (e.src == 0) continue;
            pred_[static_cast<std::size_t>(e.dst)].emplace_back(e.src, e.lb > 0.0);
        }
        mark_.assign(net.nodes.size(), 0);
    }

    std::vector<OrderingResult> run(const FuzzyState& s0) {
        std::vector<char> open(net_.nodes.size(), 0);
        for (const PlanNode& n : net_.nodes)
            if (n.kind != NodeKind::PlanStart) open[static_cast<std::size_t>(n.index)] = 1;
        IncrementalStn stn(graph_);
        std::vector<int> prefix;
        std::vector<double> step_probs;
        std::vector<int> skipped;
        order_nodes(open, prefix, step_probs, skipped, s0, stn, 1.0, true);
        return std::move(results_);
    }

private:
    void record(const std::vector<int>& prefix, const std::vector<double>& step_probs,
                const std::vector<int>& skipped, double q) {
        if (!seen_.insert(prefix).second) return;  // identical sequence via other skips
        if (results_.size() >= options_.max_results)
            throw CapacityError("ordering extraction exceeded the cap of " +
                                std::to_string(options_.max_results) + " results");
        OrderingResult r;
        r.q_total = q;
        r.sequence = prefix;
        r.step_probs = step_probs;
        r.skipped = skipped;
        std::sort(r.skipped.begin(), r.skipped.end());
        results_.push_back(std::move(r));
    }

    // One search node: temporal check, goal check, then expansion.
    void order_nodes(std::vector<char>& open, std::vector<int>& prefix,
                     std::vector<double>& step_probs, std::vector<int>& skipped,
                     const FuzzyState& state, const IncrementalStn& stn, double q_acc,
                     bool consistent) {
        if (stats_) ++stats_->prefixes_explored;
        if (!consistent) return;  // the ordering is not executable

        const double goal_q = joint_probability(*goal_, state);
        if (goal_q > 0.0) {
            record(prefix, step_probs, skipped, q_acc * goal_q);
            if (stats_) stats_->results = results_.size();
            return;
        }

        const auto candidates = valid_nodes(state, open, net_, options_.threshold);
        if (candidates.empty()) return;  // the ordering is not valid

        for (const auto& [q, node] : candidates) {
            SkipSet skips = fast_skips(node, open, state);
            if (skips.conflict) continue;

            std::vector<char> child_open = open;
            child_open[static_cast<std::size_t>(node)] = 0;
            for (int b : skips.nodes) child_open[static_cast<std::size_t>(b)] = 0;
            std::vector<int> child_skipped = skipped;
            child_skipped.insert(child_skipped.end(), skips.nodes.begin(),
                                 skips.nodes.end());

            prefix.push_back(node);
            step_probs.push_back(q);
            IncrementalStn child_stn = stn;
            const bool ok = child_stn.append(node);
            FuzzyState child_state =
                apply_node(state, net_.nodes[static_cast<std::size_t>(node)], problem_);
            order_nodes(child_open, prefix, step_probs, child_skipped, child_state,
                        child_stn, q_acc * q, ok);
            prefix.pop_back();
            step_probs.pop_back();
        }
    }

    // Adjacency-backed variant of predecessors_to_skip.
    SkipSet fast_skips(int candidate, const std::vector<char>& open,
                       const FuzzyState& state) {
        SkipSet result;
        std::fill(mark_.begin(), mark_.end(), 0);
        stack_.clear();
        stack_.emplace_back(candidate, 1);
        mark_[static_cast<std::size_t>(candidate)] = 1;
        while (!stack_.empty()) {
            const auto [v, positive] = stack_.back();
            stack_.pop_back();
            for (const auto& [u, pos_lb] : pred_[static_cast<std::size_t>(v)]) {
                if (!open[static_cast<std::size_t>(u)]) continue;
                const char reach = (positive == 2 || pos_lb) ? 2 : 1;
                if (mark_[static_cast<std::size_t>(u)] >= reach) continue;
                mark_[static_cast<std::size_t>(u)] = reach;
                stack_.emplace_back(u, reach);
            }
        }
        for (std::size_t i = 0; i < mark_.size(); ++i) {
            if (mark_[i] != 2 || static_cast<int>(i) == candidate) continue;
            result.nodes.push_back(static_cast<int>(i));
            const PlanNode& node = net_.nodes[i];
            if (node.kind == NodeKind::ActionStart && node.mate >= 0 &&
                node.mate != candidate && open[static_cast<std::size_t>(node.mate)] &&
                mark_[static_cast<std::size_t>(node.mate)] != 2)
                result.nodes.push_back(node.mate);
        }
        for (int idx : result.nodes) {
            if (net_.nodes[static_cast<std::size_t>(idx)].kind == NodeKind::ActionEnd &&
                state.find_executing(idx) != nullptr) {
                result.conflict = true;
                break;
            }
        }
        std::sort(result.nodes.begin(), result.nodes.end());
        return result;
    }

    const PlanNetwork& net_;
    const PlanningProblem& problem_;
    ExtractionOptions options_;
    ExtractionStats* stats_;
    DistanceGraph graph_;
    const Condition* goal_;
    std::vector<std::vector<std::pair<int, bool>>> pred_;
    std::vector<char> mark_;
    std::vector<std::pair<int, char>> stack_;
    std::vector<OrderingResult> results_;
    std::unordered_set<std::vector<int>, SequenceHash> seen_;
};

}  // namespace

std::vector<std::pair<double, int>> valid_nodes(const FuzzyState& state,
                                                const std::vector<char>& open,
                                                const PlanNetwork& net,
                                                double threshold) {
    std::vector<std::pair<double, int>> out;
    for (std::size_t i = 1; i < net.nodes.size(); ++i) {
        if (!open[i]) continue;
        const auto q = node_applicable(net.nodes[i], state, *net.problem, threshold);
        if (q) out.emplace_back(*q, static_cast<int>(i));
    }
    return out;
}

SkipSet predecessors_to_skip(int candidate, const std::vector<char>& open,
                             const FuzzyState& state, const PlanNetwork& net) {
    SkipSet result;
    const std::size_t n = net.nodes.size();
    // 0 unvisited, 1 reached via zero-length path, 2 reached via positive path
    std::vector<char> mark(n, 0);
    std::vector<std::pair<int, char>> stack{{candidate, 1}};
    mark[static_cast<std::size_t>(candidate)] = 1;
    while (!stack.empty()) {
        auto [v, positive] = stack.back();
        stack.pop_back();
        for (const TemporalEdge& e : net.edges) {
            if (e.dst != v) continue;
            const int u = e.src;
            if (u == 0 || !open[static_cast<std::size_t>(u)]) continue;
            const char reach = (positive == 2 || e.lb > 0.0) ? 2 : 1;
            if (mark[static_cast<std::size_t>(u)] >= reach) continue;
            mark[static_cast<std::size_t>(u)] = reach;
            stack.push_back({u, reach});
        }
    }
    std::vector<char> in_skip(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (mark[i] == 2 && static_cast<int>(i) != candidate) in_skip[i] = 1;
    // Mate rule: a skipped start drags its end along.
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_skip[i]) continue;
        const PlanNode& node = net.nodes[i];
        if (node.kind == NodeKind::ActionStart && node.mate >= 0 &&
            node.mate != candidate && open[static_cast<std::size_t>(node.mate)])
            in_skip[static_cast<std::size_t>(node.mate)] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_skip[i]) continue;
        if (net.nodes[i].kind == NodeKind::ActionEnd &&
            state.find_executing(static_cast<int>(i)) != nullptr)
            result.conflict = true;
        result.nodes.push_back(static_cast<int>(i));
    }
    return result;
}

bool check_temporal_consistency(const std::vector<int>& prefix, const PlanNetwork& net) {
    // Bellman-Ford over the distance graph restricted to prefix + PlanStart.
    const std::size_t n = net.nodes.size();
    std::vector<char> in_prefix(n, 0);
    in_prefix[0] = 1;
    for (int v : prefix) in_prefix[static_cast<std::size_t>(v)] = 1;

    struct Arc {
        int from, to;
        double w;
    };
    std::vector<Arc> arcs;
    for (const TemporalEdge& e : net.edges) {
        if (!in_prefix[static_cast<std::size_t>(e.src)] ||
            !in_prefix[static_cast<std::size_t>(e.dst)])
            continue;
        if (e.ub != kInf) arcs.push_back(Arc{e.src, e.dst, e.ub});
        arcs.push_back(Arc{e.dst, e.src, -e.lb});
    }
    for (const TemporalEdge& e : net.deadline_edges) {
        if (!in_prefix[static_cast<std::size_t>(e.dst)]) continue;
        if (e.ub != kInf) arcs.push_back(Arc{0, e.dst, e.ub});
        if (e.lb > 0.0) arcs.push_back(Arc{e.dst, 0, -e.lb});
    }
    int prev = 0;
    for (int v : prefix) {
        arcs.push_back(Arc{v, prev, 0.0});  // nondecreasing along the order
        prev = v;
    }

    std::vector<double> dist(n, kInf);
    dist[0] = 0.0;
    const std::size_t rounds = prefix.size() + 2;
    for (std::size_t round = 0; round < rounds; ++round) {
        bool changed = false;
        for (const Arc& a : arcs) {
            if (dist[static_cast<std::size_t>(a.from)] == kInf) continue;
            const double nd = dist[static_cast<std::size_t>(a.from)] + a.w;
            if (nd < dist[static_cast<std::size_t>(a.to)] - kTimeTolerance) {
                dist[static_cast<std::size_t>(a.to)] = nd;
                changed = true;
            }
        }
        if (!changed) return dist[0] >= -kTimeTolerance;
    }
    return false;  // still relaxing: negative cycle
}

std::vector<OrderingResult> generate_plans(const FuzzyState& s0, const PlanNetwork& plan,
                                           const ExtractionOptions& options,
                                           ExtractionStats* stats) {
    for (const TemporalEdge& e : plan.edges)
        if (e.label == EdgeLabel::Causal)
            throw Error("generate_plans requires an adaptable plan without causal edges");
    if (s0.rho.size() != plan.problem->propositions.size())
        throw MalformedConditionError("state does not cover the problem's propositions");
    Searcher searcher(plan, options, stats);
    auto results = searcher.run(s0);
    if (stats) stats->results = results.size();
    return results;
}

}  // namespace planex
