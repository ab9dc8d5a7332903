#include "planex/plan_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "planex/errors.hpp"
#include "planex/extractor.hpp"
#include "planex/plan_graph.hpp"

namespace planex {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

const char* skip_ws(const char* p, const char* end) {
    while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    return p;
}

bool parse_double(const char*& p, const char* end, double& out) {
    auto [ptr, ec] = std::from_chars(p, end, out);
    if (ec != std::errc()) return false;
    p = ptr;
    return true;
}

}  // namespace

TimeTriggeredPlan parse_time_triggered_plan(const std::string& text,
                                            const PlanningProblem& problem) {
    TimeTriggeredPlan plan;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        p = skip_ws(p, end);
        if (p == end || *p == ';') continue;

        double t = 0.0;
        if (!parse_double(p, end, t)) throw SyntaxError("expected dispatch time", lineno);
        p = skip_ws(p, end);
        if (p == end || *p != ':') throw SyntaxError("expected ':' after time", lineno);
        p = skip_ws(p + 1, end);
        if (p == end || *p != '(') throw SyntaxError("expected '(' before action", lineno);
        ++p;
        const char* name_begin = p;
        while (p != end && *p != ')') ++p;
        if (p == end) throw SyntaxError("unterminated action", lineno);
        std::string id(name_begin, p);
        // normalize interior whitespace to single spaces
        std::string norm;
        bool in_ws = true;
        for (char c : id) {
            if (c == ' ' || c == '\t') {
                if (!in_ws) norm.push_back(' ');
                in_ws = true;
            } else {
                norm.push_back(c);
                in_ws = false;
            }
        }
        while (!norm.empty() && norm.back() == ' ') norm.pop_back();
        if (norm.empty()) throw SyntaxError("empty action name", lineno);
        p = skip_ws(p + 1, end);

        bool has_duration = false;
        double d = 0.0;
        if (p != end && *p == '[') {
            p = skip_ws(p + 1, end);
            if (!parse_double(p, end, d)) throw SyntaxError("expected duration", lineno);
            p = skip_ws(p, end);
            if (p == end || *p != ']') throw SyntaxError("expected ']'", lineno);
            p = skip_ws(p + 1, end);
            has_duration = true;
        }
        if (p != end) throw SyntaxError("trailing characters", lineno);
        if (t < 0.0) throw SyntaxError("negative dispatch time", lineno);
        if (d < 0.0) throw SyntaxError("negative duration", lineno);

        auto idx = problem.find_action(norm);
        if (!idx)
            throw GroundingError("unknown action '" + norm + "'", lineno);
        if (is_durative(problem.actions[*idx]) && !has_duration)
            throw SyntaxError("durative action '" + norm + "' requires a [duration]",
                              lineno);
        if (!is_durative(problem.actions[*idx])) d = 0.0;
        plan.steps.push_back(PlanStep{t, *idx, d});
    }
    std::stable_sort(plan.steps.begin(), plan.steps.end(),
                     [](const PlanStep& a, const PlanStep& b) { return a.time < b.time; });
    return plan;
}

std::string serialize_time_triggered_plan(const TimeTriggeredPlan& plan,
                                          const PlanningProblem& problem) {
    std::string out;
    char buf[64];
    for (const PlanStep& s : plan.steps) {
        std::snprintf(buf, sizeof(buf), "%.3f: (", s.time);
        out += buf;
        out += action_id(problem.actions[static_cast<std::size_t>(s.action)]);
        out += ')';
        if (is_durative(problem.actions[static_cast<std::size_t>(s.action)])) {
            std::snprintf(buf, sizeof(buf), " [%.3f]", s.duration);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::string serialize_orderings(const std::vector<OrderingResult>& results,
                                const PlanNetwork& net) {
    std::vector<const OrderingResult*> sorted;
    sorted.reserve(results.size());
    for (const OrderingResult& r : results) sorted.push_back(&r);
    auto id_less = [&](const OrderingResult* a, const OrderingResult* b) {
        return std::lexicographical_compare(
            a->sequence.begin(), a->sequence.end(), b->sequence.begin(),
            b->sequence.end(), [&](int x, int y) {
                return net.nodes[static_cast<std::size_t>(x)].id <
                       net.nodes[static_cast<std::size_t>(y)].id;
            });
    };
    std::sort(sorted.begin(), sorted.end(),
              [&](const OrderingResult* a, const OrderingResult* b) {
                  if (a->q_total != b->q_total) return a->q_total > b->q_total;
                  return id_less(a, b);
              });
    std::string out;
    for (const OrderingResult* r : sorted) {
        out += "Q=";
        out += format_double(r->q_total);
        out += " :";
        for (int n : r->sequence) {
            out += ' ';
            out += net.nodes[static_cast<std::size_t>(n)].id;
        }
        out += '\n';
    }
    return out;
}

}  // namespace planex
