#ifndef PLANEX_PDDL_HPP
#define PLANEX_PDDL_HPP

#include <string>
#include <vector>

#include "planex/model.hpp"

namespace planex {

// Parses a PDDL2.1-subset domain and problem pair into a fully grounded
// PlanningProblem: typed objects, predicates, numeric fluents, durative
// actions with timed conditions/effects and fixed or interval durations,
// instantaneous actions, and timed initial literals.
//
// Symbols are lowercased. Unsupported constructs raise
// UnsupportedFeatureError naming the construct; type errors raise
// GroundingError. Grounding is eager and total; parameter (in)equality
// constraints are resolved statically. Duration expressions over fluents no
// action writes are evaluated against the initial state; durations over
// written fluents are marked dynamic and take the prescribed duration from
// the input plan.
PlanningProblem parse_domain_problem(const std::string& domain_text,
                                     const std::string& problem_text);

// Serializes a problem snapshot (current crisp state, remaining timed
// literals, original goal and objects) back to PDDL problem text. The
// output is canonical: byte-identical for identical inputs.
std::string write_problem_pddl(const PlanningProblem& problem, const CrispState& init,
                               const std::vector<TimedLiteral>& timed_literals,
                               const std::string& problem_name);

}  // namespace planex

#endif
