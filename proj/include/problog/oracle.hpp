#ifndef PROBLOG_ORACLE_HPP
#define PROBLOG_ORACLE_HPP

#include <map>
#include <vector>

#include "problog/program.hpp"
#include "problog/resolution.hpp"
#include "problog/term.hpp"

namespace problog {

// The oracle enumerates every truth assignment of the relevant ground facts;
// it refuses universes beyond this bound.
inline constexpr int kMaxOracleUniverse = 24;

// A total truth assignment over a finite ground-fact universe, with the
// per-fact probabilities needed for its weight.
struct WorldAssignment {
    std::vector<GroundFactId> universe;     // sorted by (fact_index, args)
    std::vector<bool> truth;                // parallel to universe
    std::vector<double> probabilities;      // p_i of each universe fact
};

// Product of p_i over true facts and (1-p_i) over false ones.
double world_probability(const WorldAssignment& w);

// Ground annotated-fact instances appearing in any successful derivation of
// the goal (facts are taken as always succeeding during collection); negated
// subgoals contribute their own universes recursively, since their outcome
// depends on those facts. Nested inference subgoals are constants and
// contribute nothing. Deterministic (fact_index, args) order.
std::vector<GroundFactId> ground_fact_universe(const Program& program, const TermPtr& goal,
                                               long depth_limit = 100000);

// Success probability by definition: sum of world weights over all 2^k
// assignments in which the goal is provable, with annotated facts behaving as
// their world truth values and problog_not as the world-level complement.
double brute_force_success_probability(const Program& program, const TermPtr& goal,
                                       long depth_limit = 100000);

// Per-ground-answer success probabilities of a (possibly non-ground) goal,
// keyed by the canonical answer term.
std::map<TermPtr, double, TermPtrLess> brute_force_answer_probabilities(
    const Program& program, const TermPtr& goal, long depth_limit = 100000);

} // namespace problog

#endif
