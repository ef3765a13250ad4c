#ifndef PROBLOG_SAMPLING_HPP
#define PROBLOG_SAMPLING_HPP

#include <unordered_map>

#include "problog/engine.hpp"
#include "problog/resolution.hpp"

namespace problog {

// Lazily sampled possible world: facts are assigned when first used and the
// assignment is immutable for the rest of the sample, across backtracking.
struct PossibleWorld {
    std::unordered_map<GroundFactId, bool, GroundFactIdHash> assignments;
    long sample_index = 0;
};

// Registers of a program-sampling engine: the partial world, plus the sample
// counter standing in for the identity second register.
class SamplingState final : public EngineState {
public:
    PossibleWorld world;   // register 1
};

// Width of the 95% confidence interval, 2*sqrt(p*(1-p)/n).
double confidence_width(double p, long n);

struct StopRule {
    long fixed_n = 10000;
    std::optional<double> max_delta;   // batched precision-driven stop instead
    long batch = 1000;
    long cap = 10000000;
};

// One sample under the active program-sampling engine's current world: true
// iff the goal has at least one proof. The caller provides a fresh world.
bool run_one_sample(EngineSession& session, const TermPtr& goal, long depth_limit);

// Repeats run_one_sample with fresh worlds until the stop rule is met.
// Reaching the cap is not an error; the estimate is returned with its delta.
// Deterministic given the session seed.
SampleEstimate estimate_probability(EngineSession& session, const TermPtr& goal,
                                    const StopRule& stop, long depth_limit);

} // namespace problog

#endif
