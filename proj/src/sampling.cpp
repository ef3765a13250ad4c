#include "problog/sampling.hpp"

#include <cmath>

#include "problog/errors.hpp"

namespace problog {

double confidence_width(double p, long n) {
    if (n < 1)
        throw ProblogError(ErrorCode::InvalidOptions, "confidence_width: n must be >= 1");
    if (p < 0.0 || p > 1.0)
        throw ProblogError(ErrorCode::InvalidOptions, "confidence_width: p must be in [0,1]");
    return 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

KindDefinition sampling_kind_definition() {
    KindDefinition def;
    def.name = "program_sampling";
    def.kind = InferenceKind::ProgramSampling;
    def.make_state = [](EngineSession&) { return std::make_unique<SamplingState>(); };
    def.hooks.on_annotated_fact = [](Engine& e, const GroundFactId& id, double p) {
        auto& st = static_cast<SamplingState&>(*e.state());
        auto it = st.world.assignments.find(id);
        bool value;
        if (it != st.world.assignments.end()) {
            value = it->second;   // memoized: one truth value per sample
        } else {
            value = e.session().rng_uniform01() < p;
            st.world.assignments.emplace(id, value);
        }
        return value ? HookOutcome::Succeed : HookOutcome::Fail;
    };
    def.hooks.on_derivation_success = [](Engine&) {};
    def.hooks.undo_annotated_fact = [](Engine&) {};
    def.drive = [](EngineSession& s, Engine&, const TermPtr& goal, ResultType rtype,
                   const InferenceOptions& opts) {
        StopRule rule;
        rule.fixed_n = opts.sample_count;
        rule.max_delta = opts.max_delta;
        rule.batch = opts.batch;
        rule.cap = opts.cap;
        SampleEstimate est = estimate_probability(s, goal, rule, opts.depth_limit);
        InferenceResult result;
        if (rtype == ResultType::Probability) {
            result.type = ResultType::Probability;
            result.probability = est.p;
        } else {
            result.type = ResultType::Info;
            result.estimate = est;
        }
        return result;
    };
    return def;
}

bool run_one_sample(EngineSession& session, const TermPtr& goal, long depth_limit) {
    SolveStream stream(goal, session.program(), session.host(), depth_limit);
    return stream.next().has_value();
}

SampleEstimate estimate_probability(EngineSession& session, const TermPtr& goal,
                                    const StopRule& stop, long depth_limit) {
    auto* st = dynamic_cast<SamplingState*>(session.active().state());
    if (!st)
        throw ProblogError(ErrorCode::InvalidOptions,
                           "estimate_probability requires an active program-sampling engine");
    long successes = 0;
    long n = 0;
    auto draw_one = [&] {
        st->world.assignments.clear();
        st->world.sample_index = n + 1;
        if (run_one_sample(session, goal, depth_limit)) ++successes;
        ++n;
    };
    if (!stop.max_delta) {
        if (stop.fixed_n < 1)
            throw ProblogError(ErrorCode::InvalidOptions, "sample count must be >= 1");
        for (long i = 0; i < stop.fixed_n; ++i) draw_one();
    } else {
        if (*stop.max_delta <= 0.0)
            throw ProblogError(ErrorCode::InvalidOptions, "max_delta must be positive");
        if (stop.batch < 1 || stop.cap < stop.batch)
            throw ProblogError(ErrorCode::InvalidOptions, "need batch >= 1 and cap >= batch");
        for (;;) {
            for (long i = 0; i < stop.batch && n < stop.cap; ++i) draw_one();
            double p = static_cast<double>(successes) / static_cast<double>(n);
            if (confidence_width(p, n) <= *stop.max_delta || n >= stop.cap) break;
        }
    }
    SampleEstimate est;
    est.successes = successes;
    est.n = n;
    est.p = static_cast<double>(successes) / static_cast<double>(n);
    est.delta = confidence_width(est.p, est.n);
    return est;
}

} // namespace problog
