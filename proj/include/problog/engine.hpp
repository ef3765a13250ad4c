#ifndef PROBLOG_ENGINE_HPP
#define PROBLOG_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "problog/dnf.hpp"
#include "problog/program.hpp"
#include "problog/resolution.hpp"

namespace problog {

class Engine;
class EngineSession;

// Custom covers hook sets registered through register_inference_kind.
enum class InferenceKind { Pure, Exact, ProgramSampling, Current, Custom };
enum class ResultType { Probability, Info };

const char* inference_kind_name(InferenceKind kind);

// Monte Carlo estimate: p = successes/n, delta = 2*sqrt(p*(1-p)/n), the width
// of the 95% confidence interval.
struct SampleEstimate {
    long successes = 0;
    long n = 0;
    double p = 0.0;
    double delta = 0.0;
};

struct InferenceResult {
    ResultType type = ResultType::Probability;
    double probability = 0.0;                 // when type == Probability
    std::optional<ExactInfo> exact_info;      // Info from exact inference
    std::optional<SampleEstimate> estimate;   // Info from program sampling
};

struct InferenceOptions {
    long depth_limit = 100000;
    long sample_count = 10000;          // fixed-n sampling
    std::optional<double> max_delta;    // precision-driven sampling instead
    long batch = 1000;
    long cap = 10000000;
};

// Kind-specific register storage; engines own exactly one.
class EngineState {
public:
    virtual ~EngineState() = default;
};

enum class HookOutcome { Fail, Succeed, SucceedWithLiteral };

// The two continuation hooks parametrising an engine, fixed at push time.
// on_annotated_fact runs every time a goal is proved by an annotated fact;
// on_derivation_success runs at every successful derivation. A hook returning
// SucceedWithLiteral appended to the engine's explanation register and the
// kernel will call undo_annotated_fact when backtracking past the use.
struct HookSet {
    std::function<HookOutcome(Engine&, const GroundFactId&, double)> on_annotated_fact;
    std::function<void(Engine&)> on_derivation_success;
    std::function<void(Engine&)> undo_annotated_fact;
};

// A registrable inference method: state factory, hooks, and the driver that
// runs a pushed engine of this kind over a goal and extracts the result.
struct KindDefinition {
    std::string name;
    InferenceKind kind = InferenceKind::Custom;
    std::function<std::unique_ptr<EngineState>(EngineSession&)> make_state;
    HookSet hooks;
    std::function<InferenceResult(EngineSession&, Engine&, const TermPtr& goal, ResultType,
                                  const InferenceOptions&)>
        drive;
};

// One parametrised inference instance: unique id, hooks, and two registers
// (inside state()). Engines are created by their session and survive
// suspension on the engine stack with registers intact.
class Engine {
public:
    int id() const { return id_; }
    InferenceKind kind() const { return kind_; }
    const std::string& kind_name() const { return kind_name_; }
    const HookSet& hooks() const { return hooks_; }
    EngineState* state() { return state_.get(); }
    const EngineState* state() const { return state_.get(); }
    EngineSession& session() { return *session_; }

private:
    friend class EngineSession;
    Engine() = default;

    int id_ = 0;
    InferenceKind kind_ = InferenceKind::Pure;
    std::string kind_name_;
    HookSet hooks_;
    std::unique_ptr<EngineState> state_;
    EngineSession* session_ = nullptr;
};

// One inference session: a stack of suspended engines under one active
// engine, a program, and a deterministic random stream from which all
// sampling randomness derives. Sessions are single-threaded and fully
// independent of each other.
class EngineSession {
public:
    EngineSession(ProgramPtr program, std::uint64_t seed);
    ~EngineSession();
    EngineSession(const EngineSession&) = delete;
    EngineSession& operator=(const EngineSession&) = delete;

    const Program& program() const { return *program_; }
    ProgramPtr program_ptr() const { return program_; }

    Engine& active() { return *active_; }
    const Engine& active() const { return *active_; }
    std::size_t stack_depth() const { return stack_.size(); }

    // Suspends the current engine on the stack and activates a fresh one.
    Engine& push_engine(InferenceKind kind);
    Engine& push_engine(const std::string& kind_name);

    // Top of stack becomes active again; the finished engine is returned for
    // result extraction and then discarded by the caller.
    std::unique_ptr<Engine> pop_engine();

    // Active engine and top-of-stack engine exchange roles.
    void swap_top();

    // Generalized exchange by engine id; the answers stream uses this so its
    // suspended enumeration engine is found wherever it sits in the stack.
    void exchange_active_with(int engine_id);
    std::unique_ptr<Engine> remove_suspended(int engine_id);

    // "current" resolves to the kind of the innermost non-pure engine
    // (active first, then the stack top-down); error when there is none.
    std::string resolve_kind_name(const std::string& name) const;
    InferenceKind resolve_kind(InferenceKind kind) const;

    void register_inference_kind(KindDefinition def);
    const KindDefinition* find_kind(const std::string& name) const;

    std::uint64_t seed() const { return seed_; }
    double rng_uniform01();

    std::uint64_t fresh_var_serial() { return var_serial_++; }

    InferenceOptions& default_options() { return default_options_; }
    const InferenceOptions& default_options() const { return default_options_; }

    KernelHost& host() { return *host_; }

private:
    std::unique_ptr<Engine> make_engine(const KindDefinition& def);

    ProgramPtr program_;
    std::map<std::string, KindDefinition> kinds_;
    std::unique_ptr<Engine> active_;
    std::vector<std::unique_ptr<Engine>> stack_;
    int next_engine_id_ = 0;
    std::uint64_t seed_ = 0;
    std::mt19937_64 rng_;
    std::uint64_t var_serial_ = 0;
    InferenceOptions default_options_;
    std::unique_ptr<KernelHost> host_;
};

std::unique_ptr<EngineSession> session_new(ProgramPtr program, std::uint64_t seed);

// Runs the goal to the kind's stop criterion on a freshly pushed engine, pops
// it, and returns the requested result. Goal variables are not bound; nested
// calls from inside the goal's proof obey the same stack discipline, so the
// session is balanced afterwards even on error.
InferenceResult problog_inference(EngineSession& session, InferenceKind kind,
                                  const TermPtr& goal, ResultType result_type,
                                  const InferenceOptions& options = {});
InferenceResult problog_inference(EngineSession& session, const std::string& kind_name,
                                  const TermPtr& goal, ResultType result_type,
                                  const InferenceOptions& options = {});

double exact_probability(EngineSession& session, const TermPtr& goal,
                         long depth_limit = 100000);

// SLD stream under the session's active engine (pure Prolog behaviour on a
// fresh session).
std::unique_ptr<SolveStream> solve(const TermPtr& goal, const Program& program,
                                   EngineSession& session, long depth_limit);

// Built-in kind definitions (installed by every session constructor).
KindDefinition pure_kind_definition();
KindDefinition exact_kind_definition();
KindDefinition sampling_kind_definition();

} // namespace problog

#endif
