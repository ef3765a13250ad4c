#include "problog/engine.hpp"

#include <cassert>

#include "problog/errors.hpp"
#include "problog/metacalls.hpp"

namespace problog {

const char* inference_kind_name(InferenceKind kind) {
    switch (kind) {
        case InferenceKind::Pure: return "pure";
        case InferenceKind::Exact: return "exact";
        case InferenceKind::ProgramSampling: return "program_sampling";
        case InferenceKind::Current: return "current";
        case InferenceKind::Custom: return "custom";
    }
    return "?";
}

namespace {

InferenceKind builtin_kind_for(const std::string& name) {
    if (name == "pure") return InferenceKind::Pure;
    if (name == "exact") return InferenceKind::Exact;
    if (name == "program_sampling") return InferenceKind::ProgramSampling;
    return InferenceKind::Custom;
}

// Routes kernel callbacks to the session's active engine and dispatches the
// meta-call predicates.
class SessionHost final : public KernelHost {
public:
    explicit SessionHost(EngineSession& session) : session_(session) {}

    FactOutcome on_annotated_fact(const GroundFactId& id, double probability,
                                  Machine& m) override {
        Engine& e = session_.active();
        switch (e.hooks().on_annotated_fact(e, id, probability)) {
            case HookOutcome::Fail: return FactOutcome::Fail;
            case HookOutcome::Succeed: return FactOutcome::Succeed;
            case HookOutcome::SucceedWithLiteral: {
                Engine* recording = &e;
                m.push_undo([recording] {
                    recording->hooks().undo_annotated_fact(*recording);
                });
                return FactOutcome::Succeed;
            }
        }
        return FactOutcome::Fail;
    }

    void on_derivation_success() override {
        Engine& e = session_.active();
        e.hooks().on_derivation_success(e);
    }

    std::uint64_t fresh_var_serial() override { return session_.fresh_var_serial(); }

    bool is_meta_functor(const std::string& functor, int arity) const override {
        return is_meta_goal(functor, arity);
    }

    std::unique_ptr<MetaChoice> make_meta_choice(const TermPtr& goal) override {
        return make_meta_choice_for(session_, goal);
    }

private:
    EngineSession& session_;
};

} // namespace

EngineSession::EngineSession(ProgramPtr program, std::uint64_t seed)
    : program_(std::move(program)), seed_(seed), rng_(seed) {
    if (!program_)
        throw ProblogError(ErrorCode::InvalidOptions, "session requires a program");
    host_ = std::make_unique<SessionHost>(*this);
    register_inference_kind(pure_kind_definition());
    register_inference_kind(exact_kind_definition());
    register_inference_kind(sampling_kind_definition());
    active_ = make_engine(kinds_.at("pure"));   // root engine, id 0
}

EngineSession::~EngineSession() = default;

std::unique_ptr<Engine> EngineSession::make_engine(const KindDefinition& def) {
    auto e = std::unique_ptr<Engine>(new Engine());
    e->id_ = next_engine_id_++;
    e->kind_ = def.kind;
    e->kind_name_ = def.name;
    e->hooks_ = def.hooks;
    e->session_ = this;
    e->state_ = def.make_state ? def.make_state(*this) : std::make_unique<EngineState>();
    return e;
}

Engine& EngineSession::push_engine(InferenceKind kind) {
    if (kind == InferenceKind::Custom)
        throw ProblogError(ErrorCode::InvalidOptions,
                           "custom engines are pushed by kind name");
    return push_engine(std::string(inference_kind_name(kind)));
}

Engine& EngineSession::push_engine(const std::string& kind_name) {
    std::string resolved = resolve_kind_name(kind_name);
    auto it = kinds_.find(resolved);
    if (it == kinds_.end())
        throw ProblogError(ErrorCode::TypeError, "unknown inference kind: " + resolved);
    std::unique_ptr<Engine> fresh = make_engine(it->second);
    stack_.push_back(std::move(active_));
    active_ = std::move(fresh);
    return *active_;
}

std::unique_ptr<Engine> EngineSession::pop_engine() {
    if (stack_.empty())
        throw ProblogError(ErrorCode::EmptyEngineStack, "engine stack is empty");
    std::unique_ptr<Engine> finished = std::move(active_);
    active_ = std::move(stack_.back());
    stack_.pop_back();
    return finished;
}

void EngineSession::swap_top() {
    if (stack_.empty())
        throw ProblogError(ErrorCode::EmptyEngineStack,
                           "engine stack is empty; nothing to swap with");
    std::swap(active_, stack_.back());
}

void EngineSession::exchange_active_with(int engine_id) {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
        if ((*it)->id() == engine_id) {
            std::swap(active_, *it);
            return;
        }
    }
    throw ProblogError(ErrorCode::EmptyEngineStack,
                       "no suspended engine with id " + std::to_string(engine_id));
}

std::unique_ptr<Engine> EngineSession::remove_suspended(int engine_id) {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
        if ((*it)->id() == engine_id) {
            std::unique_ptr<Engine> out = std::move(*it);
            stack_.erase(std::next(it).base());
            return out;
        }
    }
    throw ProblogError(ErrorCode::EmptyEngineStack,
                       "no suspended engine with id " + std::to_string(engine_id));
}

std::string EngineSession::resolve_kind_name(const std::string& name) const {
    if (name != "current") return name;
    if (active_->kind() != InferenceKind::Pure) return active_->kind_name();
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
        if ((*it)->kind() != InferenceKind::Pure) return (*it)->kind_name();
    throw ProblogError(ErrorCode::CurrentWithoutContext,
                       "inference kind 'current' used with no enclosing probabilistic engine");
}

InferenceKind EngineSession::resolve_kind(InferenceKind kind) const {
    if (kind != InferenceKind::Current) return kind;
    return builtin_kind_for(resolve_kind_name("current"));
}

void EngineSession::register_inference_kind(KindDefinition def) {
    if (def.name.empty() || def.name == "current")
        throw ProblogError(ErrorCode::InvalidOptions, "invalid inference kind name");
    kinds_[def.name] = std::move(def);
}

const KindDefinition* EngineSession::find_kind(const std::string& name) const {
    auto it = kinds_.find(name);
    return it == kinds_.end() ? nullptr : &it->second;
}

double EngineSession::rng_uniform01() {
    // 53-bit mantissa draw; bit-stable across platforms, unlike
    // std::uniform_real_distribution.
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::unique_ptr<EngineSession> session_new(ProgramPtr program, std::uint64_t seed) {
    return std::make_unique<EngineSession>(std::move(program), seed);
}

namespace {

void validate_options(const InferenceOptions& o) {
    if (o.depth_limit < 1)
        throw ProblogError(ErrorCode::InvalidOptions, "depth_limit must be at least 1");
    if (o.sample_count < 1)
        throw ProblogError(ErrorCode::InvalidOptions, "sample_count must be at least 1");
    if (o.max_delta && *o.max_delta <= 0.0)
        throw ProblogError(ErrorCode::InvalidOptions, "max_delta must be positive");
    if (o.batch < 1)
        throw ProblogError(ErrorCode::InvalidOptions, "batch must be at least 1");
    if (o.cap < o.batch)
        throw ProblogError(ErrorCode::InvalidOptions, "cap must be at least one batch");
}

} // namespace

InferenceResult problog_inference(EngineSession& session, const std::string& kind_name,
                                  const TermPtr& goal, ResultType result_type,
                                  const InferenceOptions& options) {
    validate_options(options);
    if (!goal || !goal->is_callable())
        throw ProblogError(ErrorCode::NonCallable,
                           "inference goal is not callable" +
                               (goal ? ": " + format_term(goal) : std::string()));
    std::string resolved = session.resolve_kind_name(kind_name);
    if (resolved == "pure")
        throw ProblogError(ErrorCode::InvalidOptions,
                           "pure engines only enumerate; they produce no probabilistic result");
    const KindDefinition* def = session.find_kind(resolved);
    if (!def)
        throw ProblogError(ErrorCode::TypeError, "unknown inference kind: " + resolved);

    Engine& engine = session.push_engine(resolved);
    InferenceResult result;
    try {
        result = def->drive(session, engine, goal, result_type, options);
    } catch (...) {
        session.pop_engine();
        throw;
    }
    session.pop_engine();
    return result;
}

InferenceResult problog_inference(EngineSession& session, InferenceKind kind,
                                  const TermPtr& goal, ResultType result_type,
                                  const InferenceOptions& options) {
    if (kind == InferenceKind::Custom)
        throw ProblogError(ErrorCode::InvalidOptions,
                           "custom inference is invoked by kind name");
    return problog_inference(session, std::string(inference_kind_name(kind)), goal,
                             result_type, options);
}

double exact_probability(EngineSession& session, const TermPtr& goal, long depth_limit) {
    InferenceOptions opts;
    opts.depth_limit = depth_limit;
    return problog_inference(session, InferenceKind::Exact, goal, ResultType::Probability,
                             opts)
        .probability;
}

std::unique_ptr<SolveStream> solve(const TermPtr& goal, const Program& program,
                                   EngineSession& session, long depth_limit) {
    return std::make_unique<SolveStream>(goal, program, session.host(), depth_limit);
}

KindDefinition pure_kind_definition() {
    KindDefinition def;
    def.name = "pure";
    def.kind = InferenceKind::Pure;
    def.make_state = [](EngineSession&) { return std::make_unique<EngineState>(); };
    def.hooks.on_annotated_fact = [](Engine&, const GroundFactId&, double) {
        return HookOutcome::Succeed;   // plain Prolog: annotated facts just hold
    };
    def.hooks.on_derivation_success = [](Engine&) {};
    def.hooks.undo_annotated_fact = [](Engine&) {};
    def.drive = [](EngineSession&, Engine&, const TermPtr&, ResultType,
                   const InferenceOptions&) -> InferenceResult {
        throw ProblogError(ErrorCode::InvalidOptions,
                           "pure engines are not driven by problog_inference");
    };
    return def;
}

} // namespace problog
