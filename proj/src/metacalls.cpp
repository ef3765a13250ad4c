#include "problog/metacalls.hpp"

#include <cassert>

#include "problog/errors.hpp"
#include "problog/exact.hpp"
#include "problog/sampling.hpp"

namespace problog {

// ---------------------------------------------------------------------------
// AnswersStream
// ---------------------------------------------------------------------------

AnswersStream::AnswersStream(EngineSession& session, InferenceKind kind, TermPtr goal,
                             const InferenceOptions& options)
    : session_(session), goal_(std::move(goal)), options_(options) {
    init(inference_kind_name(kind));
}

AnswersStream::AnswersStream(EngineSession& session, const std::string& kind_name,
                             TermPtr goal, const InferenceOptions& options)
    : session_(session), goal_(std::move(goal)), options_(options) {
    init(kind_name);
}

void AnswersStream::init(const std::string& kind_name) {
    if (!goal_ || !goal_->is_callable())
        throw ProblogError(ErrorCode::NonCallable, "problog_answers: goal is not callable");
    // The kind resolves against the engine active at call time (the parent),
    // before the internal pure engine exists.
    kind_name_ = session_.resolve_kind_name(kind_name);
    if (kind_name_ == "pure")
        throw ProblogError(ErrorCode::InvalidOptions,
                           "problog_answers: pure yields no per-answer probability");
    if (!session_.find_kind(kind_name_))
        throw ProblogError(ErrorCode::TypeError, "unknown inference kind: " + kind_name_);
    parent_engine_id_ = session_.active().id();
    Engine& pure = session_.push_engine(InferenceKind::Pure);
    pure_engine_id_ = pure.id();
    try {
        enumeration_ = std::make_unique<SolveStream>(goal_, session_.program(),
                                                     session_.host(), options_.depth_limit);
    } catch (...) {
        session_.pop_engine();
        throw;
    }
    state_ = State::Enumerating;
}

AnswersStream::~AnswersStream() { close(); }

void AnswersStream::close_with_pure_active() {
    // Inner streams suspended inside the enumeration hold engines above ours;
    // destroying the stream releases them before we pop.
    enumeration_.reset();
    state_ = State::Closed;
    session_.pop_engine();   // discards the pure engine, parent is active again
}

void AnswersStream::close_with_parent_active() {
    enumeration_.reset();
    state_ = State::Closed;
    session_.remove_suspended(pure_engine_id_);
}

void AnswersStream::close() {
    if (state_ == State::Enumerating)
        close_with_pure_active();
    else if (state_ == State::Parked)
        close_with_parent_active();
}

std::optional<AnswerRecord> AnswersStream::next() {
    if (state_ == State::Closed) return std::nullopt;
    if (state_ == State::Parked) {
        session_.exchange_active_with(pure_engine_id_);
        state_ = State::Enumerating;
    }
    for (;;) {
        std::optional<Substitution> answer;
        try {
            answer = enumeration_->next();
        } catch (...) {
            close_with_pure_active();
            throw;
        }
        if (!answer) {
            close_with_pure_active();
            return std::nullopt;
        }
        TermPtr ground = answer->apply(goal_);
        std::string key = format_term(ground);
        if (memo_.count(key)) continue;   // deduplicated

        session_.exchange_active_with(parent_engine_id_);
        state_ = State::Parked;
        double p;
        try {
            p = problog_inference(session_, kind_name_, ground, ResultType::Probability,
                                  options_)
                    .probability;
        } catch (...) {
            close_with_parent_active();
            throw;
        }
        memo_.emplace(std::move(key), p);
        return AnswerRecord{ground, p};
    }
}

std::unique_ptr<AnswersStream> problog_answers(EngineSession& session, InferenceKind kind,
                                               TermPtr goal, const InferenceOptions& options) {
    return std::make_unique<AnswersStream>(session, kind, std::move(goal), options);
}

AnswerRecord find_most_probable_answer(EngineSession& session, InferenceKind kind,
                                       TermPtr goal, const InferenceOptions& options) {
    AnswersStream stream(session, kind, std::move(goal), options);
    std::optional<AnswerRecord> best;
    while (auto rec = stream.next()) {
        if (!best || rec->probability > best->probability) best = rec;
    }
    if (!best)
        throw ProblogError(ErrorCode::NoAnswers, "find_most_probable_answer: goal has no answers");
    return *best;
}

// ---------------------------------------------------------------------------
// problog_not
// ---------------------------------------------------------------------------

namespace {

// Recognizes a DNF of exactly one explanation with exactly one literal; its
// negation embeds as the complementary literal rather than a Not node.
std::optional<FactLiteral> single_literal_dnf(const FormulaPtr& f) {
    if (f->kind() != NestedFormula::Kind::Or || f->children().size() != 1)
        return std::nullopt;
    const FormulaPtr& conj = f->children()[0];
    if (conj->kind() != NestedFormula::Kind::And || conj->children().size() != 1)
        return std::nullopt;
    const FormulaPtr& leaf = conj->children()[0];
    if (leaf->kind() != NestedFormula::Kind::Leaf) return std::nullopt;
    return leaf->leaf();
}

} // namespace

bool problog_not_goal(EngineSession& session, const TermPtr& goal,
                      const InferenceOptions& options, Machine* machine) {
    if (!goal || !goal->is_callable())
        throw ProblogError(ErrorCode::NonCallable, "problog_not: goal is not callable");

    Engine& active = session.active();
    switch (active.kind()) {
        case InferenceKind::ProgramSampling: {
            // Negation as failure against the current sampled world; facts
            // drawn while trying the goal stay in the world.
            SolveStream stream(goal, session.program(), session.host(),
                               options.depth_limit);
            return !stream.next().has_value();
        }
        case InferenceKind::Exact:
        case InferenceKind::Pure: {
            InferenceResult info = problog_inference(session, InferenceKind::Exact, goal,
                                                     ResultType::Info, options);
            const FormulaPtr& f = info.exact_info->formula;
            if (f->kind() == NestedFormula::Kind::False) return true;   // never provable
            if (f->kind() == NestedFormula::Kind::True) return false;   // always provable
            if (active.kind() == InferenceKind::Pure)
                return true;   // answer enumeration: possibly false is enough

            auto& st = static_cast<ExactState&>(*active.state());
            if (auto lit = single_literal_dnf(f)) {
                FactLiteral complement = *lit;
                complement.negated = !complement.negated;
                st.current_explanation.emplace_back(complement);
            } else {
                st.current_explanation.emplace_back(NestedFormula::make_not(f));
            }
            if (machine) {
                ExactState* sp = &st;
                machine->push_undo([sp] { sp->current_explanation.pop_back(); });
            }
            return true;
        }
        default:
            throw ProblogError(ErrorCode::TypeError,
                               "problog_not is not defined for inference kind " +
                                   active.kind_name());
    }
}

// ---------------------------------------------------------------------------
// Body-goal dispatch
// ---------------------------------------------------------------------------

bool is_meta_goal(const std::string& functor, int arity) {
    if (functor == "problog_inference") return arity >= 2 && arity <= 4;
    if (functor == "problog_not") return arity == 1 || arity == 2;
    if (functor == "problog_answers") return arity == 2 || arity == 3;
    return false;
}

namespace {

std::string kind_name_from_term(const TermPtr& t) {
    if (!t->is_atom())
        throw ProblogError(ErrorCode::TypeError,
                           "inference kind must be an atom, got " + format_term(t));
    return t->name();
}

TermPtr estimate_to_term(const SampleEstimate& est) {
    return Term::make_compound("estimate", {Term::make_float(est.p),
                                            Term::make_int(est.n),
                                            Term::make_float(est.delta)});
}

// problog_inference/2,3,4 as a body goal: deterministic, result term unified
// with the output argument.
class InferenceChoice final : public MetaChoice {
public:
    InferenceChoice(EngineSession& s, TermPtr goal) : session_(s), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (done_) return false;
        done_ = true;

        const auto& args = goal_->args();
        std::string kind = "current";
        TermPtr inner;
        TermPtr out;
        ResultType rtype = ResultType::Probability;
        if (goal_->arity() == 2) {
            inner = args[0];
            out = args[1];
        } else if (goal_->arity() == 3) {
            kind = kind_name_from_term(m.resolve(args[0]));
            inner = args[1];
            out = args[2];
        } else {
            kind = kind_name_from_term(m.resolve(args[0]));
            inner = args[1];
            TermPtr rt = m.resolve(args[2]);
            if (rt->is_atom() && rt->name() == "probability")
                rtype = ResultType::Probability;
            else if (rt->is_atom() && rt->name() == "info")
                rtype = ResultType::Info;
            else
                throw ProblogError(ErrorCode::TypeError,
                                   "result type must be probability or info, got " +
                                       format_term(rt));
            out = args[3];
        }

        TermPtr resolved_goal = m.resolve(inner);
        InferenceOptions opts = session_.default_options();
        opts.depth_limit = m.depth_limit();
        InferenceResult r = problog_inference(session_, kind, resolved_goal, rtype, opts);

        TermPtr result_term;
        if (r.type == ResultType::Probability)
            result_term = Term::make_float(r.probability);
        else if (r.exact_info)
            result_term = exact_info_to_term(*r.exact_info);
        else
            result_term = estimate_to_term(*r.estimate);
        return m.unify_terms(out, result_term);
    }

private:
    EngineSession& session_;
    TermPtr goal_;
    bool done_ = false;
};

// problog_not/1,2 as a body goal: a deterministic test.
class NotChoice final : public MetaChoice {
public:
    NotChoice(EngineSession& s, TermPtr goal) : session_(s), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (done_) return false;
        done_ = true;

        const auto& args = goal_->args();
        TermPtr inner;
        if (goal_->arity() == 1) {
            inner = args[0];
        } else {
            std::string kind = kind_name_from_term(m.resolve(args[0]));
            if (kind != "exact" && kind != "program_sampling")
                throw ProblogError(ErrorCode::TypeError,
                                   "problog_not/2 expects exact or program_sampling, got " +
                                       kind);
            InferenceKind active = session_.active().kind();
            if (active != InferenceKind::Pure && kind != session_.active().kind_name())
                throw ProblogError(ErrorCode::TypeError,
                                   "problog_not/2: kind " + kind +
                                       " does not match the active engine (" +
                                       session_.active().kind_name() + ")");
            inner = args[1];
        }
        TermPtr resolved = m.resolve(inner);
        InferenceOptions opts = session_.default_options();
        opts.depth_limit = m.depth_limit();
        return problog_not_goal(session_, resolved, opts, &m);
    }

private:
    EngineSession& session_;
    TermPtr goal_;
    bool done_ = false;
};

// problog_answers/2,3 as a body goal: backtracks through answer records,
// binding the goal and its probability.
class AnswersChoice final : public MetaChoice {
public:
    AnswersChoice(EngineSession& s, TermPtr goal) : session_(s), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (!stream_) {
            const auto& args = goal_->args();
            std::string kind = "current";
            if (goal_->arity() == 3) {
                kind = kind_name_from_term(m.resolve(args[0]));
                goal_arg_ = args[1];
                out_arg_ = args[2];
            } else {
                goal_arg_ = args[0];
                out_arg_ = args[1];
            }
            InferenceOptions opts = session_.default_options();
            opts.depth_limit = m.depth_limit();
            stream_ = std::make_unique<AnswersStream>(session_, kind, m.resolve(goal_arg_),
                                                      opts);
        }
        for (;;) {
            std::optional<AnswerRecord> rec = stream_->next();
            if (!rec) return false;
            std::size_t mark = m.trail_mark();
            if (m.unify_terms(goal_arg_, rec->answer) &&
                m.unify_terms(out_arg_, Term::make_float(rec->probability)))
                return true;
            m.undo_trail(mark);
        }
    }

private:
    EngineSession& session_;
    TermPtr goal_;
    TermPtr goal_arg_;
    TermPtr out_arg_;
    std::unique_ptr<AnswersStream> stream_;
};

} // namespace

std::unique_ptr<MetaChoice> make_meta_choice_for(EngineSession& session, const TermPtr& goal) {
    const std::string& f = goal->name();
    if (f == "problog_inference") return std::make_unique<InferenceChoice>(session, goal);
    if (f == "problog_not") return std::make_unique<NotChoice>(session, goal);
    if (f == "problog_answers") return std::make_unique<AnswersChoice>(session, goal);
    throw ProblogError(ErrorCode::TypeError, "not a meta goal: " + format_term(goal));
}

} // namespace problog
