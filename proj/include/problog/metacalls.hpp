#ifndef PROBLOG_METACALLS_HPP
#define PROBLOG_METACALLS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "problog/engine.hpp"

namespace problog {

struct AnswerRecord {
    TermPtr answer;        // ground instantiation of the query
    double probability;    // per-answer probability under the requested kind
};

// Lazy per-answer probability enumeration. Answers of the goal are found by
// an internal pure engine through ordinary backtracking; for each answer not
// yet memoized the parent engine is re-activated, a nested inference of the
// ground answer runs, and the record is yielded. Duplicates are skipped.
// Closing the stream early (or destroying it) releases the pure engine and
// restores the session stack; this is the stream-cleanup contract.
class AnswersStream {
public:
    AnswersStream(EngineSession& session, InferenceKind kind, TermPtr goal,
                  const InferenceOptions& options);
    AnswersStream(EngineSession& session, const std::string& kind_name, TermPtr goal,
                  const InferenceOptions& options);
    ~AnswersStream();
    AnswersStream(const AnswersStream&) = delete;
    AnswersStream& operator=(const AnswersStream&) = delete;

    std::optional<AnswerRecord> next();
    void close();

    const std::map<std::string, double>& memo() const { return memo_; }

private:
    void init(const std::string& kind_name);
    void close_with_pure_active();
    void close_with_parent_active();

    EngineSession& session_;
    std::string kind_name_;
    TermPtr goal_;
    InferenceOptions options_;
    std::unique_ptr<SolveStream> enumeration_;
    std::map<std::string, double> memo_;   // canonical answer text -> probability
    int pure_engine_id_ = -1;
    int parent_engine_id_ = -1;
    enum class State { Enumerating, Parked, Closed };
    State state_ = State::Closed;
};

std::unique_ptr<AnswersStream> problog_answers(EngineSession& session, InferenceKind kind,
                                               TermPtr goal,
                                               const InferenceOptions& options = {});

// Exhausts the answer stream and returns the most probable record; ties go to
// the first-discovered answer. No-answers error when the goal has none.
AnswerRecord find_most_probable_answer(EngineSession& session, InferenceKind kind,
                                       TermPtr goal, const InferenceOptions& options = {});

// Probabilistic negation as a subgoal outcome. Under an exact engine the
// goal's formula is computed by a nested info inference and embedded negated
// into the current explanation (single-fact formulas embed the complementary
// literal); under program sampling it is negation as failure against the
// current world; under a pure enumeration engine it succeeds iff the goal is
// not deterministically true. Goal variables are never bound. When machine is
// null (library-level call) the embedding is recorded without an undo.
bool problog_not_goal(EngineSession& session, const TermPtr& goal,
                      const InferenceOptions& options, Machine* machine);

// Kernel-side dispatch for body goals problog_inference/2..4, problog_not/1..2
// and problog_answers/2..3.
bool is_meta_goal(const std::string& functor, int arity);
std::unique_ptr<MetaChoice> make_meta_choice_for(EngineSession& session, const TermPtr& goal);

} // namespace problog

#endif
