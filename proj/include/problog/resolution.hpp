#ifndef PROBLOG_RESOLUTION_HPP
#define PROBLOG_RESOLUTION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "problog/program.hpp"
#include "problog/term.hpp"

namespace problog {

// Identity of one ground instance of an annotated fact. Distinct instances of
// the same template (same fact_index, different arguments) are independent
// random variables.
struct GroundFactId {
    int fact_index = 0;
    std::vector<TermPtr> args;       // all ground
    std::size_t hash = 0;

    static GroundFactId make(int fact_index, std::vector<TermPtr> args);
    bool operator==(const GroundFactId& o) const;
};

int compare(const GroundFactId& a, const GroundFactId& b);
inline bool operator<(const GroundFactId& a, const GroundFactId& b) { return compare(a, b) < 0; }

struct GroundFactIdHash {
    std::size_t operator()(const GroundFactId& id) const { return id.hash; }
};

// Functional substitution for the public unify/apply API. Bindings may chain
// through intermediate variables; apply resolves them fully, so applying twice
// equals applying once.
class Substitution {
public:
    TermPtr walk(const TermPtr& t) const;    // follow variable bindings one level deep
    TermPtr apply(const TermPtr& t) const;   // resolve recursively

    void bind(const std::string& var, TermPtr value);
    const TermPtr* lookup(const std::string& var) const;
    std::size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }
    const std::map<std::string, TermPtr>& bindings() const { return bindings_; }

private:
    std::map<std::string, TermPtr> bindings_;
};

// Most general unifier extending s, or nullopt when none exists. The occurs
// check is on.
std::optional<Substitution> unify(const TermPtr& a, const TermPtr& b, const Substitution& s);

// Source of globally fresh variables. Generated names contain '#', which the
// surface syntax cannot produce, so they never capture program variables.
struct VarCounter {
    std::uint64_t next = 0;
    std::string fresh() { return "_#" + std::to_string(next++); }
};

Clause rename_apart(const Clause& c, VarCounter& counter);
TermPtr rename_apart(const TermPtr& t, VarCounter& counter);

// Outcome of delegating an annotated-fact subgoal to the active engine.
enum class FactOutcome { Fail, Succeed };

class Machine;

// One nondeterministic meta goal (problog_inference, problog_not,
// problog_answers) integrated into the resolvent as a choice point. next()
// attempts the next solution, unifying output arguments through the machine;
// returning false means exhausted. Destruction must release any session
// resources the choice holds (this is the stream-cleanup contract).
class MetaChoice {
public:
    virtual ~MetaChoice() = default;
    virtual bool next(Machine& m) = 0;
};

// Everything the SLD kernel needs from its environment. The engine session
// implements this on top of the active engine; the oracle provides its own
// hosts for universe collection and per-world evaluation.
class KernelHost {
public:
    virtual ~KernelHost() = default;

    // Decides success of a ground annotated-fact subgoal. A host that records
    // bookkeeping (the exact engine's explanation register) registers its own
    // undo through the machine so backtracking reverts the record.
    virtual FactOutcome on_annotated_fact(const GroundFactId& id, double probability,
                                          Machine& m) = 0;
    virtual void on_derivation_success() = 0;

    virtual std::uint64_t fresh_var_serial() = 0;

    virtual bool is_meta_functor(const std::string& functor, int arity) const = 0;
    virtual std::unique_ptr<MetaChoice> make_meta_choice(const TermPtr& goal) = 0;
};

// Resumable SLD machine state exposed to meta choices: they resolve terms
// against the current bindings, unify results (trailed), and can register
// undo actions that run on backtracking.
class Machine {
public:
    virtual ~Machine() = default;
    virtual TermPtr walk(const TermPtr& t) const = 0;
    virtual TermPtr resolve(const TermPtr& t) const = 0;
    virtual bool unify_terms(const TermPtr& a, const TermPtr& b) = 0;
    virtual std::size_t trail_mark() const = 0;
    virtual void undo_trail(std::size_t mark) = 0;
    virtual void push_undo(std::function<void()> undo) = 0;
    virtual long depth_limit() const = 0;
};

// Lazy stream of answers for one goal: standard SLD with leftmost selection
// and source-order clauses, except that annotated-fact subgoals are delegated
// to the host and every completed derivation is reported to it. One stream is
// consumed by a single thread.
class SolveStream {
public:
    SolveStream(TermPtr goal, const Program& program, KernelHost& host, long depth_limit);
    ~SolveStream();
    SolveStream(SolveStream&&) noexcept;
    SolveStream& operator=(SolveStream&&) noexcept;
    SolveStream(const SolveStream&) = delete;
    SolveStream& operator=(const SolveStream&) = delete;

    // Next answer substitution, restricted to the goal's variables.
    std::optional<Substitution> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace problog

#endif
