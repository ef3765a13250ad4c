#ifndef PROBLOG_PROGRAM_HPP
#define PROBLOG_PROGRAM_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "problog/term.hpp"

namespace problog {

struct Clause {
    TermPtr head;                // Atom or Compound
    std::vector<TermPtr> body;   // empty for facts
};

// A probability-labelled fact template. Each ground instance of the template
// is an independent Bernoulli random variable.
struct AnnotatedFact {
    int index = 0;               // position in source order
    double probability = 0.0;    // in [0,1]
    TermPtr head;                // callable; may contain variables
};

struct PredicateKey {
    std::string functor;
    int arity;
    bool operator<(const PredicateKey& o) const {
        if (functor != o.functor) return functor < o.functor;
        return arity < o.arity;
    }
};

struct PredicateEntry {
    std::vector<std::size_t> clause_indices;
    std::vector<std::size_t> fact_indices;
};

// Parsed program: annotated facts and background clauses, with a consistent
// predicate index. A (functor, arity) pair may be defined by clauses or by
// annotated facts but never both.
class Program {
public:
    static Program build(std::vector<AnnotatedFact> facts, std::vector<Clause> clauses);

    const std::vector<AnnotatedFact>& annotated_facts() const { return facts_; }
    const std::vector<Clause>& clauses() const { return clauses_; }

    const PredicateEntry* lookup(const std::string& functor, int arity) const;
    const std::map<PredicateKey, PredicateEntry>& predicate_index() const { return index_; }

private:
    std::vector<AnnotatedFact> facts_;
    std::vector<Clause> clauses_;
    std::map<PredicateKey, PredicateEntry> index_;
};

using ProgramPtr = std::shared_ptr<const Program>;

} // namespace problog

#endif
