#ifndef PROBLOG_EXACT_HPP
#define PROBLOG_EXACT_HPP

#include <string>

#include "problog/dnf.hpp"
#include "problog/engine.hpp"
#include "problog/robdd.hpp"

namespace problog {

// Registers of an exact engine: the current (partial) explanation and the
// trie of completed ones. The explanation register behaves as a backtrackable
// list; the kernel pops literals when backtracking past their use.
class ExactState final : public EngineState {
public:
    std::vector<ExplanationItem> current_explanation;   // register 1
    DnfTrie trie;                                        // register 2
    const Program* program = nullptr;
};

// DNF -> ROBDD -> weighted model count, with the default first-occurrence
// variable order. The result is order-invariant.
double exact_probability_of_trie(const DnfTrie& trie);

// Formula plus labelled legend. Labels are the annotated-fact index, with a
// .k suffix distinguishing instances of non-ground templates.
ExactInfo exact_info_of_trie(const DnfTrie& trie, const Program& program);

// Textual serialization: or(and(2,5),and(3,6)); negative literals as -2,
// embedded negations as not(...).
std::string format_exact_formula(const ExactInfo& info);

// One line per fact: "fact 2 = edge(b,e) p=0.8", ordered by fact identity.
std::vector<std::string> format_exact_legend(const ExactInfo& info);

// Term view of the formula for problog_inference/4 info results: leaves are
// the ground fact terms, negation is not/1, and/or are right-nested.
TermPtr exact_info_to_term(const ExactInfo& info);

} // namespace problog

#endif
