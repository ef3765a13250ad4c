#ifndef PROBLOG_DNF_HPP
#define PROBLOG_DNF_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "problog/program.hpp"
#include "problog/resolution.hpp"
#include "problog/term.hpp"

namespace problog {

// One annotated-fact literal inside an explanation. The probability is always
// that of the positive fact; a negative literal weighs 1-p.
struct FactLiteral {
    GroundFactId id;
    bool negated = false;
    double probability = 0.0;
};

int compare(const FactLiteral& a, const FactLiteral& b);

class NestedFormula;
using FormulaPtr = std::shared_ptr<const NestedFormula>;

// Boolean formula over ground-fact variables. Plain DNFs are Or-of-And trees;
// negated probabilistic subgoals embed as Not nodes whose leaves share
// GroundFactIds with the rest of the formula.
class NestedFormula {
public:
    enum class Kind { True, False, Leaf, Not, And, Or };

    static FormulaPtr make_true();
    static FormulaPtr make_false();
    static FormulaPtr make_leaf(FactLiteral lit);
    static FormulaPtr make_not(FormulaPtr child);
    static FormulaPtr make_and(std::vector<FormulaPtr> children);   // non-empty
    static FormulaPtr make_or(std::vector<FormulaPtr> children);    // non-empty

    Kind kind() const { return kind_; }
    const FactLiteral& leaf() const { return leaf_; }
    const std::vector<FormulaPtr>& children() const { return children_; }

private:
    NestedFormula() = default;
    Kind kind_ = Kind::True;
    FactLiteral leaf_;
    std::vector<FormulaPtr> children_;
};

// Canonical text used both for structural keys and diagnostics, with full
// ground-fact identities: or(and(lit(2,b,e)),...), not(...), true, false.
std::string formula_key(const FormulaPtr& f);

// Distinct GroundFactIds in first-occurrence (depth-first) order.
std::vector<GroundFactId> formula_fact_ids(const FormulaPtr& f);

// Item of one explanation: a plain literal or an embedded sub-formula
// contributed by a negated probabilistic subgoal.
using ExplanationItem = std::variant<FactLiteral, FormulaPtr>;

// Canonicalized conjunction of items: literals sorted and deduplicated, then
// sub-formulas sorted by key. An explanation containing a fact with both
// polarities denotes an impossible world and is dropped at trie insertion.
struct Explanation {
    std::vector<ExplanationItem> items;
};

struct LegendEntry {
    GroundFactId id;
    TermPtr display;        // ground fact term, e.g. edge(b,e)
    double probability;
    std::string label;      // CLI label; assigned when extracting info
};

// Detailed-information payload of exact inference: the collected formula plus
// a legend with one entry per distinct ground fact, sorted by fact identity.
struct ExactInfo {
    FormulaPtr formula;
    std::vector<LegendEntry> legend;
};

// The collected DNF: a trie keyed by the canonical item sequence of each
// explanation, deduplicating explanations while preserving first-insertion
// order; plus a legend covering every ground fact mentioned anywhere in it.
class DnfTrie {
public:
    // Returns true if a new explanation was stored; false when it was a
    // duplicate or inconsistent (discarded).
    bool insert(const std::vector<ExplanationItem>& items, const Program& program);

    const std::vector<Explanation>& explanations() const { return explanations_; }
    const std::map<GroundFactId, LegendEntry>& legend() const { return legend_; }
    std::size_t size() const { return explanations_.size(); }
    bool empty() const { return explanations_.empty(); }

private:
    void add_to_legend(const GroundFactId& id, double probability, const Program& program);
    void add_formula_to_legend(const FormulaPtr& f, const Program& program);

    struct TrieNode {
        std::map<std::string, std::size_t> edges;
        bool terminal = false;
    };
    std::vector<TrieNode> nodes_ = {TrieNode{}};
    std::vector<Explanation> explanations_;
    std::map<GroundFactId, LegendEntry> legend_;
};

// Ground fact term for a GroundFactId (template functor + ground arguments).
TermPtr display_fact_term(const GroundFactId& id, const Program& program);

// Or over one And per explanation, in insertion order, literals in canonical
// order. Empty trie: False. Any zero-item explanation makes the result True.
FormulaPtr trie_to_formula(const DnfTrie& trie);

// Diagnostic sum over explanations of the product of their item weights. Not
// a probability: over overlapping proofs it exceeds the true value (0.34
// against 0.316 on the bundled graph) and can exceed 1.
double naive_proof_sum(const DnfTrie& trie);

} // namespace problog

#endif
