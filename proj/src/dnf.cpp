#include "problog/dnf.hpp"

#include <algorithm>

#include "problog/errors.hpp"

namespace problog {

int compare(const FactLiteral& a, const FactLiteral& b) {
    int c = compare(a.id, b.id);
    if (c != 0) return c;
    if (a.negated != b.negated) return a.negated ? 1 : -1;
    return 0;
}

FormulaPtr NestedFormula::make_true() {
    static const FormulaPtr t = std::shared_ptr<NestedFormula>(new NestedFormula());
    return t;
}

FormulaPtr NestedFormula::make_false() {
    static const FormulaPtr f = [] {
        auto p = std::shared_ptr<NestedFormula>(new NestedFormula());
        p->kind_ = Kind::False;
        return p;
    }();
    return f;
}

FormulaPtr NestedFormula::make_leaf(FactLiteral lit) {
    auto p = std::shared_ptr<NestedFormula>(new NestedFormula());
    p->kind_ = Kind::Leaf;
    p->leaf_ = std::move(lit);
    return p;
}

FormulaPtr NestedFormula::make_not(FormulaPtr child) {
    auto p = std::shared_ptr<NestedFormula>(new NestedFormula());
    p->kind_ = Kind::Not;
    p->children_.push_back(std::move(child));
    return p;
}

FormulaPtr NestedFormula::make_and(std::vector<FormulaPtr> children) {
    auto p = std::shared_ptr<NestedFormula>(new NestedFormula());
    p->kind_ = Kind::And;
    p->children_ = std::move(children);
    return p;
}

FormulaPtr NestedFormula::make_or(std::vector<FormulaPtr> children) {
    auto p = std::shared_ptr<NestedFormula>(new NestedFormula());
    p->kind_ = Kind::Or;
    p->children_ = std::move(children);
    return p;
}

namespace {

std::string literal_key(const FactLiteral& lit) {
    std::string s = lit.negated ? "-" : "+";
    s += std::to_string(lit.id.fact_index);
    for (const auto& a : lit.id.args) {
        s += ',';
        s += format_term(a);
    }
    return s;
}

void formula_key_rec(const FormulaPtr& f, std::string& out) {
    switch (f->kind()) {
        case NestedFormula::Kind::True: out += "true"; return;
        case NestedFormula::Kind::False: out += "false"; return;
        case NestedFormula::Kind::Leaf:
            out += "lit(";
            out += literal_key(f->leaf());
            out += ')';
            return;
        case NestedFormula::Kind::Not:
            out += "not(";
            formula_key_rec(f->children()[0], out);
            out += ')';
            return;
        case NestedFormula::Kind::And:
        case NestedFormula::Kind::Or: {
            out += f->kind() == NestedFormula::Kind::And ? "and(" : "or(";
            bool first = true;
            for (const auto& c : f->children()) {
                if (!first) out += ',';
                first = false;
                formula_key_rec(c, out);
            }
            out += ')';
            return;
        }
    }
}

void collect_ids(const FormulaPtr& f, std::vector<GroundFactId>& out) {
    switch (f->kind()) {
        case NestedFormula::Kind::Leaf: {
            for (const auto& id : out)
                if (id == f->leaf().id) return;
            out.push_back(f->leaf().id);
            return;
        }
        case NestedFormula::Kind::Not:
        case NestedFormula::Kind::And:
        case NestedFormula::Kind::Or:
            for (const auto& c : f->children()) collect_ids(c, out);
            return;
        default: return;
    }
}

std::string item_key(const ExplanationItem& item) {
    if (std::holds_alternative<FactLiteral>(item))
        return "l|" + literal_key(std::get<FactLiteral>(item));
    return "f|" + formula_key(std::get<FormulaPtr>(item));
}

// Sorted, deduplicated item sequence; nullopt when a fact occurs with both
// polarities (impossible world).
std::optional<std::vector<ExplanationItem>> canonicalize(
    const std::vector<ExplanationItem>& items) {
    std::vector<FactLiteral> lits;
    std::vector<std::pair<std::string, FormulaPtr>> formulas;
    for (const auto& item : items) {
        if (std::holds_alternative<FactLiteral>(item))
            lits.push_back(std::get<FactLiteral>(item));
        else {
            const FormulaPtr& f = std::get<FormulaPtr>(item);
            formulas.emplace_back(formula_key(f), f);
        }
    }
    std::sort(lits.begin(), lits.end(),
              [](const FactLiteral& a, const FactLiteral& b) { return compare(a, b) < 0; });
    lits.erase(std::unique(lits.begin(), lits.end(),
                           [](const FactLiteral& a, const FactLiteral& b) {
                               return compare(a, b) == 0;
                           }),
               lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
        if (lits[i].id == lits[i - 1].id && lits[i].negated != lits[i - 1].negated)
            return std::nullopt;
    std::sort(formulas.begin(), formulas.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    formulas.erase(std::unique(formulas.begin(), formulas.end(),
                               [](const auto& a, const auto& b) { return a.first == b.first; }),
                   formulas.end());
    std::vector<ExplanationItem> out;
    out.reserve(lits.size() + formulas.size());
    for (auto& l : lits) out.emplace_back(std::move(l));
    for (auto& [key, f] : formulas) out.emplace_back(std::move(f));
    return out;
}

double formula_naive_value(const FormulaPtr& f) {
    switch (f->kind()) {
        case NestedFormula::Kind::True: return 1.0;
        case NestedFormula::Kind::False: return 0.0;
        case NestedFormula::Kind::Leaf:
            return f->leaf().negated ? 1.0 - f->leaf().probability : f->leaf().probability;
        case NestedFormula::Kind::Not: return 1.0 - formula_naive_value(f->children()[0]);
        case NestedFormula::Kind::And: {
            double p = 1.0;
            for (const auto& c : f->children()) p *= formula_naive_value(c);
            return p;
        }
        case NestedFormula::Kind::Or: {
            double p = 0.0;
            for (const auto& c : f->children()) p += formula_naive_value(c);
            return p;
        }
    }
    return 0.0;
}

} // namespace

std::string formula_key(const FormulaPtr& f) {
    std::string out;
    formula_key_rec(f, out);
    return out;
}

std::vector<GroundFactId> formula_fact_ids(const FormulaPtr& f) {
    std::vector<GroundFactId> out;
    collect_ids(f, out);
    return out;
}

TermPtr display_fact_term(const GroundFactId& id, const Program& program) {
    const AnnotatedFact& f = program.annotated_facts().at(id.fact_index);
    if (id.args.empty()) return f.head;
    return Term::make_compound(f.head->name(), std::vector<TermPtr>(id.args));
}

void DnfTrie::add_to_legend(const GroundFactId& id, double probability,
                            const Program& program) {
    if (legend_.count(id)) return;
    LegendEntry e;
    e.id = id;
    e.display = display_fact_term(id, program);
    e.probability = probability;
    legend_.emplace(id, std::move(e));
}

void DnfTrie::add_formula_to_legend(const FormulaPtr& f, const Program& program) {
    switch (f->kind()) {
        case NestedFormula::Kind::Leaf:
            add_to_legend(f->leaf().id, f->leaf().probability, program);
            return;
        case NestedFormula::Kind::Not:
        case NestedFormula::Kind::And:
        case NestedFormula::Kind::Or:
            for (const auto& c : f->children()) add_formula_to_legend(c, program);
            return;
        default: return;
    }
}

bool DnfTrie::insert(const std::vector<ExplanationItem>& items, const Program& program) {
    auto canon = canonicalize(items);
    if (!canon) return false;   // inconsistent: contributes probability 0

    std::size_t node = 0;
    for (const auto& item : *canon) {
        std::string key = item_key(item);
        auto it = nodes_[node].edges.find(key);
        if (it == nodes_[node].edges.end()) {
            nodes_.push_back(TrieNode{});
            it = nodes_[node].edges.emplace(std::move(key), nodes_.size() - 1).first;
        }
        node = it->second;
    }
    if (nodes_[node].terminal) return false;   // duplicate explanation
    nodes_[node].terminal = true;

    for (const auto& item : *canon) {
        if (std::holds_alternative<FactLiteral>(item)) {
            const FactLiteral& lit = std::get<FactLiteral>(item);
            add_to_legend(lit.id, lit.probability, program);
        } else {
            add_formula_to_legend(std::get<FormulaPtr>(item), program);
        }
    }
    explanations_.push_back(Explanation{std::move(*canon)});
    return true;
}

FormulaPtr trie_to_formula(const DnfTrie& trie) {
    if (trie.empty()) return NestedFormula::make_false();
    std::vector<FormulaPtr> disjuncts;
    disjuncts.reserve(trie.size());
    for (const auto& e : trie.explanations()) {
        if (e.items.empty()) return NestedFormula::make_true();
        std::vector<FormulaPtr> conjuncts;
        conjuncts.reserve(e.items.size());
        for (const auto& item : e.items) {
            if (std::holds_alternative<FactLiteral>(item))
                conjuncts.push_back(NestedFormula::make_leaf(std::get<FactLiteral>(item)));
            else
                conjuncts.push_back(std::get<FormulaPtr>(item));
        }
        disjuncts.push_back(NestedFormula::make_and(std::move(conjuncts)));
    }
    return NestedFormula::make_or(std::move(disjuncts));
}

double naive_proof_sum(const DnfTrie& trie) {
    double sum = 0.0;
    for (const auto& e : trie.explanations()) {
        double product = 1.0;
        for (const auto& item : e.items) {
            if (std::holds_alternative<FactLiteral>(item)) {
                const FactLiteral& lit = std::get<FactLiteral>(item);
                product *= lit.negated ? 1.0 - lit.probability : lit.probability;
            } else {
                product *= formula_naive_value(std::get<FormulaPtr>(item));
            }
        }
        sum += product;
    }
    return sum;
}

} // namespace problog
