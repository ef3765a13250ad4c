#include "problog/exact.hpp"

#include <algorithm>
#include <map>

#include "problog/errors.hpp"

namespace problog {

KindDefinition exact_kind_definition() {
    KindDefinition def;
    def.name = "exact";
    def.kind = InferenceKind::Exact;
    def.make_state = [](EngineSession& s) {
        auto st = std::make_unique<ExactState>();
        st->program = &s.program();
        return st;
    };
    def.hooks.on_annotated_fact = [](Engine& e, const GroundFactId& id, double p) {
        auto& st = static_cast<ExactState&>(*e.state());
        st.current_explanation.emplace_back(FactLiteral{id, false, p});
        return HookOutcome::SucceedWithLiteral;
    };
    def.hooks.undo_annotated_fact = [](Engine& e) {
        auto& st = static_cast<ExactState&>(*e.state());
        st.current_explanation.pop_back();
    };
    def.hooks.on_derivation_success = [](Engine& e) {
        auto& st = static_cast<ExactState&>(*e.state());
        st.trie.insert(st.current_explanation, *st.program);
    };
    def.drive = [](EngineSession& s, Engine& e, const TermPtr& goal, ResultType rtype,
                   const InferenceOptions& opts) {
        {
            SolveStream stream(goal, s.program(), s.host(), opts.depth_limit);
            while (stream.next()) {
            }
        }
        auto& st = static_cast<ExactState&>(*e.state());
        InferenceResult result;
        if (rtype == ResultType::Probability) {
            result.type = ResultType::Probability;
            result.probability = exact_probability_of_trie(st.trie);
        } else {
            result.type = ResultType::Info;
            result.exact_info = exact_info_of_trie(st.trie, s.program());
        }
        return result;
    };
    return def;
}

double exact_probability_of_trie(const DnfTrie& trie) {
    FormulaPtr formula = trie_to_formula(trie);
    std::vector<GroundFactId> order = formula_fact_ids(formula);
    Robdd bdd = build_robdd(formula, order);
    std::unordered_map<GroundFactId, double, GroundFactIdHash> weights;
    for (const auto& [id, entry] : trie.legend()) weights.emplace(id, entry.probability);
    return robdd_probability(bdd, weights);
}

ExactInfo exact_info_of_trie(const DnfTrie& trie, const Program& program) {
    ExactInfo info;
    info.formula = trie_to_formula(trie);
    // Legend over the formula's facts; labels are the fact index, with a .k
    // suffix when a non-ground template has several instances in play.
    std::vector<GroundFactId> ids = formula_fact_ids(info.formula);
    std::sort(ids.begin(), ids.end());
    std::map<int, int> instance_counter;
    for (const auto& id : ids) {
        LegendEntry e;
        e.id = id;
        e.probability = program.annotated_facts().at(id.fact_index).probability;
        e.display = display_fact_term(id, program);
        bool ground_template = program.annotated_facts().at(id.fact_index).head->is_ground();
        if (ground_template) {
            e.label = std::to_string(id.fact_index);
        } else {
            int k = ++instance_counter[id.fact_index];
            e.label = std::to_string(id.fact_index) + "." + std::to_string(k);
        }
        info.legend.push_back(std::move(e));
    }
    return info;
}

namespace {

const LegendEntry& legend_for(const ExactInfo& info, const GroundFactId& id) {
    for (const auto& e : info.legend)
        if (e.id == id) return e;
    throw ProblogError(ErrorCode::MissingWeight, "formula mentions a fact missing from legend");
}

void format_rec(const ExactInfo& info, const FormulaPtr& f, std::string& out) {
    switch (f->kind()) {
        case NestedFormula::Kind::True: out += "true"; return;
        case NestedFormula::Kind::False: out += "false"; return;
        case NestedFormula::Kind::Leaf: {
            if (f->leaf().negated) out += '-';
            out += legend_for(info, f->leaf().id).label;
            return;
        }
        case NestedFormula::Kind::Not:
            out += "not(";
            format_rec(info, f->children()[0], out);
            out += ')';
            return;
        case NestedFormula::Kind::And:
        case NestedFormula::Kind::Or: {
            out += f->kind() == NestedFormula::Kind::And ? "and(" : "or(";
            bool first = true;
            for (const auto& c : f->children()) {
                if (!first) out += ',';
                first = false;
                format_rec(info, c, out);
            }
            out += ')';
            return;
        }
    }
}

TermPtr term_rec(const ExactInfo& info, const FormulaPtr& f) {
    switch (f->kind()) {
        case NestedFormula::Kind::True: return Term::make_atom("true");
        case NestedFormula::Kind::False: return Term::make_atom("false");
        case NestedFormula::Kind::Leaf: {
            TermPtr fact = legend_for(info, f->leaf().id).display;
            if (f->leaf().negated) return Term::make_compound("not", {fact});
            return fact;
        }
        case NestedFormula::Kind::Not:
            return Term::make_compound("not", {term_rec(info, f->children()[0])});
        case NestedFormula::Kind::And:
        case NestedFormula::Kind::Or: {
            const char* op = f->kind() == NestedFormula::Kind::And ? "and" : "or";
            TermPtr acc = term_rec(info, f->children().back());
            for (auto it = std::next(f->children().rbegin()); it != f->children().rend(); ++it)
                acc = Term::make_compound(op, {term_rec(info, *it), acc});
            return acc;
        }
    }
    return Term::make_atom("false");
}

} // namespace

std::string format_exact_formula(const ExactInfo& info) {
    std::string out;
    format_rec(info, info.formula, out);
    return out;
}

std::vector<std::string> format_exact_legend(const ExactInfo& info) {
    std::vector<std::string> lines;
    lines.reserve(info.legend.size());
    for (const auto& e : info.legend)
        lines.push_back("fact " + e.label + " = " + format_term(e.display) +
                        " p=" + format_double(e.probability));
    return lines;
}

TermPtr exact_info_to_term(const ExactInfo& info) { return term_rec(info, info.formula); }

} // namespace problog
