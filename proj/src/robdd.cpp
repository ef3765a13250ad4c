#include "problog/robdd.hpp"

#include <algorithm>
#include <cmath>

#include "problog/errors.hpp"

namespace problog {

Robdd::Robdd(std::vector<GroundFactId> order) : order_(std::move(order)) {
    nodes_.push_back({-1, kFalse, kFalse});   // 0: terminal false
    nodes_.push_back({-1, kTrue, kTrue});     // 1: terminal true
    for (std::size_t i = 0; i < order_.size(); ++i) {
        if (rank_.count(order_[i]))
            throw ProblogError(ErrorCode::OrderMismatch,
                               "variable order mentions a fact twice");
        rank_.emplace(order_[i], static_cast<int>(i));
    }
}

int Robdd::rank_of(const GroundFactId& id) const {
    auto it = rank_.find(id);
    return it == rank_.end() ? -1 : it->second;
}

Robdd::Ref Robdd::make_node(int var, Ref low, Ref high) {
    if (low == high) return low;
    NodeKey key{var, low, high};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    nodes_.push_back({var, low, high});
    Ref r = static_cast<Ref>(nodes_.size() - 1);
    unique_.emplace(key, r);
    return r;
}

Robdd::Ref Robdd::literal(int rank, bool negated) {
    return negated ? make_node(rank, kTrue, kFalse) : make_node(rank, kFalse, kTrue);
}

Robdd::Ref Robdd::apply_and(Ref a, Ref b) {
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue) return a;
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto it = and_cache_.find({a, b});
    if (it != and_cache_.end()) return it->second;
    const Node na = nodes_[a], nb = nodes_[b];
    int var = std::min(na.var, nb.var);
    Ref a_lo = na.var == var ? na.low : a;
    Ref a_hi = na.var == var ? na.high : a;
    Ref b_lo = nb.var == var ? nb.low : b;
    Ref b_hi = nb.var == var ? nb.high : b;
    Ref r = make_node(var, apply_and(a_lo, b_lo), apply_and(a_hi, b_hi));
    and_cache_.emplace(std::make_pair(a, b), r);
    return r;
}

Robdd::Ref Robdd::apply_or(Ref a, Ref b) {
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse) return a;
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto it = or_cache_.find({a, b});
    if (it != or_cache_.end()) return it->second;
    const Node na = nodes_[a], nb = nodes_[b];
    int var = std::min(na.var, nb.var);
    Ref a_lo = na.var == var ? na.low : a;
    Ref a_hi = na.var == var ? na.high : a;
    Ref b_lo = nb.var == var ? nb.low : b;
    Ref b_hi = nb.var == var ? nb.high : b;
    Ref r = make_node(var, apply_or(a_lo, b_lo), apply_or(a_hi, b_hi));
    or_cache_.emplace(std::make_pair(a, b), r);
    return r;
}

Robdd::Ref Robdd::negate(Ref a) {
    if (a == kFalse) return kTrue;
    if (a == kTrue) return kFalse;
    auto it = not_cache_.find(a);
    if (it != not_cache_.end()) return it->second;
    const Node n = nodes_[a];
    Ref r = make_node(n.var, negate(n.low), negate(n.high));
    not_cache_.emplace(a, r);
    return r;
}

double Robdd::probability(const std::vector<double>& weight_by_rank) const {
    std::vector<double> memo(nodes_.size(), -1.0);
    memo[kFalse] = 0.0;
    memo[kTrue] = 1.0;
    // Nodes are created bottom-up, so children always precede parents.
    for (std::size_t i = 2; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        double w = weight_by_rank.at(n.var);
        memo[i] = w * memo[n.high] + (1.0 - w) * memo[n.low];
    }
    return memo[root_];
}

namespace {

Robdd::Ref build_rec(Robdd& bdd, const FormulaPtr& f) {
    switch (f->kind()) {
        case NestedFormula::Kind::True: return Robdd::kTrue;
        case NestedFormula::Kind::False: return Robdd::kFalse;
        case NestedFormula::Kind::Leaf: {
            int rank = bdd.rank_of(f->leaf().id);
            if (rank < 0)
                throw ProblogError(ErrorCode::OrderMismatch,
                                   "variable order is missing a fact of the formula");
            return bdd.literal(rank, f->leaf().negated);
        }
        case NestedFormula::Kind::Not: return bdd.negate(build_rec(bdd, f->children()[0]));
        case NestedFormula::Kind::And: {
            Robdd::Ref r = Robdd::kTrue;
            for (const auto& c : f->children()) r = bdd.apply_and(r, build_rec(bdd, c));
            return r;
        }
        case NestedFormula::Kind::Or: {
            Robdd::Ref r = Robdd::kFalse;
            for (const auto& c : f->children()) r = bdd.apply_or(r, build_rec(bdd, c));
            return r;
        }
    }
    return Robdd::kFalse;
}

} // namespace

Robdd build_robdd(const FormulaPtr& formula, std::vector<GroundFactId> order) {
    std::vector<GroundFactId> present = formula_fact_ids(formula);
    if (present.size() != order.size())
        throw ProblogError(ErrorCode::OrderMismatch,
                           "variable order has " + std::to_string(order.size()) +
                               " facts, formula has " + std::to_string(present.size()));
    Robdd bdd(std::move(order));
    for (const auto& id : present)
        if (bdd.rank_of(id) < 0)
            throw ProblogError(ErrorCode::OrderMismatch,
                               "variable order is missing a fact of the formula");
    bdd.set_root(build_rec(bdd, formula));
    return bdd;
}

double robdd_probability(
    const Robdd& bdd,
    const std::unordered_map<GroundFactId, double, GroundFactIdHash>& weights) {
    std::vector<double> by_rank(bdd.order().size(), 0.0);
    for (std::size_t i = 0; i < bdd.order().size(); ++i) {
        auto it = weights.find(bdd.order()[i]);
        if (it == weights.end())
            throw ProblogError(ErrorCode::MissingWeight,
                               "no weight for fact index " +
                                   std::to_string(bdd.order()[i].fact_index));
        by_rank[i] = it->second;
    }
    return bdd.probability(by_rank);
}

} // namespace problog
