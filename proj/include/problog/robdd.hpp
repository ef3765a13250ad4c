#ifndef PROBLOG_ROBDD_HPP
#define PROBLOG_ROBDD_HPP

#include <unordered_map>
#include <vector>

#include "problog/dnf.hpp"
#include "problog/resolution.hpp"

namespace problog {

// Reduced ordered BDD over ground-fact variables, hash-consed. Refs 0 and 1
// are the terminals; variable ranks strictly increase along every path and no
// node has low == high or a structural duplicate.
class Robdd {
public:
    using Ref = int;
    static constexpr Ref kFalse = 0;
    static constexpr Ref kTrue = 1;

    struct Node {
        int var;    // rank into order(); -1 for terminals
        Ref low;
        Ref high;
    };

    explicit Robdd(std::vector<GroundFactId> order);

    Ref leaf(bool value) const { return value ? kTrue : kFalse; }
    Ref literal(int rank, bool negated);
    Ref apply_and(Ref a, Ref b);
    Ref apply_or(Ref a, Ref b);
    Ref negate(Ref a);

    Ref root() const { return root_; }
    void set_root(Ref r) { root_ = r; }

    const std::vector<GroundFactId>& order() const { return order_; }
    int rank_of(const GroundFactId& id) const;   // -1 when absent
    const std::vector<Node>& nodes() const { return nodes_; }

    // Memoized two-terminal traversal: weights indexed by rank.
    double probability(const std::vector<double>& weight_by_rank) const;

private:
    Ref make_node(int var, Ref low, Ref high);

    struct NodeKey {
        int var;
        Ref low;
        Ref high;
        bool operator==(const NodeKey& o) const {
            return var == o.var && low == o.low && high == o.high;
        }
    };
    struct NodeKeyHash {
        std::size_t operator()(const NodeKey& k) const {
            std::size_t h = std::hash<int>{}(k.var);
            h = h * 1000003u ^ std::hash<int>{}(k.low);
            h = h * 1000003u ^ std::hash<int>{}(k.high);
            return h;
        }
    };
    struct PairHash {
        std::size_t operator()(const std::pair<Ref, Ref>& p) const {
            return std::hash<long long>{}((static_cast<long long>(p.first) << 32) ^
                                          static_cast<long long>(p.second));
        }
    };

    std::vector<GroundFactId> order_;
    std::unordered_map<GroundFactId, int, GroundFactIdHash> rank_;
    std::vector<Node> nodes_;
    std::unordered_map<NodeKey, Ref, NodeKeyHash> unique_;
    std::unordered_map<std::pair<Ref, Ref>, Ref, PairHash> and_cache_;
    std::unordered_map<std::pair<Ref, Ref>, Ref, PairHash> or_cache_;
    std::unordered_map<Ref, Ref> not_cache_;
    Ref root_ = kFalse;
};

// Compile the formula under the given variable order, which must contain
// every ground fact of the formula exactly once (order-mismatch otherwise).
Robdd build_robdd(const FormulaPtr& formula, std::vector<GroundFactId> order);

// Success probability of the BDD's root with per-fact weights; raises
// missing-weight if some variable has none.
double robdd_probability(
    const Robdd& bdd,
    const std::unordered_map<GroundFactId, double, GroundFactIdHash>& weights);

} // namespace problog

#endif
