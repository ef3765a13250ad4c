#include "problog/oracle.hpp"

#include <set>
#include <string>
#include <unordered_map>

#include "problog/errors.hpp"

namespace problog {

double world_probability(const WorldAssignment& w) {
    double p = 1.0;
    for (std::size_t i = 0; i < w.universe.size(); ++i)
        p *= w.truth[i] ? w.probabilities[i] : 1.0 - w.probabilities[i];
    return p;
}

namespace {

// Variables renamed to _V0, _V1, ... by first occurrence; variant answers
// collapse to one canonical term.
TermPtr canonical_term(const TermPtr& t, std::map<std::string, TermPtr>& names) {
    if (t->is_ground()) return t;
    if (t->is_variable()) {
        auto it = names.find(t->name());
        if (it == names.end())
            it = names.emplace(t->name(),
                               Term::make_variable("_V" + std::to_string(names.size())))
                     .first;
        return it->second;
    }
    std::vector<TermPtr> args;
    args.reserve(t->args().size());
    for (const auto& a : t->args()) args.push_back(canonical_term(a, names));
    return Term::make_compound(t->name(), std::move(args));
}

TermPtr canonical_term(const TermPtr& t) {
    std::map<std::string, TermPtr> names;
    return canonical_term(t, names);
}

// Shared state of one oracle evaluation: memoized recursive values for nested
// inference goals, shared fresh-variable counter, cycle detection.
struct OracleContext {
    const Program& program;
    long depth_limit;
    std::uint64_t var_serial = 0;

    std::map<std::string, double> value_memo;
    std::set<std::string> value_in_progress;
    std::map<std::string, std::vector<std::pair<TermPtr, double>>> answers_memo;
    std::set<std::string> answers_in_progress;
    std::map<std::string, std::set<GroundFactId>> universe_memo;
    std::set<std::string> universe_in_progress;

    double inference_value(const TermPtr& goal);
    const std::vector<std::pair<TermPtr, double>>& answer_records(const TermPtr& goal);
    void union_universe_of(const TermPtr& goal, std::set<GroundFactId>& into);
};

void guard_universe(const std::set<GroundFactId>& uni) {
    if (uni.size() > static_cast<std::size_t>(kMaxOracleUniverse))
        throw ProblogError(ErrorCode::UniverseTooLarge,
                           "oracle: relevant ground-fact universe exceeds " +
                               std::to_string(kMaxOracleUniverse) + " facts");
}

class OracleHostBase : public KernelHost {
public:
    explicit OracleHostBase(OracleContext& ctx) : ctx_(ctx) {}

    std::uint64_t fresh_var_serial() override { return ctx_.var_serial++; }

    bool is_meta_functor(const std::string& functor, int arity) const override {
        if (functor == "problog_inference") return arity >= 2 && arity <= 4;
        if (functor == "problog_not") return arity == 1 || arity == 2;
        if (functor == "problog_answers") return arity == 2 || arity == 3;
        return false;
    }

    std::unique_ptr<MetaChoice> make_meta_choice(const TermPtr& goal) override;

    // World-level complement for the evaluating host; universe contribution
    // for the collecting host.
    virtual bool run_not(const TermPtr& goal) = 0;

    OracleContext& ctx_;
};

void check_kind_atom(const TermPtr& t) {
    if (!t->is_atom())
        throw ProblogError(ErrorCode::TypeError,
                           "inference kind must be an atom, got " + format_term(t));
    const std::string& k = t->name();
    if (k == "pure")
        throw ProblogError(ErrorCode::InvalidOptions,
                           "pure engines produce no probabilistic result");
    if (k != "exact" && k != "program_sampling" && k != "current")
        throw ProblogError(ErrorCode::TypeError, "unknown inference kind: " + k);
}

// Nested inference inside an oracle run is a constant: the ideal (Eq.-level)
// value, whichever approximate method the program names.
class OracleInferenceChoice final : public MetaChoice {
public:
    OracleInferenceChoice(OracleContext& ctx, TermPtr goal)
        : ctx_(ctx), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (done_) return false;
        done_ = true;
        const auto& args = goal_->args();
        TermPtr inner;
        TermPtr out;
        if (goal_->arity() == 2) {
            inner = args[0];
            out = args[1];
        } else if (goal_->arity() == 3) {
            check_kind_atom(m.resolve(args[0]));
            inner = args[1];
            out = args[2];
        } else {
            check_kind_atom(m.resolve(args[0]));
            TermPtr rt = m.resolve(args[2]);
            if (!rt->is_atom() || rt->name() != "probability")
                throw ProblogError(ErrorCode::TypeError,
                                   "the oracle evaluates probability results only");
            inner = args[1];
            out = args[3];
        }
        TermPtr resolved = m.resolve(inner);
        if (!resolved->is_callable())
            throw ProblogError(ErrorCode::NonCallable,
                               "inference goal is not callable: " + format_term(resolved));
        double v = ctx_.inference_value(resolved);
        return m.unify_terms(out, Term::make_float(v));
    }

private:
    OracleContext& ctx_;
    TermPtr goal_;
    bool done_ = false;
};

class OracleNotChoice final : public MetaChoice {
public:
    OracleNotChoice(OracleHostBase& host, TermPtr goal) : host_(host), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (done_) return false;
        done_ = true;
        const auto& args = goal_->args();
        TermPtr inner = args[goal_->arity() == 2 ? 1 : 0];
        if (goal_->arity() == 2) check_kind_atom(m.resolve(args[0]));
        TermPtr resolved = m.resolve(inner);
        if (!resolved->is_callable())
            throw ProblogError(ErrorCode::NonCallable,
                               "problog_not: goal is not callable: " + format_term(resolved));
        return host_.run_not(resolved);
    }

private:
    OracleHostBase& host_;
    TermPtr goal_;
    bool done_ = false;
};

class OracleAnswersChoice final : public MetaChoice {
public:
    OracleAnswersChoice(OracleContext& ctx, TermPtr goal) : ctx_(ctx), goal_(std::move(goal)) {}

    bool next(Machine& m) override {
        if (!records_) {
            const auto& args = goal_->args();
            if (goal_->arity() == 3) {
                check_kind_atom(m.resolve(args[0]));
                goal_arg_ = args[1];
                out_arg_ = args[2];
            } else {
                goal_arg_ = args[0];
                out_arg_ = args[1];
            }
            records_ = &ctx_.answer_records(m.resolve(goal_arg_));
        }
        while (pos_ < records_->size()) {
            const auto& [answer, p] = (*records_)[pos_++];
            std::size_t mark = m.trail_mark();
            if (m.unify_terms(goal_arg_, answer) &&
                m.unify_terms(out_arg_, Term::make_float(p)))
                return true;
            m.undo_trail(mark);
        }
        return false;
    }

private:
    OracleContext& ctx_;
    TermPtr goal_;
    TermPtr goal_arg_;
    TermPtr out_arg_;
    const std::vector<std::pair<TermPtr, double>>* records_ = nullptr;
    std::size_t pos_ = 0;
};

std::unique_ptr<MetaChoice> OracleHostBase::make_meta_choice(const TermPtr& goal) {
    const std::string& f = goal->name();
    if (f == "problog_inference")
        return std::make_unique<OracleInferenceChoice>(ctx_, goal);
    if (f == "problog_not") return std::make_unique<OracleNotChoice>(*this, goal);
    return std::make_unique<OracleAnswersChoice>(ctx_, goal);
}

// Facts always succeed; ids used along each successful derivation are added
// to the universe. Negated subgoals contribute their own universes.
class CollectorHost final : public OracleHostBase {
public:
    CollectorHost(OracleContext& ctx, std::set<GroundFactId>& universe)
        : OracleHostBase(ctx), universe_(universe) {}

    FactOutcome on_annotated_fact(const GroundFactId& id, double, Machine& m) override {
        path_.push_back(id);
        m.push_undo([this] { path_.pop_back(); });
        return FactOutcome::Succeed;
    }

    void on_derivation_success() override {
        for (const auto& id : path_) universe_.insert(id);
        guard_universe(universe_);
    }

    bool run_not(const TermPtr& goal) override {
        ctx_.union_universe_of(goal, universe_);
        return true;   // collection explores past the negation
    }

private:
    std::set<GroundFactId>& universe_;
    std::vector<GroundFactId> path_;
};

// Evaluates the goal in one fixed world; facts outside the universe cannot
// occur in a successful derivation and simply fail.
class WorldHost final : public OracleHostBase {
public:
    WorldHost(OracleContext& ctx,
              const std::unordered_map<GroundFactId, bool, GroundFactIdHash>& world)
        : OracleHostBase(ctx), world_(world) {}

    FactOutcome on_annotated_fact(const GroundFactId& id, double, Machine&) override {
        auto it = world_.find(id);
        return it != world_.end() && it->second ? FactOutcome::Succeed : FactOutcome::Fail;
    }

    void on_derivation_success() override {}

    bool run_not(const TermPtr& goal) override {
        SolveStream stream(goal, ctx_.program, *this, ctx_.depth_limit);
        return !stream.next().has_value();
    }

private:
    const std::unordered_map<GroundFactId, bool, GroundFactIdHash>& world_;
};

std::set<GroundFactId> collect_universe(OracleContext& ctx, const TermPtr& goal) {
    std::set<GroundFactId> uni;
    CollectorHost host(ctx, uni);
    SolveStream stream(goal, ctx.program, host, ctx.depth_limit);
    while (stream.next().has_value()) {
    }
    return uni;
}

void OracleContext::union_universe_of(const TermPtr& goal, std::set<GroundFactId>& into) {
    std::string key = format_term(goal);
    auto it = universe_memo.find(key);
    if (it == universe_memo.end()) {
        if (!universe_in_progress.insert(key).second)
            throw ProblogError(ErrorCode::DepthLimitExceeded,
                               "oracle: cyclic nested negation at " + key);
        std::set<GroundFactId> sub = collect_universe(*this, goal);
        universe_in_progress.erase(key);
        it = universe_memo.emplace(std::move(key), std::move(sub)).first;
    }
    for (const auto& id : it->second) into.insert(id);
    guard_universe(into);
}

struct WorldTable {
    std::vector<GroundFactId> universe;
    std::vector<double> probabilities;
};

WorldTable world_table(OracleContext& ctx, const TermPtr& goal) {
    std::set<GroundFactId> uni = collect_universe(ctx, goal);
    guard_universe(uni);
    WorldTable t;
    t.universe.assign(uni.begin(), uni.end());
    t.probabilities.reserve(t.universe.size());
    for (const auto& id : t.universe)
        t.probabilities.push_back(ctx.program.annotated_facts().at(id.fact_index).probability);
    return t;
}

double success_probability(OracleContext& ctx, const TermPtr& goal) {
    WorldTable t = world_table(ctx, goal);
    std::size_t k = t.universe.size();
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
        double w = 1.0;
        std::unordered_map<GroundFactId, bool, GroundFactIdHash> world;
        world.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            bool value = (mask >> i) & 1;
            w *= value ? t.probabilities[i] : 1.0 - t.probabilities[i];
            world.emplace(t.universe[i], value);
        }
        if (w == 0.0) continue;
        WorldHost host(ctx, world);
        SolveStream stream(goal, ctx.program, host, ctx.depth_limit);
        if (stream.next().has_value()) total += w;
    }
    return total;
}

std::map<TermPtr, double, TermPtrLess> answer_probabilities(OracleContext& ctx,
                                                            const TermPtr& goal) {
    WorldTable t = world_table(ctx, goal);
    std::size_t k = t.universe.size();
    std::map<TermPtr, double, TermPtrLess> out;
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
        double w = 1.0;
        std::unordered_map<GroundFactId, bool, GroundFactIdHash> world;
        world.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            bool value = (mask >> i) & 1;
            w *= value ? t.probabilities[i] : 1.0 - t.probabilities[i];
            world.emplace(t.universe[i], value);
        }
        if (w == 0.0) continue;
        WorldHost host(ctx, world);
        SolveStream stream(goal, ctx.program, host, ctx.depth_limit);
        std::set<std::string> seen;   // one contribution per answer per world
        while (auto answer = stream.next()) {
            TermPtr instance = canonical_term(answer->apply(goal));
            if (!seen.insert(format_term(instance)).second) continue;
            out[instance] += w;
        }
    }
    return out;
}

double OracleContext::inference_value(const TermPtr& goal) {
    std::string key = format_term(goal);
    auto it = value_memo.find(key);
    if (it != value_memo.end()) return it->second;
    if (!value_in_progress.insert(key).second)
        throw ProblogError(ErrorCode::DepthLimitExceeded,
                           "oracle: cyclic nested inference at " + key);
    double v = success_probability(*this, goal);
    value_in_progress.erase(key);
    value_memo.emplace(std::move(key), v);
    return v;
}

const std::vector<std::pair<TermPtr, double>>& OracleContext::answer_records(
    const TermPtr& goal) {
    std::string key = format_term(goal);
    auto it = answers_memo.find(key);
    if (it != answers_memo.end()) return it->second;
    if (!answers_in_progress.insert(key).second)
        throw ProblogError(ErrorCode::DepthLimitExceeded,
                           "oracle: cyclic nested answer enumeration at " + key);
    std::map<TermPtr, double, TermPtrLess> map = answer_probabilities(*this, goal);
    std::vector<std::pair<TermPtr, double>> records;
    records.reserve(map.size());
    for (const auto& [answer, p] : map) {
        // Context-fresh variables so a record unified into some derivation
        // never captures that derivation's variables.
        VarCounter counter{var_serial};
        TermPtr renamed = answer->is_ground() ? answer : rename_apart(answer, counter);
        var_serial = counter.next;
        records.emplace_back(renamed, p);
    }
    answers_in_progress.erase(key);
    return answers_memo.emplace(std::move(key), std::move(records)).first->second;
}

} // namespace

std::vector<GroundFactId> ground_fact_universe(const Program& program, const TermPtr& goal,
                                               long depth_limit) {
    OracleContext ctx{program, depth_limit};
    std::set<GroundFactId> uni = collect_universe(ctx, goal);
    guard_universe(uni);
    return std::vector<GroundFactId>(uni.begin(), uni.end());
}

double brute_force_success_probability(const Program& program, const TermPtr& goal,
                                       long depth_limit) {
    OracleContext ctx{program, depth_limit};
    return success_probability(ctx, goal);
}

std::map<TermPtr, double, TermPtrLess> brute_force_answer_probabilities(
    const Program& program, const TermPtr& goal, long depth_limit) {
    OracleContext ctx{program, depth_limit};
    return answer_probabilities(ctx, goal);
}

} // namespace problog
