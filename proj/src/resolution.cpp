#include "problog/resolution.hpp"

#include <cassert>
#include <unordered_map>

#include "problog/errors.hpp"

namespace problog {

namespace {
std::size_t hash_mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
} // namespace

GroundFactId GroundFactId::make(int fact_index, std::vector<TermPtr> args) {
    GroundFactId id;
    id.fact_index = fact_index;
    id.args = std::move(args);
    std::size_t h = hash_mix(0x6FAC, static_cast<std::size_t>(fact_index));
    for (const auto& a : id.args) h = hash_mix(h, a->hash());
    id.hash = h;
    return id;
}

bool GroundFactId::operator==(const GroundFactId& o) const {
    if (fact_index != o.fact_index || hash != o.hash || args.size() != o.args.size())
        return false;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!term_equal(args[i], o.args[i])) return false;
    return true;
}

int compare(const GroundFactId& a, const GroundFactId& b) {
    if (a.fact_index != b.fact_index) return a.fact_index < b.fact_index ? -1 : 1;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        int c = term_compare(a.args[i], b.args[i]);
        if (c != 0) return c;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Substitution and unification
// ---------------------------------------------------------------------------

TermPtr Substitution::walk(const TermPtr& t) const {
    TermPtr cur = t;
    while (cur->is_variable()) {
        auto it = bindings_.find(cur->name());
        if (it == bindings_.end()) break;
        cur = it->second;
    }
    return cur;
}

TermPtr Substitution::apply(const TermPtr& t) const {
    TermPtr w = walk(t);
    if (w->tag() != Term::Tag::Compound || w->is_ground()) return w;
    std::vector<TermPtr> args;
    args.reserve(w->args().size());
    bool changed = false;
    for (const auto& a : w->args()) {
        TermPtr r = apply(a);
        changed = changed || r.get() != a.get();
        args.push_back(std::move(r));
    }
    return changed ? Term::make_compound(w->name(), std::move(args)) : w;
}

void Substitution::bind(const std::string& var, TermPtr value) {
    bindings_[var] = std::move(value);
}

const TermPtr* Substitution::lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
}

namespace {

// Shared unification core; Store supplies variable lookup and (trailed)
// binding.
template <class Store>
TermPtr store_walk(const TermPtr& t, const Store& st) {
    TermPtr cur = t;
    while (cur->is_variable()) {
        const TermPtr* b = st.lookup_var(cur->name());
        if (!b) break;
        cur = *b;
    }
    return cur;
}

template <class Store>
bool occurs_in(const std::string& var, const TermPtr& t, const Store& st) {
    TermPtr w = store_walk(t, st);
    if (w->is_variable()) return w->name() == var;
    if (w->tag() == Term::Tag::Compound) {
        if (w->is_ground()) return false;
        for (const auto& a : w->args())
            if (occurs_in(var, a, st)) return true;
    }
    return false;
}

template <class Store>
bool unify_core(const TermPtr& a, const TermPtr& b, Store& st) {
    TermPtr x = store_walk(a, st);
    TermPtr y = store_walk(b, st);
    if (x->is_variable()) {
        if (y->is_variable() && y->name() == x->name()) return true;
        if (occurs_in(x->name(), y, st)) return false;
        st.bind_var(x->name(), y);
        return true;
    }
    if (y->is_variable()) {
        if (occurs_in(y->name(), x, st)) return false;
        st.bind_var(y->name(), x);
        return true;
    }
    if (x->tag() != y->tag()) return false;
    switch (x->tag()) {
        case Term::Tag::Atom: return x->name() == y->name();
        case Term::Tag::Int: return x->int_value() == y->int_value();
        case Term::Tag::Float: return x->float_value() == y->float_value();
        case Term::Tag::Compound: {
            if (x->name() != y->name() || x->arity() != y->arity()) return false;
            for (int i = 0; i < x->arity(); ++i)
                if (!unify_core(x->args()[i], y->args()[i], st)) return false;
            return true;
        }
        default: return false;
    }
}

struct SubstStore {
    Substitution& s;
    const TermPtr* lookup_var(const std::string& name) const { return s.lookup(name); }
    void bind_var(const std::string& name, const TermPtr& value) { s.bind(name, value); }
};

// Renaming with an arbitrary fresh-name source.
TermPtr rename_term_with(const TermPtr& t, std::map<std::string, TermPtr>& seen,
                         const std::function<std::string()>& fresh) {
    if (t->is_ground()) return t;
    if (t->is_variable()) {
        auto it = seen.find(t->name());
        if (it == seen.end())
            it = seen.emplace(t->name(), Term::make_variable(fresh())).first;
        return it->second;
    }
    std::vector<TermPtr> args;
    args.reserve(t->args().size());
    for (const auto& a : t->args()) args.push_back(rename_term_with(a, seen, fresh));
    return Term::make_compound(t->name(), std::move(args));
}

} // namespace

std::optional<Substitution> unify(const TermPtr& a, const TermPtr& b, const Substitution& s) {
    Substitution out = s;
    SubstStore st{out};
    if (!unify_core(a, b, st)) return std::nullopt;
    return out;
}

Clause rename_apart(const Clause& c, VarCounter& counter) {
    std::map<std::string, TermPtr> seen;
    auto fresh = [&counter] { return counter.fresh(); };
    Clause out;
    out.head = rename_term_with(c.head, seen, fresh);
    out.body.reserve(c.body.size());
    for (const auto& g : c.body) out.body.push_back(rename_term_with(g, seen, fresh));
    return out;
}

TermPtr rename_apart(const TermPtr& t, VarCounter& counter) {
    std::map<std::string, TermPtr> seen;
    auto fresh = [&counter] { return counter.fresh(); };
    return rename_term_with(t, seen, fresh);
}

// ---------------------------------------------------------------------------
// SLD machine
// ---------------------------------------------------------------------------

namespace {

struct Num {
    bool is_int;
    long long i;
    double f;
    double as_double() const { return is_int ? static_cast<double>(i) : f; }
};

} // namespace

struct SolveStream::Impl final : Machine {
    // --- resolvent: immutable cons list, shared by choice points ---
    struct GoalNode {
        TermPtr goal;            // null for commit markers
        std::size_t barrier = 0; // cut target: choice-point stack height
        std::size_t commit_to = 0;
        bool is_commit = false;
        std::shared_ptr<const GoalNode> next;
    };
    using Goals = std::shared_ptr<const GoalNode>;

    static Goals cons(TermPtr g, std::size_t barrier, Goals next) {
        auto n = std::make_shared<GoalNode>();
        n->goal = std::move(g);
        n->barrier = barrier;
        n->next = std::move(next);
        return n;
    }
    static Goals cons_commit(std::size_t to, Goals next) {
        auto n = std::make_shared<GoalNode>();
        n->is_commit = true;
        n->commit_to = to;
        n->next = std::move(next);
        return n;
    }

    // --- choice points ---
    struct Alternatives {
        virtual ~Alternatives() = default;
        // Pre: m.goals_ is the stored continuation and the trail is undone to
        // the choice point's mark. May prepend goals on success.
        virtual bool next(Impl& m) = 0;
    };

    struct ChoicePoint {
        Goals cont;
        std::size_t trail_mark;
        long steps_mark;
        std::unique_ptr<Alternatives> alts;
    };

    struct ClauseAlts final : Alternatives {
        TermPtr call;
        const std::vector<Clause>* clauses;
        const std::vector<std::size_t>* idx;
        std::size_t pos = 0;
        std::size_t barrier;
        bool next(Impl& m) override {
            while (pos < idx->size()) {
                const Clause& c = (*clauses)[(*idx)[pos++]];
                std::size_t mark = m.trail_.size();
                std::map<std::string, TermPtr> seen;
                auto fresh = [&m] { return "_#" + std::to_string(m.host_.fresh_var_serial()); };
                TermPtr head = rename_term_with(c.head, seen, fresh);
                if (!m.unify_terms(call, head)) {
                    m.undo_trail(mark);
                    continue;
                }
                Goals g = m.goals_;
                for (auto it = c.body.rbegin(); it != c.body.rend(); ++it)
                    g = cons(rename_term_with(*it, seen, fresh), barrier, g);
                m.goals_ = g;
                return true;
            }
            return false;
        }
    };

    struct FactAlts final : Alternatives {
        TermPtr call;
        const std::vector<AnnotatedFact>* facts;
        const std::vector<std::size_t>* idx;
        std::size_t pos = 0;
        bool next(Impl& m) override {
            while (pos < idx->size()) {
                const AnnotatedFact& f = (*facts)[(*idx)[pos++]];
                std::size_t mark = m.trail_.size();
                std::map<std::string, TermPtr> seen;
                auto fresh = [&m] { return "_#" + std::to_string(m.host_.fresh_var_serial()); };
                TermPtr tmpl = rename_term_with(f.head, seen, fresh);
                if (!m.unify_terms(call, tmpl)) {
                    m.undo_trail(mark);
                    continue;
                }
                TermPtr instance = m.resolve(tmpl);
                if (!instance->is_ground())
                    throw ProblogError(ErrorCode::NonGroundFact,
                                       "annotated fact instance is not ground: " +
                                           format_term(instance));
                GroundFactId id = GroundFactId::make(
                    f.index, std::vector<TermPtr>(instance->args()));
                if (m.host_.on_annotated_fact(id, f.probability, m) == FactOutcome::Fail) {
                    m.undo_trail(mark);
                    continue;
                }
                return true;
            }
            return false;
        }
    };

    // Stores a single alternative resolvent (right branch of `;`, else branch
    // of if-then-else, implicit `fail` of a bare `->`).
    struct OnceAlts final : Alternatives {
        bool used = false;
        bool next(Impl&) override {
            if (used) return false;
            used = true;
            return true;
        }
    };

    struct MetaAlts final : Alternatives {
        std::unique_ptr<MetaChoice> choice;
        bool next(Impl& m) override { return choice->next(m); }
    };

    // --- state ---
    const Program& prog_;
    KernelHost& host_;
    long depth_limit_value_;
    long steps_ = 0;

    Goals goals_;
    std::unordered_map<std::string, TermPtr> bindings_;
    struct TrailEntry {
        std::string var;               // empty for custom undo entries
        std::function<void()> undo;
    };
    std::vector<TrailEntry> trail_;
    std::vector<ChoicePoint> cps_;

    TermPtr query_;
    std::vector<std::string> query_vars_;
    bool started_ = false;
    bool exhausted_ = false;

    Impl(TermPtr goal, const Program& program, KernelHost& host, long depth_limit)
        : prog_(program), host_(host), depth_limit_value_(depth_limit), query_(std::move(goal)) {
        if (!query_->is_callable())
            throw ProblogError(ErrorCode::NonCallable,
                               "goal is not callable: " + format_term(query_));
        collect_vars(query_, query_vars_);
        goals_ = cons(query_, 0, nullptr);
    }

    ~Impl() override {
        // LIFO destruction so meta choices release session resources in
        // reverse order of acquisition. Trail undo actions are not run: the
        // registers they would touch are discarded with their engines.
        while (!cps_.empty()) cps_.pop_back();
    }

    static void collect_vars(const TermPtr& t, std::vector<std::string>& out) {
        if (t->is_variable()) {
            for (const auto& n : out)
                if (n == t->name()) return;
            out.push_back(t->name());
            return;
        }
        for (const auto& a : t->args()) collect_vars(a, out);
    }

    // --- Machine interface ---
    TermPtr walk(const TermPtr& t) const override {
        TermPtr cur = t;
        while (cur->is_variable()) {
            auto it = bindings_.find(cur->name());
            if (it == bindings_.end()) break;
            cur = it->second;
        }
        return cur;
    }

    TermPtr resolve(const TermPtr& t) const override {
        TermPtr w = walk(t);
        if (w->tag() != Term::Tag::Compound || w->is_ground()) return w;
        std::vector<TermPtr> args;
        args.reserve(w->args().size());
        bool changed = false;
        for (const auto& a : w->args()) {
            TermPtr r = resolve(a);
            changed = changed || r.get() != a.get();
            args.push_back(std::move(r));
        }
        return changed ? Term::make_compound(w->name(), std::move(args)) : w;
    }

    struct MachineStore {
        Impl& m;
        const TermPtr* lookup_var(const std::string& name) const {
            auto it = m.bindings_.find(name);
            return it == m.bindings_.end() ? nullptr : &it->second;
        }
        void bind_var(const std::string& name, const TermPtr& value) {
            m.bindings_[name] = value;
            m.trail_.push_back({name, nullptr});
        }
    };

    bool unify_terms(const TermPtr& a, const TermPtr& b) override {
        std::size_t mark = trail_.size();
        MachineStore st{*this};
        if (unify_core(a, b, st)) return true;
        undo_trail(mark);
        return false;
    }

    std::size_t trail_mark() const override { return trail_.size(); }

    void undo_trail(std::size_t mark) override {
        while (trail_.size() > mark) {
            TrailEntry& e = trail_.back();
            if (e.undo)
                e.undo();
            else
                bindings_.erase(e.var);
            trail_.pop_back();
        }
    }

    void push_undo(std::function<void()> undo) override {
        trail_.push_back({std::string(), std::move(undo)});
    }

    long depth_limit() const override { return depth_limit_value_; }

    // --- engine room ---
    void push_cp(Goals cont, std::unique_ptr<Alternatives> alts) {
        cps_.push_back({std::move(cont), trail_.size(), steps_, std::move(alts)});
    }

    void cut_to(std::size_t barrier) {
        while (cps_.size() > barrier) cps_.pop_back();
    }

    bool backtrack() {
        while (!cps_.empty()) {
            ChoicePoint& cp = cps_.back();
            undo_trail(cp.trail_mark);
            steps_ = cp.steps_mark;
            goals_ = cp.cont;
            if (cp.alts->next(*this)) return true;
            cps_.pop_back();
        }
        return false;
    }

    Num eval_arith(const TermPtr& t0) {
        TermPtr t = walk(t0);
        switch (t->tag()) {
            case Term::Tag::Int: return {true, t->int_value(), 0.0};
            case Term::Tag::Float: return {false, 0, t->float_value()};
            case Term::Tag::Variable:
                throw ProblogError(ErrorCode::InstantiationError,
                                   "arithmetic: unbound variable " + t->name());
            case Term::Tag::Atom:
                throw ProblogError(ErrorCode::TypeError,
                                   "arithmetic: not a number: " + format_term(t));
            case Term::Tag::Compound: break;
        }
        const std::string& op = t->name();
        if (t->arity() == 1 && op == "-") {
            Num a = eval_arith(t->args()[0]);
            if (a.is_int) return {true, -a.i, 0.0};
            return {false, 0, -a.f};
        }
        if (t->arity() != 2 || (op != "+" && op != "-" && op != "*" && op != "/"))
            throw ProblogError(ErrorCode::TypeError,
                               "arithmetic: unknown function " + op + "/" +
                                   std::to_string(t->arity()));
        Num a = eval_arith(t->args()[0]);
        Num b = eval_arith(t->args()[1]);
        if (op == "/") {
            if (b.as_double() == 0.0)
                throw ProblogError(ErrorCode::ArithmeticError, "division by zero");
            if (a.is_int && b.is_int && a.i % b.i == 0) return {true, a.i / b.i, 0.0};
            return {false, 0, a.as_double() / b.as_double()};
        }
        if (a.is_int && b.is_int) {
            long long r = op == "+" ? a.i + b.i : op == "-" ? a.i - b.i : a.i * b.i;
            return {true, r, 0.0};
        }
        double x = a.as_double(), y = b.as_double();
        double r = op == "+" ? x + y : op == "-" ? x - y : x * y;
        return {false, 0, r};
    }

    // true/false = builtin succeeded/failed; throws on type errors
    bool exec_builtin(const TermPtr& g, const std::string& f, int n) {
        if (f == "=" && n == 2) return unify_terms(g->args()[0], g->args()[1]);
        if (f == "==" && n == 2)
            return term_equal(resolve(g->args()[0]), resolve(g->args()[1]));
        if (f == "\\==" && n == 2)
            return !term_equal(resolve(g->args()[0]), resolve(g->args()[1]));
        if (f == "is" && n == 2) {
            Num v = eval_arith(g->args()[1]);
            TermPtr r = v.is_int ? Term::make_int(v.i) : Term::make_float(v.f);
            return unify_terms(g->args()[0], r);
        }
        if (n == 2 && (f == "<" || f == "=<" || f == ">" || f == ">=" || f == "=:=")) {
            Num a = eval_arith(g->args()[0]);
            Num b = eval_arith(g->args()[1]);
            if (a.is_int && b.is_int) {
                long long x = a.i, y = b.i;
                if (f == "<") return x < y;
                if (f == "=<") return x <= y;
                if (f == ">") return x > y;
                if (f == ">=") return x >= y;
                return x == y;
            }
            double x = a.as_double(), y = b.as_double();
            if (f == "<") return x < y;
            if (f == "=<") return x <= y;
            if (f == ">") return x > y;
            if (f == ">=") return x >= y;
            return x == y;
        }
        assert(false && "not a builtin");
        return false;
    }

    static bool is_builtin(const std::string& f, int n) {
        if (n != 2) return false;
        return f == "=" || f == "==" || f == "\\==" || f == "is" || f == "<" || f == "=<" ||
               f == ">" || f == ">=" || f == "=:=";
    }

    std::optional<Substitution> next_answer() {
        if (exhausted_) return std::nullopt;
        try {
            return run();
        } catch (...) {
            exhausted_ = true;
            throw;
        }
    }

    std::optional<Substitution> run() {
        if (!started_)
            started_ = true;
        else if (!backtrack()) {
            exhausted_ = true;
            return std::nullopt;
        }
        for (;;) {
            if (!goals_) {
                host_.on_derivation_success();
                return make_answer();
            }
            if (goals_->is_commit) {
                std::size_t to = goals_->commit_to;
                goals_ = goals_->next;
                cut_to(to);
                continue;
            }
            TermPtr g = walk(goals_->goal);
            std::size_t barrier = goals_->barrier;
            Goals cont = goals_->next;

            if (++steps_ > depth_limit_value_)
                throw ProblogError(ErrorCode::DepthLimitExceeded,
                                   "depth limit exceeded (" +
                                       std::to_string(depth_limit_value_) +
                                       " resolution steps in one derivation)");

            if (g->is_variable())
                throw ProblogError(ErrorCode::InstantiationError,
                                   "unbound variable used as a goal: " + g->name());
            if (!g->is_callable())
                throw ProblogError(ErrorCode::TypeError,
                                   "goal is not callable: " + format_term(g));

            const std::string& f = g->name();
            int n = g->arity();

            if (n == 0) {
                if (f == "true") {
                    goals_ = cont;
                    continue;
                }
                if (f == "fail" || f == "false") {
                    if (!backtrack()) {
                        exhausted_ = true;
                        return std::nullopt;
                    }
                    continue;
                }
                if (f == "!") {
                    cut_to(barrier);
                    goals_ = cont;
                    continue;
                }
            }
            if (f == "," && n == 2) {
                goals_ = cons(g->args()[0], barrier, cons(g->args()[1], barrier, cont));
                continue;
            }
            if (f == ";" && n == 2) {
                TermPtr lhs = walk(g->args()[0]);
                if (lhs->tag() == Term::Tag::Compound && lhs->name() == "->" &&
                    lhs->arity() == 2) {
                    // (C -> T ; E): E parked, C runs cut-local, first success
                    // of C commits past the parked branch.
                    std::size_t k = cps_.size();
                    push_cp(cons(g->args()[1], barrier, cont), std::make_unique<OnceAlts>());
                    goals_ = cons(lhs->args()[0], cps_.size(),
                                  cons_commit(k, cons(lhs->args()[1], barrier, cont)));
                    continue;
                }
                push_cp(cons(g->args()[1], barrier, cont), std::make_unique<OnceAlts>());
                goals_ = cons(g->args()[0], barrier, cont);
                continue;
            }
            if (f == "->" && n == 2) {
                std::size_t k = cps_.size();
                push_cp(cons(Term::make_atom("fail"), barrier, cont),
                        std::make_unique<OnceAlts>());
                goals_ = cons(g->args()[0], cps_.size(),
                              cons_commit(k, cons(g->args()[1], barrier, cont)));
                continue;
            }
            if (f == "call" && n == 1) {
                TermPtr target = walk(g->args()[0]);
                if (target->is_variable())
                    throw ProblogError(ErrorCode::InstantiationError,
                                       "call/1: unbound goal");
                if (!target->is_callable())
                    throw ProblogError(ErrorCode::TypeError,
                                       "call/1: goal is not callable: " + format_term(target));
                goals_ = cons(target, cps_.size(), cont);
                continue;
            }
            if (is_builtin(f, n)) {
                if (exec_builtin(g, f, n)) {
                    goals_ = cont;
                    continue;
                }
                if (!backtrack()) {
                    exhausted_ = true;
                    return std::nullopt;
                }
                continue;
            }
            if (host_.is_meta_functor(f, n)) {
                auto alts = std::make_unique<MetaAlts>();
                alts->choice = host_.make_meta_choice(g);
                push_cp(cont, std::move(alts));
                goals_ = cont;
                if (!cps_.back().alts->next(*this)) {
                    cps_.pop_back();
                    if (!backtrack()) {
                        exhausted_ = true;
                        return std::nullopt;
                    }
                }
                continue;
            }

            const PredicateEntry* entry = prog_.lookup(f, n);
            if (entry && !entry->fact_indices.empty()) {
                auto alts = std::make_unique<FactAlts>();
                alts->call = g;
                alts->facts = &prog_.annotated_facts();
                alts->idx = &entry->fact_indices;
                push_cp(cont, std::move(alts));
                goals_ = cont;
                if (!cps_.back().alts->next(*this)) {
                    cps_.pop_back();
                    if (!backtrack()) {
                        exhausted_ = true;
                        return std::nullopt;
                    }
                }
                continue;
            }
            if (entry && !entry->clause_indices.empty()) {
                auto alts = std::make_unique<ClauseAlts>();
                alts->call = g;
                alts->clauses = &prog_.clauses();
                alts->idx = &entry->clause_indices;
                alts->barrier = cps_.size();
                push_cp(cont, std::move(alts));
                goals_ = cont;
                if (!cps_.back().alts->next(*this)) {
                    cps_.pop_back();
                    if (!backtrack()) {
                        exhausted_ = true;
                        return std::nullopt;
                    }
                }
                continue;
            }
            // Undefined predicate: fails quietly, as in a plain textbook SLD
            // interpreter.
            if (!backtrack()) {
                exhausted_ = true;
                return std::nullopt;
            }
        }
    }

    std::optional<Substitution> make_answer() {
        Substitution s;
        for (const auto& name : query_vars_)
            s.bind(name, resolve(Term::make_variable(name)));
        return s;
    }
};

SolveStream::SolveStream(TermPtr goal, const Program& program, KernelHost& host,
                         long depth_limit)
    : impl_(std::make_unique<Impl>(std::move(goal), program, host, depth_limit)) {}

SolveStream::~SolveStream() = default;
SolveStream::SolveStream(SolveStream&&) noexcept = default;
SolveStream& SolveStream::operator=(SolveStream&&) noexcept = default;

std::optional<Substitution> SolveStream::next() { return impl_->next_answer(); }

} // namespace problog
