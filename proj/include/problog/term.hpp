#ifndef PROBLOG_TERM_HPP
#define PROBLOG_TERM_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace problog {

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable first-order term. Structural equality; hash and groundness are
// computed once at construction.
class Term {
public:
    enum class Tag { Variable, Atom, Int, Float, Compound };

    static TermPtr make_variable(std::string name);
    static TermPtr make_atom(std::string name);
    static TermPtr make_int(long long value);
    static TermPtr make_float(double value);
    static TermPtr make_compound(std::string functor, std::vector<TermPtr> args);

    Tag tag() const { return tag_; }
    const std::string& name() const { return name_; }   // variable/atom/functor
    long long int_value() const { return int_; }
    double float_value() const { return float_; }
    const std::vector<TermPtr>& args() const { return args_; }
    int arity() const { return static_cast<int>(args_.size()); }

    bool is_variable() const { return tag_ == Tag::Variable; }
    bool is_atom() const { return tag_ == Tag::Atom; }
    bool is_number() const { return tag_ == Tag::Int || tag_ == Tag::Float; }
    bool is_callable() const { return tag_ == Tag::Atom || tag_ == Tag::Compound; }
    bool is_ground() const { return ground_; }

    std::size_t hash() const { return hash_; }

private:
    Term() = default;

    Tag tag_ = Tag::Atom;
    std::string name_;
    long long int_ = 0;
    double float_ = 0.0;
    std::vector<TermPtr> args_;
    bool ground_ = true;
    std::size_t hash_ = 0;
};

bool term_equal(const TermPtr& a, const TermPtr& b);

// Total order: Variable < Int/Float (numeric) < Atom < Compound; numbers by
// value, atoms by name, compounds by arity, then functor, then arguments.
int term_compare(const TermPtr& a, const TermPtr& b);

struct TermPtrHash {
    std::size_t operator()(const TermPtr& t) const { return t->hash(); }
};
struct TermPtrEqual {
    bool operator()(const TermPtr& a, const TermPtr& b) const { return term_equal(a, b); }
};
struct TermPtrLess {
    bool operator()(const TermPtr& a, const TermPtr& b) const {
        return term_compare(a, b) < 0;
    }
};

// Canonical text. Variables are renamed to _V0, _V1, ... in order of first
// occurrence so that parsing the result reproduces a variant of the term.
std::string format_term(const TermPtr& t);

// Text with the variables' actual names; used in diagnostics.
std::string format_term_raw(const TermPtr& t);

// Shortest round-trip decimal rendering of a double (no trailing ".0" is
// added; "0.8" stays "0.8").
std::string format_double(double v);

} // namespace problog

#endif
