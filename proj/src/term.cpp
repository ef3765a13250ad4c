#include "problog/term.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace problog {

namespace {

std::size_t hash_mix(std::size_t seed, std::size_t v) {
    // boost::hash_combine
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

bool plain_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(s[0] >= 'a' && s[0] <= 'z')) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_';
        if (!ok) return false;
    }
    return true;
}

// Binary operators rendered infix so formatted conjunctions and comparisons
// stay parseable.
bool infix_functor(const std::string& name) {
    static const char* ops[] = {",",  ";",  "->", "=",  "==", "\\==",
                                "is", "<",  "=<", ">",  ">=", "=:=",
                                "+",  "-",  "*",  "/"};
    for (const char* op : ops)
        if (name == op) return true;
    return false;
}

void quote_atom(std::string& out, const std::string& name) {
    out += '\'';
    for (char c : name) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    out += '\'';
}

using VarNames = std::map<std::string, std::string>;

void format_rec(std::string& out, const TermPtr& t, VarNames* canon) {
    switch (t->tag()) {
        case Term::Tag::Variable: {
            if (canon) {
                auto it = canon->find(t->name());
                if (it == canon->end()) {
                    std::string fresh = "_V" + std::to_string(canon->size());
                    it = canon->emplace(t->name(), std::move(fresh)).first;
                }
                out += it->second;
            } else {
                out += t->name();
            }
            break;
        }
        case Term::Tag::Atom:
            if (plain_identifier(t->name()))
                out += t->name();
            else
                quote_atom(out, t->name());
            break;
        case Term::Tag::Int:
            out += std::to_string(t->int_value());
            break;
        case Term::Tag::Float:
            out += format_double(t->float_value());
            break;
        case Term::Tag::Compound: {
            if (t->arity() == 2 && infix_functor(t->name())) {
                out += '(';
                format_rec(out, t->args()[0], canon);
                if (t->name() != ",") out += ' ';
                out += t->name();
                out += ' ';
                format_rec(out, t->args()[1], canon);
                out += ')';
                break;
            }
            if (plain_identifier(t->name()))
                out += t->name();
            else
                quote_atom(out, t->name());
            out += '(';
            for (int i = 0; i < t->arity(); ++i) {
                if (i) out += ',';
                format_rec(out, t->args()[i], canon);
            }
            out += ')';
            break;
        }
    }
}

} // namespace

TermPtr Term::make_variable(std::string name) {
    auto t = std::shared_ptr<Term>(new Term());
    t->tag_ = Tag::Variable;
    t->name_ = std::move(name);
    t->ground_ = false;
    t->hash_ = hash_mix(0x56, std::hash<std::string>{}(t->name_));
    return t;
}

TermPtr Term::make_atom(std::string name) {
    auto t = std::shared_ptr<Term>(new Term());
    t->tag_ = Tag::Atom;
    t->name_ = std::move(name);
    t->hash_ = hash_mix(0xA7, std::hash<std::string>{}(t->name_));
    return t;
}

TermPtr Term::make_int(long long value) {
    auto t = std::shared_ptr<Term>(new Term());
    t->tag_ = Tag::Int;
    t->int_ = value;
    t->hash_ = hash_mix(0x17, std::hash<long long>{}(value));
    return t;
}

TermPtr Term::make_float(double value) {
    auto t = std::shared_ptr<Term>(new Term());
    t->tag_ = Tag::Float;
    t->float_ = value;
    t->hash_ = hash_mix(0xF1, std::hash<double>{}(value));
    return t;
}

TermPtr Term::make_compound(std::string functor, std::vector<TermPtr> args) {
    auto t = std::shared_ptr<Term>(new Term());
    t->tag_ = Tag::Compound;
    t->name_ = std::move(functor);
    t->args_ = std::move(args);
    std::size_t h = hash_mix(0xC0, std::hash<std::string>{}(t->name_));
    h = hash_mix(h, t->args_.size());
    for (const auto& a : t->args_) {
        h = hash_mix(h, a->hash());
        if (!a->is_ground()) t->ground_ = false;
    }
    t->hash_ = h;
    return t;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->tag() != b->tag() || a->hash() != b->hash()) return false;
    switch (a->tag()) {
        case Term::Tag::Variable:
        case Term::Tag::Atom: return a->name() == b->name();
        case Term::Tag::Int: return a->int_value() == b->int_value();
        case Term::Tag::Float: return a->float_value() == b->float_value();
        case Term::Tag::Compound: {
            if (a->name() != b->name() || a->arity() != b->arity()) return false;
            for (int i = 0; i < a->arity(); ++i)
                if (!term_equal(a->args()[i], b->args()[i])) return false;
            return true;
        }
    }
    return false;
}

namespace {
int tag_rank(Term::Tag t) {
    switch (t) {
        case Term::Tag::Variable: return 0;
        case Term::Tag::Int:
        case Term::Tag::Float: return 1;
        case Term::Tag::Atom: return 2;
        case Term::Tag::Compound: return 3;
    }
    return 4;
}
} // namespace

int term_compare(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return 0;
    int ra = tag_rank(a->tag()), rb = tag_rank(b->tag());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a->tag()) {
        case Term::Tag::Variable:
        case Term::Tag::Atom:
            return a->name().compare(b->name()) < 0 ? -1 : (a->name() == b->name() ? 0 : 1);
        case Term::Tag::Int:
        case Term::Tag::Float: {
            double va = a->tag() == Term::Tag::Int ? static_cast<double>(a->int_value())
                                                   : a->float_value();
            double vb = b->tag() == Term::Tag::Int ? static_cast<double>(b->int_value())
                                                   : b->float_value();
            if (va != vb) return va < vb ? -1 : 1;
            // Int sorts before Float at equal value so the order is total.
            int ta = a->tag() == Term::Tag::Int ? 0 : 1;
            int tb = b->tag() == Term::Tag::Int ? 0 : 1;
            return ta == tb ? 0 : (ta < tb ? -1 : 1);
        }
        case Term::Tag::Compound: {
            if (a->arity() != b->arity()) return a->arity() < b->arity() ? -1 : 1;
            int c = a->name().compare(b->name());
            if (c != 0) return c < 0 ? -1 : 1;
            for (int i = 0; i < a->arity(); ++i) {
                c = term_compare(a->args()[i], b->args()[i]);
                if (c != 0) return c;
            }
            return 0;
        }
    }
    return 0;
}

std::string format_term(const TermPtr& t) {
    std::string out;
    VarNames canon;
    format_rec(out, t, &canon);
    return out;
}

std::string format_term_raw(const TermPtr& t) {
    std::string out;
    format_rec(out, t, nullptr);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    // to_chars may print integral doubles without a decimal point; keep a
    // marker so the text re-parses as a float.
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

} // namespace problog
