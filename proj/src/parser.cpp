#include "problog/parser.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "problog/errors.hpp"

namespace problog {

namespace {

enum class Tok {
    Atom,     // identifier or quoted
    Var,
    Int,
    Float,
    Symbol,   // operator text such as :: :- -> == =<
    Comma,
    Semicolon,
    Cut,
    LParen,
    RParen,
    Dot,      // statement terminator
    End,
};

struct Token {
    Tok kind;
    std::string text;
    long long int_value = 0;
    double float_value = 0.0;
    int line = 1;
    int column = 1;
};

bool symbol_char(char c) {
    return c == '+' || c == '-' || c == '*' || c == '/' || c == '\\' || c == '<' ||
           c == '>' || c == '=' || c == ':' || c == '~' || c == '?' || c == '@' ||
           c == '#' || c == '&' || c == '^';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { scan_all(); }
    const std::vector<Token>& tokens() const { return tokens_; }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw ProblogError(ErrorCode::SyntaxError, "syntax error: " + msg, line_, col_);
    }

    char peek(int k = 0) const {
        return pos_ + k < text_.size() ? text_[pos_ + k] : '\0';
    }
    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    bool at_end() const { return pos_ >= text_.size(); }

    void scan_all() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (c == '%') {
                while (!at_end() && peek() != '\n') advance();
                continue;
            }
            scan_token();
        }
        tokens_.push_back({Tok::End, "", 0, 0.0, line_, col_});
    }

    void push(Tok kind, std::string text, int line, int col) {
        Token t{kind, std::move(text), 0, 0.0, line, col};
        tokens_.push_back(std::move(t));
    }

    void scan_token() {
        int line = line_, col = col_;
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c))) {
            scan_number(line, col);
            return;
        }
        if (std::islower(static_cast<unsigned char>(c))) {
            std::string name;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                name += advance();
            push(Tok::Atom, std::move(name), line, col);
            return;
        }
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
            std::string name;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                name += advance();
            push(Tok::Var, std::move(name), line, col);
            return;
        }
        switch (c) {
            case '\'': {
                advance();
                std::string name;
                for (;;) {
                    if (at_end()) fail("unterminated quoted atom");
                    char d = advance();
                    if (d == '\\') {
                        if (at_end()) fail("unterminated escape");
                        char e = advance();
                        if (e == 'n') name += '\n';
                        else if (e == 't') name += '\t';
                        else name += e;   // \' \\ and anything else literally
                        continue;
                    }
                    if (d == '\'') break;
                    name += d;
                }
                push(Tok::Atom, std::move(name), line, col);
                return;
            }
            case ',': advance(); push(Tok::Comma, ",", line, col); return;
            case ';': advance(); push(Tok::Semicolon, ";", line, col); return;
            case '!': advance(); push(Tok::Cut, "!", line, col); return;
            case '(': advance(); push(Tok::LParen, "(", line, col); return;
            case ')': advance(); push(Tok::RParen, ")", line, col); return;
            case '.': advance(); push(Tok::Dot, ".", line, col); return;
            default: break;
        }
        if (symbol_char(c)) {
            std::string sym;
            while (!at_end() && symbol_char(peek())) sym += advance();
            push(Tok::Symbol, std::move(sym), line, col);
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void scan_number(int line, int col) {
        std::string num;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
        bool is_float = false;
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            is_float = true;
            num += advance();
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
        }
        if (peek() == 'e' || peek() == 'E') {
            char next = peek(1);
            char next2 = peek(2);
            if (std::isdigit(static_cast<unsigned char>(next)) ||
                ((next == '+' || next == '-') && std::isdigit(static_cast<unsigned char>(next2)))) {
                is_float = true;
                num += advance();
                if (peek() == '+' || peek() == '-') num += advance();
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
            }
        }
        Token t{is_float ? Tok::Float : Tok::Int, num, 0, 0.0, line, col};
        if (is_float)
            t.float_value = std::stod(num);
        else
            t.int_value = std::stoll(num);
        tokens_.push_back(std::move(t));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::vector<Token> tokens_;
};

// Fixed operator table, paper-scope only:
//   1100 xfy ;   1050 xfy ->   1000 xfy ,
//   700 xfx  =  ==  \==  is  <  =<  >  >=  =:=
//   500 yfx  + -      400 yfx  * /
class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text), toks_(lexer_.tokens()) {}

    Program parse_program() {
        std::vector<AnnotatedFact> facts;
        std::vector<Clause> clauses;
        while (!check(Tok::End)) {
            begin_statement();
            parse_statement(facts, clauses);
        }
        return Program::build(std::move(facts), std::move(clauses));
    }

    TermPtr parse_query() {
        begin_statement();
        if (check(Tok::End)) fail("empty query");
        TermPtr t = parse_term_1100();
        if (check(Tok::Dot)) next();
        expect(Tok::End, "end of query");
        if (!t->is_callable())
            throw ProblogError(ErrorCode::NonCallable,
                               "query error: goal is not callable: " + format_term(t));
        return t;
    }

private:
    const Token& peek(int k = 0) const {
        std::size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() { return toks_[pos_++]; }
    bool check(Tok kind) const { return peek().kind == kind; }
    bool check_symbol(const char* s) const {
        return peek().kind == Tok::Symbol && peek().text == s;
    }
    bool check_atom(const char* s) const {
        return peek().kind == Tok::Atom && peek().text == s;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ProblogError(ErrorCode::SyntaxError, "syntax error: " + msg, t.line, t.column);
    }
    void expect(Tok kind, const char* what) {
        if (!check(kind)) fail(std::string("expected ") + what);
        next();
    }

    void begin_statement() { vars_.clear(); }

    TermPtr lookup_var(const std::string& name) {
        if (name == "_")
            return Term::make_variable("_A" + std::to_string(anon_counter_++));
        auto it = vars_.find(name);
        if (it == vars_.end())
            it = vars_.emplace(name, Term::make_variable(name)).first;
        return it->second;
    }

    void parse_statement(std::vector<AnnotatedFact>& facts, std::vector<Clause>& clauses) {
        // `P :: head.` with up to three tokens of lookahead for the label.
        bool neg_prob = check_symbol("-") &&
                        (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float) &&
                        peek(2).kind == Tok::Symbol && peek(2).text == "::";
        bool prob_label =
            neg_prob || ((check(Tok::Int) || check(Tok::Float)) && peek(1).kind == Tok::Symbol &&
                         peek(1).text == "::");
        if (prob_label) {
            int line = peek().line, col = peek().column;
            double sign = 1.0;
            if (neg_prob) {
                next();
                sign = -1.0;
            }
            const Token& num = next();
            double p = sign * (num.kind == Tok::Int ? static_cast<double>(num.int_value)
                                                    : num.float_value);
            next();   // ::
            if (p < 0.0 || p > 1.0)
                throw ProblogError(ErrorCode::ProbabilityOutOfRange,
                                   "probability out of range [0,1]: " + std::to_string(p), line,
                                   col);
            TermPtr head = parse_primary();
            if (!head->is_callable()) fail("annotated fact head must be callable");
            expect(Tok::Dot, "'.'");
            AnnotatedFact f;
            f.index = static_cast<int>(facts.size());
            f.probability = p;
            f.head = head;
            facts.push_back(std::move(f));
            return;
        }

        TermPtr head = parse_primary();
        if (!head->is_callable()) fail("clause head must be callable");
        Clause c;
        c.head = head;
        if (check_symbol(":-")) {
            next();
            TermPtr body = parse_term_1100();
            flatten_conjunction(body, c.body);
        }
        expect(Tok::Dot, "'.'");
        clauses.push_back(std::move(c));
    }

    static void flatten_conjunction(const TermPtr& t, std::vector<TermPtr>& out) {
        if (t->tag() == Term::Tag::Compound && t->name() == "," && t->arity() == 2) {
            flatten_conjunction(t->args()[0], out);
            flatten_conjunction(t->args()[1], out);
        } else {
            out.push_back(t);
        }
    }

    TermPtr parse_term_1100() {
        TermPtr a = parse_term_1050();
        if (check(Tok::Semicolon)) {
            next();
            return Term::make_compound(";", {a, parse_term_1100()});
        }
        return a;
    }

    TermPtr parse_term_1050() {
        TermPtr a = parse_term_1000();
        if (check_symbol("->")) {
            next();
            return Term::make_compound("->", {a, parse_term_1050()});
        }
        return a;
    }

    TermPtr parse_term_1000() {
        TermPtr a = parse_term_700();
        if (check(Tok::Comma)) {
            next();
            return Term::make_compound(",", {a, parse_term_1000()});
        }
        return a;
    }

    bool comparison_op(std::string& name) const {
        static const char* symbols[] = {"=", "==", "\\==", "<", "=<", ">", ">=", "=:="};
        if (peek().kind == Tok::Symbol) {
            for (const char* s : symbols)
                if (peek().text == s) {
                    name = s;
                    return true;
                }
        }
        if (check_atom("is")) {
            name = "is";
            return true;
        }
        return false;
    }

    TermPtr parse_term_700() {
        TermPtr a = parse_term_500();
        std::string op;
        if (comparison_op(op)) {
            next();
            return Term::make_compound(op, {a, parse_term_500()});
        }
        return a;
    }

    TermPtr parse_term_500() {
        TermPtr a = parse_term_400();
        while (check_symbol("+") || check_symbol("-")) {
            std::string op = next().text;
            a = Term::make_compound(op, {a, parse_term_400()});
        }
        return a;
    }

    TermPtr parse_term_400() {
        TermPtr a = parse_primary();
        while (check_symbol("*") || check_symbol("/")) {
            std::string op = next().text;
            a = Term::make_compound(op, {a, parse_primary()});
        }
        return a;
    }

    TermPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: {
                next();
                return Term::make_int(t.int_value);
            }
            case Tok::Float: {
                next();
                return Term::make_float(t.float_value);
            }
            case Tok::Var: {
                next();
                return lookup_var(t.text);
            }
            case Tok::Cut: {
                next();
                return Term::make_atom("!");
            }
            case Tok::LParen: {
                next();
                TermPtr inner = parse_term_1100();
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::Atom: {
                std::string name = next().text;
                if (check(Tok::LParen)) {
                    next();
                    std::vector<TermPtr> args;
                    args.push_back(parse_arg());
                    while (check(Tok::Comma)) {
                        next();
                        args.push_back(parse_arg());
                    }
                    expect(Tok::RParen, "')'");
                    return Term::make_compound(std::move(name), std::move(args));
                }
                return Term::make_atom(std::move(name));
            }
            case Tok::Symbol: {
                if (t.text == "-" &&
                    (peek(1).kind == Tok::Int || peek(1).kind == Tok::Float)) {
                    next();
                    const Token& num = next();
                    if (num.kind == Tok::Int) return Term::make_int(-num.int_value);
                    return Term::make_float(-num.float_value);
                }
                fail("unexpected operator '" + t.text + "'");
            }
            default: fail("unexpected token");
        }
    }

    // Argument positions admit everything below the ','/2 level.
    TermPtr parse_arg() { return parse_term_700(); }

    Lexer lexer_;
    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    std::map<std::string, TermPtr> vars_;
    int anon_counter_ = 0;
};

// Control constructs, built-ins, and meta-call predicates are resolved by the
// kernel before program lookup; defining them in a program would be dead code,
// so reject it outright.
const std::set<std::pair<std::string, int>>& reserved_predicates() {
    static const std::set<std::pair<std::string, int>> reserved = {
        {",", 2},      {";", 2},    {"->", 2},   {"!", 0},    {"true", 0},
        {"fail", 0},   {"false", 0}, {"call", 1}, {"=", 2},    {"==", 2},
        {"\\==", 2},   {"is", 2},   {"<", 2},    {"=<", 2},   {">", 2},
        {">=", 2},     {"=:=", 2},  {"problog_inference", 2}, {"problog_inference", 3},
        {"problog_inference", 4},   {"problog_not", 1},       {"problog_not", 2},
        {"problog_answers", 2},     {"problog_answers", 3},
    };
    return reserved;
}

} // namespace

Program Program::build(std::vector<AnnotatedFact> facts, std::vector<Clause> clauses) {
    Program p;
    p.facts_ = std::move(facts);
    p.clauses_ = std::move(clauses);
    for (std::size_t i = 0; i < p.clauses_.size(); ++i) {
        const TermPtr& head = p.clauses_[i].head;
        PredicateKey key{head->name(), head->arity()};
        if (reserved_predicates().count({key.functor, key.arity}))
            throw ProblogError(ErrorCode::SyntaxError,
                               "cannot redefine built-in predicate " + key.functor + "/" +
                                   std::to_string(key.arity));
        p.index_[key].clause_indices.push_back(i);
    }
    for (std::size_t i = 0; i < p.facts_.size(); ++i) {
        const TermPtr& head = p.facts_[i].head;
        PredicateKey key{head->name(), head->arity()};
        if (reserved_predicates().count({key.functor, key.arity}))
            throw ProblogError(ErrorCode::SyntaxError,
                               "cannot redefine built-in predicate " + key.functor + "/" +
                                   std::to_string(key.arity));
        PredicateEntry& entry = p.index_[key];
        if (!entry.clause_indices.empty())
            throw ProblogError(ErrorCode::MixedDefinition,
                               "predicate " + key.functor + "/" + std::to_string(key.arity) +
                                   " is defined both by clauses and by annotated facts");
        entry.fact_indices.push_back(i);
    }
    for (const auto& [key, entry] : p.index_) {
        if (!entry.clause_indices.empty() && !entry.fact_indices.empty())
            throw ProblogError(ErrorCode::MixedDefinition,
                               "predicate " + key.functor + "/" + std::to_string(key.arity) +
                                   " is defined both by clauses and by annotated facts");
    }
    return p;
}

const PredicateEntry* Program::lookup(const std::string& functor, int arity) const {
    auto it = index_.find(PredicateKey{functor, arity});
    return it == index_.end() ? nullptr : &it->second;
}

Program parse_program(std::string_view text) { return Parser(text).parse_program(); }

TermPtr parse_query(std::string_view text) { return Parser(text).parse_query(); }

} // namespace problog
