#pragma once

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "carapace/ast.hpp"
#include "carapace/errors.hpp"
#include "carapace/validate.hpp"

namespace carapace {

namespace detail {

enum class Tok {
    Ident,
    Integer,
    String,
    Directive, // .decl / .output
    LParen,
    RParen,
    Comma,
    Dot,
    ColonDash,
    Colon,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Tok::Ident;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                t.text += advance();
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            t.kind = Tok::Integer;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                t.text += advance();
            return t;
        }
        if (c == '"') {
            advance();
            t.kind = Tok::String;
            while (true) {
                if (pos_ >= src_.size() || src_[pos_] == '\n')
                    throw ParseError(t.line, t.column, "unterminated string constant");
                char d = advance();
                if (d == '"')
                    break;
                if (d == '\\') {
                    if (pos_ >= src_.size())
                        throw ParseError(t.line, t.column, "unterminated string constant");
                    char e = advance();
                    switch (e) {
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    case '"': t.text += '"'; break;
                    case '\\': t.text += '\\'; break;
                    default: throw ParseError(line_, col_ - 1, std::string("unknown escape \\") + e);
                    }
                } else {
                    t.text += d;
                }
            }
            return t;
        }
        if (c == '.' && at_line_start() && pos_ + 1 < src_.size() &&
            std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            t.kind = Tok::Directive;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
                t.text += advance();
            return t;
        }
        const std::size_t start = pos_;
        advance();
        switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        case '.': t.kind = Tok::Dot; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '=': t.kind = Tok::Eq; break;
        case ':':
            if (peek() == '-') {
                advance();
                t.kind = Tok::ColonDash;
            } else {
                t.kind = Tok::Colon;
            }
            break;
        case '!':
            if (peek() != '=')
                throw ParseError(t.line, t.column, "expected '=' after '!'");
            advance();
            t.kind = Tok::Ne;
            break;
        case '<':
            t.kind = Tok::Lt;
            if (peek() == '=') {
                advance();
                t.kind = Tok::Le;
            }
            break;
        case '>':
            t.kind = Tok::Gt;
            if (peek() == '=') {
                advance();
                t.kind = Tok::Ge;
            }
            break;
        default: throw ParseError(t.line, t.column, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        return t;
    }

private:
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    /// Directives must start a line; elsewhere '.' ends a clause.
    bool at_line_start() const {
        for (std::size_t i = pos_; i-- > 0;) {
            if (src_[i] == '\n')
                return true;
            if (!std::isspace(static_cast<unsigned char>(src_[i])))
                return false;
        }
        return true;
    }

    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { shift(); }

    Program parse() {
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::Directive)
                directive();
            else
                clause();
        }
        finish();
        return std::move(prog_);
    }

private:
    [[noreturn]] void fail(const Token &at, const std::string &msg) { throw ParseError(at.line, at.column, msg); }

    void shift() {
        cur_ = la_ ? std::move(*la_) : lex_.next();
        la_.reset();
    }

    const Token &lookahead() {
        if (!la_)
            la_ = lex_.next();
        return *la_;
    }

    Token expect(Tok kind, const char *what) {
        if (cur_.kind != kind)
            fail(cur_, std::string("expected ") + what + (cur_.kind == Tok::End ? " but reached end of input"
                                                                                 : ", found '" + cur_.text + "'"));
        Token t = std::move(cur_);
        shift();
        return t;
    }

    void directive() {
        Token d = expect(Tok::Directive, "directive");
        if (d.text == "decl") {
            Token name = expect(Tok::Ident, "relation name");
            expect(Tok::LParen, "'('");
            std::vector<std::optional<ValueType>> types;
            while (cur_.kind != Tok::RParen) {
                if (!types.empty())
                    expect(Tok::Comma, "','");
                expect(Tok::Ident, "attribute name");
                std::optional<ValueType> ty;
                if (cur_.kind == Tok::Colon) {
                    shift();
                    Token tn = expect(Tok::Ident, "type name");
                    if (tn.text == "number")
                        ty = ValueType::Number;
                    else if (tn.text == "symbol")
                        ty = ValueType::Symbol;
                    else
                        fail(tn, "unknown type '" + tn.text + "' (expected number or symbol)");
                }
                types.push_back(ty);
            }
            expect(Tok::RParen, "')'");
            auto &info = relation(name, types.size());
            for (std::size_t i = 0; i < types.size(); ++i)
                if (types[i])
                    pin(name, info, i, *types[i]);
        } else if (d.text == "output") {
            Token name = expect(Tok::Ident, "relation name");
            prog_.outputs.push_back(name.text);
            output_tokens_.push_back(name);
        } else {
            fail(d, "unknown directive ." + d.text);
        }
    }

    RelationInfo &relation(const Token &name, std::size_t arity) {
        auto [it, fresh] = prog_.relations.try_emplace(name.text);
        if (fresh) {
            it->second.arity = arity;
            it->second.pinned.assign(arity, std::nullopt);
        } else if (it->second.arity != arity) {
            fail(name, "arity mismatch for relation " + name.text + ": used with " + std::to_string(arity) +
                           " arguments, previously " + std::to_string(it->second.arity));
        }
        return it->second;
    }

    void pin(const Token &at, RelationInfo &info, std::size_t col, ValueType t) {
        if (info.pinned[col] && *info.pinned[col] != t)
            fail(at, "type mismatch for relation " + at.text + " column " + std::to_string(col) + ": " +
                         std::string(to_string(*info.pinned[col])) + " vs " + std::string(to_string(t)));
        info.pinned[col] = t;
    }

    Term term() {
        if (cur_.kind == Tok::Ident) {
            Token t = expect(Tok::Ident, "term");
            if (t.text == "_")
                return Variable{"_" + std::to_string(++anon_)};
            return Variable{t.text};
        }
        if (cur_.kind == Tok::String) {
            Token t = expect(Tok::String, "term");
            return Constant{ValueType::Symbol, prog_.symbols->intern(t.text)};
        }
        bool neg = false;
        Token start = cur_;
        if (cur_.kind == Tok::Minus) {
            neg = true;
            shift();
        }
        Token t = expect(Tok::Integer, "term");
        std::string digits = (neg ? "-" : "") + t.text;
        Value v = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc() || ptr != digits.data() + digits.size())
            fail(start, "integer constant out of range: " + digits);
        return Constant{ValueType::Number, v};
    }

    std::pair<Atom, Token> atom() {
        Token name = expect(Tok::Ident, "relation name");
        expect(Tok::LParen, "'('");
        Atom a;
        a.predicate = name.text;
        while (cur_.kind != Tok::RParen) {
            if (!a.terms.empty())
                expect(Tok::Comma, "','");
            a.terms.push_back(term());
        }
        expect(Tok::RParen, "')'");
        relation(name, a.arity());
        return {std::move(a), name};
    }

    static std::optional<CmpOp> cmp_op(Tok k) {
        switch (k) {
        case Tok::Eq: return CmpOp::Eq;
        case Tok::Ne: return CmpOp::Ne;
        case Tok::Lt: return CmpOp::Lt;
        case Tok::Le: return CmpOp::Le;
        case Tok::Gt: return CmpOp::Gt;
        case Tok::Ge: return CmpOp::Ge;
        default: return std::nullopt;
        }
    }

    static std::optional<ArithOp> arith_op(Tok k) {
        switch (k) {
        case Tok::Plus: return ArithOp::Add;
        case Tok::Minus: return ArithOp::Sub;
        case Tok::Star: return ArithOp::Mul;
        default: return std::nullopt;
        }
    }

    Literal literal() {
        if (cur_.kind == Tok::Ident && lookahead().kind == Tok::LParen)
            return atom().first;
        Token start = cur_;
        Term lhs = term();
        auto op = cmp_op(cur_.kind);
        if (!op)
            fail(cur_, "expected comparison operator after '" + start.text + "'");
        shift();
        Term rhs = term();
        if (auto ar = arith_op(cur_.kind)) {
            if (*op != CmpOp::Eq || !is_variable(lhs))
                fail(cur_, "arithmetic is only allowed as `variable = term op term`");
            shift();
            Term rhs2 = term();
            return Binding{var_name(lhs), *ar, std::move(rhs), std::move(rhs2)};
        }
        return Comparison{*op, std::move(lhs), std::move(rhs)};
    }

    void clause() {
        auto [head, name] = atom();
        if (cur_.kind == Tok::Dot) {
            shift();
            auto &info = prog_.relations.at(head.predicate);
            Tuple t;
            for (std::size_t i = 0; i < head.terms.size(); ++i) {
                const auto *c = std::get_if<Constant>(&head.terms[i]);
                if (!c)
                    fail(name, "non-constant term in fact for relation " + head.predicate);
                pin(name, info, i, c->type);
                t.push_back(c->value);
            }
            facts_[head.predicate].insert(std::move(t));
            return;
        }
        expect(Tok::ColonDash, "'.' or ':-'");
        Rule r;
        r.id = prog_.rules.size();
        r.head = std::move(head);
        r.body.push_back(literal());
        while (cur_.kind == Tok::Comma) {
            shift();
            r.body.push_back(literal());
        }
        expect(Tok::Dot, "'.'");
        prog_.idb.insert(r.head.predicate);
        prog_.rules.push_back(std::move(r));
    }

    std::string synthetic_name(const std::string &rel) const {
        std::string name = rel + "__edb";
        while (prog_.relations.count(name))
            name += "_";
        return name;
    }

    /// Moves facts of rule-defined relations into synthetic EDB relations and
    /// resolves column types.
    void finish() {
        for (auto &[rel, facts] : facts_) {
            if (!prog_.is_idb(rel)) {
                prog_.edb_facts[rel] = std::move(facts);
                continue;
            }
            const auto info = prog_.relations.at(rel);
            auto syn = synthetic_name(rel);
            prog_.relations[syn] = info;
            prog_.edb_facts[syn] = std::move(facts);
            Rule copy;
            copy.id = prog_.rules.size();
            copy.head.predicate = rel;
            Atom body{syn, {}};
            for (std::size_t i = 0; i < info.arity; ++i) {
                copy.head.terms.push_back(Variable{"x" + std::to_string(i)});
                body.terms.push_back(Variable{"x" + std::to_string(i)});
            }
            copy.body.push_back(std::move(body));
            prog_.rules.push_back(std::move(copy));
        }
        for (const auto &o : output_tokens_)
            if (!prog_.relations.count(o.text))
                fail(o, "output relation " + o.text + " is never used");
        auto types = infer_types(prog_);
        for (auto &[name, info] : prog_.relations)
            info.columns = types.columns.at(name);
    }

    Lexer lex_;
    Token cur_;
    std::optional<Token> la_;
    Program prog_;
    std::map<std::string, FactSet> facts_;
    std::vector<Token> output_tokens_;
    std::size_t anon_ = 0;
};

} // namespace detail

/// Syntax-level parse: grammar, arity consistency, constant-only facts.
/// Semantic checks (range restriction, built-in ordering, types) are left to
/// validate().
inline Program parse_unchecked(std::string_view source) { return detail::Parser(source).parse(); }

/// Parses and validates; throws ParseError or ValidationError.
inline Program parse(std::string_view source) {
    Program p = parse_unchecked(source);
    auto diags = validate(p);
    if (!diags.empty())
        throw ValidationError(std::move(diags));
    return p;
}

} // namespace carapace
