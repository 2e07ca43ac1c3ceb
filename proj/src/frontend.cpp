#include "jafun/frontend.hpp"

#include <cctype>
#include <iterator>
#include <unordered_map>

#include "jafun/program.hpp"

namespace jafun {

std::string to_string(const ParseError& e) {
    return std::to_string(e.line) + ":" + std::to_string(e.column) + ": " + e.message;
}

namespace {

enum class Tok {
    Ident,
    KwClass,
    KwExt,
    KwRep,
    KwRwr,
    KwRd,
    KwAtm,
    KwNew,
    KwLet,
    KwIn,
    KwIf,
    KwElse,
    KwThrow,
    KwTry,
    KwCatch,
    KwThrows,
    KwThis,
    KwNull,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Assign,
    EqEq,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

struct ParseFailure {
    ParseError error;
};

[[noreturn]] void fail(const Token& at, const std::string& message) {
    throw ParseFailure{ParseError{at.line, at.column, message}};
}

const std::unordered_map<std::string, Tok>& keyword_table() {
    static const std::unordered_map<std::string, Tok> table = {
        {"class", Tok::KwClass}, {"ext", Tok::KwExt},       {"rep", Tok::KwRep},
        {"rwr", Tok::KwRwr},     {"rd", Tok::KwRd},         {"atm", Tok::KwAtm},
        {"new", Tok::KwNew},     {"let", Tok::KwLet},       {"in", Tok::KwIn},
        {"if", Tok::KwIf},       {"else", Tok::KwElse},     {"throw", Tok::KwThrow},
        {"try", Tok::KwTry},     {"catch", Tok::KwCatch},   {"throws", Tok::KwThrows},
        {"this", Tok::KwThis},   {"null", Tok::KwNull},
    };
    return table;
}

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1;
    std::size_t i = 0;
    auto bump = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (static_cast<unsigned char>(c) > 0x7f) {
            throw ParseFailure{ParseError{line, col, "non-ASCII byte in input"}};
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            bump(c);
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') {
                bump(src[i]);
                ++i;
            }
            continue;
        }
        std::size_t tline = line, tcol = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
                word.push_back(src[i]);
                bump(src[i]);
                ++i;
            }
            auto kw = keyword_table().find(word);
            out.push_back(Token{kw == keyword_table().end() ? Tok::Ident : kw->second,
                                std::move(word), tline, tcol});
            continue;
        }
        auto single = [&](Tok k) {
            out.push_back(Token{k, std::string(1, c), tline, tcol});
            bump(c);
            ++i;
        };
        switch (c) {
        case '{': single(Tok::LBrace); break;
        case '}': single(Tok::RBrace); break;
        case '(': single(Tok::LParen); break;
        case ')': single(Tok::RParen); break;
        case ';': single(Tok::Semi); break;
        case ',': single(Tok::Comma); break;
        case '.': single(Tok::Dot); break;
        case '=':
            if (i + 1 < src.size() && src[i + 1] == '=') {
                out.push_back(Token{Tok::EqEq, "==", tline, tcol});
                bump('=');
                bump('=');
                i += 2;
            } else {
                single(Tok::Assign);
            }
            break;
        default:
            throw ParseFailure{ParseError{tline, tcol,
                                          std::string("unexpected character '") + c + "'"}};
        }
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program parse() {
        Program p;
        while (peek().kind != Tok::End) p.push_back(parse_class());
        return p;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    const Token& expect(Tok k, const std::string& what) {
        if (peek().kind != k) fail(peek(), "expected " + what);
        return advance();
    }
    std::string ident() {
        if (peek().kind != Tok::Ident) fail(peek(), "expected identifier");
        return advance().text;
    }

    std::optional<AccessMode> mode_opt() {
        switch (peek().kind) {
        case Tok::KwRwr: advance(); return AccessMode::RWR;
        case Tok::KwRd: advance(); return AccessMode::RD;
        case Tok::KwAtm: advance(); return AccessMode::ATM;
        default: return std::nullopt;
        }
    }
    AccessMode mode_required() {
        auto m = mode_opt();
        if (!m) fail(peek(), "expected access mode (rwr, rd or atm)");
        return *m;
    }

    ClassDecl parse_class() {
        expect(Tok::KwClass, "'class'");
        ClassDecl c;
        c.name = ident();
        if (peek().kind == Tok::KwExt) {
            advance();
            c.extends = ident();
        }
        expect(Tok::LBrace, "'{'");
        while (peek().kind != Tok::RBrace) parse_member(c);
        expect(Tok::RBrace, "'}'");
        return c;
    }

    void parse_member(ClassDecl& c) {
        if (peek().kind == Tok::KwRep) {
            advance();
            FieldDecl f;
            f.fmode = FieldMode::REP;
            f.cls = ident();
            f.name = ident();
            expect(Tok::Semi, "';'");
            c.fields.push_back(std::move(f));
            return;
        }
        const Token& start = peek();
        std::optional<AccessMode> m1 = mode_opt();
        std::string first = ident();
        std::optional<AccessMode> m2 = mode_opt();
        std::string second = ident();
        if (peek().kind == Tok::LParen) {
            c.methods.push_back(parse_method(start, m1, std::move(first), m2, std::move(second)));
            return;
        }
        if (!m1 && !m2 && peek().kind == Tok::Semi) {
            advance();
            c.fields.push_back(FieldDecl{FieldMode::PLAIN, std::move(first), std::move(second)});
            return;
        }
        if (peek().kind == Tok::Semi)
            fail(start, "access modes are not allowed on field declarations");
        fail(peek(), "expected '(' or ';' in class member");
    }

    MethodDecl parse_method(const Token& start, std::optional<AccessMode> retMode,
                            std::string retCls, std::optional<AccessMode> recvMode,
                            std::string name) {
        MethodDecl m;
        m.ret_cls = std::move(retCls);
        m.name = std::move(name);

        bool sawMode = retMode.has_value() || recvMode.has_value();
        bool sawBare = !retMode.has_value() || !recvMode.has_value();

        expect(Tok::LParen, "'('");
        while (peek().kind != Tok::RParen) {
            if (!m.params.empty()) expect(Tok::Comma, "','");
            ParamDecl par;
            auto pm = mode_opt();
            sawMode = sawMode || pm.has_value();
            sawBare = sawBare || !pm.has_value();
            par.mode = pm.value_or(AccessMode::RWR);
            par.cls = ident();
            par.name = ident();
            m.params.push_back(std::move(par));
        }
        advance();
        if (peek().kind == Tok::KwThrows) {
            advance();
            while (true) {
                ThrowsDecl t;
                auto tm = mode_opt();
                sawMode = sawMode || tm.has_value();
                sawBare = sawBare || !tm.has_value();
                t.mode = tm.value_or(AccessMode::RWR);
                t.cls = ident();
                m.throws_list.push_back(std::move(t));
                if (peek().kind != Tok::Comma) break;
                advance();
            }
        }
        if (sawMode && sawBare)
            fail(start, "mixed access-mode annotations in method '" + m.name +
                            "' (all or none required)");
        m.annotated = sawMode;
        m.ret_mode = retMode.value_or(AccessMode::RWR);
        m.recv_mode = recvMode.value_or(AccessMode::RWR);

        expect(Tok::LBrace, "'{'");
        m.body = parse_expr();
        expect(Tok::RBrace, "'}'");
        return m;
    }

    Value parse_val() {
        switch (peek().kind) {
        case Tok::Ident: return Value::var(advance().text);
        case Tok::KwThis: advance(); return Value::this_ref();
        case Tok::KwNull: advance(); return Value::null();
        default: fail(peek(), "expected a value (identifier, 'this' or 'null')");
        }
    }

    std::vector<Value> parse_vals() {
        std::vector<Value> out;
        expect(Tok::LParen, "'('");
        while (peek().kind != Tok::RParen) {
            if (!out.empty()) {
                if (peek().kind != Tok::Comma)
                    fail(peek(), "expected ',' or ')' in argument list");
                advance();
            }
            out.push_back(parse_val());
        }
        advance();
        return out;
    }

    ExprPtr parse_expr() {
        switch (peek().kind) {
        case Tok::KwNew: {
            advance();
            AccessMode mode = mode_required();
            std::string cls = ident();
            return make_new(mode, std::move(cls), parse_vals());
        }
        case Tok::KwLet: {
            advance();
            std::string cls = ident();
            std::string var = ident();
            expect(Tok::Assign, "'='");
            ExprPtr bound = parse_expr();
            expect(Tok::KwIn, "'in'");
            ExprPtr body = parse_expr();
            return make_let(std::move(cls), std::move(var), std::move(bound), std::move(body));
        }
        case Tok::KwIf: {
            advance();
            expect(Tok::LParen, "'('");
            Value lhs = parse_val();
            expect(Tok::EqEq, "'=='");
            Value rhs = parse_val();
            expect(Tok::RParen, "')'");
            ExprPtr thenBranch = parse_expr();
            expect(Tok::KwElse, "'else'");
            ExprPtr elseBranch = parse_expr();
            return make_if(std::move(lhs), std::move(rhs), std::move(thenBranch),
                           std::move(elseBranch));
        }
        case Tok::KwThrow: {
            advance();
            return make_throw(parse_val());
        }
        case Tok::KwTry: {
            advance();
            expect(Tok::LBrace, "'{'");
            ExprPtr body = parse_expr();
            expect(Tok::RBrace, "'}'");
            expect(Tok::KwCatch, "'catch'");
            expect(Tok::LParen, "'('");
            AccessMode mode = mode_required();
            std::string cls = ident();
            std::string var = ident();
            expect(Tok::RParen, "')'");
            expect(Tok::LBrace, "'{'");
            ExprPtr handler = parse_expr();
            expect(Tok::RBrace, "'}'");
            return make_try(std::move(body), mode, std::move(cls), std::move(var),
                            std::move(handler));
        }
        default: {
            Value v = parse_val();
            if (peek().kind != Tok::Dot) return make_val(std::move(v));
            advance();
            std::string member = ident();
            if (peek().kind == Tok::LParen)
                return make_invoke(std::move(v), std::move(member), parse_vals());
            if (peek().kind == Tok::Assign) {
                advance();
                return make_field_write(std::move(v), std::move(member), parse_val());
            }
            return make_field_read(std::move(v), std::move(member));
        }
        }
    }
};

}  // namespace

ParseResult parse_program(const std::string& source) {
    try {
        Parser parser(lex(source));
        return parser.parse();
    } catch (const ParseFailure& f) {
        return f.error;
    }
}

Program load(Program p) {
    Program out;
    if (find_class(p, kObjectClass) == nullptr) {
        out.push_back(ClassDecl{kObjectClass, std::nullopt, {}, {}});
    }
    if (find_class(p, kNpeClass) == nullptr) {
        out.push_back(ClassDecl{kNpeClass, std::string(kObjectClass), {}, {}});
    }
    out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    return out;
}

}  // namespace jafun
