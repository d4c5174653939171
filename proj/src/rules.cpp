#include "cep/rules.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>

namespace cep {
namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string_view text;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_trivia();
        Token tok;
        tok.span = here();
        if (pos_ >= src_.size()) {
            tok.span.end = tok.span.begin;
            return tok;
        }
        const std::size_t start = pos_;
        const unsigned char c = static_cast<unsigned char>(src_[pos_]);
        if (std::isalpha(c) || c == '_') {
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            tok.kind = Tok::Ident;
        } else if (std::isdigit(c)) {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
            tok.kind = Tok::Int;
        } else if (std::string_view(",;{}():=").find(static_cast<char>(c)) != std::string_view::npos) {
            advance();
            tok.kind = Tok::Punct;
        } else {
            SourceSpan s = tok.span;
            s.end = s.begin + 1;
            throw ParseError(ParseError::Kind::Syntax, s,
                             std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
        tok.text = src_.substr(start, pos_ - start);
        tok.span.end = pos_;
        return tok;
    }

private:
    SourceSpan here() const { return SourceSpan{line_, col_, pos_, pos_}; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
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

struct PendingPattern {
    Token class_name;
    std::size_t count;
    Token count_tok;
    std::size_t window;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

    RuleSet parse() {
        RuleSet rs;
        expect_keyword("classes");
        std::map<std::string, ClassId, std::less<>> class_ids;
        do {
            Token name = expect_ident("class name");
            if (class_ids.count(name.text))
                semantic(name.span, "duplicate class '" + std::string(name.text) + "'");
            class_ids.emplace(std::string(name.text), rs.classes.size());
            rs.classes.emplace_back(name.text);
        } while (accept(","));
        expect(";");

        std::map<std::string, FluentId, std::less<>> fluent_ids;
        do {
            expect_keyword("fluent");
            Token name = expect_ident("fluent name");
            if (fluent_ids.count(name.text))
                semantic(name.span, "duplicate fluent '" + std::string(name.text) + "'");
            const FluentId id = rs.fluents.size();
            fluent_ids.emplace(std::string(name.text), id);
            rs.fluents.emplace_back(name.text);

            expect("{");
            for (Polarity p : {Polarity::Start, Polarity::End}) {
                expect_keyword(to_string(p));
                expect(":");
                PendingPattern pat = pattern();
                expect(";");
                auto it = class_ids.find(pat.class_name.text);
                if (it == class_ids.end())
                    semantic(pat.class_name.span, "unknown class '" + std::string(pat.class_name.text) + "'");
                if (pat.window < 2) semantic(pat.count_tok.span, "window must be at least 2");
                if (pat.count < 2) semantic(pat.count_tok.span, "count must be at least 2");
                if (pat.count > pat.window) semantic(pat.count_tok.span, "count exceeds window");
                rs.rules.push_back(PatternRule{id, p, it->second, pat.count, pat.window});
            }
            expect("}");
        } while (tok_.kind != Tok::End);
        return rs;
    }

private:
    PendingPattern pattern() {
        PendingPattern pat{};
        expect_keyword("repeat");
        expect("(");
        pat.class_name = expect_ident("class name");
        expect(",");
        expect_keyword("count");
        expect("=");
        pat.count_tok = tok_;
        pat.count = expect_int();
        expect(",");
        expect_keyword("window");
        expect("=");
        pat.window = expect_int();
        expect(")");
        return pat;
    }

    [[noreturn]] void syntax(const std::string& what) const {
        std::string found = tok_.kind == Tok::End ? "end of input" : "'" + std::string(tok_.text) + "'";
        throw ParseError(ParseError::Kind::Syntax, tok_.span, "expected " + what + ", found " + found);
    }

    [[noreturn]] void semantic(const SourceSpan& span, const std::string& msg) const {
        throw ParseError(ParseError::Kind::Semantic, span, msg);
    }

    bool accept(std::string_view punct) {
        if (tok_.kind == Tok::Punct && tok_.text == punct) {
            tok_ = lex_.next();
            return true;
        }
        return false;
    }

    void expect(std::string_view punct) {
        if (!accept(punct)) syntax("'" + std::string(punct) + "'");
    }

    void expect_keyword(std::string_view kw) {
        if (tok_.kind != Tok::Ident || tok_.text != kw) syntax("'" + std::string(kw) + "'");
        tok_ = lex_.next();
    }

    Token expect_ident(const char* what) {
        if (tok_.kind != Tok::Ident) syntax(what);
        Token t = tok_;
        tok_ = lex_.next();
        return t;
    }

    std::size_t expect_int() {
        if (tok_.kind != Tok::Int) syntax("integer");
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), value);
        if (ec != std::errc()) {
            throw ParseError(ParseError::Kind::Syntax, tok_.span, "integer out of range");
        }
        tok_ = lex_.next();
        return value;
    }

    Lexer lex_;
    Token tok_;
};

}  // namespace

RuleSet parse_ruleset(std::string_view text) {
    RuleSet rs = Parser(text).parse();
    // The grammar already enforces one start and one end rule per fluent.
    require_valid(rs);
    return rs;
}

std::string pretty_print(const RuleSet& rs) {
    std::ostringstream out;
    out << "classes ";
    for (std::size_t i = 0; i < rs.classes.size(); ++i) out << (i ? ", " : "") << rs.classes[i];
    out << ";\n";
    for (FluentId f = 0; f < rs.fluents.size(); ++f) {
        out << "\nfluent " << rs.fluents[f] << " {\n";
        for (Polarity p : {Polarity::Start, Polarity::End}) {
            const auto& r = rs.rule_for(f, p);
            out << "  " << to_string(p) << ": repeat(" << rs.classes[r.trigger_class] << ", count=" << r.count
                << ", window=" << r.window << ");\n";
        }
        out << "}\n";
    }
    return out.str();
}

std::string format_diagnostic(const ParseError& e, std::string_view filename) {
    std::ostringstream out;
    out << filename << ':' << e.span().line << ':' << e.span().column << ": "
        << (e.kind() == ParseError::Kind::Syntax ? "syntax error: " : "error: ") << e.what();
    return out.str();
}

}  // namespace cep
