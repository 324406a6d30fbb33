// Lexer, recursive-descent parser, and pretty-printer for the dataflow DSL.
//
// Grammar:
//   workflow := "workflow" IDENT "{" service* binding* outputs "}"
//   service  := "service" IDENT "at" IDENT "{" opdecl ("," opdecl)* "}"
//   opdecl   := IDENT "/" INT
//   binding  := IDENT "=" IDENT "." IDENT "(" args? ")"
//   args     := IDENT ("," IDENT)*
//   outputs  := "outputs" IDENT ("," IDENT)*
//
// "#" comments to end of line; whitespace insignificant; stray ";" accepted
// between clauses. The parser is total: any byte string yields either a spec
// or diagnostics, and it recovers at clause boundaries so independent
// mistakes each get their own diagnostic.

#include "dflow/parse.hpp"

#include <cctype>
#include <sstream>

namespace dflow {

namespace {

enum class Tok {
    Ident,
    Int,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Equals,
    Dot,
    Slash,
    Semicolon,
    KwWorkflow,
    KwService,
    KwAt,
    KwOutputs,
    Bad,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Span span;
};

class Lexer {
  public:
    Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            Token t = next_token();
            bool at_end = t.kind == Tok::End;
            if (t.kind != Tok::Bad) out.push_back(std::move(t));
            if (at_end) break;
        }
        return out;
    }

  private:
    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
                advance();
            } else {
                break;
            }
        }
    }

    Token next_token() {
        Token t;
        t.span = {line_, col_, line_, col_ + 1};
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                if (!std::isalnum(static_cast<unsigned char>(d)) && d != '_') break;
                word.push_back(d);
                advance();
            }
            t.text = word;
            t.span.end_col = col_;
            if (word == "workflow") t.kind = Tok::KwWorkflow;
            else if (word == "service") t.kind = Tok::KwService;
            else if (word == "at") t.kind = Tok::KwAt;
            else if (word == "outputs") t.kind = Tok::KwOutputs;
            else t.kind = Tok::Ident;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string digits;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits.push_back(src_[pos_]);
                advance();
            }
            t.text = digits;
            t.span.end_col = col_;
            t.kind = Tok::Int;
            return t;
        }
        advance();
        t.span.end_col = col_;
        switch (c) {
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case ',': t.kind = Tok::Comma; break;
            case '=': t.kind = Tok::Equals; break;
            case '.': t.kind = Tok::Dot; break;
            case '/': t.kind = Tok::Slash; break;
            case ';': t.kind = Tok::Semicolon; break;
            default:
                t.kind = Tok::Bad;
                if (!bad_byte_reported_) {
                    bad_byte_reported_ = true;
                    diags_.push_back({"E001", Severity::Error,
                                      "unexpected character in input", t.span});
                }
                break;
        }
        t.text = std::string(1, c);
        return t;
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::vector<Diagnostic>& diags_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    bool bad_byte_reported_ = false;
};

class Parser {
  public:
    explicit Parser(std::string_view src) {
        tokens_ = Lexer(src, diags_).run();
    }

    ParseResult run() {
        WorkflowSpec spec = parse_workflow();
        ParseResult result;
        result.diagnostics = std::move(diags_);
        if (!has_errors(result.diagnostics)) result.spec = std::move(spec);
        return result;
    }

  private:
    const Token& cur() const { return tokens_[idx_]; }
    const Token& peek(size_t n = 1) const {
        size_t i = idx_ + n;
        return tokens_[i < tokens_.size() ? i : tokens_.size() - 1];
    }
    bool at(Tok k) const { return cur().kind == k; }
    Token take() {
        Token t = cur();
        if (idx_ + 1 < tokens_.size()) ++idx_;
        return t;
    }

    void error(const std::string& msg, const Span& where, const char* code = "E001") {
        diags_.push_back({code, Severity::Error, msg, where});
    }

    bool expect(Tok k, const char* what) {
        if (at(k)) {
            take();
            return true;
        }
        error(std::string("expected ") + what, cur().span);
        return false;
    }

    std::string expect_ident(const char* what, Span* where = nullptr) {
        if (at(Tok::Ident) || at(Tok::KwAt)) {  // "at" is contextual; allow as plain name
            Token t = take();
            if (where) *where = t.span;
            return t.text;
        }
        error(std::string("expected ") + what, cur().span);
        if (where) *where = cur().span;
        return {};
    }

    // Skip to the next clause boundary so later clauses still parse.
    void sync() {
        while (!at(Tok::End)) {
            switch (cur().kind) {
                case Tok::Semicolon:
                    take();
                    return;
                case Tok::KwService:
                case Tok::KwOutputs:
                case Tok::RBrace:
                    return;
                case Tok::Ident:
                    if (peek().kind == Tok::Equals) return;
                    take();
                    break;
                default:
                    take();
                    break;
            }
        }
    }

    WorkflowSpec parse_workflow() {
        WorkflowSpec spec;
        if (!expect(Tok::KwWorkflow, "'workflow'")) {
            sync_to_workflow_end();
            return spec;
        }
        spec.name = expect_ident("workflow name");
        expect(Tok::LBrace, "'{'");

        bool saw_outputs = false;
        bool saw_binding = false;
        Span close_span = cur().span;
        while (true) {
            if (at(Tok::Semicolon)) {
                take();
                continue;
            }
            if (at(Tok::End)) {
                error("unexpected end of input, expected '}'", cur().span);
                close_span = cur().span;
                break;
            }
            if (at(Tok::RBrace)) {
                close_span = take().span;
                break;
            }
            if (at(Tok::KwService)) {
                Span at_span = cur().span;
                if (saw_binding || saw_outputs)
                    error("service declarations must precede bindings and outputs", at_span);
                parse_service(spec);
                continue;
            }
            if (at(Tok::KwOutputs)) {
                if (saw_outputs) error("duplicate outputs clause", cur().span);
                parse_outputs(spec);
                saw_outputs = true;
                continue;
            }
            if (at(Tok::Ident)) {
                if (saw_outputs) error("bindings must precede the outputs clause", cur().span);
                saw_binding = true;
                parse_binding(spec);
                continue;
            }
            error("expected a service declaration, binding, or outputs clause", cur().span);
            take();
            sync();
        }

        if (!saw_outputs)
            error("workflow must declare outputs", close_span, "E003");
        if (!at(Tok::End))
            error("unexpected input after workflow body", cur().span);
        return spec;
    }

    void sync_to_workflow_end() {
        while (!at(Tok::End)) take();
    }

    void parse_service(WorkflowSpec& spec) {
        Token kw = take();  // 'service'
        ServiceDecl svc;
        svc.where = kw.span;
        svc.name = expect_ident("service name");
        if (svc.name.empty()) {
            sync();
            return;
        }
        for (const auto& s : spec.services) {
            if (s.name == svc.name) {
                error("duplicate service name '" + svc.name + "'", svc.where, "E002");
                break;
            }
        }
        if (!expect(Tok::KwAt, "'at'")) {
            sync();
            return;
        }
        svc.site = expect_ident("site name");
        if (svc.site.empty() || !expect(Tok::LBrace, "'{'")) {
            sync();
            return;
        }
        while (true) {
            OpDecl op;
            op.name = expect_ident("operation name", &op.where);
            if (op.name.empty()) {
                sync();
                return;
            }
            if (!expect(Tok::Slash, "'/'")) {
                sync();
                return;
            }
            if (!at(Tok::Int)) {
                error("expected operation arity", cur().span);
                sync();
                return;
            }
            Token arity = take();
            if (arity.text.size() > 6) {
                error("operation arity out of range", arity.span);
                op.arity = 0;
            } else {
                op.arity = std::stoi(arity.text);
            }
            for (const auto& o : svc.operations) {
                if (o.name == op.name) {
                    error("duplicate operation '" + op.name + "' on service '" + svc.name + "'",
                          op.where, "E002");
                    break;
                }
            }
            svc.operations.push_back(std::move(op));
            if (at(Tok::Comma)) {
                take();
                continue;
            }
            break;
        }
        expect(Tok::RBrace, "'}' after operation list");
        spec.services.push_back(std::move(svc));
    }

    void parse_binding(WorkflowSpec& spec) {
        Binding b;
        Token target = take();  // Ident, guaranteed by caller
        b.target = target.text;
        b.target_where = target.span;
        b.where = target.span;
        if (b.target == kInputRef)
            error("'input' is reserved and cannot be a binding target", target.span, "E002");
        for (const auto& prev : spec.bindings) {
            if (prev.target == b.target) {
                error("duplicate variable name '" + b.target + "'", target.span, "E002");
                break;
            }
        }
        if (!expect(Tok::Equals, "'='")) {
            sync();
            return;
        }
        b.service = expect_ident("service name");
        if (b.service.empty() || !expect(Tok::Dot, "'.'")) {
            sync();
            return;
        }
        b.operation = expect_ident("operation name");
        if (b.operation.empty() || !expect(Tok::LParen, "'('")) {
            sync();
            return;
        }
        if (!at(Tok::RParen)) {
            while (true) {
                ArgRef arg;
                arg.name = expect_ident("argument name", &arg.where);
                if (arg.name.empty()) {
                    sync();
                    return;
                }
                b.args.push_back(std::move(arg));
                if (at(Tok::Comma)) {
                    take();
                    continue;
                }
                break;
            }
        }
        if (!expect(Tok::RParen, "')'")) {
            sync();
            return;
        }
        b.where.end_line = tokens_[idx_ - 1].span.end_line;
        b.where.end_col = tokens_[idx_ - 1].span.end_col;
        spec.bindings.push_back(std::move(b));
    }

    void parse_outputs(WorkflowSpec& spec) {
        take();  // 'outputs'
        while (true) {
            OutputRef out;
            out.name = expect_ident("output name", &out.where);
            if (out.name.empty()) {
                sync();
                return;
            }
            spec.outputs.push_back(std::move(out));
            if (at(Tok::Comma)) {
                take();
                continue;
            }
            break;
        }
    }

    std::vector<Token> tokens_;
    std::vector<Diagnostic> diags_;
    size_t idx_ = 0;
};

}  // namespace

ParseResult parse(std::string_view source) {
    return Parser(source).run();
}

std::string pretty_print(const WorkflowSpec& spec) {
    std::ostringstream out;
    out << "workflow " << spec.name << " {\n";
    for (const auto& svc : spec.services) {
        out << "  service " << svc.name << " at " << svc.site << " { ";
        for (size_t i = 0; i < svc.operations.size(); ++i) {
            if (i) out << ", ";
            out << svc.operations[i].name << "/" << svc.operations[i].arity;
        }
        out << " }\n";
    }
    for (const auto& b : spec.bindings) {
        out << "  " << b.target << " = " << b.service << "." << b.operation << "(";
        for (size_t i = 0; i < b.args.size(); ++i) {
            if (i) out << ", ";
            out << b.args[i].name;
        }
        out << ")\n";
    }
    out << "  outputs ";
    for (size_t i = 0; i < spec.outputs.size(); ++i) {
        if (i) out << ", ";
        out << spec.outputs[i].name;
    }
    out << "\n}\n";
    return out.str();
}

}  // namespace dflow
