#include "orbitcert/sysdef.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace orbitcert {

// ---------------------------------------------------------------------------
// Expression constructors / structural equality
// ---------------------------------------------------------------------------

ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::number;
    e->number = v;
    return e;
}

ExprPtr make_var(int index) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::var;
    e->var_index = index;
    return e;
}

ExprPtr make_unary(ExprKind kind, ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(operand);
    return e;
}

ExprPtr make_binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

ExprPtr make_pow(ExprPtr base, int exponent) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::pow;
    e->lhs = std::move(base);
    e->exponent = exponent;
    return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::number:
            return a.number == b.number;
        case ExprKind::var:
            return a.var_index == b.var_index;
        case ExprKind::pow:
            return a.exponent == b.exponent && expr_equal(*a.lhs, *b.lhs);
        case ExprKind::neg:
        case ExprKind::sin:
        case ExprKind::cos:
        case ExprKind::exp:
        case ExprKind::tanh:
        case ExprKind::sqrt:
        case ExprKind::abs:
            return expr_equal(*a.lhs, *b.lhs);
        default:
            return expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

std::string print_double(double v) {
    // Shortest representation that round-trips exactly.
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

const char* func_name(ExprKind k) {
    switch (k) {
        case ExprKind::sin: return "sin";
        case ExprKind::cos: return "cos";
        case ExprKind::exp: return "exp";
        case ExprKind::tanh: return "tanh";
        case ExprKind::sqrt: return "sqrt";
        case ExprKind::abs: return "abs";
        default: return "?";
    }
}

// Precedence: additive 1, multiplicative 2, unary minus 3, power 4, atoms 5.
int precedence(const Expr& e) {
    switch (e.kind) {
        case ExprKind::add:
        case ExprKind::sub: return 1;
        case ExprKind::mul:
        case ExprKind::div: return 2;
        case ExprKind::neg: return 3;
        case ExprKind::pow: return 4;
        default: return 5;
    }
}

void print_rec(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out) {
    if (precedence(child) < min_prec) {
        out += '(';
        print_rec(child, out);
        out += ')';
    } else {
        print_rec(child, out);
    }
}

void print_rec(const Expr& e, std::string& out) {
    switch (e.kind) {
        case ExprKind::number:
            out += print_double(e.number);
            break;
        case ExprKind::var:
            out += 'x';
            out += std::to_string(e.var_index);
            break;
        case ExprKind::neg:
            out += '-';
            print_child(*e.lhs, 3, out);
            break;
        case ExprKind::add:
        case ExprKind::sub:
            print_child(*e.lhs, 1, out);
            out += (e.kind == ExprKind::add) ? " + " : " - ";
            // Right side needs strictly higher precedence to keep a - (b - c) intact.
            print_child(*e.rhs, 2, out);
            break;
        case ExprKind::mul:
        case ExprKind::div:
            print_child(*e.lhs, 2, out);
            out += (e.kind == ExprKind::mul) ? " * " : " / ";
            print_child(*e.rhs, 3, out);
            break;
        case ExprKind::pow:
            print_child(*e.lhs, 5, out);
            out += '^';
            out += std::to_string(e.exponent);
            break;
        default:
            out += func_name(e.kind);
            out += '(';
            print_rec(*e.lhs, out);
            out += ')';
            break;
    }
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::string out;
    print_rec(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Tokenizer / recursive-descent expression parser
// ---------------------------------------------------------------------------

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, semi, eq, end };

struct Token {
    Tok kind = Tok::end;
    double number = 0.0;
    std::string text;
    int line = 1;
    int col = 1;
    bool number_is_integer = false;
    long long integer = 0;
};

class Lexer {
public:
    Lexer(const std::string& src, int line) : src_(src), line_(line) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = static_cast<int>(pos_) + 1;
        if (pos_ >= src_.size()) {
            t.kind = Tok::end;
            return t;
        }
        const char c = src_[pos_];
        switch (c) {
            case '+': ++pos_; t.kind = Tok::plus; return t;
            case '-': ++pos_; t.kind = Tok::minus; return t;
            case '*': ++pos_; t.kind = Tok::star; return t;
            case '/': ++pos_; t.kind = Tok::slash; return t;
            case '^': ++pos_; t.kind = Tok::caret; return t;
            case '(': ++pos_; t.kind = Tok::lparen; return t;
            case ')': ++pos_; t.kind = Tok::rparen; return t;
            case ',': ++pos_; t.kind = Tok::comma; return t;
            case ';': ++pos_; t.kind = Tok::semi; return t;
            case '=': ++pos_; t.kind = Tok::eq; return t;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(t);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            t.kind = Tok::ident;
            t.text = src_.substr(start, pos_ - start);
            return t;
        }
        throw ParseError("unexpected character '" + printable(c) + "'", line_, t.col);
    }

private:
    static std::string printable(char c) {
        if (std::isprint(static_cast<unsigned char>(c))) return std::string(1, c);
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
        return buf;
    }

    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r'))
            ++pos_;
    }

    Token lex_number(Token t) {
        const std::size_t start = pos_;
        bool is_integer = true;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            is_integer = false;
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                is_integer = false;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to a following identifier, not this number
            }
        }
        const std::string text = src_.substr(start, pos_ - start);
        if (text == ".")
            throw ParseError("malformed number", t.line, t.col);
        t.kind = Tok::number;
        double value = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
            throw ParseError("malformed number '" + text + "'", t.line, t.col);
        t.number = value;
        if (is_integer && text.size() <= 18) {
            t.number_is_integer = true;
            t.integer = std::stoll(text);
        }
        t.text = text;
        return t;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_;
};

class ExprParser {
public:
    ExprParser(const std::string& src, int line, int dim) : lexer_(src, line), dim_(dim) {
        advance();
    }

    ExprPtr parse_full() {
        ExprPtr e = parse_expr();
        expect(Tok::end, "end of expression");
        return e;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind)
            throw ParseError(std::string("expected ") + what, cur_.line, cur_.col);
    }

    ExprPtr parse_expr() {
        ExprPtr e = parse_term();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const ExprKind op = cur_.kind == Tok::plus ? ExprKind::add : ExprKind::sub;
            advance();
            e = make_binary(op, std::move(e), parse_term());
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
            const ExprKind op = cur_.kind == Tok::star ? ExprKind::mul : ExprKind::div;
            advance();
            e = make_binary(op, std::move(e), parse_factor());
        }
        return e;
    }

    ExprPtr parse_factor() {
        ExprPtr base = parse_base();
        if (cur_.kind == Tok::caret) {
            advance();
            if (cur_.kind != Tok::number || !cur_.number_is_integer)
                throw ParseError("exponent must be a literal non-negative integer", cur_.line,
                                 cur_.col);
            if (cur_.integer < 0 || cur_.integer > 64)
                throw ParseError("exponent out of range [0, 64]", cur_.line, cur_.col);
            const int exponent = static_cast<int>(cur_.integer);
            advance();
            return make_pow(std::move(base), exponent);
        }
        return base;
    }

    ExprPtr parse_base() {
        switch (cur_.kind) {
            case Tok::minus: {
                advance();
                return make_unary(ExprKind::neg, parse_base());
            }
            case Tok::number: {
                ExprPtr e = make_number(cur_.number);
                advance();
                return e;
            }
            case Tok::lparen: {
                advance();
                ExprPtr e = parse_expr();
                expect(Tok::rparen, "')'");
                advance();
                return e;
            }
            case Tok::ident:
                return parse_ident();
            default:
                throw ParseError("expected a number, variable, function call, or '('", cur_.line,
                                 cur_.col);
        }
    }

    ExprPtr parse_ident() {
        const Token name = cur_;
        advance();
        if (name.text.size() >= 2 && name.text[0] == 'x' &&
            std::isdigit(static_cast<unsigned char>(name.text[1]))) {
            for (std::size_t i = 1; i < name.text.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name.text[i])))
                    throw ParseError("unknown identifier '" + name.text + "'", name.line, name.col);
            const long idx = std::strtol(name.text.c_str() + 1, nullptr, 10);
            if (idx >= dim_)
                throw ParseError("unknown variable '" + name.text + "' (dimension is " +
                                     std::to_string(dim_) + ")",
                                 name.line, name.col);
            return make_var(static_cast<int>(idx));
        }
        ExprKind fn;
        if (name.text == "sin") fn = ExprKind::sin;
        else if (name.text == "cos") fn = ExprKind::cos;
        else if (name.text == "exp") fn = ExprKind::exp;
        else if (name.text == "tanh") fn = ExprKind::tanh;
        else if (name.text == "sqrt") fn = ExprKind::sqrt;
        else if (name.text == "abs") fn = ExprKind::abs;
        else
            throw ParseError("unknown identifier '" + name.text + "'", name.line, name.col);
        expect(Tok::lparen, "'(' after function name");
        advance();
        ExprPtr arg = parse_expr();
        expect(Tok::rparen, "')'");
        advance();
        return make_unary(fn, std::move(arg));
    }

    Lexer lexer_;
    Token cur_;
    int dim_;
};

}  // namespace

ExprPtr parse_expression(const std::string& text, int dim) {
    return ExprParser(text, 1, dim).parse_full();
}

// ---------------------------------------------------------------------------
// Compilation and evaluation
// ---------------------------------------------------------------------------

namespace {

int compile_rec(const Expr& e, std::vector<CompiledField::Instr>& program,
                std::vector<std::string>& texts, int depth, int& max_stack) {
    // Postfix order: children first. `depth` is the stack height before this node's result.
    CompiledField::Instr instr;
    instr.op = e.kind;
    switch (e.kind) {
        case ExprKind::number:
            instr.number = e.number;
            break;
        case ExprKind::var:
            instr.var_index = e.var_index;
            break;
        case ExprKind::pow:
            compile_rec(*e.lhs, program, texts, depth, max_stack);
            instr.exponent = e.exponent;
            break;
        case ExprKind::neg:
        case ExprKind::sin:
        case ExprKind::cos:
        case ExprKind::exp:
        case ExprKind::tanh:
        case ExprKind::sqrt:
        case ExprKind::abs:
            compile_rec(*e.lhs, program, texts, depth, max_stack);
            break;
        default:
            compile_rec(*e.lhs, program, texts, depth, max_stack);
            compile_rec(*e.rhs, program, texts, depth + 1, max_stack);
            break;
    }
    if (e.kind == ExprKind::div || e.kind == ExprKind::sqrt) {
        instr.text_id = static_cast<int>(texts.size());
        texts.push_back(print_expr(e));
    }
    program.push_back(instr);
    max_stack = std::max(max_stack, depth + 1);
    return depth + 1;
}

}  // namespace

CompiledField compile_field(const std::vector<ExprPtr>& field, int dim) {
    CompiledField out;
    out.dim_in = dim;
    out.coord_programs.resize(field.size());
    for (std::size_t k = 0; k < field.size(); ++k)
        compile_rec(*field[k], out.coord_programs[k], out.texts, 0, out.max_stack);
    return out;
}

int CompiledField::eval(const double* point, double* out, double* stack) const {
    for (std::size_t k = 0; k < coord_programs.size(); ++k) {
        int sp = 0;
        for (const Instr& instr : coord_programs[k]) {
            switch (instr.op) {
                case ExprKind::number:
                    stack[sp++] = instr.number;
                    break;
                case ExprKind::var:
                    stack[sp++] = point[instr.var_index];
                    break;
                case ExprKind::neg:
                    stack[sp - 1] = -stack[sp - 1];
                    break;
                case ExprKind::sin:
                    stack[sp - 1] = std::sin(stack[sp - 1]);
                    break;
                case ExprKind::cos:
                    stack[sp - 1] = std::cos(stack[sp - 1]);
                    break;
                case ExprKind::exp:
                    stack[sp - 1] = std::exp(stack[sp - 1]);
                    break;
                case ExprKind::tanh:
                    stack[sp - 1] = std::tanh(stack[sp - 1]);
                    break;
                case ExprKind::sqrt:
                    if (stack[sp - 1] < 0.0) return instr.text_id;
                    stack[sp - 1] = std::sqrt(stack[sp - 1]);
                    break;
                case ExprKind::abs:
                    stack[sp - 1] = std::fabs(stack[sp - 1]);
                    break;
                case ExprKind::add:
                    --sp;
                    stack[sp - 1] += stack[sp];
                    break;
                case ExprKind::sub:
                    --sp;
                    stack[sp - 1] -= stack[sp];
                    break;
                case ExprKind::mul:
                    --sp;
                    stack[sp - 1] *= stack[sp];
                    break;
                case ExprKind::div:
                    --sp;
                    if (stack[sp] == 0.0) return instr.text_id;
                    stack[sp - 1] /= stack[sp];
                    break;
                case ExprKind::pow: {
                    // Left-fold product, so x^3 evaluates exactly like (x*x)*x.
                    const double base = stack[sp - 1];
                    double acc = 1.0;
                    for (int i = 0; i < instr.exponent; ++i) acc *= base;
                    stack[sp - 1] = acc;
                    break;
                }
            }
        }
        out[k] = stack[0];
    }
    return -1;
}

// ---------------------------------------------------------------------------
// System document parsing / printing
// ---------------------------------------------------------------------------

namespace {

struct Line {
    int number;
    std::string key;
    std::string value;
    int value_col;
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        ++line_no;
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;

        std::size_t begin = raw.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;  // blank line
        const std::size_t eq = raw.find('=', begin);
        if (eq == std::string::npos)
            throw ParseError("expected '<key> = <value>'", line_no, static_cast<int>(begin) + 1);
        std::size_t key_end = raw.find_last_not_of(" \t\r", eq - 1);
        if (key_end == std::string::npos || key_end < begin)
            throw ParseError("missing key before '='", line_no, static_cast<int>(begin) + 1);
        Line l;
        l.number = line_no;
        l.key = raw.substr(begin, key_end - begin + 1);
        std::size_t vbegin = raw.find_first_not_of(" \t\r", eq + 1);
        if (vbegin == std::string::npos)
            throw ParseError("missing value after '='", line_no, static_cast<int>(eq) + 2);
        std::size_t vend = raw.find_last_not_of(" \t\r");
        l.value = raw.substr(vbegin, vend - vbegin + 1);
        l.value_col = static_cast<int>(vbegin) + 1;
        out.push_back(std::move(l));
    }
    return out;
}

// Parses "box(lo,hi; lo,hi; ...)" into per-axis (lo, hi) pairs.
std::vector<std::pair<double, double>> parse_box_value(const std::string& value, int line,
                                                       int col) {
    Lexer lex(value, line);
    Token t = lex.next();
    if (t.kind != Tok::ident || t.text != "box")
        throw ParseError("expected box(...)", line, col);
    if (lex.next().kind != Tok::lparen) throw ParseError("expected '(' after box", line, col);
    std::vector<std::pair<double, double>> axes;
    while (true) {
        auto read_number = [&]() -> double {
            Token n = lex.next();
            double sign = 1.0;
            if (n.kind == Tok::minus) {
                sign = -1.0;
                n = lex.next();
            }
            if (n.kind != Tok::number)
                throw ParseError("expected a number in box(...)", n.line, n.col);
            return sign * n.number;
        };
        const double lo = read_number();
        Token sep = lex.next();
        if (sep.kind != Tok::comma)
            throw ParseError("expected ',' between box bounds", sep.line, sep.col);
        const double hi = read_number();
        if (!(lo < hi))
            throw ParseError("box bounds must satisfy lo < hi", line, col);
        axes.emplace_back(lo, hi);
        sep = lex.next();
        if (sep.kind == Tok::semi) continue;
        if (sep.kind == Tok::rparen) break;
        throw ParseError("expected ';' or ')' in box(...)", sep.line, sep.col);
    }
    if (lex.next().kind != Tok::end)
        throw ParseError("unexpected trailing text after box(...)", line, col);
    return axes;
}

std::vector<double> parse_torus_value(const std::string& value, int line, int col) {
    Lexer lex(value, line);
    Token t = lex.next();
    if (t.kind != Tok::ident || t.text != "torus")
        throw ParseError("expected torus(...)", line, col);
    if (lex.next().kind != Tok::lparen) throw ParseError("expected '(' after torus", line, col);
    std::vector<double> periods;
    while (true) {
        Token n = lex.next();
        if (n.kind != Tok::number)
            throw ParseError("expected a period in torus(...)", n.line, n.col);
        if (!(n.number > 0.0))
            throw ParseError("torus periods must be positive", n.line, n.col);
        periods.push_back(n.number);
        Token sep = lex.next();
        if (sep.kind == Tok::comma) continue;
        if (sep.kind == Tok::rparen) break;
        throw ParseError("expected ',' or ')' in torus(...)", sep.line, sep.col);
    }
    if (lex.next().kind != Tok::end)
        throw ParseError("unexpected trailing text after torus(...)", line, col);
    return periods;
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

}  // namespace

SystemSpec parse_system(const std::string& text) {
    const std::vector<Line> lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty system definition", 1, 1);

    SystemSpec spec;
    bool have_name = false, have_space = false, have_region = false;
    std::vector<bool> have_coord;

    for (const Line& l : lines) {
        if (l.key == "name") {
            if (have_name) throw ParseError("duplicate 'name' line", l.number, 1);
            if (!is_identifier(l.value))
                throw ParseError("system name must be an identifier", l.number, l.value_col);
            spec.name = l.value;
            have_name = true;
        } else if (l.key == "space") {
            if (have_space) throw ParseError("duplicate 'space' line", l.number, 1);
            if (!have_name) throw ParseError("'space' must follow 'name'", l.number, 1);
            if (l.value.rfind("torus", 0) == 0) {
                spec.space.kind = SpaceKind::torus;
                std::vector<double> periods = parse_torus_value(l.value, l.number, l.value_col);
                spec.space.dim = static_cast<int>(periods.size());
                spec.space.lo.assign(periods.size(), 0.0);
                spec.space.hi = std::move(periods);
            } else {
                spec.space.kind = SpaceKind::box;
                auto axes = parse_box_value(l.value, l.number, l.value_col);
                spec.space.dim = static_cast<int>(axes.size());
                for (auto& [lo, hi] : axes) {
                    spec.space.lo.push_back(lo);
                    spec.space.hi.push_back(hi);
                }
            }
            if (spec.space.dim > 8)
                throw ParseError("dimension larger than 8 is not supported", l.number, l.value_col);
            spec.field.assign(spec.space.dim, nullptr);
            have_coord.assign(spec.space.dim, false);
            have_space = true;
        } else if (l.key == "region") {
            if (!have_space) throw ParseError("'region' must follow 'space'", l.number, 1);
            if (have_region) throw ParseError("duplicate 'region' line", l.number, 1);
            auto axes = parse_box_value(l.value, l.number, l.value_col);
            if (static_cast<int>(axes.size()) != spec.space.dim)
                throw ParseError("region dimension does not match the space", l.number,
                                 l.value_col);
            for (int k = 0; k < spec.space.dim; ++k) {
                spec.isolated_region.lo.push_back(axes[k].first);
                spec.isolated_region.hi.push_back(axes[k].second);
                if (axes[k].first < spec.space.lo[k] - 1e-12 ||
                    axes[k].second > spec.space.hi[k] + 1e-12)
                    throw ParseError("region exceeds the space bounds", l.number, l.value_col);
            }
            have_region = true;
        } else if (l.key.size() >= 3 && l.key.rfind("dx", 0) == 0) {
            if (!have_space)
                throw ParseError("field lines must follow 'space'", l.number, 1);
            for (std::size_t i = 2; i < l.key.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(l.key[i])))
                    throw ParseError("unknown key '" + l.key + "'", l.number, 1);
            const long k = std::strtol(l.key.c_str() + 2, nullptr, 10);
            if (k >= spec.space.dim)
                throw ParseError("field index out of range for dimension " +
                                     std::to_string(spec.space.dim),
                                 l.number, 1);
            if (have_coord[static_cast<std::size_t>(k)])
                throw ParseError("duplicate '" + l.key + "' line", l.number, 1);
            spec.field[static_cast<std::size_t>(k)] =
                ExprParser(l.value, l.number, spec.space.dim).parse_full();
            have_coord[static_cast<std::size_t>(k)] = true;
        } else {
            throw ParseError("unknown key '" + l.key + "'", l.number, 1);
        }
    }

    if (!have_name) throw ParseError("missing 'name' line", lines.back().number, 1);
    if (!have_space) throw ParseError("missing 'space' line", lines.back().number, 1);
    for (int k = 0; k < spec.space.dim; ++k)
        if (!have_coord[static_cast<std::size_t>(k)])
            throw ParseError("missing field line 'dx" + std::to_string(k) + "'",
                             lines.back().number, 1);
    if (!have_region) spec.isolated_region = full_space_region(spec.space);
    spec.compiled = compile_field(spec.field, spec.space.dim);
    return spec;
}

std::string print_system(const SystemSpec& spec) {
    std::ostringstream out;
    out << "name = " << spec.name << "\n";
    if (spec.space.kind == SpaceKind::torus) {
        out << "space = torus(";
        for (int k = 0; k < spec.space.dim; ++k) {
            if (k) out << ", ";
            out << print_double(spec.space.hi[k]);
        }
        out << ")\n";
    } else {
        out << "space = box(";
        for (int k = 0; k < spec.space.dim; ++k) {
            if (k) out << "; ";
            out << print_double(spec.space.lo[k]) << ", " << print_double(spec.space.hi[k]);
        }
        out << ")\n";
    }
    const Region full = full_space_region(spec.space);
    if (spec.isolated_region.lo != full.lo || spec.isolated_region.hi != full.hi) {
        out << "region = box(";
        for (int k = 0; k < spec.space.dim; ++k) {
            if (k) out << "; ";
            out << print_double(spec.isolated_region.lo[k]) << ", "
                << print_double(spec.isolated_region.hi[k]);
        }
        out << ")\n";
    }
    for (int k = 0; k < spec.space.dim; ++k)
        out << "dx" << k << " = " << print_expr(*spec.field[static_cast<std::size_t>(k)]) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Evaluation entry points
// ---------------------------------------------------------------------------

std::vector<double> normalize_point(const SpaceSpec& space, std::vector<double> p) {
    if (space.kind == SpaceKind::torus) {
        for (int k = 0; k < space.dim; ++k) {
            const double period = space.hi[static_cast<std::size_t>(k)];
            double v = std::fmod(p[static_cast<std::size_t>(k)], period);
            if (v < 0.0) v += period;
            if (v >= period) v = 0.0;  // guard against fmod rounding to the period itself
            p[static_cast<std::size_t>(k)] = v;
        }
    }
    return p;
}

std::vector<double> eval_field(const SystemSpec& spec, const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != spec.space.dim)
        throw std::invalid_argument("eval_field: point dimension mismatch");
    const std::vector<double> q = normalize_point(spec.space, p);
    std::vector<double> out(static_cast<std::size_t>(spec.space.dim));
    std::vector<double> stack(static_cast<std::size_t>(std::max(spec.compiled.max_stack, 1)));
    const int bad = spec.compiled.eval(q.data(), out.data(), stack.data());
    if (bad >= 0)
        throw EvalDomainError("domain error while evaluating the field",
                              spec.compiled.texts[static_cast<std::size_t>(bad)]);
    return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

Region full_space_region(const SpaceSpec& space) {
    Region r;
    r.lo = space.lo;
    r.hi = space.hi;
    return r;
}

std::vector<std::string> builtin_names() {
    return {"pitchfork1d", "circle_ns", "torus_linear", "saddle2d"};
}

SystemSpec builtin_system(const std::string& name, const std::map<std::string, double>& params) {
    auto require_no_params = [&]() {
        if (!params.empty())
            throw std::invalid_argument("system '" + name + "' takes no parameters");
    };
    std::string text;
    std::map<std::string, double> recorded;
    if (name == "pitchfork1d") {
        require_no_params();
        text =
            "name = pitchfork1d\n"
            "space = box(-2, 2)\n"
            "dx0 = x0 - x0^3\n";
    } else if (name == "circle_ns") {
        require_no_params();
        text =
            "name = circle_ns\n"
            "space = torus(6.283185307179586)\n"
            "dx0 = sin(x0)\n";
    } else if (name == "torus_linear") {
        auto it = params.find("alpha");
        if (it == params.end())
            throw std::invalid_argument("torus_linear requires parameter 'alpha'");
        if (params.size() != 1)
            throw std::invalid_argument("torus_linear takes only parameter 'alpha'");
        recorded["alpha"] = it->second;
        text =
            "name = torus_linear\n"
            "space = torus(1, 1)\n"
            "dx0 = 1\n"
            "dx1 = " +
            print_double(it->second) + "\n";
    } else if (name == "saddle2d") {
        require_no_params();
        text =
            "name = saddle2d\n"
            "space = box(-1, 1; -1, 1)\n"
            "dx0 = x0\n"
            "dx1 = -x1\n";
    } else {
        throw std::invalid_argument("unknown system '" + name + "'");
    }
    SystemSpec spec = parse_system(text);
    spec.params = std::move(recorded);
    return spec;
}

}  // namespace orbitcert
