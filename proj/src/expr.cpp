#include "ifslab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ifslab::expr {

namespace {

double apply_unary(UnaryOp op, double x) {
    double r;
    switch (op) {
        case UnaryOp::neg: r = -x; break;
        case UnaryOp::sin: r = std::sin(x); break;
        case UnaryOp::cos: r = std::cos(x); break;
        case UnaryOp::abs: r = std::fabs(x); break;
        case UnaryOp::exp: r = std::exp(x); break;
        case UnaryOp::log:
            if (x <= 0.0) throw EvalError("log of nonpositive argument");
            r = std::log(x);
            break;
        case UnaryOp::sqrt:
            if (x < 0.0) throw EvalError("sqrt of negative argument");
            r = std::sqrt(x);
            break;
        default: throw EvalError("bad unary op");
    }
    if (!std::isfinite(r)) throw EvalError("non-finite result in unary op");
    return r;
}

// mod is the floored modulo: mod(a,b) = a - b*floor(a/b), so "x mod 1" lands
// in [0,1) for negative x as well.
double apply_binary(BinaryOp op, double x, double y) {
    double r;
    switch (op) {
        case BinaryOp::add: r = x + y; break;
        case BinaryOp::sub: r = x - y; break;
        case BinaryOp::mul: r = x * y; break;
        case BinaryOp::div:
            if (y == 0.0) throw EvalError("division by zero");
            r = x / y;
            break;
        case BinaryOp::pow: r = std::pow(x, y); break;
        case BinaryOp::min: r = std::fmin(x, y); break;
        case BinaryOp::max: r = std::fmax(x, y); break;
        case BinaryOp::mod:
            if (y == 0.0) throw EvalError("mod by zero");
            r = x - y * std::floor(x / y);
            break;
        default: throw EvalError("bad binary op");
    }
    if (!std::isfinite(r)) throw EvalError("non-finite result in binary op");
    return r;
}

double eval_rec(const Node &n, const std::map<std::string, double> &env) {
    switch (n.kind) {
        case Node::Kind::constant: return n.value;
        case Node::Kind::variable: {
            auto it = env.find(n.name);
            if (it == env.end()) throw EvalError("unbound variable '" + n.name + "'");
            return it->second;
        }
        case Node::Kind::unary: return apply_unary(n.uop, eval_rec(*n.a, env));
        case Node::Kind::binary:
            return apply_binary(n.bop, eval_rec(*n.a, env), eval_rec(*n.b, env));
    }
    throw EvalError("bad node kind");
}

void collect_vars(const Node &n, std::set<std::string> &out) {
    switch (n.kind) {
        case Node::Kind::constant: return;
        case Node::Kind::variable: out.insert(n.name); return;
        case Node::Kind::unary: collect_vars(*n.a, out); return;
        case Node::Kind::binary:
            collect_vars(*n.a, out);
            collect_vars(*n.b, out);
            return;
    }
}

// Precedence levels used both by the parser and the printer:
//   1: + -    2: * /    3: unary -    4: ^
int binary_prec(BinaryOp op) {
    switch (op) {
        case BinaryOp::add:
        case BinaryOp::sub: return 1;
        case BinaryOp::mul:
        case BinaryOp::div: return 2;
        case BinaryOp::pow: return 4;
        default: return 5; // function-call syntax, never needs parens
    }
}

const char *binary_sym(BinaryOp op) {
    switch (op) {
        case BinaryOp::add: return "+";
        case BinaryOp::sub: return "-";
        case BinaryOp::mul: return "*";
        case BinaryOp::div: return "/";
        case BinaryOp::pow: return "^";
        case BinaryOp::min: return "min";
        case BinaryOp::max: return "max";
        case BinaryOp::mod: return "mod";
    }
    return "?";
}

const char *unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::neg: return "-";
        case UnaryOp::sin: return "sin";
        case UnaryOp::cos: return "cos";
        case UnaryOp::abs: return "abs";
        case UnaryOp::exp: return "exp";
        case UnaryOp::log: return "log";
        case UnaryOp::sqrt: return "sqrt";
    }
    return "?";
}

void print_rec(const Node &n, std::string &out, int parent_prec) {
    switch (n.kind) {
        case Node::Kind::constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            if (n.value < 0 && parent_prec > 0) {
                out += '(';
                out += buf;
                out += ')';
            } else {
                out += buf;
            }
            return;
        }
        case Node::Kind::variable: out += n.name; return;
        case Node::Kind::unary: {
            if (n.uop == UnaryOp::neg) {
                const bool parens = parent_prec > 3;
                if (parens) out += '(';
                out += '-';
                print_rec(*n.a, out, 3);
                if (parens) out += ')';
            } else {
                out += unary_name(n.uop);
                out += '(';
                print_rec(*n.a, out, 0);
                out += ')';
            }
            return;
        }
        case Node::Kind::binary: {
            const int p = binary_prec(n.bop);
            if (p == 5) { // min/max/mod keep call syntax
                out += binary_sym(n.bop);
                out += '(';
                print_rec(*n.a, out, 0);
                out += ", ";
                print_rec(*n.b, out, 0);
                out += ')';
                return;
            }
            const bool parens = p < parent_prec;
            if (parens) out += '(';
            print_rec(*n.a, out, p);
            out += binary_sym(n.bop);
            // left associativity: right child needs parens at equal precedence
            print_rec(*n.b, out, p + 1);
            if (parens) out += ')';
            return;
        }
    }
}

struct Token {
    enum class Kind { number, ident, op, lparen, rparen, comma, end };
    Kind kind;
    double number = 0.0;
    std::string text;
    size_t offset = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }
    const Token &peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        cur_.offset = pos_;
        if (pos_ >= src_.size()) {
            cur_.kind = Token::Kind::end;
            cur_.text = "<end>";
            return;
        }
        const char ch = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) ||
            (ch == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            size_t end = pos_;
            while (end < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
                ++end;
            if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
                size_t e = end + 1;
                if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
                if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
                    while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
                    end = e;
                }
            }
            const std::string text(src_.substr(pos_, end - pos_));
            try {
                cur_.number = std::stod(text);
            } catch (const std::exception &) {
                throw ParseError("malformed number '" + text + "'", pos_, "number");
            }
            cur_.kind = Token::Kind::number;
            cur_.text = text;
            pos_ = end;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t end = pos_;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) ||
                                         src_[end] == '_'))
                ++end;
            cur_.kind = Token::Kind::ident;
            cur_.text = std::string(src_.substr(pos_, end - pos_));
            pos_ = end;
            return;
        }
        switch (ch) {
            case '(': cur_.kind = Token::Kind::lparen; break;
            case ')': cur_.kind = Token::Kind::rparen; break;
            case ',': cur_.kind = Token::Kind::comma; break;
            case '+':
            case '-':
            case '*':
            case '/':
            case '^': cur_.kind = Token::Kind::op; break;
            default:
                throw ParseError(std::string("unexpected character '") + ch + "'", pos_,
                                 "number, identifier, operator or parenthesis");
        }
        cur_.text = std::string(1, ch);
        ++pos_;
    }

    std::string_view src_;
    size_t pos_ = 0;
    Token cur_;
};

NodeRef make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

NodeRef make_unary(UnaryOp op, NodeRef a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::unary;
    n->uop = op;
    n->a = std::move(a);
    return n;
}

NodeRef make_binary(BinaryOp op, NodeRef a, NodeRef b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->bop = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
  public:
    Parser(std::string_view src, const std::vector<std::string> &vars)
        : lex_(src), vars_(vars) {}

    NodeRef parse_all() {
        NodeRef e = parse_add();
        const Token &t = lex_.peek();
        if (t.kind != Token::Kind::end)
            throw ParseError("trailing input '" + t.text + "'", t.offset, "end of input or operator");
        return e;
    }

  private:
    NodeRef parse_add() {
        NodeRef left = parse_mul();
        while (lex_.peek().kind == Token::Kind::op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            const bool add = lex_.take().text == "+";
            left = make_binary(add ? BinaryOp::add : BinaryOp::sub, left, parse_mul());
        }
        return left;
    }

    NodeRef parse_mul() {
        NodeRef left = parse_unary();
        while (lex_.peek().kind == Token::Kind::op &&
               (lex_.peek().text == "*" || lex_.peek().text == "/")) {
            const bool mul = lex_.take().text == "*";
            left = make_binary(mul ? BinaryOp::mul : BinaryOp::div, left, parse_unary());
        }
        return left;
    }

    NodeRef parse_unary() {
        if (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "-") {
            lex_.take();
            return make_unary(UnaryOp::neg, parse_unary());
        }
        return parse_power();
    }

    NodeRef parse_power() {
        NodeRef left = parse_atom();
        while (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "^") {
            lex_.take();
            // exponent admits a leading minus: x^-2 reads as x^(-2)
            NodeRef rhs;
            if (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "-") {
                lex_.take();
                rhs = make_unary(UnaryOp::neg, parse_atom());
            } else {
                rhs = parse_atom();
            }
            left = make_binary(BinaryOp::pow, left, rhs);
        }
        return left;
    }

    NodeRef parse_atom() {
        const Token t = lex_.take();
        switch (t.kind) {
            case Token::Kind::number: return make_const(t.number);
            case Token::Kind::lparen: {
                NodeRef e = parse_add();
                expect_rparen(t.offset);
                return e;
            }
            case Token::Kind::ident: return parse_ident(t);
            default:
                throw ParseError("unexpected token '" + t.text + "'", t.offset,
                                 "number, identifier or '('");
        }
    }

    NodeRef parse_ident(const Token &t) {
        static const std::map<std::string, UnaryOp> unary_fns = {
            {"sin", UnaryOp::sin}, {"cos", UnaryOp::cos},   {"abs", UnaryOp::abs},
            {"exp", UnaryOp::exp}, {"log", UnaryOp::log},   {"sqrt", UnaryOp::sqrt}};
        static const std::map<std::string, BinaryOp> binary_fns = {
            {"min", BinaryOp::min}, {"max", BinaryOp::max}, {"mod", BinaryOp::mod}};

        const auto u = unary_fns.find(t.text);
        const auto b = binary_fns.find(t.text);
        if (u != unary_fns.end() || b != binary_fns.end()) {
            const Token open = lex_.take();
            if (open.kind != Token::Kind::lparen)
                throw ParseError("function '" + t.text + "' needs an argument list", open.offset,
                                 "'('");
            NodeRef first = parse_add();
            if (u != unary_fns.end()) {
                expect_rparen(open.offset);
                return make_unary(u->second, first);
            }
            const Token comma = lex_.take();
            if (comma.kind != Token::Kind::comma)
                throw ParseError("function '" + t.text + "' takes two arguments", comma.offset,
                                 "','");
            NodeRef second = parse_add();
            expect_rparen(open.offset);
            return make_binary(b->second, first, second);
        }

        for (const auto &v : vars_) {
            if (v == t.text) {
                auto n = std::make_shared<Node>();
                n->kind = Node::Kind::variable;
                n->name = t.text;
                return n;
            }
        }
        throw ParseError("unknown function or variable '" + t.text + "'", t.offset,
                         "one of sin,cos,abs,exp,log,sqrt,min,max,mod or a declared variable");
    }

    void expect_rparen(size_t open_offset) {
        const Token t = lex_.take();
        if (t.kind != Token::Kind::rparen)
            throw ParseError("unbalanced parenthesis opened at offset " +
                                 std::to_string(open_offset),
                             t.offset, "')'");
    }

    Lexer lex_;
    const std::vector<std::string> &vars_;
};

bool nodes_equal(const Node &a, const Node &b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Node::Kind::constant: return a.value == b.value;
        case Node::Kind::variable: return a.name == b.name;
        case Node::Kind::unary: return a.uop == b.uop && nodes_equal(*a.a, *b.a);
        case Node::Kind::binary:
            return a.bop == b.bop && nodes_equal(*a.a, *b.a) && nodes_equal(*a.b, *b.b);
    }
    return false;
}

} // namespace

double Expression::evaluate(const std::map<std::string, double> &env) const {
    if (!root_) throw EvalError("empty expression");
    return eval_rec(*root_, env);
}

std::set<std::string> Expression::free_variables() const {
    std::set<std::string> out;
    if (root_) collect_vars(*root_, out);
    return out;
}

std::string Expression::print() const {
    std::string out;
    if (root_) print_rec(*root_, out, 0);
    return out;
}

bool Expression::structurally_equal(const Expression &other) const {
    if (!root_ || !other.root_) return root_ == other.root_;
    return nodes_equal(*root_, *other.root_);
}

Expression parse(std::string_view source, const std::vector<std::string> &variables) {
    Parser p(source, variables);
    return Expression(p.parse_all());
}

BoundExpr::BoundExpr(const Expression &e, const std::vector<std::string> &slot_names) {
    if (e.valid()) root_ = bind(e.root(), slot_names);
}

std::unique_ptr<BoundExpr::BNode> BoundExpr::bind(const NodeRef &n,
                                                  const std::vector<std::string> &names) {
    auto out = std::make_unique<BNode>();
    out->kind = n->kind;
    out->value = n->value;
    out->slot = -1;
    out->uop = n->uop;
    out->bop = n->bop;
    if (n->kind == Node::Kind::variable) {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == n->name) out->slot = static_cast<int>(i);
        if (out->slot < 0) throw EvalError("variable '" + n->name + "' has no slot");
    }
    if (n->a) out->a = bind(n->a, names);
    if (n->b) out->b = bind(n->b, names);
    return out;
}

double BoundExpr::eval_node(const BNode &n, const double *slots) {
    switch (n.kind) {
        case Node::Kind::constant: return n.value;
        case Node::Kind::variable: return slots[n.slot];
        case Node::Kind::unary: return apply_unary(n.uop, eval_node(*n.a, slots));
        case Node::Kind::binary:
            return apply_binary(n.bop, eval_node(*n.a, slots), eval_node(*n.b, slots));
    }
    throw EvalError("bad node kind");
}

double BoundExpr::eval(const double *slots) const {
    if (!root_) throw EvalError("empty bound expression");
    return eval_node(*root_, slots);
}

} // namespace ifslab::expr
