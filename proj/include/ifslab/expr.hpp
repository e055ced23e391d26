#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ifslab::expr {

enum class UnaryOp { neg, sin, cos, abs, exp, log, sqrt };
enum class BinaryOp { add, sub, mul, div, pow, min, max, mod };

struct Node;
using NodeRef = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { constant, variable, unary, binary };
    Kind kind;
    double value = 0.0;   // constant
    std::string name;     // variable
    UnaryOp uop{};
    BinaryOp bop{};
    NodeRef a, b;
};

struct ParseError : std::runtime_error {
    size_t offset;
    std::string expected;
    ParseError(const std::string &msg, size_t off, std::string exp)
        : std::runtime_error(msg), offset(off), expected(std::move(exp)) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string &m) : std::runtime_error(m) {}
};

// Immutable after parse; safe to share across threads.
class Expression {
  public:
    Expression() = default;
    explicit Expression(NodeRef root) : root_(std::move(root)) {}

    const NodeRef &root() const { return root_; }
    bool valid() const { return root_ != nullptr; }

    double evaluate(const std::map<std::string, double> &env) const;
    std::set<std::string> free_variables() const;
    std::string print() const;

    bool structurally_equal(const Expression &other) const;

  private:
    NodeRef root_;
};

// Parses `source` against the fixed function set; identifiers outside
// `variables` are rejected with a ParseError carrying the byte offset.
Expression parse(std::string_view source,
                 const std::vector<std::string> &variables = {"x", "y", "z"});

// Expression with variable names resolved to slot indices, for hot loops.
class BoundExpr {
  public:
    BoundExpr() = default;
    BoundExpr(const Expression &e, const std::vector<std::string> &slot_names);
    double eval(const double *slots) const;
    bool valid() const { return root_ != nullptr; }

  private:
    struct BNode {
        Node::Kind kind;
        double value;
        int slot;
        UnaryOp uop;
        BinaryOp bop;
        std::unique_ptr<BNode> a, b;
    };
    static std::unique_ptr<BNode> bind(const NodeRef &n, const std::vector<std::string> &names);
    static double eval_node(const BNode &n, const double *slots);
    std::shared_ptr<const BNode> root_;
};

} // namespace ifslab::expr
