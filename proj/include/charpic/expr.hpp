#ifndef CHARPIC_EXPR_HPP
#define CHARPIC_EXPR_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "charpic/errors.hpp"

namespace charpic::expr {

// Variables the language knows about. phi/psi/theta expressions restrict the
// allowed set at parse time; the right-hand side f may use all five.
enum class Var : std::uint8_t { X = 0, Y = 1, U = 2, P = 3, Q = 4 };

constexpr std::size_t kNumVars = 5;

std::string_view var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);

struct VarSet {
    std::array<bool, kNumVars> allowed{};

    static VarSet none() { return {}; }
    static VarSet all();
    static VarSet of(std::initializer_list<Var> vars);
    static VarSet xy() { return of({Var::X, Var::Y}); }
    static VarSet only(Var v) { return of({v}); }

    bool contains(Var v) const { return allowed[static_cast<std::size_t>(v)]; }
};

struct Bindings {
    std::array<double, kNumVars> values{};

    double& operator[](Var v) { return values[static_cast<std::size_t>(v)]; }
    double operator[](Var v) const { return values[static_cast<std::size_t>(v)]; }

    static Bindings at_xy(double x, double y) {
        Bindings b;
        b[Var::X] = x;
        b[Var::Y] = y;
        return b;
    }
    static Bindings at(double x, double y, double u, double p, double q) {
        Bindings b;
        b[Var::X] = x;
        b[Var::Y] = y;
        b[Var::U] = u;
        b[Var::P] = p;
        b[Var::Q] = q;
        return b;
    }
};

enum class UnaryOp : std::uint8_t { Neg, Sin, Cos, Exp, Sqrt, Abs, Tanh };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

// Arena-allocated expression tree. Nodes are stored in evaluation-friendly
// topological order (children before parents); the last node is the root.
class ExprAst {
public:
    struct Node {
        enum class Kind : std::uint8_t { Constant, Variable, Unary, Binary } kind;
        union {
            double value;           // Constant
            Var var;                // Variable
            UnaryOp unary_op;       // Unary
            BinaryOp binary_op;     // Binary
        };
        std::int32_t lhs = -1;      // Unary operand / Binary lhs
        std::int32_t rhs = -1;      // Binary rhs
    };

    ExprAst() = default;

    double evaluate(const Bindings& b) const;

    // Which variables actually occur in the expression.
    VarSet used_vars() const;

    bool is_constant() const;

    // Canonical textual form (fully parenthesized except where redundant);
    // parse(pretty_print(ast)) reproduces the same tree.
    std::string pretty_print() const;

    // Symbolic derivative with respect to `v`. Fails (nullopt) on abs() and on
    // powers with a non-constant exponent; callers fall back to finite
    // differences in that case.
    std::optional<ExprAst> derivative(Var v) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::int32_t root() const { return static_cast<std::int32_t>(nodes_.size()) - 1; }
    bool empty() const { return nodes_.empty(); }

    // Builder interface (used by the parser and by derivative()).
    std::int32_t add_constant(double v);
    std::int32_t add_variable(Var v);
    std::int32_t add_unary(UnaryOp op, std::int32_t operand);
    std::int32_t add_binary(BinaryOp op, std::int32_t lhs, std::int32_t rhs);

private:
    std::vector<Node> nodes_;

    std::string print_node(std::int32_t idx, int parent_prec, bool right_of_pow) const;
    std::optional<std::int32_t> diff_node(std::int32_t idx, Var v, ExprAst& out) const;
    std::int32_t clone_into(std::int32_t idx, ExprAst& out) const;
};

// Parses `source` into an AST. Variable references outside `allowed` raise
// UnknownVariable. Precedence: ^ binds tighter than unary minus, which binds
// tighter than * and /, which bind tighter than + and -; ^ is
// right-associative.
ExprAst parse(std::string_view source, const VarSet& allowed);

double evaluate(const ExprAst& ast, const Bindings& b);

// Estimated Lipschitz data for f(x, y, u, p, q) over a box of (u, p, q)
// values. With the sum norm |v| = |u| + |p| + |q|, the Lipschitz constant is
// the sup over the box of max(|f_u|, |f_p|, |f_q|).
struct LipschitzBox {
    std::array<double, 2> u_range{-1.0, 1.0};
    std::array<double, 2> p_range{-1.0, 1.0};
    std::array<double, 2> q_range{-1.0, 1.0};
    std::array<double, 2> x_range{0.0, 1.0};
    std::array<double, 2> y_range{0.0, 1.0};
    double lipschitz = 0.0;
    double sup_f = 0.0;
};

// Samples difference quotients of `ast` in u, p, q over the box. Axes the
// expression does not reference are skipped. `grid_density` is the sample
// count per referenced (u,p,q) axis; x and y are sampled more coarsely.
LipschitzBox estimate_lipschitz(const ExprAst& ast, LipschitzBox box, int grid_density = 64);

} // namespace charpic::expr

#endif
