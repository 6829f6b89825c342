#include "charpic/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace charpic::expr {

std::string_view var_name(Var v) {
    switch (v) {
        case Var::X: return "x";
        case Var::Y: return "y";
        case Var::U: return "u";
        case Var::P: return "p";
        case Var::Q: return "q";
    }
    return "?";
}

std::optional<Var> var_from_name(std::string_view name) {
    if (name == "x") return Var::X;
    if (name == "y") return Var::Y;
    if (name == "u") return Var::U;
    if (name == "p") return Var::P;
    if (name == "q") return Var::Q;
    return std::nullopt;
}

VarSet VarSet::all() {
    VarSet s;
    s.allowed.fill(true);
    return s;
}

VarSet VarSet::of(std::initializer_list<Var> vars) {
    VarSet s;
    for (Var v : vars) s.allowed[static_cast<std::size_t>(v)] = true;
    return s;
}

std::int32_t ExprAst::add_constant(double v) {
    Node n;
    n.kind = Node::Kind::Constant;
    n.value = v;
    nodes_.push_back(n);
    return root();
}

std::int32_t ExprAst::add_variable(Var v) {
    Node n;
    n.kind = Node::Kind::Variable;
    n.var = v;
    nodes_.push_back(n);
    return root();
}

std::int32_t ExprAst::add_unary(UnaryOp op, std::int32_t operand) {
    Node n;
    n.kind = Node::Kind::Unary;
    n.unary_op = op;
    n.lhs = operand;
    nodes_.push_back(n);
    return root();
}

std::int32_t ExprAst::add_binary(BinaryOp op, std::int32_t lhs, std::int32_t rhs) {
    Node n;
    n.kind = Node::Kind::Binary;
    n.binary_op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    nodes_.push_back(n);
    return root();
}

namespace {

[[noreturn]] void domain_fail(const char* what) {
    throw EvalDomainError(std::string("evaluation domain error: ") + what);
}

double apply_unary(UnaryOp op, double a) {
    switch (op) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Sqrt:
            if (a < 0.0) domain_fail("sqrt of negative value");
            return std::sqrt(a);
        case UnaryOp::Abs: return std::abs(a);
        case UnaryOp::Tanh: return std::tanh(a);
    }
    domain_fail("bad unary op");
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
            if (b == 0.0) domain_fail("division by zero");
            return a / b;
        case BinaryOp::Pow: {
            double r = std::pow(a, b);
            if (std::isnan(r)) domain_fail("pow outside real domain");
            return r;
        }
    }
    domain_fail("bad binary op");
}

} // namespace

double ExprAst::evaluate(const Bindings& b) const {
    if (nodes_.empty()) throw EvalDomainError("empty expression");
    // Nodes are in topological order, so one linear pass suffices.
    std::vector<double> vals(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        double r;
        switch (n.kind) {
            case Node::Kind::Constant: r = n.value; break;
            case Node::Kind::Variable: r = b[n.var]; break;
            case Node::Kind::Unary: r = apply_unary(n.unary_op, vals[n.lhs]); break;
            case Node::Kind::Binary: r = apply_binary(n.binary_op, vals[n.lhs], vals[n.rhs]); break;
            default: domain_fail("bad node");
        }
        if (!std::isfinite(r)) domain_fail("non-finite intermediate value");
        vals[i] = r;
    }
    return vals.back();
}

VarSet ExprAst::used_vars() const {
    VarSet s;
    for (const Node& n : nodes_)
        if (n.kind == Node::Kind::Variable) s.allowed[static_cast<std::size_t>(n.var)] = true;
    return s;
}

bool ExprAst::is_constant() const {
    for (const Node& n : nodes_)
        if (n.kind == Node::Kind::Variable) return false;
    return true;
}

double evaluate(const ExprAst& ast, const Bindings& b) { return ast.evaluate(b); }

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    const VarSet& allowed;
    ExprAst ast;

    Parser(std::string_view s, const VarSet& a) : src(s), allowed(a) {}

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    std::int32_t parse_expr() {
        std::int32_t lhs = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                ++pos;
                lhs = ast.add_binary(BinaryOp::Add, lhs, parse_term());
            } else if (c == '-') {
                ++pos;
                lhs = ast.add_binary(BinaryOp::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    std::int32_t parse_term() {
        std::int32_t lhs = parse_unary();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++pos;
                lhs = ast.add_binary(BinaryOp::Mul, lhs, parse_unary());
            } else if (c == '/') {
                ++pos;
                lhs = ast.add_binary(BinaryOp::Div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    std::int32_t parse_unary() {
        if (eat('-')) return ast.add_unary(UnaryOp::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    std::int32_t parse_power() {
        std::int32_t base = parse_primary();
        if (peek() == '^') {
            ++pos;
            // Right-associative; the exponent may carry a unary sign.
            std::int32_t exponent = parse_unary();
            return ast.add_binary(BinaryOp::Pow, base, exponent);
        }
        return base;
    }

    std::int32_t parse_primary() {
        skip_ws();
        if (pos >= src.size()) throw SyntaxError(pos, "unexpected end of expression");
        char c = src[pos];
        if (c == '(') {
            ++pos;
            std::int32_t inner = parse_expr();
            if (!eat(')')) throw SyntaxError(pos, "expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
    }

    std::int32_t parse_number() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
            ++pos;
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t mark = pos++;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            } else {
                pos = mark; // not an exponent after all
            }
        }
        std::string text(src.substr(start, pos - start));
        char* end = nullptr;
        double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size())
            throw SyntaxError(start, "malformed number '" + text + "'");
        return ast.add_constant(v);
    }

    std::int32_t parse_ident() {
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name(src.substr(start, pos - start));
        if (peek() == '(') {
            ++pos;
            UnaryOp op;
            if (name == "sin") op = UnaryOp::Sin;
            else if (name == "cos") op = UnaryOp::Cos;
            else if (name == "exp") op = UnaryOp::Exp;
            else if (name == "sqrt") op = UnaryOp::Sqrt;
            else if (name == "abs") op = UnaryOp::Abs;
            else if (name == "tanh") op = UnaryOp::Tanh;
            else throw UnknownFunction(start, name);
            std::int32_t arg = parse_expr();
            if (!eat(')')) throw SyntaxError(pos, "expected ')' after function argument");
            return ast.add_unary(op, arg);
        }
        if (name == "pi") return ast.add_constant(3.14159265358979323846);
        auto v = var_from_name(name);
        if (!v) throw UnknownVariable(start, name);
        if (!allowed.contains(*v)) throw UnknownVariable(start, name);
        return ast.add_variable(*v);
    }
};

} // namespace

ExprAst parse(std::string_view source, const VarSet& allowed) {
    Parser p(source, allowed);
    p.skip_ws();
    if (p.pos >= source.size()) throw SyntaxError(0, "empty expression");
    p.parse_expr();
    p.skip_ws();
    if (p.pos < source.size())
        throw SyntaxError(p.pos, std::string("trailing input starting at '") + source[p.pos] + "'");
    return std::move(p.ast);
}

// ---------------------------------------------------------------------------
// Pretty printer
// ---------------------------------------------------------------------------

namespace {

int binary_prec(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
    }
    return 0;
}

const char* binary_sym(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return " + ";
        case BinaryOp::Sub: return " - ";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
    }
    return "?";
}

const char* unary_fn(UnaryOp op) {
    switch (op) {
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Neg: return "-";
    }
    return "?";
}

std::string format_constant(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string ExprAst::print_node(std::int32_t idx, int parent_prec, bool right_of_pow) const {
    const Node& n = nodes_[idx];
    switch (n.kind) {
        case Node::Kind::Constant: {
            std::string s = format_constant(n.value);
            if (n.value < 0 && parent_prec > 0) return "(" + s + ")";
            return s;
        }
        case Node::Kind::Variable:
            return std::string(var_name(n.var));
        case Node::Kind::Unary: {
            if (n.unary_op == UnaryOp::Neg) {
                // Unary minus sits between * and ^ in precedence.
                std::string inner = print_node(n.lhs, 3, false);
                std::string s = "-" + inner;
                if (parent_prec >= 3 || right_of_pow) return "(" + s + ")";
                return s;
            }
            return std::string(unary_fn(n.unary_op)) + "(" + print_node(n.lhs, 0, false) + ")";
        }
        case Node::Kind::Binary: {
            int prec = binary_prec(n.binary_op);
            bool rassoc = n.binary_op == BinaryOp::Pow;
            std::string lhs = print_node(n.lhs, rassoc ? prec + 1 : prec, false);
            std::string rhs =
                print_node(n.rhs, rassoc ? prec : prec + 1, n.binary_op == BinaryOp::Pow);
            std::string s = lhs + binary_sym(n.binary_op) + rhs;
            if (prec < parent_prec) return "(" + s + ")";
            return s;
        }
    }
    return "?";
}

std::string ExprAst::pretty_print() const {
    if (nodes_.empty()) return "";
    return print_node(root(), 0, false);
}

// ---------------------------------------------------------------------------
// Symbolic derivative
// ---------------------------------------------------------------------------

std::int32_t ExprAst::clone_into(std::int32_t idx, ExprAst& out) const {
    const Node& n = nodes_[idx];
    switch (n.kind) {
        case Node::Kind::Constant: return out.add_constant(n.value);
        case Node::Kind::Variable: return out.add_variable(n.var);
        case Node::Kind::Unary: return out.add_unary(n.unary_op, clone_into(n.lhs, out));
        case Node::Kind::Binary:
            return out.add_binary(n.binary_op, clone_into(n.lhs, out), clone_into(n.rhs, out));
    }
    return -1;
}

std::optional<std::int32_t> ExprAst::diff_node(std::int32_t idx, Var v, ExprAst& out) const {
    const Node& n = nodes_[idx];
    switch (n.kind) {
        case Node::Kind::Constant:
            return out.add_constant(0.0);
        case Node::Kind::Variable:
            return out.add_constant(n.var == v ? 1.0 : 0.0);
        case Node::Kind::Unary: {
            auto inner = diff_node(n.lhs, v, out);
            if (!inner) return std::nullopt;
            switch (n.unary_op) {
                case UnaryOp::Neg:
                    return out.add_unary(UnaryOp::Neg, *inner);
                case UnaryOp::Sin:
                    return out.add_binary(BinaryOp::Mul,
                                          out.add_unary(UnaryOp::Cos, clone_into(n.lhs, out)),
                                          *inner);
                case UnaryOp::Cos:
                    return out.add_unary(
                        UnaryOp::Neg,
                        out.add_binary(BinaryOp::Mul,
                                       out.add_unary(UnaryOp::Sin, clone_into(n.lhs, out)),
                                       *inner));
                case UnaryOp::Exp:
                    return out.add_binary(BinaryOp::Mul,
                                          out.add_unary(UnaryOp::Exp, clone_into(n.lhs, out)),
                                          *inner);
                case UnaryOp::Sqrt: {
                    // g' / (2 sqrt(g))
                    std::int32_t denom = out.add_binary(
                        BinaryOp::Mul, out.add_constant(2.0),
                        out.add_unary(UnaryOp::Sqrt, clone_into(n.lhs, out)));
                    return out.add_binary(BinaryOp::Div, *inner, denom);
                }
                case UnaryOp::Tanh: {
                    // (1 - tanh(g)^2) g'
                    std::int32_t t = out.add_unary(UnaryOp::Tanh, clone_into(n.lhs, out));
                    std::int32_t t2 = out.add_binary(BinaryOp::Mul, t,
                                                     out.add_unary(UnaryOp::Tanh,
                                                                   clone_into(n.lhs, out)));
                    std::int32_t one_minus =
                        out.add_binary(BinaryOp::Sub, out.add_constant(1.0), t2);
                    return out.add_binary(BinaryOp::Mul, one_minus, *inner);
                }
                case UnaryOp::Abs:
                    return std::nullopt; // not differentiable at 0; use finite differences
            }
            return std::nullopt;
        }
        case Node::Kind::Binary: {
            switch (n.binary_op) {
                case BinaryOp::Add: {
                    auto l = diff_node(n.lhs, v, out);
                    if (!l) return std::nullopt;
                    auto r = diff_node(n.rhs, v, out);
                    if (!r) return std::nullopt;
                    return out.add_binary(BinaryOp::Add, *l, *r);
                }
                case BinaryOp::Sub: {
                    auto l = diff_node(n.lhs, v, out);
                    if (!l) return std::nullopt;
                    auto r = diff_node(n.rhs, v, out);
                    if (!r) return std::nullopt;
                    return out.add_binary(BinaryOp::Sub, *l, *r);
                }
                case BinaryOp::Mul: {
                    auto l = diff_node(n.lhs, v, out);
                    if (!l) return std::nullopt;
                    auto r = diff_node(n.rhs, v, out);
                    if (!r) return std::nullopt;
                    std::int32_t a = out.add_binary(BinaryOp::Mul, *l, clone_into(n.rhs, out));
                    std::int32_t b = out.add_binary(BinaryOp::Mul, clone_into(n.lhs, out), *r);
                    return out.add_binary(BinaryOp::Add, a, b);
                }
                case BinaryOp::Div: {
                    auto l = diff_node(n.lhs, v, out);
                    if (!l) return std::nullopt;
                    auto r = diff_node(n.rhs, v, out);
                    if (!r) return std::nullopt;
                    std::int32_t num = out.add_binary(
                        BinaryOp::Sub,
                        out.add_binary(BinaryOp::Mul, *l, clone_into(n.rhs, out)),
                        out.add_binary(BinaryOp::Mul, clone_into(n.lhs, out), *r));
                    std::int32_t den = out.add_binary(BinaryOp::Mul, clone_into(n.rhs, out),
                                                      clone_into(n.rhs, out));
                    return out.add_binary(BinaryOp::Div, num, den);
                }
                case BinaryOp::Pow: {
                    // Handle constant exponents only: (g^c)' = c g^(c-1) g'.
                    const Node& e = nodes_[n.rhs];
                    if (e.kind != Node::Kind::Constant) return std::nullopt;
                    auto l = diff_node(n.lhs, v, out);
                    if (!l) return std::nullopt;
                    double c = e.value;
                    std::int32_t powm1 =
                        out.add_binary(BinaryOp::Pow, clone_into(n.lhs, out),
                                       out.add_constant(c - 1.0));
                    std::int32_t scaled =
                        out.add_binary(BinaryOp::Mul, out.add_constant(c), powm1);
                    return out.add_binary(BinaryOp::Mul, scaled, *l);
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<ExprAst> ExprAst::derivative(Var v) const {
    if (nodes_.empty()) return std::nullopt;
    ExprAst out;
    if (!diff_node(root(), v, out)) return std::nullopt;
    return out;
}

// ---------------------------------------------------------------------------
// Lipschitz estimation
// ---------------------------------------------------------------------------

LipschitzBox estimate_lipschitz(const ExprAst& ast, LipschitzBox box, int grid_density) {
    if (grid_density < 2) grid_density = 2;
    VarSet used = ast.used_vars();

    auto axis_samples = [&](Var v, const std::array<double, 2>& range, int density) {
        std::vector<double> pts;
        if (!used.contains(v)) {
            pts.push_back(0.5 * (range[0] + range[1]));
            return pts;
        }
        int n = density;
        pts.reserve(n);
        for (int i = 0; i < n; ++i)
            pts.push_back(range[0] + (range[1] - range[0]) * i / double(n - 1));
        return pts;
    };

    const int xy_density = std::min(grid_density, 9);
    auto xs = axis_samples(Var::X, box.x_range, xy_density);
    auto ys = axis_samples(Var::Y, box.y_range, xy_density);
    auto us = axis_samples(Var::U, box.u_range, grid_density);
    auto ps = axis_samples(Var::P, box.p_range, grid_density);
    auto qs = axis_samples(Var::Q, box.q_range, grid_density);

    auto step_for = [](const std::array<double, 2>& range) {
        double w = range[1] - range[0];
        return std::max(1e-6 * std::max(std::abs(w), 1.0), 1e-9);
    };
    const double du = step_for(box.u_range);
    const double dp = step_for(box.p_range);
    const double dq = step_for(box.q_range);

    double L = 0.0;
    double sup_f = 0.0;

    // Central difference, shifted inward at the box edges so both stencil
    // points stay inside the sampled range.
    auto quot = [&](Bindings b, Var v, double step, const std::array<double, 2>& range) {
        double lo = b[v] - step, hi = b[v] + step;
        if (lo < range[0]) { lo = range[0]; hi = range[0] + 2 * step; }
        if (hi > range[1]) { hi = range[1]; lo = range[1] - 2 * step; }
        Bindings bl = b, bh = b;
        bl[v] = lo;
        bh[v] = hi;
        return std::abs(ast.evaluate(bh) - ast.evaluate(bl)) / (hi - lo);
    };

    for (double x : xs)
        for (double y : ys)
            for (double u : us)
                for (double p : ps)
                    for (double q : qs) {
                        Bindings b = Bindings::at(x, y, u, p, q);
                        sup_f = std::max(sup_f, std::abs(ast.evaluate(b)));
                        if (used.contains(Var::U))
                            L = std::max(L, quot(b, Var::U, du, box.u_range));
                        if (used.contains(Var::P))
                            L = std::max(L, quot(b, Var::P, dp, box.p_range));
                        if (used.contains(Var::Q))
                            L = std::max(L, quot(b, Var::Q, dq, box.q_range));
                    }

    box.lipschitz = L;
    box.sup_f = sup_f;
    return box;
}

} // namespace charpic::expr
