#include "morse/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <map>

namespace morse {

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& src) : s(src) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eof() {
        skip_ws();
        return pos >= s.size();
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    using NodePtr = std::shared_ptr<const ast::Node>;

    static NodePtr make(ast::Kind k, std::size_t off, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<ast::Node>();
        n->kind = k;
        n->offset = off;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            char c = peek();
            if (c == '+' || c == '-') {
                std::size_t off = pos;
                ++pos;
                NodePtr rhs = parse_term();
                lhs = make(c == '+' ? ast::Kind::Add : ast::Kind::Sub, off, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        while (true) {
            char c = peek();
            if (c == '*' || c == '/') {
                std::size_t off = pos;
                ++pos;
                NodePtr rhs = parse_factor();
                lhs = make(c == '*' ? ast::Kind::Mul : ast::Kind::Div, off, lhs, rhs);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        NodePtr base = parse_atom();
        if (peek() == '^') {
            std::size_t off = pos;
            ++pos;
            skip_ws();
            bool neg = false;
            if (pos < s.size() && s[pos] == '-') {
                neg = true;
                ++pos;
            }
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) throw ParseError("integer exponent expected", pos);
            if (pos < s.size() && (s[pos] == '.' || s[pos] == 'e' || s[pos] == 'E'))
                throw ParseError("integer exponent expected", pos);
            int e = std::stoi(s.substr(start, pos - start));
            auto n = std::make_shared<ast::Node>();
            n->kind = ast::Kind::Pow;
            n->offset = off;
            n->ipow = neg ? -e : e;
            n->a = base;
            return n;
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
        std::size_t off = pos;
        char c = s[pos];
        if (c == '-') {
            ++pos;
            NodePtr a = parse_atom();
            return make(ast::Kind::Neg, off, a);
        }
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (peek() != ')') throw ParseError("expected ')'", pos);
            ++pos;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr parse_number() {
        std::size_t off = pos;
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.'))
            ++end;
        if (end < s.size() && (s[end] == 'e' || s[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
            if (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
                while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) ++e;
                end = e;
            }
        }
        double v;
        try {
            v = std::stod(s.substr(off, end - off));
        } catch (const std::exception&) {
            throw ParseError("malformed number", off);
        }
        pos = end;
        auto n = std::make_shared<ast::Node>();
        n->kind = ast::Kind::Const;
        n->value = v;
        n->offset = off;
        return n;
    }

    NodePtr parse_ident() {
        std::size_t off = pos;
        std::size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
            ++end;
        std::string name = s.substr(off, end - off);
        pos = end;

        ast::Kind fn;
        if (name == "sin") fn = ast::Kind::Sin;
        else if (name == "cos") fn = ast::Kind::Cos;
        else if (name == "exp") fn = ast::Kind::Exp;
        else {
            if (name.size() >= 2 && name[0] == 'x') {
                bool digits = true;
                for (std::size_t i = 1; i < name.size(); ++i)
                    if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
                if (digits) {
                    auto n = std::make_shared<ast::Node>();
                    n->kind = ast::Kind::Var;
                    n->var = std::stoi(name.substr(1));
                    n->offset = off;
                    return n;
                }
            }
            throw ParseError("unknown identifier '" + name + "'", off);
        }
        if (peek() != '(') throw ParseError("expected '(' after '" + name + "'", pos);
        ++pos;
        NodePtr arg = parse_expr();
        if (peek() != ')') throw ParseError("expected ')'", pos);
        ++pos;
        return make(fn, off, arg);
    }
};

}  // namespace

ScalarField ScalarField::parse(const std::string& src) {
    bool blank = true;
    for (char c : src)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) throw ParseError("empty expression", 0);
    Parser p(src);
    auto root = p.parse_expr();
    if (!p.eof()) throw ParseError("trailing input", p.pos);
    return from_ast(root, src);
}

ScalarField ScalarField::from_ast(std::shared_ptr<const ast::Node> root, std::string label) {
    ScalarField f;
    f.root_ = std::move(root);
    f.src_ = std::move(label);
    f.compile();
    return f;
}

ScalarField ScalarField::difference(const ScalarField& f, const ScalarField& g) {
    auto n = std::make_shared<ast::Node>();
    n->kind = ast::Kind::Sub;
    n->a = f.root_;
    n->b = g.root_;
    return from_ast(n, "(" + f.src_ + ") - (" + g.src_ + ")");
}

void ScalarField::compile() {
    tape_.clear();
    max_var_ = -1;
    // Postorder flattening; slot index == tape index.
    struct Walk {
        ScalarField* f;
        int go(const ast::Node* n) {
            TapeOp op;
            op.kind = n->kind;
            op.cval = n->value;
            op.var = n->var;
            op.ipow = n->ipow;
            op.offset = static_cast<std::uint32_t>(n->offset);
            if (n->kind == ast::Kind::Var && n->var > f->max_var_) f->max_var_ = n->var;
            if (n->a) op.a = go(n->a.get());
            if (n->b) op.b = go(n->b.get());
            f->tape_.push_back(op);
            return static_cast<int>(f->tape_.size()) - 1;
        }
    };
    if (root_) Walk{this}.go(root_.get());
}

void ScalarField::bind_check(const ManifoldModel& m, double euclidean_box) const {
    if (max_var_ >= m.dim())
        throw Error("expression references x" + std::to_string(max_var_) +
                    " but the manifold has only " + std::to_string(m.dim()) + " coordinates");
    // Probe a coarse grid so division blowups surface at load time.
    FieldWorkspace ws(*this, m.dim());
    int n = m.dim();
    int per_axis = 7;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    while (true) {
        for (int i = 0; i < n; ++i) {
            double t = (idx[static_cast<std::size_t>(i)] + 0.41) / per_axis;
            x[static_cast<std::size_t>(i)] =
                m.is_toroidal(i) ? t * m.period(i) : (2 * t - 1) * euclidean_box;
        }
        double v = ws.value(x.data());
        if (!std::isfinite(v))
            throw DomainError("expression is not finite on the manifold (probe sample)");
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < per_axis) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == n) break;
    }
}

// ---------------------------------------------------------------------------
// Tape evaluation
// ---------------------------------------------------------------------------

namespace {

double pow_int(double a, int e) {
    if (e == 0) return 1.0;
    bool inv = e < 0;
    unsigned long long k = inv ? static_cast<unsigned long long>(-(long long)e)
                               : static_cast<unsigned long long>(e);
    double r = 1.0, b = a;
    while (k) {
        if (k & 1ull) r *= b;
        b *= b;
        k >>= 1;
    }
    return inv ? 1.0 / r : r;
}

}  // namespace

FieldWorkspace::FieldWorkspace(const ScalarField& f, int dim) : f_(&f), n_(dim) {
    std::size_t slots = f.tape().size();
    val_.resize(slots);
    grad_.resize(slots * static_cast<std::size_t>(n_));
    hess_.resize(slots * static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
}

template <int Order>
double FieldWorkspace::run(const double* x, double* grad, double* hess) {
    const auto& tape = f_->tape();
    if (tape.empty()) throw Error("empty field");
    const int n = n_;
    const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    double* V = val_.data();
    double* G = grad_.data();
    double* H = hess_.data();

    for (std::size_t t = 0; t < tape.size(); ++t) {
        const auto& op = tape[t];
        double* g = G + t * static_cast<std::size_t>(n);
        double* h = H + t * nn;
        const double* ga = op.a >= 0 ? G + static_cast<std::size_t>(op.a) * n : nullptr;
        const double* gb = op.b >= 0 ? G + static_cast<std::size_t>(op.b) * n : nullptr;
        const double* ha = op.a >= 0 ? H + static_cast<std::size_t>(op.a) * nn : nullptr;
        const double* hb = op.b >= 0 ? H + static_cast<std::size_t>(op.b) * nn : nullptr;
        const double va = op.a >= 0 ? V[op.a] : 0.0;
        const double vb = op.b >= 0 ? V[op.b] : 0.0;

        switch (op.kind) {
            case ast::Kind::Const:
                V[t] = op.cval;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = 0.0;
                if (Order >= 2)
                    for (std::size_t i = 0; i < nn; ++i) h[i] = 0.0;
                break;
            case ast::Kind::Var:
                V[t] = x[op.var];
                if (Order >= 1) {
                    for (int i = 0; i < n; ++i) g[i] = 0.0;
                    g[op.var] = 1.0;
                }
                if (Order >= 2)
                    for (std::size_t i = 0; i < nn; ++i) h[i] = 0.0;
                break;
            case ast::Kind::Add:
                V[t] = va + vb;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = ga[i] + gb[i];
                if (Order >= 2)
                    for (std::size_t i = 0; i < nn; ++i) h[i] = ha[i] + hb[i];
                break;
            case ast::Kind::Sub:
                V[t] = va - vb;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = ga[i] - gb[i];
                if (Order >= 2)
                    for (std::size_t i = 0; i < nn; ++i) h[i] = ha[i] - hb[i];
                break;
            case ast::Kind::Mul:
                V[t] = va * vb;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = va * gb[i] + vb * ga[i];
                if (Order >= 2)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            h[i * n + j] = va * hb[i * n + j] + vb * ha[i * n + j] +
                                           ga[i] * gb[j] + gb[i] * ga[j];
                break;
            case ast::Kind::Div: {
                if (vb == 0.0)
                    throw DomainError("division by zero in '" + f_->source() + "' (offset " +
                                      std::to_string(op.offset) + ")");
                double inv = 1.0 / vb;
                double v = va * inv;
                V[t] = v;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = (ga[i] - v * gb[i]) * inv;
                if (Order >= 2)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            h[i * n + j] = (ha[i * n + j] - v * hb[i * n + j] - g[i] * gb[j] -
                                            gb[i] * g[j]) *
                                           inv;
                break;
            }
            case ast::Kind::Pow: {
                int m = op.ipow;
                if (va == 0.0 && m < 0)
                    throw DomainError("zero raised to negative power in '" + f_->source() + "'");
                double v = pow_int(va, m);
                double d1 = m != 0 ? m * pow_int(va, m - 1) : 0.0;
                double d2 = (m == 0 || m == 1) ? 0.0 : double(m) * (m - 1) * pow_int(va, m - 2);
                V[t] = v;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = d1 * ga[i];
                if (Order >= 2)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            h[i * n + j] = d1 * ha[i * n + j] + d2 * ga[i] * ga[j];
                break;
            }
            case ast::Kind::Neg:
                V[t] = -va;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = -ga[i];
                if (Order >= 2)
                    for (std::size_t i = 0; i < nn; ++i) h[i] = -ha[i];
                break;
            case ast::Kind::Sin:
            case ast::Kind::Cos:
            case ast::Kind::Exp: {
                double v, d1, d2;
                if (op.kind == ast::Kind::Sin) {
                    v = std::sin(va);
                    d1 = std::cos(va);
                    d2 = -v;
                } else if (op.kind == ast::Kind::Cos) {
                    v = std::cos(va);
                    d1 = -std::sin(va);
                    d2 = -v;
                } else {
                    v = std::exp(va);
                    d1 = v;
                    d2 = v;
                }
                V[t] = v;
                if (Order >= 1)
                    for (int i = 0; i < n; ++i) g[i] = d1 * ga[i];
                if (Order >= 2)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            h[i * n + j] = d1 * ha[i * n + j] + d2 * ga[i] * ga[j];
                break;
            }
        }
    }
    std::size_t last = tape.size() - 1;
    if (Order >= 1 && grad)
        std::memcpy(grad, G + last * static_cast<std::size_t>(n), sizeof(double) * static_cast<std::size_t>(n));
    if (Order >= 2 && hess) std::memcpy(hess, H + last * nn, sizeof(double) * nn);
    return V[last];
}

double FieldWorkspace::value(const double* x) { return run<0>(x, nullptr, nullptr); }
double FieldWorkspace::gradient(const double* x, double* grad) { return run<1>(x, grad, nullptr); }
double FieldWorkspace::hessian(const double* x, double* grad, double* hess) {
    return run<2>(x, grad, hess);
}

double ScalarField::value(const std::vector<double>& x) const {
    FieldWorkspace ws(*this, static_cast<int>(x.size()));
    return ws.value(x.data());
}

double ScalarField::value_grad(const std::vector<double>& x, std::vector<double>& grad) const {
    FieldWorkspace ws(*this, static_cast<int>(x.size()));
    return ws.gradient(x, grad);
}

double ScalarField::value_grad_hess(const std::vector<double>& x, std::vector<double>& grad,
                                    std::vector<double>& hess) const {
    FieldWorkspace ws(*this, static_cast<int>(x.size()));
    return ws.hessian(x, grad, hess);
}

}  // namespace morse
