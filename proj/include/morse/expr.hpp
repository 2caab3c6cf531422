#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "morse/geometry.hpp"

namespace morse {

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

struct DomainError : Error {
    using Error::Error;
};

namespace ast {
enum class Kind : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

struct Node {
    Kind kind;
    double value = 0.0;    // Const
    int var = 0;           // Var
    int ipow = 0;          // Pow exponent
    std::size_t offset = 0;
    std::shared_ptr<const Node> a, b;
};
}  // namespace ast

/// A scalar field given by a parsed expression over x0..x_{n-1}.
///
/// Values, gradients and Hessians come from forward-mode evaluation of the
/// expression compiled to a flat tape; see FieldWorkspace.  Fields are value
/// objects and immutable after construction, so they are freely shareable
/// across threads.
class ScalarField {
public:
    ScalarField() = default;

    /// Grammar (exact):
    ///   expr   := term (('+'|'-') term)*
    ///   term   := factor (('*'|'/') factor)*
    ///   factor := atom ('^' integer)?
    ///   atom   := number | ident | '(' expr ')'
    ///           | ('sin'|'cos'|'exp') '(' expr ')' | '-' atom
    static ScalarField parse(const std::string& src);

    /// Wrap an existing AST (used to form combinations like h - F).
    static ScalarField from_ast(std::shared_ptr<const ast::Node> root, std::string label);

    static ScalarField difference(const ScalarField& f, const ScalarField& g);

    bool empty() const { return root_ == nullptr; }
    const std::string& source() const { return src_; }
    int max_var() const { return max_var_; }
    std::shared_ptr<const ast::Node> root() const { return root_; }

    /// Validate the variable set against a manifold; also probes evaluation
    /// over a coarse sample so expressions undefined somewhere on M (division
    /// by a vanishing factor) are rejected up front.
    void bind_check(const ManifoldModel& m, double euclidean_box) const;

    // Convenience single-shot evaluation; hot paths should hold a
    // FieldWorkspace instead.
    double value(const std::vector<double>& x) const;
    double value_grad(const std::vector<double>& x, std::vector<double>& grad) const;
    double value_grad_hess(const std::vector<double>& x, std::vector<double>& grad,
                           std::vector<double>& hess) const;

    struct TapeOp {
        ast::Kind kind;
        int a = -1, b = -1;
        double cval = 0.0;
        int var = 0;
        int ipow = 0;
        std::uint32_t offset = 0;
    };
    const std::vector<TapeOp>& tape() const { return tape_; }

private:
    std::shared_ptr<const ast::Node> root_;
    std::string src_;
    std::vector<TapeOp> tape_;
    int max_var_ = -1;

    void compile();
};

/// Reusable evaluation buffers for one field at one dimension.  Construct one
/// per thread per hot loop; evaluation itself is pure.
class FieldWorkspace {
public:
    FieldWorkspace(const ScalarField& f, int dim);

    int dim() const { return n_; }

    double value(const double* x);
    /// Returns f(x) and writes the n-vector grad.
    double gradient(const double* x, double* grad);
    /// Returns f(x), writes grad (n) and the symmetric Hessian (n*n, row major).
    double hessian(const double* x, double* grad, double* hess);

    double value(const std::vector<double>& x) { return value(x.data()); }
    double gradient(const std::vector<double>& x, std::vector<double>& g) {
        g.resize(static_cast<std::size_t>(n_));
        return gradient(x.data(), g.data());
    }
    double hessian(const std::vector<double>& x, std::vector<double>& g, std::vector<double>& h) {
        g.resize(static_cast<std::size_t>(n_));
        h.resize(static_cast<std::size_t>(n_ * n_));
        return hessian(x.data(), g.data(), h.data());
    }

private:
    const ScalarField* f_;
    int n_;
    std::vector<double> val_;
    std::vector<double> grad_;
    std::vector<double> hess_;

    template <int Order>
    double run(const double* x, double* grad, double* hess);
};

}  // namespace morse
