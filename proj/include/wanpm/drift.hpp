#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace wanpm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Drift b : R^n -> R^n together with its Jacobian.
///
/// The Jacobian is needed because the weak-form loss evaluates b at
/// pushforward samples, so its gradient with respect to the generator flows
/// through b.
class DriftField {
public:
    /// out = b(x); both spans have length dim.
    using EvalFn = std::function<void(std::span<const double> x, std::span<double> out)>;
    /// jac = db/dx, row-major dim x dim: jac[i*dim + j] = d b_i / d x_j.
    using JacobianFn = std::function<void(std::span<const double> x, std::span<double> jac)>;

    DriftField(int dim, EvalFn eval, JacobianFn jacobian);

    static DriftField zero(int dim);

    [[nodiscard]] int dim() const { return dim_; }

    void eval(std::span<const double> x, std::span<double> out) const { eval_(x, out); }
    void jacobian(std::span<const double> x, std::span<double> jac) const { jacobian_(x, jac); }

    [[nodiscard]] Vector operator()(const Vector& x) const;
    [[nodiscard]] Matrix jacobian(const Vector& x) const;

    /// Row-wise drift of a B x dim batch.
    [[nodiscard]] Matrix eval_rows(const Matrix& x) const;
    /// Row-wise vector-Jacobian product: row i is J(x_i)^T g_i.
    [[nodiscard]] Matrix vjp_rows(const Matrix& x, const Matrix& g) const;

private:
    int dim_;
    EvalFn eval_;
    JacobianFn jacobian_;
};

}  // namespace wanpm
