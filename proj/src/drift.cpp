#include "wanpm/drift.hpp"

#include <algorithm>
#include <vector>

#include "wanpm/error.hpp"

namespace wanpm {

DriftField::DriftField(int dim, EvalFn eval, JacobianFn jacobian)
    : dim_(dim), eval_(std::move(eval)), jacobian_(std::move(jacobian)) {
    if (dim_ < 1) throw ContractError("drift dimension must be at least 1");
    if (!eval_ || !jacobian_) throw ContractError("drift needs both an evaluator and a Jacobian");
}

DriftField DriftField::zero(int dim) {
    return DriftField(
        dim, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); },
        [](std::span<const double>, std::span<double> jac) { std::fill(jac.begin(), jac.end(), 0.0); });
}

Vector DriftField::operator()(const Vector& x) const {
    if (x.size() != dim_) throw ContractError("drift input has wrong dimension");
    Vector out(dim_);
    eval_(std::span<const double>(x.data(), dim_), std::span<double>(out.data(), dim_));
    return out;
}

Matrix DriftField::jacobian(const Vector& x) const {
    if (x.size() != dim_) throw ContractError("drift input has wrong dimension");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jac(dim_, dim_);
    jacobian_(std::span<const double>(x.data(), dim_), std::span<double>(jac.data(), dim_ * dim_));
    return jac;
}

Matrix DriftField::eval_rows(const Matrix& x) const {
    if (x.cols() != dim_) throw ContractError("drift batch has wrong column count");
    Matrix out(x.rows(), dim_);
    std::vector<double> in(dim_), res(dim_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < dim_; ++j) in[j] = x(i, j);
        eval_(in, res);
        for (int j = 0; j < dim_; ++j) out(i, j) = res[j];
    }
    return out;
}

Matrix DriftField::vjp_rows(const Matrix& x, const Matrix& g) const {
    if (x.cols() != dim_ || g.cols() != dim_ || g.rows() != x.rows())
        throw ContractError("drift vector-Jacobian product shape mismatch");
    Matrix out(x.rows(), dim_);
    std::vector<double> in(dim_), jac(static_cast<std::size_t>(dim_) * dim_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < dim_; ++j) in[j] = x(i, j);
        jacobian_(in, jac);
        for (int j = 0; j < dim_; ++j) {
            double acc = 0.0;
            for (int k = 0; k < dim_; ++k) acc += jac[k * dim_ + j] * g(i, k);
            out(i, j) = acc;
        }
    }
    return out;
}

}  // namespace wanpm
