#include "wanpm/tape.hpp"

#include <cmath>
#include <string>

#include "wanpm/error.hpp"

namespace wanpm::ad {
namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Tape& same_tape(Var a, Var b) {
    if (!a.valid() || a.tape() != b.tape()) throw ContractError("operands live on different tapes");
    return *a.tape();
}

Tape& tape_of(Var a) {
    if (!a.valid()) throw ContractError("operation on an unbound variable");
    return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}

}  // namespace

const Matrix& Var::value() const {
    if (!tape_) throw ContractError("unbound variable");
    return tape_->value(*this);
}

double Var::scalar() const {
    const auto& v = value();
    if (v.size() != 1) throw ContractError("scalar() on a non-scalar node");
    return v(0, 0);
}

Var Tape::constant(Matrix value) {
    nodes_.push_back({std::move(value), Matrix(), false, nullptr});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(Matrix value) {
    nodes_.push_back({std::move(value), Matrix(), true, nullptr});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id())).value; }

bool Tape::requires_grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id())).requires_grad; }

Matrix Tape::grad(Var v) const {
    const auto& node = nodes_.at(static_cast<std::size_t>(v.id()));
    if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
}

Var Tape::push(Matrix value, std::initializer_list<Var> parents, Backward backward) {
    bool needs = false;
    for (const Var& p : parents) {
        if (p.tape() != this) throw ContractError("operand from a different tape");
        needs = needs || nodes_[p.id()].requires_grad;
    }
    nodes_.push_back({std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var output) {
    if (output.tape() != this) throw ContractError("backward on a foreign variable");
    if (value(output).size() != 1) throw ContractError("backward needs a scalar output");
    for (auto& node : nodes_) node.grad.resize(0, 0);
    if (!nodes_[output.id()].requires_grad) return;
    nodes_[output.id()].grad = Matrix::Ones(1, 1);
    for (int id = output.id(); id >= 0; --id) {
        auto& node = nodes_[id];
        if (node.backward && node.grad.size() != 0) node.backward(*this, id);
    }
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "add");
    const int ia = a.id(), ib = b.id();
    return t.push(a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
        tp.accumulate(ia, tp.upstream(self));
        tp.accumulate(ib, tp.upstream(self));
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "sub");
    const int ia = a.id(), ib = b.id();
    return t.push(a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
        tp.accumulate(ia, tp.upstream(self));
        tp.accumulate(ib, -tp.upstream(self));
    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "mul");
    const int ia = a.id(), ib = b.id();
    return t.push(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
        if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
    });
}

Var scale(Var a, double s) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    return t.push(a.value() * s, {a}, [ia, s](Tape& tp, int self) { tp.accumulate(ia, tp.upstream(self) * s); });
}

Var add_row(Var a, Var row) {
    Tape& t = same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw ContractError("add_row: row must be 1 x cols(a)");
    const int ia = a.id(), ir = row.id();
    Matrix v = a.value();
    v.rowwise() += row.value().row(0);
    return t.push(std::move(v), {a, row}, [ia, ir](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        tp.accumulate(ia, g);
        if (tp.requires_grad(ir)) tp.accumulate(ir, g.colwise().sum());
    });
}

Var mul_row(Var a, Var row) {
    Tape& t = same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) throw ContractError("mul_row: row must be 1 x cols(a)");
    const int ia = a.id(), ir = row.id();
    Matrix v = a.value().array().rowwise() * row.value().row(0).array();
    return t.push(std::move(v), {a, row}, [ia, ir](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        if (tp.requires_grad(ia)) {
            Matrix ga = g.array().rowwise() * tp.value(ir).row(0).array();
            tp.accumulate(ia, ga);
        }
        if (tp.requires_grad(ir)) tp.accumulate(ir, g.cwiseProduct(tp.value(ia)).colwise().sum());
    });
}

Var mul_col(Var a, Var col) {
    Tape& t = same_tape(a, col);
    if (col.cols() != 1 || col.rows() != a.rows()) throw ContractError("mul_col: col must be rows(a) x 1");
    const int ia = a.id(), ic = col.id();
    Matrix v = a.value().array().colwise() * col.value().col(0).array();
    return t.push(std::move(v), {a, col}, [ia, ic](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        if (tp.requires_grad(ia)) {
            Matrix ga = g.array().colwise() * tp.value(ic).col(0).array();
            tp.accumulate(ia, ga);
        }
        if (tp.requires_grad(ic)) tp.accumulate(ic, g.cwiseProduct(tp.value(ia)).rowwise().sum());
    });
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    if (a.cols() != b.rows()) throw ContractError("matmul: inner dimensions differ");
    const int ia = a.id(), ib = b.id();
    Matrix v = a.value() * b.value();
    return t.push(std::move(v), {a, b}, [ia, ib](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
        if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
    });
}

Var affine(Var x, Var flat_params, Eigen::Index offset, Eigen::Index in, Eigen::Index out) {
    Tape& t = same_tape(x, flat_params);
    if (flat_params.cols() != 1) throw ContractError("affine: parameters must be a column vector");
    if (x.cols() != in) throw ContractError("affine: input width does not match layer");
    if (offset < 0 || offset + out * in + out > flat_params.rows())
        throw ContractError("affine: parameter slice out of range");
    const int ix = x.id(), ip = flat_params.id();
    const double* base = flat_params.value().data() + offset;
    const RowMajorMap weight(base, out, in);
    const Eigen::Map<const Eigen::RowVectorXd> bias(base + out * in, out);
    Matrix v = x.value() * weight.transpose();
    v.rowwise() += bias;
    return t.push(std::move(v), {x, flat_params}, [ix, ip, offset, in, out](Tape& tp, int self) {
        const auto& g = tp.upstream(self);
        const double* base = tp.value(ip).data() + offset;
        const RowMajorMap weight(base, out, in);
        if (tp.requires_grad(ix)) tp.accumulate(ix, g * weight);
        if (tp.requires_grad(ip)) {
            Matrix slice_grad = Matrix::Zero(tp.value(ip).rows(), 1);
            RowMajorMutMap dw(slice_grad.data() + offset, out, in);
            dw.noalias() = g.transpose() * tp.value(ix);
            Eigen::Map<Eigen::RowVectorXd>(slice_grad.data() + offset + out * in, out) = g.colwise().sum();
            tp.accumulate(ip, slice_grad);
        }
    });
}

Var tanh(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v = a.value().array().tanh();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        const auto& y = tp.value(self).array();
        Matrix g = tp.upstream(self).array() * (1.0 - y * y);
        tp.accumulate(ia, g);
    });
}

Var sin(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v = a.value().array().sin();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        Matrix g = tp.upstream(self).array() * tp.value(ia).array().cos();
        tp.accumulate(ia, g);
    });
}

Var cos(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v = a.value().array().cos();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        Matrix g = -tp.upstream(self).array() * tp.value(ia).array().sin();
        tp.accumulate(ia, g);
    });
}

Var sqrt(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    if ((a.value().array() < 0.0).any()) throw DomainError("sqrt of a negative entry");
    Matrix v = a.value().array().sqrt();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        Matrix g = tp.upstream(self).array() * 0.5 / tp.value(self).array();
        tp.accumulate(ia, g);
    });
}

Var pow(Var a, double p) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v = a.value().array().pow(p);
    return t.push(std::move(v), {a}, [ia, p](Tape& tp, int self) {
        Matrix g = tp.upstream(self).array() * p * tp.value(ia).array().pow(p - 1.0);
        tp.accumulate(ia, g);
    });
}

Var square(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v = a.value().array().square();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        Matrix g = 2.0 * tp.upstream(self).array() * tp.value(ia).array();
        tp.accumulate(ia, g);
    });
}

Var mean(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    if (a.value().size() == 0) throw ContractError("mean of an empty matrix");
    Matrix v(1, 1);
    v(0, 0) = a.value().mean();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        const auto& x = tp.value(ia);
        const double g = tp.upstream(self)(0, 0) / static_cast<double>(x.size());
        tp.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g));
    });
}

Var sum(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix v(1, 1);
    v(0, 0) = a.value().sum();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        const auto& x = tp.value(ia);
        tp.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), tp.upstream(self)(0, 0)));
    });
}

Var col_mean(Var a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    if (a.rows() == 0) throw ContractError("col_mean of an empty matrix");
    Matrix v = a.value().colwise().mean();
    return t.push(std::move(v), {a}, [ia](Tape& tp, int self) {
        const auto rows = tp.value(ia).rows();
        Matrix g = (tp.upstream(self) / static_cast<double>(rows)).replicate(rows, 1);
        tp.accumulate(ia, g);
    });
}

Var col_norm_pow(Var a, double alpha) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    const auto& x = a.value();
    Matrix v(1, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double r = x.col(j).norm();
        if (r > 0.0) {
            v(0, j) = std::pow(r, alpha);
        } else {
            v(0, j) = alpha > 1.0 ? 0.0 : std::pow(1e-8, alpha);
        }
    }
    return t.push(std::move(v), {a}, [ia, alpha](Tape& tp, int self) {
        const auto& x = tp.value(ia);
        const auto& g = tp.upstream(self);
        Matrix ga = Matrix::Zero(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double r = x.col(j).norm();
            if (r > 0.0) ga.col(j) = g(0, j) * alpha * std::pow(r, alpha - 2.0) * x.col(j);
        }
        tp.accumulate(ia, ga);
    });
}

Var drift(Var x, const DriftField& field) {
    Tape& t = tape_of(x);
    if (x.cols() != field.dim()) throw ContractError("drift: batch width does not match drift dimension");
    const int ix = x.id();
    return t.push(field.eval_rows(x.value()), {x}, [ix, field](Tape& tp, int self) {
        tp.accumulate(ix, field.vjp_rows(tp.value(ix), tp.upstream(self)));
    });
}

ValueAndGradient loss_gradient(const std::function<Var(Tape&, Var params)>& loss_closure, const Vector& params) {
    Tape tape;
    const Var p = tape.variable(params);
    const Var loss = loss_closure(tape, p);
    if (loss.tape() != &tape || loss.value().size() != 1) throw ContractError("loss closure must return a scalar");
    tape.backward(loss);
    return {loss.scalar(), tape.grad(p).col(0)};
}

}  // namespace wanpm::ad
