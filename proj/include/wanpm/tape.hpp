#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wanpm/drift.hpp"

namespace wanpm::ad {

class Tape;

/// Handle to a matrix-valued node on a Tape.
class Var {
public:
    Var() = default;

    [[nodiscard]] int id() const { return id_; }
    [[nodiscard]] Tape* tape() const { return tape_; }
    [[nodiscard]] bool valid() const { return tape_ != nullptr; }

    [[nodiscard]] const Matrix& value() const;
    [[nodiscard]] Eigen::Index rows() const { return value().rows(); }
    [[nodiscard]] Eigen::Index cols() const { return value().cols(); }
    /// Value of a 1x1 node.
    [[nodiscard]] double scalar() const;

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// Reverse-mode tape over dense matrices.
///
/// Nodes are appended in evaluation order, so a single reverse sweep visits
/// every node after all of its consumers. Only nodes that depend on a
/// variable carry a backward closure; constant subgraphs cost nothing in the
/// sweep.
class Tape {
public:
    using Backward = std::function<void(Tape&, int self)>;

    Var constant(Matrix value);
    /// Leaf that receives a gradient.
    Var variable(Matrix value);

    [[nodiscard]] const Matrix& value(Var v) const;
    [[nodiscard]] bool requires_grad(Var v) const;
    /// Gradient accumulated by the last backward(); zeros if nothing flowed.
    [[nodiscard]] Matrix grad(Var v) const;

    /// Seeds d(output)/d(output) = 1 for a 1x1 node and sweeps backwards.
    void backward(Var output);

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    // Operator-implementation interface.
    [[nodiscard]] bool requires_grad(int id) const { return nodes_[id].requires_grad; }
    [[nodiscard]] const Matrix& value(int id) const { return nodes_[id].value; }
    [[nodiscard]] const Matrix& upstream(int id) const { return nodes_[id].grad; }
    /// Adds `g` into the gradient of node `id` if it requires one.
    template <typename Derived>
    void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
        auto& node = nodes_[id];
        if (!node.requires_grad) return;
        if (node.grad.size() == 0) {
            node.grad = g;
        } else {
            node.grad += g;
        }
    }
    Var push(Matrix value, std::initializer_list<Var> parents, Backward backward);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        Backward backward;
    };
    std::vector<Node> nodes_;
};

// Elementwise and linear-algebra primitives. All operands must live on the same tape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// a (m x k) + row (1 x k) broadcast over rows.
Var add_row(Var a, Var row);
/// a (m x k) .* row (1 x k) broadcast over rows.
Var mul_row(Var a, Var row);
/// a (m x k) .* col (m x 1) broadcast over columns.
Var mul_col(Var a, Var col);
Var matmul(Var a, Var b);
/// x * W^T + 1 b^T with W (out x in, row-major) and b (out) read from a
/// flat parameter column vector starting at `offset`.
Var affine(Var x, Var flat_params, Eigen::Index offset, Eigen::Index in, Eigen::Index out);
Var tanh(Var a);
Var sin(Var a);
Var cos(Var a);
/// Elementwise square root; requires a >= 0 and a > 0 wherever a gradient flows.
Var sqrt(Var a);
Var pow(Var a, double p);
Var square(Var a);
/// Mean of all entries, 1x1.
Var mean(Var a);
Var sum(Var a);
/// Column means, 1 x k.
Var col_mean(Var a);
/// Column Euclidean norms raised to alpha, 1 x k. Zero columns give 0 with a
/// zero gradient; for alpha <= 1 their norm is nudged to 1e-8 first.
Var col_norm_pow(Var a, double alpha);
/// Row-wise drift b(x_i) of a B x n batch, differentiated through the drift Jacobian.
Var drift(Var x, const DriftField& field);

/// Reverse-mode gradient of a scalar closure built from the primitives above.
struct ValueAndGradient {
    double value = 0.0;
    Vector gradient;
};
ValueAndGradient loss_gradient(const std::function<Var(Tape&, Var params)>& loss_closure, const Vector& params);

}  // namespace wanpm::ad
