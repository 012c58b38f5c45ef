#pragma once

#include <cstdint>

#include "wanpm/drift.hpp"

namespace wanpm {

struct AdamState {
    Vector m;
    Vector v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(Eigen::Index size) : m(Vector::Zero(size)), v(Vector::Zero(size)) {}
};

/// Bias-corrected Adam descent step at step t+1; updates params and state in place.
void adam_step(AdamState& state, Vector& params, const Vector& grad, double lr);

/// min_lr + (base_lr - min_lr) (1 + cos(pi epoch / total_epochs)) / 2.
double cosine_anneal(double base_lr, int epoch, int total_epochs, double min_lr);

/// Rescales grad to norm max_norm when its norm exceeds it.
Vector clip_grad_norm(const Vector& grad, double max_norm = 1.0);

}  // namespace wanpm
