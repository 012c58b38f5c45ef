#include "wanpm/optim.hpp"

#include <cmath>
#include <numbers>

#include "wanpm/error.hpp"

namespace wanpm {

void adam_step(AdamState& state, Vector& params, const Vector& grad, double lr) {
    if (params.size() != grad.size()) throw ContractError("adam_step: gradient length differs from parameters");
    if (state.m.size() == 0) state = AdamState(params.size());
    if (state.m.size() != params.size()) throw ContractError("adam_step: optimizer state length differs");
    state.t += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

double cosine_anneal(double base_lr, int epoch, int total_epochs, double min_lr) {
    if (total_epochs <= 0) return base_lr;
    if (epoch < 0 || epoch > total_epochs) throw ContractError("cosine_anneal: epoch outside [0, total]");
    const double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return min_lr + (base_lr - min_lr) * (1.0 + std::cos(phase)) / 2.0;
}

Vector clip_grad_norm(const Vector& grad, double max_norm) {
    const double norm = grad.norm();
    if (norm > max_norm) return grad * (max_norm / norm);
    return grad;
}

}  // namespace wanpm
