#include "wanpm/weak_loss.hpp"

#include <cmath>
#include <sstream>

#include "wanpm/error.hpp"
#include "wanpm/io.hpp"
#include "wanpm/optim.hpp"

namespace wanpm {
namespace {

Matrix draw_initial(const InitialSampler& sampler, int rows, int n, RandomStream& stream) {
    Matrix out(rows, n);
    for (int i = 0; i < rows; ++i) {
        const Vector x = sampler(stream);
        if (x.size() != n) throw ContractError("initial sampler returned a vector of the wrong dimension");
        out.row(i) = x.transpose();
    }
    return out;
}

ad::Var as_column(ad::Tape& tape, const Vector& params) { return tape.variable(Matrix(params)); }

/// sin(X w + phase_row) column means.
ad::Var mean_sin(ad::Var x, const BankVars& bank, ad::Var phase_row) {
    return ad::col_mean(ad::sin(ad::add_row(ad::matmul(x, bank.wt), phase_row)));
}

/// (b(X) . w + kappa) cos(P) - ||w||^alpha sin(P), batch x K.
ad::Var operator_term(ad::Var x, ad::Var p, const BankVars& bank, const DriftField& drift, double alpha,
                      bool with_kappa) {
    ad::Var bw = ad::matmul(ad::drift(x, drift), bank.wt);
    if (with_kappa) bw = ad::add_row(bw, bank.kappa);
    const ad::Var m = ad::col_norm_pow(bank.wt, alpha);
    return ad::sub(ad::mul(bw, ad::cos(p)), ad::mul_row(ad::sin(p), m));
}

WeakResidualBatch batch_from(ad::Var loss, ad::Var residuals) {
    WeakResidualBatch out;
    out.loss = loss.scalar();
    out.residuals = residuals.value().row(0).transpose();
    return out;
}

void check_finite(const WeakResidualBatch& batch, int epoch) {
    if (std::isfinite(batch.loss)) return;
    std::ostringstream msg;
    double max_abs = 0.0;
    int arg = -1;
    for (Eigen::Index k = 0; k < batch.residuals.size(); ++k) {
        const double a = std::abs(batch.residuals(k));
        if (std::isnan(a) || a > max_abs) {
            max_abs = a;
            arg = static_cast<int>(k);
            if (std::isnan(a)) break;
        }
    }
    msg << "non-finite loss at epoch " << epoch << "; max |R_k| = " << max_abs << " at mode " << arg;
    throw NumericError(msg.str());
}

template <typename Evaluate, typename Redraw>
TrainResult run_training(Vector gen_params, PlaneWaveBank bank, const TrainConfig& config, Evaluate&& evaluate,
                         Redraw&& redraw) {
    config.validate();
    TrainResult result;
    AdamState gen_state(gen_params.size());
    AdamState bank_state(bank.trainable_count());
    const double min_lr = config.lr_generator * config.min_lr_ratio;
    auto ascend = [&](const Vector& grad) {
        if (bank.trainable_count() == 0) return;
        Vector flat = bank.pack();
        adam_step(bank_state, flat, -clip_grad_norm(grad, config.clip_norm), config.lr_adversary);
        bank.unpack(flat);
    };
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto stream = RandomStream::substream(config.seed, stream_domain::kEpoch, static_cast<std::uint64_t>(epoch));
        const LossEvaluation ev = evaluate(redraw(stream), gen_params, bank);
        check_finite(ev.batch, epoch);
        const double lr = cosine_anneal(config.lr_generator, epoch, config.epochs, min_lr);
        result.history.push_back({epoch, ev.batch.loss, ev.batch.residual_norm(), lr});
        if (gen_params.size() > 0) adam_step(gen_state, gen_params, clip_grad_norm(ev.generator_gradient, config.clip_norm), lr);
        ascend(ev.bank_gradient);
        for (int s = 1; s < config.adversary_steps; ++s) {
            auto extra = RandomStream::substream(
                config.seed, stream_domain::kAdversaryEpoch,
                static_cast<std::uint64_t>(epoch) * static_cast<std::uint64_t>(config.adversary_steps) + s);
            const LossEvaluation adv = evaluate(redraw(extra), gen_params, bank);
            check_finite(adv.batch, epoch);
            ascend(adv.bank_gradient);
        }
        if (config.progress) config.progress(epoch, ev.batch.loss);
    }
    result.generator_params = std::move(gen_params);
    result.bank = std::move(bank);
    return result;
}

}  // namespace

void BatchSpec::validate() const {
    if (M < 1 || M0 < 1 || MT < 1) throw ContractError("batch sizes M, M0, MT must be >= 1");
    if (!(epsilon > 0.0 && epsilon < T)) throw ContractError("need 0 < epsilon < T");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ContractError("epochs must be non-negative");
    if (!(lr_generator > 0.0) || !(lr_adversary > 0.0)) throw ContractError("learning rates must be positive");
    if (adversary_steps < 1) throw ContractError("need at least one adversary step per epoch");
    if (!(clip_norm > 0.0)) throw ContractError("clip norm must be positive");
}

TransientGenerator network_generator(const TransientPushforward& F) {
    const MlpSpec spec = F.spec;
    return {F.d, [spec](ad::Tape& tape, ad::Var params, const Vector& t, const Matrix& x0, const Matrix& r) {
                return sample_transient(tape, spec, params, t, x0, r);
            }};
}

SteadyGenerator network_generator(const SteadyPushforward& G) {
    const MlpSpec spec = G.spec;
    return {G.d, [spec](ad::Tape& tape, ad::Var params, const Matrix& r) { return sample_steady(tape, spec, params, r); }};
}

Matrix draw_normal(int rows, int cols, RandomStream& stream) {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = stream.normal();
    return out;
}

TransientDraws draw_transient(const TransientProblem& problem, int n, RandomStream& stream) {
    const BatchSpec& b = problem.batch;
    b.validate();
    const int d = problem.generator.latent_dim;
    TransientDraws draws;
    draws.t.resize(b.M);
    for (int i = 0; i < b.M; ++i) draws.t(i) = stream.uniform(b.epsilon, b.T);
    draws.x0 = draw_initial(problem.initial, b.M, n, stream);
    draws.r = draw_normal(b.M, d, stream);
    draws.x0_T = draw_initial(problem.initial, b.MT, n, stream);
    draws.r_T = draw_normal(b.MT, d, stream);
    draws.x_init = draw_initial(problem.initial, b.M0, n, stream);
    return draws;
}

ad::Var transient_loss(ad::Tape& tape, const TransientProblem& problem, const TransientDraws& draws, ad::Var gen,
                       const BankVars& bank, ad::Var* residuals) {
    const double T = problem.batch.T;
    const auto& sample = problem.generator.sample;

    const ad::Var x = sample(tape, gen, draws.t, draws.x0, draws.r);
    const ad::Var time = tape.constant(Matrix(draws.t));
    const ad::Var p = ad::add_row(ad::add(ad::matmul(x, bank.wt), ad::matmul(time, bank.kappa)), bank.phase);
    const ad::Var interior =
        ad::scale(ad::col_mean(operator_term(x, p, bank, problem.drift, problem.alpha, true)), T);

    const Vector t_end = Vector::Constant(draws.x0_T.rows(), T);
    const ad::Var x_end = sample(tape, gen, t_end, draws.x0_T, draws.r_T);
    const ad::Var terminal = mean_sin(x_end, bank, ad::add(ad::scale(bank.kappa, T), bank.phase));
    const ad::Var initial = mean_sin(tape.constant(draws.x_init), bank, bank.phase);

    const ad::Var r = ad::sub(ad::sub(terminal, initial), interior);
    if (residuals) *residuals = r;
    return ad::mean(ad::square(r));
}

ad::Var steady_loss(ad::Tape& tape, const SteadyProblem& problem, const Matrix& r, ad::Var gen, const BankVars& bank,
                    ad::Var* residuals) {
    const ad::Var x = problem.generator.sample(tape, gen, r);
    const ad::Var p = ad::add_row(ad::matmul(x, bank.wt), bank.phase);
    const ad::Var res = ad::col_mean(operator_term(x, p, bank, problem.drift, problem.alpha, false));
    if (residuals) *residuals = res;
    return ad::mean(ad::square(res));
}

LossEvaluation evaluate_transient(const TransientProblem& problem, const TransientDraws& draws,
                                  const Vector& gen_params, const PlaneWaveBank& bank) {
    if (bank.steady) throw ContractError("transient loss needs a transient bank");
    if (bank.dim() != problem.drift.dim()) throw ContractError("bank dimension does not match the drift");
    ad::Tape tape;
    const ad::Var gen = as_column(tape, gen_params);
    const BankVars vars = bank_on_tape(tape, bank);
    ad::Var residuals;
    const ad::Var loss = transient_loss(tape, problem, draws, gen, vars, &residuals);
    tape.backward(loss);
    return {batch_from(loss, residuals), tape.grad(gen).col(0), bank_gradient(tape, vars, bank)};
}

LossEvaluation evaluate_steady(const SteadyProblem& problem, const Matrix& r, const Vector& gen_params,
                               const PlaneWaveBank& bank) {
    if (!bank.steady) throw ContractError("steady loss needs a steady bank");
    if (bank.dim() != problem.drift.dim()) throw ContractError("bank dimension does not match the drift");
    ad::Tape tape;
    const ad::Var gen = as_column(tape, gen_params);
    const BankVars vars = bank_on_tape(tape, bank);
    ad::Var residuals;
    const ad::Var loss = steady_loss(tape, problem, r, gen, vars, &residuals);
    tape.backward(loss);
    return {batch_from(loss, residuals), tape.grad(gen).col(0), bank_gradient(tape, vars, bank)};
}

WeakResidualBatch transient_residuals(const TransientProblem& problem, const Vector& gen_params,
                                      const PlaneWaveBank& bank, RandomStream& stream) {
    if (bank.steady) throw ContractError("transient residuals need a transient bank");
    const TransientDraws draws = draw_transient(problem, problem.drift.dim(), stream);
    ad::Tape tape;
    const ad::Var gen = tape.constant(Matrix(gen_params));
    ad::Var residuals;
    const ad::Var loss = transient_loss(tape, problem, draws, gen, bank_on_tape(tape, bank), &residuals);
    return batch_from(loss, residuals);
}

WeakResidualBatch steady_residuals(const SteadyProblem& problem, const Vector& gen_params, const PlaneWaveBank& bank,
                                   RandomStream& stream) {
    if (!bank.steady) throw ContractError("steady residuals need a steady bank");
    if (problem.M < 1) throw ContractError("need M >= 1");
    const Matrix r = draw_normal(problem.M, problem.generator.latent_dim, stream);
    ad::Tape tape;
    const ad::Var gen = tape.constant(Matrix(gen_params));
    ad::Var residuals;
    const ad::Var loss = steady_loss(tape, problem, r, gen, bank_on_tape(tape, bank), &residuals);
    return batch_from(loss, residuals);
}

TrainResult train(const TransientProblem& problem, Vector gen_params, PlaneWaveBank bank, const TrainConfig& config) {
    if (bank.steady) throw ContractError("transient training needs a transient bank");
    const int n = problem.drift.dim();
    return run_training(
        std::move(gen_params), std::move(bank), config,
        [&](const TransientDraws& draws, const Vector& params, const PlaneWaveBank& b) {
            return evaluate_transient(problem, draws, params, b);
        },
        [&](RandomStream& stream) { return draw_transient(problem, n, stream); });
}

TrainResult train(const SteadyProblem& problem, Vector gen_params, PlaneWaveBank bank, const TrainConfig& config) {
    if (!bank.steady) throw ContractError("steady training needs a steady bank");
    if (problem.M < 1) throw ContractError("need M >= 1");
    return run_training(
        std::move(gen_params), std::move(bank), config,
        [&](const Matrix& r, const Vector& params, const PlaneWaveBank& b) {
            return evaluate_steady(problem, r, params, b);
        },
        [&](RandomStream& stream) { return draw_normal(problem.M, problem.generator.latent_dim, stream); });
}

void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history) {
    std::string out = "epoch,loss,residual_norm,lr_generator\n";
    for (const auto& row : history) {
        out += std::to_string(row.epoch) + ',' + io::format_double(row.loss) + ',' +
               io::format_double(row.residual_norm) + ',' + io::format_double(row.lr_generator) + '\n';
    }
    io::write_text(path, out);
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
    const auto table = io::read_csv(path);
    const auto ce = table.column("epoch"), cl = table.column("loss"), cr = table.column("residual_norm"),
               cg = table.column("lr_generator");
    std::vector<HistoryRow> out;
    for (const auto& row : table.rows)
        out.push_back({static_cast<int>(io::parse_double(row[ce])), io::parse_double(row[cl]),
                       io::parse_double(row[cr]), io::parse_double(row[cg])});
    return out;
}

}  // namespace wanpm
