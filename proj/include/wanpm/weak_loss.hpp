#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "wanpm/particle_sim.hpp"
#include "wanpm/pushforward.hpp"
#include "wanpm/test_functions.hpp"

namespace wanpm {

struct BatchSpec {
    int M = 1000;   ///< interior samples
    int M0 = 500;   ///< initial-term samples
    int MT = 500;   ///< terminal-term samples
    double epsilon = 1e-3;
    double T = 1.0;

    void validate() const;
};

struct WeakResidualBatch {
    Vector residuals;
    double loss = 0.0;  ///< mean of squared residuals

    [[nodiscard]] double residual_norm() const { return residuals.norm(); }
};

/// Sample generator seen by the loss. `params` may be empty for stubs.
struct TransientGenerator {
    int latent_dim = 1;
    std::function<ad::Var(ad::Tape&, ad::Var params, const Vector& t, const Matrix& x0, const Matrix& r)> sample;
};

struct SteadyGenerator {
    int latent_dim = 1;
    std::function<ad::Var(ad::Tape&, ad::Var params, const Matrix& r)> sample;
};

TransientGenerator network_generator(const TransientPushforward& F);
SteadyGenerator network_generator(const SteadyPushforward& G);

struct TransientProblem {
    DriftField drift;
    double alpha = 1.5;
    InitialSampler initial;
    BatchSpec batch;
    TransientGenerator generator;
};

struct SteadyProblem {
    DriftField drift;
    double alpha = 1.5;
    int M = 1000;
    SteadyGenerator generator;
};

/// Fresh Monte Carlo inputs for one transient loss evaluation.
struct TransientDraws {
    Vector t;       ///< M interior times, uniform on [epsilon, T]
    Matrix x0;      ///< M x n
    Matrix r;       ///< M x d
    Matrix x0_T;    ///< MT x n
    Matrix r_T;     ///< MT x d
    Matrix x_init;  ///< M0 x n, initial-law draws for the t = 0 term
};

TransientDraws draw_transient(const TransientProblem& problem, int n, RandomStream& stream);
/// rows x cols standard normals, filled row by row.
Matrix draw_normal(int rows, int cols, RandomStream& stream);

/// Residuals R_k = E_T - E_0 - T mean[d_t f + L f] as a 1 x K node; loss node returned.
ad::Var transient_loss(ad::Tape& tape, const TransientProblem& problem, const TransientDraws& draws, ad::Var gen,
                       const BankVars& bank, ad::Var* residuals = nullptr);
/// Residuals R_k = mean[L_ss f] over the generator samples.
ad::Var steady_loss(ad::Tape& tape, const SteadyProblem& problem, const Matrix& r, ad::Var gen, const BankVars& bank,
                    ad::Var* residuals = nullptr);

struct LossEvaluation {
    WeakResidualBatch batch;
    Vector generator_gradient;
    Vector bank_gradient;  ///< with respect to PlaneWaveBank::pack()
};

LossEvaluation evaluate_transient(const TransientProblem& problem, const TransientDraws& draws,
                                  const Vector& gen_params, const PlaneWaveBank& bank);
LossEvaluation evaluate_steady(const SteadyProblem& problem, const Matrix& r, const Vector& gen_params,
                               const PlaneWaveBank& bank);

/// Residuals on a fresh batch drawn from `stream`.
WeakResidualBatch transient_residuals(const TransientProblem& problem, const Vector& gen_params,
                                      const PlaneWaveBank& bank, RandomStream& stream);
WeakResidualBatch steady_residuals(const SteadyProblem& problem, const Vector& gen_params, const PlaneWaveBank& bank,
                                   RandomStream& stream);

struct TrainConfig {
    int epochs = 100;
    double lr_generator = 1e-3;
    double lr_adversary = 1e-2;
    /// Cosine floor as a fraction of lr_generator.
    double min_lr_ratio = 0.01;
    int adversary_steps = 1;
    double clip_norm = 1.0;
    std::uint64_t seed = 0;
    /// Called after every epoch with (epoch, loss); may be empty.
    std::function<void(int, double)> progress;

    void validate() const;
};

struct HistoryRow {
    int epoch = 0;
    double loss = 0.0;
    double residual_norm = 0.0;
    double lr_generator = 0.0;
};

struct TrainResult {
    Vector generator_params;
    PlaneWaveBank bank;
    std::vector<HistoryRow> history;
};

/// Min-max training: one Adam descent step on the generator and
/// `adversary_steps` Adam ascent steps on the bank per epoch, both clipped.
/// Throws NumericError on a non-finite loss.
TrainResult train(const TransientProblem& problem, Vector gen_params, PlaneWaveBank bank, const TrainConfig& config);
TrainResult train(const SteadyProblem& problem, Vector gen_params, PlaneWaveBank bank, const TrainConfig& config);

/// CSV `epoch,loss,residual_norm,lr_generator`.
void write_history_csv(const std::filesystem::path& path, const std::vector<HistoryRow>& history);
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

}  // namespace wanpm
