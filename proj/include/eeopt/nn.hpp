#ifndef EEOPT_NN_HPP
#define EEOPT_NN_HPP

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eeopt/columns.hpp"
#include "eeopt/parallel.hpp"

namespace eeopt::nn {

enum class OutputActivation { Linear, ClampedUnit };
enum class Loss { RelativeMse, Mse };

/// Feedforward MLP with ReLU hidden layers. Weights are (fan_out x fan_in),
/// one matrix per connection; layer_sizes chains input, hidden..., output.
struct MlpModel {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    OutputActivation output_activation = OutputActivation::Linear;
    // Normalization reference the model was trained with; travels with the file.
    ColumnList feature_columns;
    ColumnList target_columns;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
    void validate() const;
};

/// He-normal weights (std = sqrt(2 / fan_in)), zero biases; deterministic per seed.
MlpModel init(const std::vector<int>& layer_sizes, OutputActivation output_activation,
              std::uint64_t rng_seed);

/// Single-sample forward pass; applies the output activation.
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x);

/// Row-per-sample batch forward.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& X);

/// Mean over samples and output components of ((pred - target) / target)^2.
/// Rejects any zero target.
double relative_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

/// Plain mean squared error (used where targets may legitimately be zero).
double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

double loss_value(Loss loss, const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

/// Exact backpropagation gradients of the mean batch loss, accumulated over a
/// fixed summation tree keyed by ascending sample index, so the result does
/// not depend on the order of `rows` or the execution policy. ReLU subgradient
/// at 0 is 0; a ClampedUnit output is treated as linear here (clipping is
/// applied post-hoc at inference).
Gradients gradient(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   std::span<const int> rows, Loss loss, Exec exec = Exec::Serial);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double validation_fraction = 0.2;
    std::uint64_t rng_seed = 1;
    bool shuffle_each_epoch = true;
    Loss loss = Loss::RelativeMse;
    Exec exec = Exec::Serial;

    void validate() const;
};

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;
};

AdamState make_adam_state(const MlpModel& model);

/// One ADAM update with bias correction: theta -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

struct TrainReport {
    std::vector<double> train_curve;  // loss per epoch, on the training split
    std::vector<double> val_curve;    // loss per epoch, on the held-out split
    double wall_seconds = 0.0;
    std::uint64_t param_checksum = 0;
    bool diverged = false;

    double final_train() const { return train_curve.empty() ? 0.0 : train_curve.back(); }
    double final_val() const { return val_curve.empty() ? 0.0 : val_curve.back(); }
};

/// Mini-batch ADAM on the given (already normalized) data. The validation
/// split is held out once, seeded, before the first epoch; curves record both
/// splits after every epoch. Deterministic per (data, config, seed).
TrainReport train(MlpModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                  const TrainConfig& config);

/// Same loop, starting from the pretrained parameters with fresh ADAM moments;
/// the architecture is frozen and dimension mismatches are errors.
TrainReport fine_tune(MlpModel& pretrained, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                      const TrainConfig& config);

std::uint64_t parameter_checksum(const MlpModel& model);

/// Versioned JSON container; round-trips parameters bit-exactly.
void save(const MlpModel& model, const std::filesystem::path& path);
MlpModel load(const std::filesystem::path& path);

}  // namespace eeopt::nn

#endif
