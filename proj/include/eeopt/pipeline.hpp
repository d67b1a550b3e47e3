#ifndef EEOPT_PIPELINE_HPP
#define EEOPT_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "eeopt/cellular.hpp"
#include "eeopt/dataset.hpp"
#include "eeopt/gee.hpp"
#include "eeopt/netsim.hpp"
#include "eeopt/nn.hpp"

namespace eeopt::pipeline {

// ---------------------------------------------------------------------------
// Case 1: multi-user uplink power control learned from the fractional-
// programming oracle.

struct Case1Config {
    std::size_t n_users = 5;
    double radius_m = 500.0;
    std::size_t n_train = 2000;
    std::size_t n_test = 500;
    double pmax_dbm_lo = -20.0;
    double pmax_dbm_hi = 0.0;
    std::vector<double> pmax_dbm_sweep;  // defaults to 8 points spanning the range
    netsim::UplinkParams uplink;
    oracles::DinkelbachOptions solver;
    std::vector<int> hidden_layers{32, 24, 16};
    nn::TrainConfig train;  // loss = Mse (targets p/pmax may be exactly 0)
    std::uint64_t master_seed = 1;
    Exec exec = Exec::Serial;

    Case1Config() {
        train.loss = nn::Loss::Mse;
        train.epochs = 300;
    }
    std::vector<double> sweep_points() const;
};

struct Case1Build {
    Dataset data;
    std::size_t n_attempted = 0;
    std::size_t n_unconverged_excluded = 0;
    std::vector<std::size_t> solver_outer_iterations;  // per accepted row
};

/// n scenarios via netsim, labels via the Dinkelbach solver. Features are the
/// per-user gains (declared log10, sorted descending) plus pmax; targets are
/// p/pmax in [0,1]. Unconverged solves are excluded and counted.
Case1Build build_case1_dataset(const Case1Config& cfg, std::size_t n, std::uint64_t seed_stream);

struct GeeSweepPoint {
    double pmax_dbm = 0.0;
    double ann_gee = 0.0;       // mean over the test set, bits per joule
    double oracle_gee = 0.0;
    double fullpower_gee = 0.0;
};

struct ProtocolAResult {
    nn::MlpModel model;
    nn::TrainReport report;
    std::vector<GeeSweepPoint> sweep;
    std::size_t train_rows = 0;
    std::size_t train_excluded = 0;
    std::size_t test_excluded = 0;
};

/// Train on oracle-labeled data, then sweep pmax over a fresh test set of
/// independent drops, comparing the network against the oracle and against
/// full power.
ProtocolAResult run_protocol_A(const Case1Config& cfg);

/// Mean GEE of a trained model over explicit test scenarios at one pmax.
double mean_ann_gee(const nn::MlpModel& model, const Case1Config& cfg,
                    const std::vector<netsim::UplinkScenario>& scenarios, double pmax_w);

/// Users reordered by descending gain; the canonical feature layout.
netsim::UplinkScenario sort_users_by_gain(const netsim::UplinkScenario& s);

// ---------------------------------------------------------------------------
// Cases 2 and 3: optimal deployment density, pre-trained on the analytic
// model and refined on empirical data.

enum class DensityCase { NonPoissonDeployment, UnknownConsumption };  // case 2 / case 3

struct DensityCaseConfig {
    DensityCase which = DensityCase::NonPoissonDeployment;
    netsim::CellularParams cellular;
    oracles::DensityBracket bracket;
    oracles::AnalyticSearchOptions search;
    oracles::GridMcOptions grid_mc;                 // case-2 empirical labeler
    oracles::ConsumptionModelConfig consumption;    // case-3 draws (holds P range)
    double p_dbm_lo = 30.0;                         // case-2 P sampling
    double p_dbm_hi = 46.0;
    std::size_t n_total = 6000;
    std::vector<std::size_t> x_values{60, 120, 300, 420, 600};
    std::size_t n_test = 1000;
    std::vector<int> hidden_layers{8, 8, 2};
    nn::TrainConfig pretrain;
    nn::TrainConfig finetune;
    nn::TrainConfig mixed;
    std::size_t n_seeds = 11;
    std::uint64_t master_seed = 1;
    Exec exec = Exec::Serial;

    DensityCaseConfig() {
        pretrain.epochs = 120;
        finetune.epochs = 50;
        mixed.epochs = 120;
    }
};

/// P log-uniform over the configured range, labels from the analytic
/// optimizer; bracket-edge labels are rejected and redrawn so exactly n rows
/// come back.
Dataset build_case2_model_dataset(const DensityCaseConfig& cfg, std::size_t n,
                                  std::uint64_t seed_stream);

/// x rows labeled by the square-grid Monte-Carlo exhaustive search.
Dataset build_case2_empirical_dataset(const DensityCaseConfig& cfg, std::size_t x,
                                      std::uint64_t seed_stream);

/// Case 3: (model, empirical) pair; the model set draws (Pc, Pidle) from the
/// uniform law, the empirical set from the truncated Gaussian truth. Both are
/// labeled by the analytic optimizer.
Dataset build_case3_dataset(const DensityCaseConfig& cfg, oracles::ConsumptionLaw law,
                            std::size_t n, std::uint64_t seed_stream);

/// Relative MSE on the denormalized target scale (physical lambda* or p), using
/// the normalization statistics the model was trained with.
double test_error(const nn::MlpModel& model, const Dataset& raw_test);

enum class Arm { Transfer, Empirical, ModelOnly, Mixed };
const char* arm_name(Arm a);

struct ArmOutcome {
    Arm arm = Arm::Transfer;
    nn::TrainReport report;           // fine-tune phase for Transfer; training for others
    nn::TrainReport pretrain_report;  // Transfer/ModelOnly only
    double test_error = 0.0;
    nn::MlpModel model;
};

struct DensityJobResult {
    std::size_t x = 0;
    std::size_t seed_index = 0;
    std::vector<ArmOutcome> arms;  // Transfer, Empirical, ModelOnly, Mixed
};

/// One (x, seed) job: all four arms on shared datasets. `model_pool` must
/// hold n_total rows, `empirical_pool` at least x.
DensityJobResult run_density_job(const DensityCaseConfig& cfg, const Dataset& model_pool,
                                 const Dataset& empirical_pool, const Dataset& test_set,
                                 std::size_t x, std::size_t seed_index);

struct ProtocolBResult {
    std::vector<DensityJobResult> jobs;  // x-major, then seed
    Dataset model_pool;
    Dataset empirical_pool;
    Dataset test_set;
};

/// Full protocol-B run over every configured (x, seed).
ProtocolBResult run_protocol_B(const DensityCaseConfig& cfg);

struct SweepCandidateResult {
    std::vector<int> hidden_layers;
    std::vector<double> final_val_errors;  // one per seed, fine-tune phase
    std::vector<ArmOutcome> outcomes;      // Transfer arm per seed
};

/// Protocol-B transfer arm per candidate architecture at a fixed x.
std::vector<SweepCandidateResult> architecture_sweep(const DensityCaseConfig& cfg,
                                                     const std::vector<std::vector<int>>& candidates,
                                                     std::size_t x);

/// Median of a non-empty vector (midpoint average for even sizes).
double median(std::vector<double> v);

}  // namespace eeopt::pipeline

#endif
