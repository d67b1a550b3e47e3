#ifndef EEOPT_CELLULAR_HPP
#define EEOPT_CELLULAR_HPP

#include <cstdint>

#include "eeopt/netsim.hpp"
#include "eeopt/parallel.hpp"

namespace eeopt::oracles {

/// Probability that a base station serves at least one user under the
/// 3.5-parameter load model: 1 - (1 + lambda_u / (3.5 lambda_b))^{-3.5}.
double activity_prob(double lambda_b, double lambda_u);

/// rho(theta, alpha) = theta^{2/alpha} * integral_{theta^{-2/alpha}}^inf du / (1 + u^{alpha/2}).
double interference_factor(double theta, double alpha);

/// Nearest-active-BS Rayleigh coverage for a PPP of density lambda_b thinned
/// by the activity probability:
///   Pcov = pi lambda_a int_0^inf exp(-pi lambda_a v (1+rho) - theta sigma^2 v^{alpha/2} / P) dv.
/// Quadrature absolute tolerance: 1e-9.
double coverage_prob(double lambda_b, const netsim::CellularParams& params);

/// Area energy efficiency in bits per joule per m^2:
///   lambda_a B log2(1+theta) Pcov / (lambda_b (p_a (P/eta + Pc) + (1-p_a) Pidle)).
double area_ee(double lambda_b, const netsim::CellularParams& params);

struct DensityBracket {
    double lo = 0.1e-6;   // per m^2
    double hi = 100e-6;
};

struct DensitySolution {
    double lambda_star = 0.0;  // base stations per m^2
    double ee_star = 0.0;      // bits per joule per m^2
    bool at_bracket_edge = false;
};

struct AnalyticSearchOptions {
    double rel_tol = 1e-6;        // on lambda_star
    std::size_t scan_points = 33; // coarse scan that brackets the peak first
};

/// Coarse log-spaced scan followed by golden-section search on log-lambda.
DensitySolution optimal_density_analytic(const netsim::CellularParams& params,
                                         const DensityBracket& bracket,
                                         const AnalyticSearchOptions& opts = {});

struct CoverageMcOptions {
    std::size_t n_realizations = 10000;
    double target_active_bs = 128.0;  // mean active BS count; sets the window
    Exec exec = Exec::Serial;
};

/// Monte-Carlo coverage on a torus window: deployment sampled per realization,
/// thinned by the activity probability, nearest active BS serves, Rayleigh
/// fading on every link, interference from all other active points.
/// Deterministic per seed and independent of the execution policy.
double estimate_coverage_mc(netsim::PointProcess kind, double lambda_b,
                            const netsim::CellularParams& params, std::uint64_t rng_seed,
                            const CoverageMcOptions& opts = {});

struct GridMcOptions {
    std::size_t lambda_grid_points = 40;
    netsim::PointProcess kind = netsim::PointProcess::SquareGrid;
    CoverageMcOptions mc;
};

struct GridMcResult {
    DensitySolution solution;
    double max_ee_std_error = 0.0;  // largest per-point EE standard error
    double ee_spread = 0.0;         // max - min EE across the grid
    bool noisy = false;             // std error exceeded 5% of the spread
};

/// Exhaustive maximizer of the EE expression over a log-spaced density grid,
/// with coverage estimated by Monte-Carlo. The empirical-data generator.
GridMcResult optimal_density_grid_mc(const netsim::CellularParams& params,
                                     const DensityBracket& bracket, std::uint64_t rng_seed,
                                     const GridMcOptions& opts = {});

enum class ConsumptionLaw { Uniform, Gaussian };

struct ConsumptionModelConfig {
    double p_dbm_lo = 30.0;
    double p_dbm_hi = 46.0;
    // Uniform (approximate model) supports.
    double pc_lo_w = 5.0;
    double pc_hi_w = 15.0;
    double pidle_lo_w = 2.5;
    double pidle_hi_w = 7.5;
    // Gaussian (ground truth) moments, truncated at zero.
    double pc_mean_w = 11.0;
    double pc_std_w = 1.0;
    double pidle_mean_w = 5.5;
    double pidle_std_w = 0.5;
    DensityBracket bracket;
    AnalyticSearchOptions search;
};

struct ConsumptionSample {
    double tx_power_w = 0.0;
    double static_power_w = 0.0;
    double idle_power_w = 0.0;
    double lambda_star = 0.0;
    bool at_bracket_edge = false;
};

/// One labeled (P, Pc, Pidle) -> lambda* sample: consumption powers drawn from
/// the designated law, transmit power log-uniform over the configured range,
/// label from the analytic optimizer.
ConsumptionSample consumption_model_oracle(const netsim::CellularParams& base,
                                           ConsumptionLaw law, std::uint64_t rng_seed,
                                           const ConsumptionModelConfig& cfg = {});

}  // namespace eeopt::oracles

#endif
