#ifndef EEOPT_NETSIM_HPP
#define EEOPT_NETSIM_HPP

#include <cstdint>
#include <vector>

namespace eeopt::netsim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Macro-cell distance law in dB: intercept + slope * log10(d / 1 km),
/// evaluated at max(d, min_distance) to stay finite at the origin.
struct PathLossParams {
    double intercept_db = 128.1;
    double slope_db_per_decade = 37.6;
    double min_distance_m = 10.0;
};

double path_loss_db(double distance_m, const PathLossParams& pl);

/// Linear power gain at distance d with the given fading coefficient |h|^2.
double channel_gain(double distance_m, double fading, const PathLossParams& pl);

/// One multi-user uplink realization: users dropped in a disk, a single
/// receiver at the center, one scalar gain per user.
struct UplinkScenario {
    std::vector<Point> user_positions;   // meters, receiver at origin
    std::vector<double> channel_gains;   // linear, > 0
    double noise_power_w = 0.0;          // sigma^2
    double pmax_w = 0.0;                 // per-user power cap
    double circuit_power_w = 0.0;        // Pc per user
    double amplifier_inefficiency = 1.0; // mu = 1/eta, >= 1
    double bandwidth_hz = 1.0;

    std::size_t n_users() const { return channel_gains.size(); }
    void validate() const;  // throws std::invalid_argument on violations
};

/// Fixed per-link radio constants used when sampling uplink scenarios.
struct UplinkParams {
    double noise_power_w = 3.63e-15;     // thermal over 180 kHz + 7 dB NF
    double circuit_power_w = 1.0;
    double amplifier_inefficiency = 1.0 / 0.35;
    double bandwidth_hz = 180e3;
    PathLossParams path_loss;
};

/// Users uniform in a disk of the given radius; Rayleigh fading |h|^2 with
/// h standard circularly-symmetric complex Gaussian. Deterministic per seed.
UplinkScenario sample_uplink_scenario(std::size_t n_users, double radius_m, double pmax_w,
                                      std::uint64_t rng_seed, const UplinkParams& params = {});

enum class PointProcess { Poisson, SquareGrid };

struct Deployment {
    PointProcess kind = PointProcess::Poisson;
    std::vector<Point> points;  // all inside [0, window)^2
    double window_m = 0.0;      // square side length
    double density = 0.0;       // points per m^2 (exact for SquareGrid)
};

/// Poisson: count ~ Poisson(density * window^2), positions i.i.d. uniform.
/// SquareGrid: m x m lattice, m = round(window * sqrt(density)), spacing
/// window / m, one uniform global offset per realization so a random probe
/// sees a stationary grid.
Deployment sample_deployment(PointProcess kind, double density, double window_m,
                             std::uint64_t rng_seed);

/// Stochastic-geometry model parameters for the density-optimization cases.
struct CellularParams {
    double path_loss_exponent = 4.0;       // alpha > 2
    double tx_power_w = 1.0;               // P
    double user_density = 100e-6;          // lambda_u, per m^2 (100 / km^2)
    double static_power_w = 11.0;          // Pc
    double idle_power_w = 5.5;             // Pidle
    double amplifier_inefficiency = 1.0 / 0.35;  // 1/eta
    double noise_power_w = 3.981071705534972e-14; // -104 dBm
    double sinr_threshold = 1.0;           // theta
    double bandwidth_hz = 180e3;

    void validate() const;
};

}  // namespace eeopt::netsim

#endif
