#ifndef EEOPT_GEE_HPP
#define EEOPT_GEE_HPP

#include <cstdint>
#include <vector>

#include "eeopt/netsim.hpp"

namespace eeopt::oracles {

struct PowerAllocation {
    std::vector<double> p;  // watts, one entry per user, 0 <= p_k <= pmax
};

/// Global energy efficiency in bits per joule:
///   sum_k B log2(1 + SINR_k) / sum_k (mu p_k + Pc),
/// SINR_k = p_k g_k / (sigma^2 + sum_{j != k} p_j g_j).
/// Throws on infeasible p and on an identically-zero denominator.
double gee(const netsim::UplinkScenario& s, const PowerAllocation& p);

PowerAllocation full_power(const netsim::UplinkScenario& s);

struct BruteForceResult {
    PowerAllocation p;
    double gee_value = 0.0;
};

/// Exhaustive maximizer over the per-user grid {0, pmax/(G-1), ..., pmax}.
/// Verification oracle only; rejects more than 3 users.
BruteForceResult brute_force_max_gee(const netsim::UplinkScenario& s,
                                     std::size_t grid_points_per_user);

struct DinkelbachOptions {
    double tol = 1e-9;                // stop when R - lambda C < tol * C
    std::size_t max_outer = 60;
    std::size_t random_starts = 2;    // in addition to full power + strongest-user
    double power_floor_ratio = 1e-8;  // log-power box lower bound, relative to pmax
    std::uint64_t rng_seed = 17;      // only used for the random starts
    std::size_t max_sca_rounds = 80;
    std::size_t max_pga_iters = 300;
};

struct DinkelbachResult {
    PowerAllocation p;
    double gee_value = 0.0;
    bool converged = false;
    std::size_t outer_iterations = 0;
    std::vector<double> lambda_trace;  // non-decreasing across the whole run
};

/// Dinkelbach iteration on max R(p)/C(p) with the inner parametric problem
/// max R(p) - lambda C(p) solved by successive concave approximation of the
/// rate (log2(1+g) >= a log2 g + b, tight at the current iterate) and
/// projected gradient ascent in log-power variables. Multi-start (full power,
/// strongest user, random) with the best kept; after convergence users whose
/// removal improves the objective are switched fully off and the remaining
/// ones re-optimized, since the log-power box cannot express p = 0.
DinkelbachResult dinkelbach_max_gee(const netsim::UplinkScenario& s,
                                    const DinkelbachOptions& opts = {});

}  // namespace eeopt::oracles

#endif
