#include "eeopt/cellular.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "eeopt/common.hpp"
#include "eeopt/optim.hpp"

namespace eeopt::oracles {

namespace {
constexpr double kQuadTermTol = 1e-12;
}

double activity_prob(double lambda_b, double lambda_u) {
    if (!(lambda_b > 0.0) || !(lambda_u > 0.0))
        throw std::invalid_argument("densities must be positive");
    return 1.0 - std::pow(1.0 + lambda_u / (3.5 * lambda_b), -3.5);
}

double interference_factor(double theta, double alpha) {
    if (!(alpha > 2.0)) throw std::invalid_argument("alpha must exceed 2");
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    // Memoize: density searches evaluate coverage thousands of times with the
    // same (theta, alpha).
    thread_local double last_theta = -1.0, last_alpha = -1.0, last_rho = 0.0;
    if (theta == last_theta && alpha == last_alpha) return last_rho;
    const double m = alpha / 2.0;
    const double c = std::pow(theta, -2.0 / alpha);
    const double cm = std::pow(c, m);
    // u = c/s maps [c, inf) to (0, 1]; written as c s^{m-2} / (s^m + c^m) the
    // integrand stays finite near s = 0 (the s^{m-2} endpoint singularity for
    // alpha < 4 is integrable and tanh-sinh absorbs it).
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double integral = integrator.integrate(
        [&](double s) { return c * std::pow(s, m - 2.0) / (std::pow(s, m) + cm); }, 0.0, 1.0,
        kQuadTermTol);
    last_theta = theta;
    last_alpha = alpha;
    last_rho = std::pow(theta, 2.0 / alpha) * integral;
    return last_rho;
}

double coverage_prob(double lambda_b, const netsim::CellularParams& params) {
    params.validate();
    if (!(lambda_b > 0.0)) throw std::invalid_argument("lambda_b must be positive");
    const double p_a = activity_prob(lambda_b, params.user_density);
    const double lambda_a = p_a * lambda_b;
    const double rho = interference_factor(params.sinr_threshold, params.path_loss_exponent);
    const double scale = std::numbers::pi * lambda_a * (1.0 + rho);  // A in w = A v

    if (params.noise_power_w == 0.0) return 1.0 / (1.0 + rho);
    if (params.tx_power_w == 0.0) return 0.0;

    const double beta = params.sinr_threshold * params.noise_power_w / params.tx_power_w;
    const double half_alpha = params.path_loss_exponent / 2.0;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral = integrator.integrate(
        [&](double w) { return std::exp(-w - beta * std::pow(w / scale, half_alpha)); },
        kQuadTermTol);
    return integral / (1.0 + rho);
}

double area_ee(double lambda_b, const netsim::CellularParams& params) {
    params.validate();
    const double p_a = activity_prob(lambda_b, params.user_density);
    const double lambda_a = p_a * lambda_b;
    const double pcov = coverage_prob(lambda_b, params);
    const double rate_density =
        lambda_a * params.bandwidth_hz * std::log2(1.0 + params.sinr_threshold) * pcov;
    const double power_density =
        lambda_b * (p_a * (params.tx_power_w * params.amplifier_inefficiency + params.static_power_w) +
                    (1.0 - p_a) * params.idle_power_w);
    if (!(power_density > 0.0)) throw std::invalid_argument("zero area power consumption");
    return rate_density / power_density;
}

DensitySolution optimal_density_analytic(const netsim::CellularParams& params,
                                         const DensityBracket& bracket,
                                         const AnalyticSearchOptions& opts) {
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo))
        throw std::invalid_argument("invalid density bracket");
    if (!(opts.rel_tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const std::size_t n = std::max<std::size_t>(opts.scan_points, 3);
    const double llo = std::log(bracket.lo), lhi = std::log(bracket.hi);

    auto ee_log = [&](double l) { return area_ee(std::exp(l), params); };

    std::size_t best = 0;
    double best_val = -1.0;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = ee_log(grid[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    DensitySolution sol;
    sol.at_bracket_edge = (best == 0 || best == n - 1);
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[best == n - 1 ? n - 1 : best + 1];
    const ScalarMax m = golden_section_max(ee_log, a, b, opts.rel_tol);
    sol.lambda_star = std::exp(m.x);
    sol.ee_star = m.value;
    return sol;
}

double estimate_coverage_mc(netsim::PointProcess kind, double lambda_b,
                            const netsim::CellularParams& params, std::uint64_t rng_seed,
                            const CoverageMcOptions& opts) {
    params.validate();
    if (!(lambda_b > 0.0)) throw std::invalid_argument("lambda_b must be positive");
    if (!(params.tx_power_w > 0.0))
        throw std::invalid_argument("Monte-Carlo coverage needs positive tx power");
    const double p_a = activity_prob(lambda_b, params.user_density);
    const double window = std::sqrt(opts.target_active_bs / (p_a * lambda_b));
    const double ux = 0.5 * window, uy = 0.5 * window;
    const double norm_noise = params.noise_power_w / params.tx_power_w;
    const double alpha = params.path_loss_exponent;
    const double theta = params.sinr_threshold;

    auto realization = [&](std::size_t i) -> double {
        const auto dep = netsim::sample_deployment(kind, lambda_b, window,
                                                   derive_seed(rng_seed, 2 * i));
        std::mt19937_64 rng(derive_seed(rng_seed, 2 * i + 1));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::exponential_distribution<double> rayleigh(1.0);

        // Thin first (draw order fixed by point order), then fade.
        thread_local std::vector<double> d2;
        d2.clear();
        for (const auto& pt : dep.points) {
            const bool active = unif(rng) < p_a;
            if (!active) continue;
            double dx = std::abs(pt.x - ux);
            double dy = std::abs(pt.y - uy);
            dx = std::min(dx, window - dx);  // torus metric
            dy = std::min(dy, window - dy);
            d2.push_back(dx * dx + dy * dy);
        }
        if (d2.empty()) return 0.0;
        std::size_t serving = 0;
        for (std::size_t k = 1; k < d2.size(); ++k)
            if (d2[k] < d2[serving]) serving = k;
        double signal = 0.0, interference = 0.0;
        for (std::size_t k = 0; k < d2.size(); ++k) {
            const double rx = rayleigh(rng) * std::pow(d2[k], -0.5 * alpha);
            if (k == serving)
                signal = rx;
            else
                interference += rx;
        }
        return signal > theta * (norm_noise + interference) ? 1.0 : 0.0;
    };

    const double hits = par_map_reduce<double>(opts.n_realizations, opts.exec, 0.0, realization,
                                               [](double acc, double v) { return acc + v; });
    return hits / static_cast<double>(opts.n_realizations);
}

GridMcResult optimal_density_grid_mc(const netsim::CellularParams& params,
                                     const DensityBracket& bracket, std::uint64_t rng_seed,
                                     const GridMcOptions& opts) {
    if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo))
        throw std::invalid_argument("invalid density bracket");
    const std::size_t n = std::max<std::size_t>(opts.lambda_grid_points, 3);
    const double llo = std::log(bracket.lo), lhi = std::log(bracket.hi);

    GridMcResult res;
    double best_ee = -1.0, min_ee = 0.0, max_ee = 0.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda_b =
            std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
        const double pcov =
            estimate_coverage_mc(opts.kind, lambda_b, params, derive_seed(rng_seed, i), opts.mc);
        const double p_a = activity_prob(lambda_b, params.user_density);
        const double lambda_a = p_a * lambda_b;
        const double rate_density =
            lambda_a * params.bandwidth_hz * std::log2(1.0 + params.sinr_threshold) * pcov;
        const double power_density =
            lambda_b *
            (p_a * (params.tx_power_w * params.amplifier_inefficiency + params.static_power_w) +
             (1.0 - p_a) * params.idle_power_w);
        const double ee = rate_density / power_density;
        const double pcov_se =
            std::sqrt(std::max(pcov * (1.0 - pcov), 1e-12) /
                      static_cast<double>(opts.mc.n_realizations));
        const double ee_se = pcov > 0.0 ? ee * pcov_se / pcov : 0.0;
        res.max_ee_std_error = std::max(res.max_ee_std_error, ee_se);
        if (i == 0) {
            min_ee = max_ee = ee;
        } else {
            min_ee = std::min(min_ee, ee);
            max_ee = std::max(max_ee, ee);
        }
        if (ee > best_ee) {
            best_ee = ee;
            best = i;
            res.solution.lambda_star = lambda_b;
            res.solution.ee_star = ee;
        }
    }
    res.solution.at_bracket_edge = (best == 0 || best == n - 1);
    res.ee_spread = max_ee - min_ee;
    res.noisy = res.max_ee_std_error > 0.05 * res.ee_spread;
    return res;
}

ConsumptionSample consumption_model_oracle(const netsim::CellularParams& base, ConsumptionLaw law,
                                           std::uint64_t rng_seed,
                                           const ConsumptionModelConfig& cfg) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ConsumptionSample sample;
    sample.tx_power_w = dbm_to_watt(cfg.p_dbm_lo + (cfg.p_dbm_hi - cfg.p_dbm_lo) * unif(rng));
    if (law == ConsumptionLaw::Uniform) {
        sample.static_power_w = cfg.pc_lo_w + (cfg.pc_hi_w - cfg.pc_lo_w) * unif(rng);
        sample.idle_power_w = cfg.pidle_lo_w + (cfg.pidle_hi_w - cfg.pidle_lo_w) * unif(rng);
    } else {
        auto truncated_gauss = [&rng](double mean, double std) {
            if (std <= 0.0) return mean;  // degenerate law
            std::normal_distribution<double> dist(mean, std);
            double v;
            do {
                v = dist(rng);
            } while (v < 0.0);  // truncate at zero
            return v;
        };
        sample.static_power_w = truncated_gauss(cfg.pc_mean_w, cfg.pc_std_w);
        sample.idle_power_w = truncated_gauss(cfg.pidle_mean_w, cfg.pidle_std_w);
    }

    netsim::CellularParams params = base;
    params.tx_power_w = sample.tx_power_w;
    params.static_power_w = sample.static_power_w;
    params.idle_power_w = sample.idle_power_w;
    const DensitySolution sol = optimal_density_analytic(params, cfg.bracket, cfg.search);
    sample.lambda_star = sol.lambda_star;
    sample.at_bracket_edge = sol.at_bracket_edge;
    return sample;
}

}  // namespace eeopt::oracles
