#include "eeopt/netsim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "eeopt/common.hpp"

namespace eeopt::netsim {

double path_loss_db(double distance_m, const PathLossParams& pl) {
    const double d = std::max(distance_m, pl.min_distance_m);
    return pl.intercept_db + pl.slope_db_per_decade * std::log10(d / 1000.0);
}

double channel_gain(double distance_m, double fading, const PathLossParams& pl) {
    return fading * std::pow(10.0, -path_loss_db(distance_m, pl) / 10.0);
}

void UplinkScenario::validate() const {
    if (channel_gains.empty()) throw std::invalid_argument("scenario has no users");
    if (channel_gains.size() != user_positions.size())
        throw std::invalid_argument("gain/position count mismatch");
    for (double g : channel_gains)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("channel gains must be strictly positive and finite");
    if (!(pmax_w > 0.0)) throw std::invalid_argument("pmax must be positive");
    if (!(noise_power_w > 0.0)) throw std::invalid_argument("noise power must be positive");
    if (amplifier_inefficiency < 1.0) throw std::invalid_argument("amplifier inefficiency must be >= 1");
}

UplinkScenario sample_uplink_scenario(std::size_t n_users, double radius_m, double pmax_w,
                                      std::uint64_t rng_seed, const UplinkParams& params) {
    if (n_users == 0) throw std::invalid_argument("n_users must be >= 1");
    if (!(radius_m > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!(pmax_w > 0.0)) throw std::invalid_argument("pmax must be positive");

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    UplinkScenario s;
    s.noise_power_w = params.noise_power_w;
    s.pmax_w = pmax_w;
    s.circuit_power_w = params.circuit_power_w;
    s.amplifier_inefficiency = params.amplifier_inefficiency;
    s.bandwidth_hz = params.bandwidth_hz;
    s.user_positions.reserve(n_users);
    s.channel_gains.reserve(n_users);
    for (std::size_t k = 0; k < n_users; ++k) {
        const double r = radius_m * std::sqrt(unif(rng));
        const double phi = 2.0 * std::numbers::pi * unif(rng);
        const Point pos{r * std::cos(phi), r * std::sin(phi)};
        // |h|^2 with h ~ CN(0,1): (x^2 + y^2)/2, unit mean.
        const double re = gauss(rng);
        const double im = gauss(rng);
        const double fading = 0.5 * (re * re + im * im);
        s.user_positions.push_back(pos);
        s.channel_gains.push_back(channel_gain(r, fading, params.path_loss));
    }
    s.validate();
    return s;
}

Deployment sample_deployment(PointProcess kind, double density, double window_m,
                             std::uint64_t rng_seed) {
    if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
    if (!(window_m > 0.0)) throw std::invalid_argument("window must be positive");

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Deployment d;
    d.kind = kind;
    d.window_m = window_m;
    if (kind == PointProcess::Poisson) {
        d.density = density;
        const double mean = density * window_m * window_m;
        std::poisson_distribution<long> count(mean);
        const long n = count(rng);
        d.points.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            const double x = window_m * unif(rng);
            const double y = window_m * unif(rng);
            d.points.push_back({x, y});
        }
    } else {
        const long m = std::max(1L, std::lround(window_m * std::sqrt(density)));
        const double spacing = window_m / static_cast<double>(m);
        d.density = static_cast<double>(m) * static_cast<double>(m) / (window_m * window_m);
        const double ox = spacing * unif(rng);
        const double oy = spacing * unif(rng);
        d.points.reserve(static_cast<std::size_t>(m * m));
        for (long i = 0; i < m; ++i)
            for (long j = 0; j < m; ++j)
                d.points.push_back({static_cast<double>(i) * spacing + ox,
                                    static_cast<double>(j) * spacing + oy});
    }
    return d;
}

void CellularParams::validate() const {
    if (!(path_loss_exponent > 2.0))
        throw std::invalid_argument("path loss exponent must exceed 2");
    if (tx_power_w < 0.0 || static_power_w < 0.0 || idle_power_w < 0.0)
        throw std::invalid_argument("powers must be non-negative");
    if (!(user_density > 0.0)) throw std::invalid_argument("user density must be positive");
    if (!(sinr_threshold > 0.0)) throw std::invalid_argument("SINR threshold must be positive");
    if (amplifier_inefficiency < 1.0) throw std::invalid_argument("amplifier inefficiency must be >= 1");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (noise_power_w < 0.0) throw std::invalid_argument("noise power must be non-negative");
}

}  // namespace eeopt::netsim
