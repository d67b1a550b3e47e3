#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "eeopt/common.hpp"
#include "eeopt/netsim.hpp"

using namespace eeopt;
using namespace eeopt::netsim;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double torus_nearest_distance(const Deployment& dep, double px, double py) {
    double best = 1e300;
    for (const auto& pt : dep.points) {
        double dx = std::abs(pt.x - px);
        double dy = std::abs(pt.y - py);
        dx = std::min(dx, dep.window_m - dx);
        dy = std::min(dy, dep.window_m - dy);
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    return best;
}

}  // namespace

TEST_CASE("uplink scenario basic contract") {
    const auto s = sample_uplink_scenario(10, 500.0, 1.0, 42);
    CHECK(s.n_users() == 10);
    CHECK(s.user_positions.size() == 10);
    for (std::size_t k = 0; k < s.n_users(); ++k) {
        CHECK(s.channel_gains[k] > 0.0);
        const double r = std::hypot(s.user_positions[k].x, s.user_positions[k].y);
        CHECK(r <= 500.0);
    }
    const auto one = sample_uplink_scenario(1, 123.0, 0.5, 7);
    CHECK(one.n_users() == 1);
    CHECK(one.pmax_w == 0.5);
}

TEST_CASE("uplink scenario rejects bad arguments") {
    CHECK_THROWS_AS(sample_uplink_scenario(0, 500.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_uplink_scenario(3, -1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_uplink_scenario(3, 500.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("uplink scenario is seed-deterministic") {
    const auto a = sample_uplink_scenario(10, 500.0, 1.0, 99);
    const auto b = sample_uplink_scenario(10, 500.0, 1.0, 99);
    CHECK(a.channel_gains == b.channel_gains);
    for (std::size_t k = 0; k < a.n_users(); ++k) {
        CHECK(a.user_positions[k].x == b.user_positions[k].x);
        CHECK(a.user_positions[k].y == b.user_positions[k].y);
    }
    const auto c = sample_uplink_scenario(10, 500.0, 1.0, 100);
    CHECK(a.channel_gains != c.channel_gains);
}

TEST_CASE("fading is unit-mean Rayleigh power") {
    // Recover |h|^2 from gain / path loss at the sampled distance.
    const UplinkParams params;
    double acc = 0.0;
    const std::size_t n = 100000;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n / 10; ++i) {
        const auto s = sample_uplink_scenario(10, 500.0, 1.0, derive_seed(4242, i), params);
        for (std::size_t k = 0; k < 10; ++k) {
            const double d = std::hypot(s.user_positions[k].x, s.user_positions[k].y);
            const double pl = std::pow(10.0, -path_loss_db(d, params.path_loss) / 10.0);
            acc += s.channel_gains[k] / pl;
            ++count;
        }
    }
    const double mean = acc / static_cast<double>(count);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gain is non-increasing in distance at fixed fading") {
    const PathLossParams pl;
    double prev = channel_gain(1.0, 1.0, pl);
    for (double d = 2.0; d < 2000.0; d *= 1.3) {
        const double g = channel_gain(d, 1.0, pl);
        CHECK(g <= prev);
        prev = g;
    }
    // Below the minimum distance the law saturates.
    CHECK(channel_gain(1.0, 1.0, pl) == channel_gain(10.0, 1.0, pl));
}

TEST_CASE("poisson counts match mean and variance") {
    const double density = 2e-6, window = 8000.0;
    const double expected = density * window * window;  // 128
    const std::size_t n = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto dep = sample_deployment(PointProcess::Poisson, density, window, derive_seed(1, i));
        const double c = static_cast<double>(dep.points.size());
        sum += c;
        sumsq += c * c;
        for (const auto& pt : dep.points) {
            CHECK(pt.x >= 0.0);
            CHECK(pt.x < window);
            CHECK(pt.y >= 0.0);
            CHECK(pt.y < window);
        }
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double se = std::sqrt(expected / n);
    CHECK(std::abs(mean - expected) < 3.0 * se);
    // Var/mean for a Poisson count concentrates near 1.
    CHECK(var / mean == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("square grid lattice arithmetic") {
    const auto dep = sample_deployment(PointProcess::SquareGrid, 1e-6, 1e4, 5);
    REQUIRE(dep.points.size() == 100);
    CHECK(dep.density == doctest::Approx(1e-6));
    std::vector<double> xs;
    for (const auto& pt : dep.points) {
        xs.push_back(pt.x);
        CHECK(pt.x >= 0.0);
        CHECK(pt.x < 1e4);
        CHECK(pt.y >= 0.0);
        CHECK(pt.y < 1e4);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    REQUIRE(xs.size() == 10);
    for (std::size_t i = 1; i < xs.size(); ++i)
        CHECK(xs[i] - xs[i - 1] == doctest::Approx(1000.0));
}

TEST_CASE("square grid determinism and offset variability") {
    const auto a = sample_deployment(PointProcess::SquareGrid, 4e-6, 5000.0, 11);
    const auto b = sample_deployment(PointProcess::SquareGrid, 4e-6, 5000.0, 11);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].x == b.points[i].x);
        CHECK(a.points[i].y == b.points[i].y);
    }
    const auto c = sample_deployment(PointProcess::SquareGrid, 4e-6, 5000.0, 12);
    CHECK(a.points[0].x != c.points[0].x);
}

TEST_CASE("deployment rejects bad arguments") {
    CHECK_THROWS_AS(sample_deployment(PointProcess::Poisson, 0.0, 100.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_deployment(PointProcess::SquareGrid, 1e-6, -5.0, 1), std::invalid_argument);
}

TEST_CASE("grid offset randomization makes the typical point stationary") {
    // Distance from a uniform probe to its nearest grid point has the same
    // distribution whichever seed generated the offset.
    const double density = 1e-5, window = 2000.0;
    const std::size_t n = 10000;
    auto collect = [&](std::uint64_t seed) {
        std::vector<double> d;
        d.reserve(n);
        std::mt19937_64 rng(derive_seed(seed, 404));
        std::uniform_real_distribution<double> unif(0.0, window);
        for (std::size_t i = 0; i < n; ++i) {
            const auto dep =
                sample_deployment(PointProcess::SquareGrid, density, window, derive_seed(seed, i));
            d.push_back(torus_nearest_distance(dep, unif(rng), unif(rng)));
        }
        return d;
    };
    const double ks = ks_statistic(collect(1), collect(2));
    // 1% critical value for n = m = 10^4.
    CHECK(ks < 1.63 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("cellular parameter validation") {
    CellularParams p;
    CHECK_NOTHROW(p.validate());
    p.path_loss_exponent = 2.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.path_loss_exponent = 4.0;
    p.sinr_threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.sinr_threshold = 1.0;
    p.user_density = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
