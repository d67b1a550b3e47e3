#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "eeopt/common.hpp"
#include "eeopt/gee.hpp"
#include "eeopt/netsim.hpp"
#include "eeopt/optim.hpp"

using namespace eeopt;
using namespace eeopt::oracles;
using eeopt::netsim::UplinkScenario;

namespace {

UplinkScenario make_scenario(std::vector<double> gains, double noise, double pmax, double pc,
                             double mu, double bandwidth) {
    UplinkScenario s;
    s.channel_gains = std::move(gains);
    s.user_positions.assign(s.channel_gains.size(), {0.0, 0.0});
    s.noise_power_w = noise;
    s.pmax_w = pmax;
    s.circuit_power_w = pc;
    s.amplifier_inefficiency = mu;
    s.bandwidth_hz = bandwidth;
    return s;
}

UplinkScenario random_scenario(std::size_t users, std::uint64_t seed, double pmax_dbm_lo = -20.0,
                               double pmax_dbm_hi = 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 31));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double pmax = dbm_to_watt(pmax_dbm_lo + (pmax_dbm_hi - pmax_dbm_lo) * unif(rng));
    return netsim::sample_uplink_scenario(users, 500.0, pmax, seed);
}

}  // namespace

TEST_CASE("gee closed-form single user") {
    const auto s = make_scenario({1.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    // rate = log2(2) = 1, power = 1*1 + 1 = 2
    CHECK(gee(s, {{1.0}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gee(s, {{0.0}}) == 0.0);
}

TEST_CASE("gee matches an independent scalar evaluation on symmetric users") {
    const double g = 3e-9, noise = 4e-15, p = 0.02, pc = 1.0, mu = 2.5, bw = 180e3;
    const auto s = make_scenario({g, g}, noise, 0.05, pc, mu, bw);
    // Independent route: scalar SINR/rate arithmetic, no shared helpers.
    const double sinr = p * g / (noise + p * g);
    const double expected = (2.0 * bw * std::log2(1.0 + sinr)) / (2.0 * (mu * p + pc));
    CHECK(gee(s, {{p, p}}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gee rejects infeasible allocations") {
    const auto s = make_scenario({1.0, 1.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(gee(s, {{2.0, 0.5}}), std::invalid_argument);   // above pmax
    CHECK_THROWS_AS(gee(s, {{-0.1, 0.5}}), std::invalid_argument);  // negative
    CHECK_THROWS_AS(gee(s, {{0.5}}), std::invalid_argument);        // size mismatch
    auto no_pc = make_scenario({1.0}, 1.0, 1.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(gee(no_pc, {{0.0}}), std::invalid_argument);  // 0/0
    CHECK_NOTHROW(gee(no_pc, {{0.5}}));
}

TEST_CASE("full power fills every entry") {
    const auto s3 = make_scenario({1.0, 2.0, 3.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK(full_power(s3).p == std::vector<double>{1.0, 1.0, 1.0});
    const auto s1 = make_scenario({1.0}, 1.0, 0.1, 1.0, 1.0, 1.0);
    CHECK(full_power(s1).p == std::vector<double>{0.1});
}

TEST_CASE("brute force returns pmax in a monotone noise-limited regime") {
    // Low pmax, high circuit power: GEE is increasing on [0, pmax].
    const auto s = make_scenario({1.0}, 1.0, 0.1, 10.0, 1.0, 1.0);
    const auto res = brute_force_max_gee(s, 41);
    CHECK(res.p.p[0] == doctest::Approx(0.1));
}

TEST_CASE("brute force refinement never lowers the best GEE") {
    const auto s = random_scenario(2, 555);
    double prev = -1.0;
    for (std::size_t grid : {3u, 5u, 9u, 17u, 33u, 65u}) {  // nested grids
        const auto res = brute_force_max_gee(s, grid);
        CHECK(res.gee_value >= prev);
        prev = res.gee_value;
    }
}

TEST_CASE("brute force rejects oversized problems") {
    const auto s4 = make_scenario({1.0, 1.0, 1.0, 1.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(brute_force_max_gee(s4, 10), std::invalid_argument);
    const auto s1 = make_scenario({1.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(brute_force_max_gee(s1, 1), std::invalid_argument);
}

TEST_CASE("dinkelbach lambda trace is non-decreasing") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto s = random_scenario(4, derive_seed(900, seed));
        const auto res = dinkelbach_max_gee(s);
        REQUIRE(res.lambda_trace.size() >= 2);
        for (std::size_t i = 1; i < res.lambda_trace.size(); ++i)
            CHECK(res.lambda_trace[i] >= res.lambda_trace[i - 1]);
        CHECK(res.converged);
        CHECK(res.gee_value == doctest::Approx(gee(s, res.p)).epsilon(1e-12));
    }
}

TEST_CASE("dinkelbach matches the golden-section oracle on single-user problems") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = random_scenario(1, derive_seed(7000, seed), -25.0, 5.0);
        const auto res = dinkelbach_max_gee(s);
        const auto oracle = golden_section_max(
            [&](double p) { return gee(s, {{p}}); }, 0.0, s.pmax_w, s.pmax_w * 1e-10, 400);
        CHECK(res.gee_value == doctest::Approx(oracle.value).epsilon(1e-6));
    }
}

TEST_CASE("dinkelbach beats or matches full power and zero everywhere") {
    std::size_t snapped_any = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = random_scenario(5, derive_seed(1234, seed));
        const auto res = dinkelbach_max_gee(s);
        CHECK(res.gee_value >= gee(s, full_power(s)) * (1.0 - 1e-12));
        CHECK(res.gee_value >= 0.0);
        for (double p : res.p.p) snapped_any += p == 0.0 ? 1 : 0;
    }
    // The switch-off pass must actually engage in interference-heavy drops.
    CHECK(snapped_any > 0);
}

TEST_CASE("dinkelbach is near-optimal against the 2-user brute-force oracle") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto s = random_scenario(2, derive_seed(31337, seed));
        const auto res = dinkelbach_max_gee(s);
        const auto brute = brute_force_max_gee(s, 101);
        CHECK(res.gee_value >= 0.999 * brute.gee_value);
    }
}

TEST_CASE("dinkelbach validates its inputs") {
    const auto s = make_scenario({1.0}, 1.0, 1.0, 1.0, 1.0, 1.0);
    DinkelbachOptions opts;
    opts.tol = 0.0;
    CHECK_THROWS_AS(dinkelbach_max_gee(s, opts), std::invalid_argument);
    auto no_pc = make_scenario({1.0}, 1.0, 1.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(dinkelbach_max_gee(no_pc), std::invalid_argument);
}
