#include "eeopt/gee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace eeopt::oracles {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Rate and consumed power for the subset of users listed in `active`;
// users outside `active` are off (zero power) but still burn circuit power,
// which `pc_total` accounts for.
struct Evaluator {
    const std::vector<double>& g;
    double noise;
    double mu;
    double pc_total;
    double bandwidth;

    double rate(const std::vector<std::size_t>& active, const std::vector<double>& p) const {
        double total = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) total += p[i] * g[active[i]];
        double r = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const double own = p[i] * g[active[i]];
            r += std::log2(1.0 + own / (noise + total - own));
        }
        return bandwidth * r;
    }

    double power(const std::vector<double>& p) const {
        double sum = 0.0;
        for (double v : p) sum += v;
        return mu * sum + pc_total;
    }
};

// Projected gradient ascent on the concave surrogate
//   G(q) = (B/ln2) sum_k a_k (q_k + ln g_k - ln(noise + I_k)) - lambda (mu sum e^{q_k} + Pc)
// over the box [qlo, qhi]^n. Returns the final powers in `p`.
void maximize_surrogate(const Evaluator& ev, const std::vector<std::size_t>& active,
                        const std::vector<double>& a, double lambda, double qlo, double qhi,
                        std::vector<double>& p, std::size_t max_iters) {
    const std::size_t n = active.size();
    std::vector<double> q(n), grad(n), qn(n), pn(n), inv(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = std::log(p[i]);

    auto surrogate = [&](const std::vector<double>& qq, const std::vector<double>& pp) {
        double total = 0.0, psum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += pp[i] * ev.g[active[i]];
            psum += pp[i];
        }
        double val = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double own = pp[i] * ev.g[active[i]];
            val += a[i] * (qq[i] + std::log(ev.g[active[i]]) - std::log(ev.noise + total - own));
        }
        return (ev.bandwidth / kLn2) * val - lambda * (ev.mu * psum + ev.pc_total);
    };

    double fval = surrogate(q, p);
    double step = 1.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        // grad_k = (B/ln2) [a_k - p_k g_k sum_{j != k} a_j/(noise + I_j)] - lambda mu p_k
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += p[i] * ev.g[active[i]];
        double s_inv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double own = p[i] * ev.g[active[i]];
            inv[i] = a[i] / (ev.noise + total - own);
            s_inv += inv[i];
        }
        double gnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double own = p[i] * ev.g[active[i]];
            grad[i] = (ev.bandwidth / kLn2) * (a[i] - own * (s_inv - inv[i])) - lambda * ev.mu * p[i];
            gnorm = std::max(gnorm, std::abs(grad[i]));
        }
        if (gnorm == 0.0) break;

        bool improved = false;
        for (int halve = 0; halve < 50; ++halve) {
            double move = 0.0, descent = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                qn[i] = std::clamp(q[i] + step * grad[i], qlo, qhi);
                descent += grad[i] * (qn[i] - q[i]);
                move = std::max(move, std::abs(qn[i] - q[i]));
            }
            if (move < 1e-14) break;
            for (std::size_t i = 0; i < n; ++i) pn[i] = std::exp(qn[i]);
            const double fnew = surrogate(qn, pn);
            if (fnew >= fval + 1e-4 * descent && fnew > fval) {
                q = qn;
                p = pn;
                fval = fnew;
                improved = true;
                step = std::min(step * 1.5, 1e6);
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
}

struct InnerResult {
    std::vector<double> p;
    double rate = 0.0;
    double power = 0.0;
};

// max R(p) - lambda C(p) via SCA, warm-started from p0 (active users only).
InnerResult solve_parametric(const Evaluator& ev, const std::vector<std::size_t>& active,
                             double lambda, std::vector<double> p0, double qlo, double qhi,
                             const DinkelbachOptions& opts) {
    const std::size_t n = active.size();
    std::vector<double> a(n);
    InnerResult res;
    res.p = std::move(p0);
    double fprev = -std::numeric_limits<double>::infinity();
    for (std::size_t round = 0; round < opts.max_sca_rounds; ++round) {
        // Tightness point: current SINRs.
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += res.p[i] * ev.g[active[i]];
        for (std::size_t i = 0; i < n; ++i) {
            const double own = res.p[i] * ev.g[active[i]];
            const double gamma = own / (ev.noise + total - own);
            a[i] = gamma / (1.0 + gamma);
        }
        maximize_surrogate(ev, active, a, lambda, qlo, qhi, res.p, opts.max_pga_iters);
        const double f = ev.rate(active, res.p) - lambda * ev.power(res.p);
        if (f - fprev <= 1e-10 * (1.0 + std::abs(f))) {
            fprev = f;
            break;
        }
        fprev = f;
    }
    res.rate = ev.rate(active, res.p);
    res.power = ev.power(res.p);
    return res;
}

// Full Dinkelbach run on a fixed active set, appending to the lambda trace.
InnerResult dinkelbach_on_set(const Evaluator& ev, const std::vector<std::size_t>& active,
                              std::vector<double> start, double qlo, double qhi,
                              const DinkelbachOptions& opts, std::vector<double>& trace,
                              bool& converged, std::size_t& outer_used) {
    InnerResult cur;
    cur.p = std::move(start);
    cur.rate = ev.rate(active, cur.p);
    cur.power = ev.power(cur.p);
    double lambda = cur.rate / cur.power;
    trace.push_back(lambda);
    converged = false;
    for (std::size_t outer = 0; outer < opts.max_outer; ++outer) {
        ++outer_used;
        InnerResult next = solve_parametric(ev, active, lambda, cur.p, qlo, qhi, opts);
        double lambda_next = next.rate / next.power;
        if (lambda_next < lambda) {  // never accept a regression (fp guard)
            next = cur;
            lambda_next = lambda;
        }
        const double surplus = next.rate - lambda * next.power;
        cur = std::move(next);
        lambda = lambda_next;
        trace.push_back(lambda);
        if (surplus < opts.tol * cur.power) {
            converged = true;
            break;
        }
    }
    return cur;
}

}  // namespace

double gee(const netsim::UplinkScenario& s, const PowerAllocation& alloc) {
    s.validate();
    const std::size_t n = s.n_users();
    if (alloc.p.size() != n) throw std::invalid_argument("allocation size mismatch");
    const double slack = 1e-12 * s.pmax_w;
    for (double v : alloc.p)
        if (!(v >= -slack) || v > s.pmax_w + slack || !std::isfinite(v))
            throw std::invalid_argument("infeasible power allocation");

    double total = 0.0, psum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        total += alloc.p[k] * s.channel_gains[k];
        psum += alloc.p[k];
    }
    const double den = s.amplifier_inefficiency * psum + static_cast<double>(n) * s.circuit_power_w;
    if (den <= 0.0) throw std::invalid_argument("zero total power: GEE undefined (0/0)");
    double rate = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double own = alloc.p[k] * s.channel_gains[k];
        rate += std::log2(1.0 + own / (s.noise_power_w + total - own));
    }
    return s.bandwidth_hz * rate / den;
}

PowerAllocation full_power(const netsim::UplinkScenario& s) {
    s.validate();
    return PowerAllocation{std::vector<double>(s.n_users(), s.pmax_w)};
}

BruteForceResult brute_force_max_gee(const netsim::UplinkScenario& s,
                                     std::size_t grid_points_per_user) {
    s.validate();
    const std::size_t n = s.n_users();
    if (n > 3) throw std::invalid_argument("brute force limited to 3 users");
    if (grid_points_per_user < 2) throw std::invalid_argument("grid needs at least {0, pmax}");

    std::vector<double> levels(grid_points_per_user);
    for (std::size_t i = 0; i < grid_points_per_user; ++i)
        levels[i] = s.pmax_w * static_cast<double>(i) / static_cast<double>(grid_points_per_user - 1);

    const double pc_total = static_cast<double>(n) * s.circuit_power_w;
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> p(n, 0.0);
    BruteForceResult best;
    best.p.p.assign(n, 0.0);
    best.gee_value = -1.0;
    for (;;) {
        for (std::size_t k = 0; k < n; ++k) p[k] = levels[idx[k]];
        double total = 0.0, psum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            total += p[k] * s.channel_gains[k];
            psum += p[k];
        }
        const double den = s.amplifier_inefficiency * psum + pc_total;
        if (den > 0.0) {
            double rate = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double own = p[k] * s.channel_gains[k];
                rate += std::log2(1.0 + own / (s.noise_power_w + total - own));
            }
            const double value = s.bandwidth_hz * rate / den;
            if (value > best.gee_value) {
                best.gee_value = value;
                best.p.p = p;
            }
        }
        std::size_t k = 0;
        while (k < n && ++idx[k] == grid_points_per_user) idx[k++] = 0;
        if (k == n) break;
    }
    return best;
}

DinkelbachResult dinkelbach_max_gee(const netsim::UplinkScenario& s,
                                    const DinkelbachOptions& opts) {
    s.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(s.circuit_power_w > 0.0))
        throw std::invalid_argument("Pc must be positive for GEE maximization");
    const std::size_t n = s.n_users();
    const double qhi = std::log(s.pmax_w);
    const double qlo = qhi + std::log(opts.power_floor_ratio);
    const double floor_w = s.pmax_w * opts.power_floor_ratio;
    const Evaluator ev{s.channel_gains, s.noise_power_w, s.amplifier_inefficiency,
                       static_cast<double>(n) * s.circuit_power_w, s.bandwidth_hz};

    // Start points in full-dimension power space.
    std::vector<std::vector<double>> starts;
    starts.emplace_back(n, s.pmax_w);  // full power
    {
        std::vector<double> strongest(n, floor_w);
        const std::size_t k = static_cast<std::size_t>(
            std::max_element(s.channel_gains.begin(), s.channel_gains.end()) -
            s.channel_gains.begin());
        strongest[k] = s.pmax_w;
        starts.push_back(std::move(strongest));
    }
    std::mt19937_64 rng(opts.rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t r = 0; r < opts.random_starts; ++r) {
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k)
            p[k] = s.pmax_w * std::pow(10.0, -3.0 * unif(rng));  // log-uniform in [1e-3, 1] pmax
        starts.push_back(std::move(p));
    }

    DinkelbachResult best;
    best.p.p.assign(n, 0.0);
    best.gee_value = -1.0;
    for (auto& start : starts) {
        std::vector<double> trace;
        std::size_t outer_used = 0;
        bool run_converged = true;

        std::vector<std::size_t> active(n);
        std::iota(active.begin(), active.end(), 0);
        std::vector<double> p = start;
        bool conv = false;
        InnerResult cur = dinkelbach_on_set(ev, active, p, qlo, qhi, opts, trace, conv, outer_used);
        run_converged = conv;

        // Switch-off pass: the log-power box cannot reach p = 0, so test each
        // user at exactly zero and re-run on the survivors when it helps.
        for (std::size_t pass = 0; pass < n; ++pass) {
            double cur_gee = cur.rate / cur.power;
            std::size_t drop = active.size();
            double best_gain = cur_gee;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (active.size() == 1) break;
                std::vector<std::size_t> reduced = active;
                reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
                std::vector<double> pr = cur.p;
                pr.erase(pr.begin() + static_cast<std::ptrdiff_t>(i));
                const double value = ev.rate(reduced, pr) / ev.power(pr);
                if (value > best_gain * (1.0 + 1e-12)) {
                    best_gain = value;
                    drop = i;
                }
            }
            if (drop == active.size()) break;
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
            cur.p.erase(cur.p.begin() + static_cast<std::ptrdiff_t>(drop));
            cur = dinkelbach_on_set(ev, active, cur.p, qlo, qhi, opts, trace, conv, outer_used);
            run_converged = run_converged && conv;
        }

        const double value = cur.rate / cur.power;
        if (value > best.gee_value) {
            best.gee_value = value;
            best.p.p.assign(n, 0.0);
            for (std::size_t i = 0; i < active.size(); ++i) best.p.p[active[i]] = cur.p[i];
            best.converged = run_converged;
            best.outer_iterations = outer_used;
            best.lambda_trace = std::move(trace);
        }
    }
    return best;
}

}  // namespace eeopt::oracles
