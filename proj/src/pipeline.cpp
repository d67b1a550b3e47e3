#include "eeopt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "eeopt/common.hpp"

namespace eeopt::pipeline {

std::vector<double> Case1Config::sweep_points() const {
    if (!pmax_dbm_sweep.empty()) return pmax_dbm_sweep;
    std::vector<double> pts(8);
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = pmax_dbm_lo +
                 (pmax_dbm_hi - pmax_dbm_lo) * static_cast<double>(i) / static_cast<double>(pts.size() - 1);
    return pts;
}

netsim::UplinkScenario sort_users_by_gain(const netsim::UplinkScenario& s) {
    std::vector<std::size_t> order(s.n_users());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.channel_gains[a] > s.channel_gains[b];
    });
    netsim::UplinkScenario out = s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.channel_gains[i] = s.channel_gains[order[i]];
        out.user_positions[i] = s.user_positions[order[i]];
    }
    return out;
}

Case1Build build_case1_dataset(const Case1Config& cfg, std::size_t n, std::uint64_t seed_stream) {
    if (n == 0) throw std::invalid_argument("need at least one sample");
    const std::size_t k = cfg.n_users;

    struct Row {
        std::vector<double> features;
        std::vector<double> targets;
        bool converged = false;
        std::size_t outer = 0;
    };
    auto make_row = [&](std::size_t i) -> Row {
        const std::uint64_t seed = derive_seed(seed_stream, i);
        std::mt19937_64 aux(derive_seed(seed, 777));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double pmax_dbm = cfg.pmax_dbm_lo + (cfg.pmax_dbm_hi - cfg.pmax_dbm_lo) * unif(aux);
        const double pmax_w = dbm_to_watt(pmax_dbm);
        const netsim::UplinkScenario s = sort_users_by_gain(
            netsim::sample_uplink_scenario(k, cfg.radius_m, pmax_w, seed, cfg.uplink));
        const auto sol = oracles::dinkelbach_max_gee(s, cfg.solver);
        Row row;
        row.converged = sol.converged;
        row.outer = sol.outer_iterations;
        row.features.reserve(k + 1);
        for (double g : s.channel_gains) row.features.push_back(g);
        row.features.push_back(pmax_w);
        row.targets.reserve(k);
        for (double p : sol.p.p) row.targets.push_back(p / pmax_w);
        return row;
    };

    const std::vector<Row> rows = par_map<Row>(n, cfg.exec, make_row);

    Case1Build build;
    build.n_attempted = n;
    std::size_t accepted = 0;
    for (const auto& r : rows) accepted += r.converged ? 1 : 0;
    build.n_unconverged_excluded = n - accepted;

    Dataset& ds = build.data;
    ds.features.resize(static_cast<Eigen::Index>(accepted), static_cast<Eigen::Index>(k + 1));
    ds.targets.resize(static_cast<Eigen::Index>(accepted), static_cast<Eigen::Index>(k));
    Eigen::Index at = 0;
    for (const auto& r : rows) {
        if (!r.converged) continue;
        for (std::size_t c = 0; c < k + 1; ++c)
            ds.features(at, static_cast<Eigen::Index>(c)) = r.features[c];
        for (std::size_t c = 0; c < k; ++c)
            ds.targets(at, static_cast<Eigen::Index>(c)) = r.targets[c];
        build.solver_outer_iterations.push_back(r.outer);
        ++at;
    }
    for (std::size_t c = 0; c < k; ++c)
        ds.feature_columns.push_back({"gain_" + std::to_string(c + 1), Transform::Log10, false, 0, 1});
    ds.feature_columns.push_back({"pmax_w", Transform::Log10, false, 0, 1});
    for (std::size_t c = 0; c < k; ++c)
        ds.target_columns.push_back({"p_over_pmax_" + std::to_string(c + 1), Transform::Identity, false, 0, 1});
    ds.provenance = Provenance::Model;
    ds.n_model_rows = accepted;
    ds.validate();
    return build;
}

double mean_ann_gee(const nn::MlpModel& model, const Case1Config& cfg,
                    const std::vector<netsim::UplinkScenario>& scenarios, double pmax_w) {
    double acc = 0.0;
    for (const auto& base : scenarios) {
        netsim::UplinkScenario s = base;
        s.pmax_w = pmax_w;
        Eigen::MatrixXd feats(1, static_cast<Eigen::Index>(s.n_users() + 1));
        for (std::size_t c = 0; c < s.n_users(); ++c)
            feats(0, static_cast<Eigen::Index>(c)) = s.channel_gains[c];
        feats(0, static_cast<Eigen::Index>(s.n_users())) = pmax_w;
        const Eigen::MatrixXd X = normalize_features(model.feature_columns, feats);
        Eigen::VectorXd pred = nn::forward(model, X.row(0).transpose());
        oracles::PowerAllocation alloc;
        alloc.p.resize(s.n_users());
        for (std::size_t c = 0; c < s.n_users(); ++c)
            alloc.p[c] = std::clamp(pred(static_cast<Eigen::Index>(c)), 0.0, 1.0) * pmax_w;
        acc += oracles::gee(s, alloc);
    }
    return acc / static_cast<double>(scenarios.size());
}

ProtocolAResult run_protocol_A(const Case1Config& cfg) {
    ProtocolAResult res;

    const std::uint64_t train_stream = derive_seed(cfg.master_seed, "case1/train");
    Case1Build build = build_case1_dataset(cfg, cfg.n_train, train_stream);
    res.train_rows = build.data.rows();
    res.train_excluded = build.n_unconverged_excluded;

    const Dataset norm = normalize(build.data);
    std::vector<int> layers;
    layers.push_back(static_cast<int>(cfg.n_users) + 1);
    for (int h : cfg.hidden_layers) layers.push_back(h);
    layers.push_back(static_cast<int>(cfg.n_users));
    res.model = nn::init(layers, nn::OutputActivation::ClampedUnit,
                         derive_seed(cfg.master_seed, "case1/init"));
    res.model.feature_columns = norm.feature_columns;
    res.model.target_columns = norm.target_columns;
    nn::TrainConfig tc = cfg.train;
    tc.rng_seed = derive_seed(cfg.master_seed, "case1/trainloop");
    res.report = nn::train(res.model, norm.features, norm.targets, tc);

    // Fresh drops, seed stream disjoint from training by construction.
    const std::uint64_t test_stream = derive_seed(cfg.master_seed, "case1/test");
    std::vector<netsim::UplinkScenario> test;
    test.reserve(cfg.n_test);
    for (std::size_t i = 0; i < cfg.n_test; ++i)
        test.push_back(sort_users_by_gain(netsim::sample_uplink_scenario(
            cfg.n_users, cfg.radius_m, 1.0, derive_seed(test_stream, i), cfg.uplink)));

    for (double pmax_dbm : cfg.sweep_points()) {
        const double pmax_w = dbm_to_watt(pmax_dbm);
        struct PointEval {
            double oracle = 0.0;
            double full = 0.0;
            bool converged = true;
        };
        const std::vector<PointEval> evals = par_map<PointEval>(
            test.size(), cfg.exec, [&](std::size_t i) {
                netsim::UplinkScenario s = test[i];
                s.pmax_w = pmax_w;
                PointEval pe;
                const auto sol = oracles::dinkelbach_max_gee(s, cfg.solver);
                pe.oracle = sol.gee_value;
                pe.converged = sol.converged;
                pe.full = oracles::gee(s, oracles::full_power(s));
                return pe;
            });
        GeeSweepPoint pt;
        pt.pmax_dbm = pmax_dbm;
        std::size_t used = 0;
        for (const auto& pe : evals) {
            if (!pe.converged) {
                ++res.test_excluded;
                continue;
            }
            pt.oracle_gee += pe.oracle;
            pt.fullpower_gee += pe.full;
            ++used;
        }
        if (used == 0) throw solver_error("no converged oracle solutions at pmax sweep point");
        pt.oracle_gee /= static_cast<double>(used);
        pt.fullpower_gee /= static_cast<double>(used);
        pt.ann_gee = mean_ann_gee(res.model, cfg, test, pmax_w);
        res.sweep.push_back(pt);
    }
    return res;
}

// ---------------------------------------------------------------------------

namespace {

ColumnList case2_feature_columns() {
    return {{"tx_power_w", Transform::Log10, false, 0, 1}};
}
ColumnList case3_feature_columns() {
    return {{"tx_power_w", Transform::Log10, false, 0, 1},
            {"static_power_w", Transform::Identity, false, 0, 1},
            {"idle_power_w", Transform::Identity, false, 0, 1}};
}
ColumnList density_target_columns() {
    return {{"lambda_star_per_m2", Transform::Log10, false, 0, 1}};
}

// Draw-label-accept loop that lands exactly n interior-optimum rows.
template <class DrawLabel>
void fill_rows(std::size_t n, std::uint64_t seed_stream, Exec exec, DrawLabel&& draw,
               std::vector<std::vector<double>>& feats, std::vector<double>& targets) {
    std::size_t next_index = 0;
    std::size_t rounds = 0;
    while (feats.size() < n) {
        if (++rounds > 64) throw solver_error("density labeling keeps hitting the bracket edge");
        const std::size_t want = n - feats.size();
        const std::size_t batch = want + want / 8 + 4;
        struct Labeled {
            std::vector<double> f;
            double t = 0.0;
            bool ok = false;
        };
        const std::vector<Labeled> out = par_map<Labeled>(batch, exec, [&](std::size_t i) {
            Labeled l;
            l.ok = draw(derive_seed(seed_stream, next_index + i), l.f, l.t);
            return l;
        });
        next_index += batch;
        for (const auto& l : out) {
            if (!l.ok || feats.size() >= n) continue;
            feats.push_back(l.f);
            targets.push_back(l.t);
        }
    }
}

Dataset rows_to_dataset(const std::vector<std::vector<double>>& feats,
                        const std::vector<double>& targets, ColumnList fcols, ColumnList tcols,
                        Provenance prov) {
    Dataset ds;
    const Eigen::Index n = static_cast<Eigen::Index>(feats.size());
    const Eigen::Index d = static_cast<Eigen::Index>(fcols.size());
    ds.features.resize(n, d);
    ds.targets.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d; ++c)
            ds.features(i, c) = feats[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        ds.targets(i, 0) = targets[static_cast<std::size_t>(i)];
    }
    ds.feature_columns = std::move(fcols);
    ds.target_columns = std::move(tcols);
    ds.provenance = prov;
    if (prov == Provenance::Model)
        ds.n_model_rows = static_cast<std::size_t>(n);
    else
        ds.n_empirical_rows = static_cast<std::size_t>(n);
    ds.validate();
    return ds;
}

double draw_tx_power(const DensityCaseConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return dbm_to_watt(cfg.p_dbm_lo + (cfg.p_dbm_hi - cfg.p_dbm_lo) * unif(rng));
}

}  // namespace

Dataset build_case2_model_dataset(const DensityCaseConfig& cfg, std::size_t n,
                                  std::uint64_t seed_stream) {
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    feats.reserve(n);
    targets.reserve(n);
    fill_rows(n, seed_stream, cfg.exec,
              [&](std::uint64_t seed, std::vector<double>& f, double& t) {
                  std::mt19937_64 rng(seed);
                  netsim::CellularParams params = cfg.cellular;
                  params.tx_power_w = draw_tx_power(cfg, rng);
                  const auto sol = oracles::optimal_density_analytic(params, cfg.bracket, cfg.search);
                  if (sol.at_bracket_edge) return false;
                  f = {params.tx_power_w};
                  t = sol.lambda_star;
                  return true;
              },
              feats, targets);
    return rows_to_dataset(feats, targets, case2_feature_columns(), density_target_columns(),
                           Provenance::Model);
}

Dataset build_case2_empirical_dataset(const DensityCaseConfig& cfg, std::size_t x,
                                      std::uint64_t seed_stream) {
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    feats.reserve(x);
    targets.reserve(x);
    oracles::GridMcOptions mc = cfg.grid_mc;
    mc.mc.exec = cfg.exec;
    // Labels are expensive here; parallelism lives inside the Monte-Carlo.
    fill_rows(x, seed_stream, Exec::Serial,
              [&](std::uint64_t seed, std::vector<double>& f, double& t) {
                  std::mt19937_64 rng(derive_seed(seed, 1));
                  netsim::CellularParams params = cfg.cellular;
                  params.tx_power_w = draw_tx_power(cfg, rng);
                  const auto res =
                      oracles::optimal_density_grid_mc(params, cfg.bracket, derive_seed(seed, 2), mc);
                  if (res.solution.at_bracket_edge) return false;
                  f = {params.tx_power_w};
                  t = res.solution.lambda_star;
                  return true;
              },
              feats, targets);
    return rows_to_dataset(feats, targets, case2_feature_columns(), density_target_columns(),
                           Provenance::Empirical);
}

Dataset build_case3_dataset(const DensityCaseConfig& cfg, oracles::ConsumptionLaw law,
                            std::size_t n, std::uint64_t seed_stream) {
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    feats.reserve(n);
    targets.reserve(n);
    oracles::ConsumptionModelConfig draw_cfg = cfg.consumption;
    draw_cfg.bracket = cfg.bracket;
    draw_cfg.search = cfg.search;
    fill_rows(n, seed_stream, cfg.exec,
              [&](std::uint64_t seed, std::vector<double>& f, double& t) {
                  const auto s = oracles::consumption_model_oracle(cfg.cellular, law, seed, draw_cfg);
                  if (s.at_bracket_edge) return false;
                  f = {s.tx_power_w, s.static_power_w, s.idle_power_w};
                  t = s.lambda_star;
                  return true;
              },
              feats, targets);
    return rows_to_dataset(feats, targets, case3_feature_columns(), density_target_columns(),
                           law == oracles::ConsumptionLaw::Uniform ? Provenance::Model
                                                                   : Provenance::Empirical);
}

double test_error(const nn::MlpModel& model, const Dataset& raw_test) {
    raw_test.validate();
    if (raw_test.normalized) throw std::invalid_argument("test set must be raw");
    const Eigen::MatrixXd X = normalize_features(model.feature_columns, raw_test.features);
    Eigen::MatrixXd preds = forward_batch(model, X);
    preds = denormalize_targets(model.target_columns, preds);
    return nn::relative_mse(preds, raw_test.targets);
}

const char* arm_name(Arm a) {
    switch (a) {
        case Arm::Transfer: return "transfer";
        case Arm::Empirical: return "empirical";
        case Arm::ModelOnly: return "model";
        case Arm::Mixed: return "mixed";
    }
    return "?";
}

namespace {

std::vector<int> full_layers(const DensityCaseConfig& cfg, const std::vector<int>& hidden) {
    std::vector<int> layers;
    layers.push_back(cfg.which == DensityCase::NonPoissonDeployment ? 1 : 3);
    for (int h : hidden) layers.push_back(h);
    layers.push_back(1);
    return layers;
}

ArmOutcome train_fresh(const DensityCaseConfig& cfg, const std::vector<int>& hidden,
                       const Dataset& raw, const Dataset& test, const nn::TrainConfig& base_cfg,
                       std::uint64_t job_seed, const std::string& tag, Arm arm) {
    ArmOutcome out;
    out.arm = arm;
    const Dataset norm = normalize(raw);
    out.model = nn::init(full_layers(cfg, hidden), nn::OutputActivation::Linear,
                         derive_seed(job_seed, "init/" + tag));
    out.model.feature_columns = norm.feature_columns;
    out.model.target_columns = norm.target_columns;
    nn::TrainConfig tc = base_cfg;
    tc.rng_seed = derive_seed(job_seed, "train/" + tag);
    tc.exec = Exec::Serial;  // jobs themselves are the parallel grain
    out.report = nn::train(out.model, norm.features, norm.targets, tc);
    out.test_error = test_error(out.model, test);
    return out;
}

}  // namespace

DensityJobResult run_density_job(const DensityCaseConfig& cfg, const Dataset& model_pool,
                                 const Dataset& empirical_pool, const Dataset& test_set,
                                 std::size_t x, std::size_t seed_index) {
    if (x > cfg.n_total) throw std::invalid_argument("x exceeds the total sample budget");
    if (x > empirical_pool.rows()) throw std::invalid_argument("empirical pool smaller than x");
    if (model_pool.rows() < cfg.n_total - x)
        throw std::invalid_argument("model pool smaller than n_total - x");
    if (x < 2) throw std::invalid_argument("x must be at least 2 (validation holdout)");

    const std::string job_tag = "job/x" + std::to_string(x) + "/seed" + std::to_string(seed_index);
    const std::uint64_t job_seed = derive_seed(cfg.master_seed, job_tag);

    const Dataset model_subset = model_pool.head(cfg.n_total - x);
    const Dataset empirical_x = empirical_pool.head(x);

    DensityJobResult job;
    job.x = x;
    job.seed_index = seed_index;

    // Transfer arm: pre-train on the model set, fine-tune on the x empirical
    // samples with the pre-training normalization statistics.
    ArmOutcome transfer;
    transfer.arm = Arm::Transfer;
    {
        const Dataset norm_model = normalize(model_subset);
        transfer.model = nn::init(full_layers(cfg, cfg.hidden_layers), nn::OutputActivation::Linear,
                                  derive_seed(job_seed, "init/pretrain"));
        transfer.model.feature_columns = norm_model.feature_columns;
        transfer.model.target_columns = norm_model.target_columns;
        nn::TrainConfig pre = cfg.pretrain;
        pre.rng_seed = derive_seed(job_seed, "train/pretrain");
        pre.exec = Exec::Serial;
        transfer.pretrain_report = nn::train(transfer.model, norm_model.features, norm_model.targets, pre);

        ArmOutcome model_only;
        model_only.arm = Arm::ModelOnly;
        model_only.model = transfer.model;  // snapshot before fine-tuning
        model_only.pretrain_report = transfer.pretrain_report;
        model_only.report = transfer.pretrain_report;
        model_only.test_error = test_error(model_only.model, test_set);

        const Dataset ft = normalize_with(empirical_x, transfer.model.feature_columns,
                                          transfer.model.target_columns);
        nn::TrainConfig ftc = cfg.finetune;
        ftc.rng_seed = derive_seed(job_seed, "train/finetune");
        ftc.exec = Exec::Serial;
        transfer.report = nn::fine_tune(transfer.model, ft.features, ft.targets, ftc);
        transfer.test_error = test_error(transfer.model, test_set);

        job.arms.push_back(std::move(transfer));
        ArmOutcome empirical = train_fresh(cfg, cfg.hidden_layers, empirical_x, test_set,
                                           cfg.finetune, job_seed, "scratch", Arm::Empirical);
        job.arms.push_back(std::move(empirical));
        job.arms.push_back(std::move(model_only));
    }
    {
        const Dataset mixed_raw = mix(model_subset, empirical_x);
        ArmOutcome mixed = train_fresh(cfg, cfg.hidden_layers, mixed_raw, test_set, cfg.mixed,
                                       job_seed, "mixed", Arm::Mixed);
        job.arms.push_back(std::move(mixed));
    }
    return job;
}

ProtocolBResult run_protocol_B(const DensityCaseConfig& cfg) {
    ProtocolBResult res;
    const bool case2 = cfg.which == DensityCase::NonPoissonDeployment;
    const std::string prefix = case2 ? "case2" : "case3";
    std::size_t max_x = 2;
    for (std::size_t x : cfg.x_values) max_x = std::max(max_x, x);

    if (case2) {
        res.model_pool = build_case2_model_dataset(cfg, cfg.n_total,
                                                   derive_seed(cfg.master_seed, prefix + "/model"));
        res.empirical_pool = build_case2_empirical_dataset(
            cfg, max_x, derive_seed(cfg.master_seed, prefix + "/empirical"));
        res.test_set = build_case2_empirical_dataset(cfg, cfg.n_test,
                                                     derive_seed(cfg.master_seed, prefix + "/test"));
    } else {
        res.model_pool = build_case3_dataset(cfg, oracles::ConsumptionLaw::Uniform, cfg.n_total,
                                             derive_seed(cfg.master_seed, prefix + "/model"));
        res.empirical_pool = build_case3_dataset(cfg, oracles::ConsumptionLaw::Gaussian, max_x,
                                                 derive_seed(cfg.master_seed, prefix + "/empirical"));
        res.test_set = build_case3_dataset(cfg, oracles::ConsumptionLaw::Gaussian, cfg.n_test,
                                           derive_seed(cfg.master_seed, prefix + "/test"));
    }

    // (x, seed) jobs are independent; parallelize across them and keep each
    // job single-writer.
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t x : cfg.x_values)
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) slots.emplace_back(x, s);
    res.jobs = par_map<DensityJobResult>(slots.size(), cfg.exec, [&](std::size_t i) {
        return run_density_job(cfg, res.model_pool, res.empirical_pool, res.test_set,
                               slots[i].first, slots[i].second);
    });
    return res;
}

std::vector<SweepCandidateResult> architecture_sweep(const DensityCaseConfig& cfg,
                                                     const std::vector<std::vector<int>>& candidates,
                                                     std::size_t x) {
    if (candidates.empty()) throw config_error("architecture sweep needs at least one candidate");
    DensityCaseConfig base = cfg;
    base.x_values = {x};

    const bool case2 = cfg.which == DensityCase::NonPoissonDeployment;
    const std::string prefix = case2 ? "case2" : "case3";
    Dataset model_pool, empirical_pool, test_set;
    if (case2) {
        model_pool = build_case2_model_dataset(cfg, cfg.n_total,
                                               derive_seed(cfg.master_seed, prefix + "/model"));
        empirical_pool = build_case2_empirical_dataset(
            cfg, x, derive_seed(cfg.master_seed, prefix + "/empirical"));
        test_set = build_case2_empirical_dataset(cfg, cfg.n_test,
                                                 derive_seed(cfg.master_seed, prefix + "/test"));
    } else {
        model_pool = build_case3_dataset(cfg, oracles::ConsumptionLaw::Uniform, cfg.n_total,
                                         derive_seed(cfg.master_seed, prefix + "/model"));
        empirical_pool = build_case3_dataset(cfg, oracles::ConsumptionLaw::Gaussian, x,
                                             derive_seed(cfg.master_seed, prefix + "/empirical"));
        test_set = build_case3_dataset(cfg, oracles::ConsumptionLaw::Gaussian, cfg.n_test,
                                       derive_seed(cfg.master_seed, prefix + "/test"));
    }

    std::vector<SweepCandidateResult> results;
    for (const auto& hidden : candidates) {
        DensityCaseConfig c = base;
        c.hidden_layers = hidden;
        SweepCandidateResult r;
        r.hidden_layers = hidden;
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
            DensityJobResult job = run_density_job(c, model_pool, empirical_pool, test_set, x, s);
            for (auto& arm : job.arms)
                if (arm.arm == Arm::Transfer) {
                    r.final_val_errors.push_back(arm.report.final_val());
                    r.outcomes.push_back(std::move(arm));
                }
        }
        results.push_back(std::move(r));
    }
    return results;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace eeopt::pipeline
