#include "eeopt/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eeopt/common.hpp"
#include "eeopt/io.hpp"

namespace eeopt::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void log_line(const std::string& msg) { std::fprintf(stderr, "[eeopt] %s\n", msg.c_str()); }

void apply_threads(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
    (void)cfg;
#endif
}

struct OutputTracker {
    fs::path out_dir;
    std::vector<std::pair<std::string, std::uint64_t>> files;

    void write(const fs::path& rel, const std::string& content) {
        const fs::path full = out_dir / rel;
        io::write_text_atomic(full, content);
        files.emplace_back(rel.generic_string(), fnv1a(content.data(), content.size()));
    }

    void finish(const RunConfig& cfg, const std::string& command, json metadata) {
        std::sort(files.begin(), files.end());
        json manifest;
        manifest["command"] = command;
        manifest["master_seed"] = cfg.master_seed;
        manifest["preset"] = cfg.preset;
        manifest["config"] = cfg.raw;
        manifest["metadata"] = std::move(metadata);
        json outputs = json::array();
        char hex[20];
        for (const auto& [name, hash] : files) {
            std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
            outputs.push_back({{"file", name}, {"fnv64", hex}});
        }
        manifest["outputs"] = std::move(outputs);
        io::write_text_atomic(out_dir / "manifest.json", manifest.dump(1, '\t') + "\n");
    }
};

std::string dataset_with_sidecar(OutputTracker& out, const pipeline::Dataset& ds,
                                 const std::string& name) {
    // write_dataset_csv is atomic on its own; route through the tracker so the
    // manifest records the hashes.
    std::vector<std::string> header;
    for (const auto& c : ds.feature_columns) header.push_back(c.name);
    for (const auto& c : ds.target_columns) header.push_back(c.name);
    io::CsvBuilder csv(header);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) csv.add(ds.features(i, c));
        for (Eigen::Index c = 0; c < ds.targets.cols(); ++c) csv.add(ds.targets(i, c));
        csv.end_row();
    }
    out.write(name, csv.str());

    std::string doc = "Columns of " + name + "\n";
    for (const auto& c : ds.feature_columns)
        doc += c.name + ": feature, transform=" + transform_name(c.transform) + "\n";
    for (const auto& c : ds.target_columns)
        doc += c.name + ": target, transform=" + transform_name(c.transform) + "\n";
    doc += "model rows: " + std::to_string(ds.n_model_rows) +
           ", empirical rows: " + std::to_string(ds.n_empirical_rows) + "\n";
    out.write(name + ".columns.txt", doc);
    return name;
}

std::string curves_csv(const nn::TrainReport& report, const char* train_col, const char* val_col) {
    io::CsvBuilder csv({"epoch", train_col, val_col});
    for (std::size_t e = 0; e < report.train_curve.size(); ++e) {
        csv.add(static_cast<std::int64_t>(e + 1));
        csv.add(report.train_curve[e]);
        csv.add(report.val_curve[e]);
        csv.end_row();
    }
    return csv.str();
}

std::string arch_tag(const std::vector<int>& layers) {
    std::string s;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(layers[i]);
    }
    return s;
}

const pipeline::DensityCaseConfig& density_config(const RunConfig& cfg, const std::string& name) {
    if (name == "case2") return cfg.case2;
    if (name == "case3") return cfg.case3;
    throw config_error("density protocol requires case2 or case3, got " + name);
}

}  // namespace

void cmd_gen(const RunConfig& cfg) {
    apply_threads(cfg);
    OutputTracker out{cfg.out_dir, {}};
    json meta;
    meta["case"] = cfg.case_name;

    if (cfg.case_name == "case1") {
        log_line("event=gen case=case1 n=" + std::to_string(cfg.case1.n_train));
        const auto build = pipeline::build_case1_dataset(
            cfg.case1, cfg.case1.n_train, derive_seed(cfg.master_seed, "case1/train"));
        // Oracle-run CSV: inputs, targets, solver status and iteration counts.
        std::vector<std::string> header;
        for (const auto& c : build.data.feature_columns) header.push_back(c.name);
        for (const auto& c : build.data.target_columns) header.push_back(c.name);
        header.push_back("converged");
        header.push_back("outer_iterations");
        io::CsvBuilder csv(header);
        for (Eigen::Index i = 0; i < build.data.features.rows(); ++i) {
            for (Eigen::Index c = 0; c < build.data.features.cols(); ++c)
                csv.add(build.data.features(i, c));
            for (Eigen::Index c = 0; c < build.data.targets.cols(); ++c)
                csv.add(build.data.targets(i, c));
            csv.add(std::int64_t{1});
            csv.add(static_cast<std::int64_t>(build.solver_outer_iterations[static_cast<std::size_t>(i)]));
            csv.end_row();
        }
        out.write("case1_train.csv", csv.str());
        meta["attempted"] = build.n_attempted;
        meta["unconverged_excluded"] = build.n_unconverged_excluded;
        meta["seed_stream"] = "case1/train";
    } else if (cfg.case_name == "case2") {
        const auto& c = cfg.case2;
        std::size_t max_x = 2;
        for (std::size_t x : c.x_values) max_x = std::max(max_x, x);
        log_line("event=gen case=case2 model_rows=" + std::to_string(c.n_total));
        dataset_with_sidecar(out, pipeline::build_case2_model_dataset(
                                      c, c.n_total, derive_seed(cfg.master_seed, "case2/model")),
                             "case2_model.csv");
        log_line("event=gen case=case2 empirical_rows=" + std::to_string(max_x));
        dataset_with_sidecar(out, pipeline::build_case2_empirical_dataset(
                                      c, max_x, derive_seed(cfg.master_seed, "case2/empirical")),
                             "case2_empirical.csv");
        log_line("event=gen case=case2 test_rows=" + std::to_string(c.n_test));
        dataset_with_sidecar(out, pipeline::build_case2_empirical_dataset(
                                      c, c.n_test, derive_seed(cfg.master_seed, "case2/test")),
                             "case2_test.csv");
        meta["seed_streams"] = {"case2/model", "case2/empirical", "case2/test"};
    } else {
        const auto& c = cfg.case3;
        std::size_t max_x = 2;
        for (std::size_t x : c.x_values) max_x = std::max(max_x, x);
        log_line("event=gen case=case3");
        dataset_with_sidecar(out, pipeline::build_case3_dataset(
                                      c, oracles::ConsumptionLaw::Uniform, c.n_total,
                                      derive_seed(cfg.master_seed, "case3/model")),
                             "case3_model.csv");
        dataset_with_sidecar(out, pipeline::build_case3_dataset(
                                      c, oracles::ConsumptionLaw::Gaussian, max_x,
                                      derive_seed(cfg.master_seed, "case3/empirical")),
                             "case3_empirical.csv");
        dataset_with_sidecar(out, pipeline::build_case3_dataset(
                                      c, oracles::ConsumptionLaw::Gaussian, c.n_test,
                                      derive_seed(cfg.master_seed, "case3/test")),
                             "case3_test.csv");
        meta["seed_streams"] = {"case3/model", "case3/empirical", "case3/test"};
    }
    out.finish(cfg, "gen", std::move(meta));
    log_line("event=done command=gen");
}

void cmd_train(const RunConfig& cfg) {
    apply_threads(cfg);
    if (cfg.case_name != "case1")
        throw config_error("train runs protocol A (case1); use transfer for case2/case3");
    OutputTracker out{cfg.out_dir, {}};
    log_line("event=train case=case1");
    const auto res = pipeline::run_protocol_A(cfg.case1);

    nn::save(res.model, cfg.out_dir / "model_case1.json");
    out.files.emplace_back("model_case1.json", io::file_checksum(cfg.out_dir / "model_case1.json"));
    out.write("curves_case1.csv", curves_csv(res.report, "train_loss", "val_loss"));

    io::CsvBuilder sweep({"pmax_dbm", "ann_gee", "oracle_gee", "fullpower_gee"});
    for (const auto& pt : res.sweep) {
        sweep.add(pt.pmax_dbm).add(pt.ann_gee).add(pt.oracle_gee).add(pt.fullpower_gee);
        sweep.end_row();
        io::CsvBuilder one({"pmax_dbm", "ann_gee", "oracle_gee", "fullpower_gee"});
        one.add(pt.pmax_dbm).add(pt.ann_gee).add(pt.oracle_gee).add(pt.fullpower_gee);
        one.end_row();
        char name[64];
        std::snprintf(name, sizeof(name), "gee_%g.csv", pt.pmax_dbm);
        out.write(name, one.str());
    }
    out.write("gee_sweep.csv", sweep.str());

    json meta;
    meta["train_rows"] = res.train_rows;
    meta["train_excluded"] = res.train_excluded;
    meta["test_excluded"] = res.test_excluded;
    meta["final_train_loss"] = res.report.final_train();
    meta["final_val_loss"] = res.report.final_val();
    meta["param_checksum"] = res.report.param_checksum;
    out.finish(cfg, "train", std::move(meta));
    log_line("event=done command=train");
}

void cmd_transfer(const RunConfig& cfg) {
    apply_threads(cfg);
    const auto& dc = density_config(cfg, cfg.case_name);
    OutputTracker out{cfg.out_dir, {}};
    log_line("event=transfer case=" + cfg.case_name + " seeds=" + std::to_string(dc.n_seeds));
    const auto res = pipeline::run_protocol_B(dc);

    dataset_with_sidecar(out, res.model_pool, cfg.case_name + "_model.csv");
    dataset_with_sidecar(out, res.empirical_pool, cfg.case_name + "_empirical.csv");
    dataset_with_sidecar(out, res.test_set, cfg.case_name + "_test.csv");

    struct Row {
        std::size_t x, seed;
        std::string arm;
        double err;
    };
    std::vector<Row> rows;
    for (const auto& job : res.jobs) {
        const std::string suffix =
            "_" + std::to_string(job.x) + "_" + std::to_string(job.seed_index) + ".csv";
        for (const auto& arm : job.arms) {
            rows.push_back({job.x, job.seed_index, pipeline::arm_name(arm.arm), arm.test_error});
            const std::string base = "curves_" + cfg.case_name + "_" + pipeline::arm_name(arm.arm);
            if (arm.arm == pipeline::Arm::ModelOnly) {
                out.write(base + suffix, curves_csv(arm.pretrain_report, "train_rel_mse", "val_rel_mse"));
                continue;
            }
            out.write(base + suffix, curves_csv(arm.report, "train_rel_mse", "val_rel_mse"));
            if (arm.arm == pipeline::Arm::Transfer) {
                // Cumulative-epoch reading: pre-training epochs then fine-tune epochs.
                nn::TrainReport joint;
                joint.train_curve = arm.pretrain_report.train_curve;
                joint.val_curve = arm.pretrain_report.val_curve;
                joint.train_curve.insert(joint.train_curve.end(), arm.report.train_curve.begin(),
                                         arm.report.train_curve.end());
                joint.val_curve.insert(joint.val_curve.end(), arm.report.val_curve.begin(),
                                       arm.report.val_curve.end());
                out.write("curves_" + cfg.case_name + "_transfer_cumulative" + suffix,
                          curves_csv(joint, "train_rel_mse", "val_rel_mse"));
                const fs::path model_rel = fs::path("models") / ("model_" + cfg.case_name +
                                                                 "_transfer_x" + std::to_string(job.x) +
                                                                 "_s" + std::to_string(job.seed_index) +
                                                                 ".json");
                nn::save(arm.model, cfg.out_dir / model_rel);
                out.files.emplace_back(model_rel.generic_string(),
                                       io::file_checksum(cfg.out_dir / model_rel));
            }
        }
        log_line("event=job_done x=" + std::to_string(job.x) +
                 " seed=" + std::to_string(job.seed_index));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.x, a.arm, a.seed) < std::tie(b.x, b.arm, b.seed);
    });
    io::CsvBuilder testerr({"x", "arm", "seed", "test_error"});
    for (const auto& r : rows) {
        testerr.add(static_cast<std::int64_t>(r.x));
        testerr.add(r.arm);
        testerr.add(static_cast<std::int64_t>(r.seed));
        testerr.add(r.err);
        testerr.end_row();
    }
    out.write("testerr_" + cfg.case_name + ".csv", testerr.str());

    json meta;
    meta["n_jobs"] = res.jobs.size();
    meta["x_values"] = dc.x_values;
    meta["n_seeds"] = dc.n_seeds;
    meta["seed_streams"] = {cfg.case_name + "/model", cfg.case_name + "/empirical",
                            cfg.case_name + "/test"};
    out.finish(cfg, "transfer", std::move(meta));
    log_line("event=done command=transfer");
}

void cmd_eval(const RunConfig& cfg, const fs::path& model_path) {
    apply_threads(cfg);
    OutputTracker out{cfg.out_dir, {}};
    const nn::MlpModel model = nn::load(model_path);
    json meta;
    meta["model_file"] = model_path.string();

    if (cfg.case_name == "case1") {
        if (model.output_dim() != static_cast<int>(cfg.case1.n_users))
            throw config_error("model output dimension does not match configured n_users");
        log_line("event=eval case=case1");
        const std::uint64_t test_stream = derive_seed(cfg.master_seed, "case1/test");
        std::vector<netsim::UplinkScenario> test;
        test.reserve(cfg.case1.n_test);
        for (std::size_t i = 0; i < cfg.case1.n_test; ++i)
            test.push_back(pipeline::sort_users_by_gain(
                netsim::sample_uplink_scenario(cfg.case1.n_users, cfg.case1.radius_m, 1.0,
                                               derive_seed(test_stream, i), cfg.case1.uplink)));
        io::CsvBuilder sweep({"pmax_dbm", "ann_gee", "oracle_gee", "fullpower_gee"});
        for (double pmax_dbm : cfg.case1.sweep_points()) {
            const double pmax_w = dbm_to_watt(pmax_dbm);
            double oracle = 0.0, full = 0.0;
            std::size_t used = 0;
            const auto evals = par_map<std::pair<double, double>>(
                test.size(), cfg.exec(), [&](std::size_t i) {
                    netsim::UplinkScenario s = test[i];
                    s.pmax_w = pmax_w;
                    const auto sol = oracles::dinkelbach_max_gee(s, cfg.case1.solver);
                    return std::make_pair(sol.converged ? sol.gee_value : -1.0,
                                          oracles::gee(s, oracles::full_power(s)));
                });
            for (const auto& [o, f] : evals) {
                if (o < 0.0) continue;
                oracle += o;
                full += f;
                ++used;
            }
            if (used == 0) throw solver_error("no converged oracle solutions during eval");
            sweep.add(pmax_dbm)
                .add(pipeline::mean_ann_gee(model, cfg.case1, test, pmax_w))
                .add(oracle / static_cast<double>(used))
                .add(full / static_cast<double>(used));
            sweep.end_row();
        }
        out.write("eval_gee_sweep.csv", sweep.str());
    } else {
        const auto& dc = density_config(cfg, cfg.case_name);
        log_line("event=eval case=" + cfg.case_name);
        pipeline::Dataset test;
        if (cfg.case_name == "case2")
            test = pipeline::build_case2_empirical_dataset(
                dc, dc.n_test, derive_seed(cfg.master_seed, "case2/test"));
        else
            test = pipeline::build_case3_dataset(dc, oracles::ConsumptionLaw::Gaussian, dc.n_test,
                                                 derive_seed(cfg.master_seed, "case3/test"));
        const double err = pipeline::test_error(model, test);
        io::CsvBuilder csv({"case", "test_rows", "test_error"});
        csv.add(cfg.case_name);
        csv.add(static_cast<std::int64_t>(test.rows()));
        csv.add(err);
        csv.end_row();
        out.write("eval_metrics.csv", csv.str());
        meta["test_error"] = err;
    }
    out.finish(cfg, "eval", std::move(meta));
    log_line("event=done command=eval");
}

void cmd_sweep(const RunConfig& cfg) {
    apply_threads(cfg);
    const auto& dc = density_config(cfg, cfg.sweep.case_name);
    if (cfg.sweep.candidates.empty()) throw config_error("sweep.candidates cannot be empty");

    std::vector<std::vector<int>> candidates;
    std::set<std::string> seen;
    for (const auto& cand : cfg.sweep.candidates) {
        if (!seen.insert(arch_tag(cand)).second) {
            log_line("warning=duplicate_candidate arch=" + arch_tag(cand));
            continue;
        }
        candidates.push_back(cand);
    }

    OutputTracker out{cfg.out_dir, {}};
    log_line("event=sweep case=" + cfg.sweep.case_name + " x=" + std::to_string(cfg.sweep.x));
    const auto results = pipeline::architecture_sweep(dc, candidates, cfg.sweep.x);

    io::CsvBuilder summary({"architecture", "seed", "final_train_rel_mse", "final_val_rel_mse",
                            "test_error"});
    for (const auto& r : results) {
        const std::string tag = arch_tag(r.hidden_layers);
        for (std::size_t s = 0; s < r.outcomes.size(); ++s) {
            const auto& o = r.outcomes[s];
            out.write("sweep_curves_" + cfg.sweep.case_name + "_" + tag + "_" + std::to_string(s) +
                          ".csv",
                      curves_csv(o.report, "train_rel_mse", "val_rel_mse"));
            summary.add(tag);
            summary.add(static_cast<std::int64_t>(s));
            summary.add(o.report.final_train());
            summary.add(o.report.final_val());
            summary.add(o.test_error);
            summary.end_row();
        }
    }
    out.write("sweep_summary_" + cfg.sweep.case_name + ".csv", summary.str());
    json meta;
    meta["x"] = cfg.sweep.x;
    meta["n_candidates"] = candidates.size();
    out.finish(cfg, "sweep", std::move(meta));
    log_line("event=done command=sweep");
}

}  // namespace eeopt::cli
