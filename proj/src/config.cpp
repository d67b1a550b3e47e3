#include "eeopt/config.hpp"

#include <fstream>

#include "eeopt/common.hpp"

namespace eeopt::cli {

using json = nlohmann::ordered_json;

namespace {

json train_json(int epochs, const char* loss) {
    return {{"epochs", epochs},
            {"batch_size", 64},
            {"learning_rate", 1e-3},
            {"adam_beta1", 0.9},
            {"adam_beta2", 0.999},
            {"adam_epsilon", 1e-8},
            {"validation_fraction", 0.2},
            {"shuffle_each_epoch", true},
            {"loss", loss}};
}

json density_case_json(bool case3) {
    json j{{"n_total", 6000},
           {"x_values", {60, 120, 300, 420, 600}},
           {"n_test", 1000},
           {"tx_power_dbm_range", {30.0, 46.0}},
           {"hidden_layers", case3 ? json{8, 8, 8, 8, 8} : json{8, 8, 2}},
           {"n_seeds", 11},
           {"pretrain", train_json(120, "relative_mse")},
           {"finetune", train_json(50, "relative_mse")},
           {"mixed", train_json(120, "relative_mse")}};
    if (!case3) {
        j["grid_mc"] = {{"n_realizations", 500},
                        {"lambda_grid_points", 40},
                        {"target_active_bs", 100.0}};
    } else {
        j["uniform_law"] = {{"pc_w", {5.0, 15.0}}, {"pidle_w", {2.5, 7.5}}};
        j["gaussian_law"] = {{"pc_mean_w", 11.0},
                             {"pc_std_w", 1.0},
                             {"pidle_mean_w", 5.5},
                             {"pidle_std_w", 0.5}};
    }
    return j;
}

}  // namespace

json default_config_json(const std::string& preset) {
    if (preset != "desk" && preset != "paper")
        throw config_error("unknown preset: " + preset + " (expected desk or paper)");
    json j;
    j["preset"] = preset;
    j["master_seed"] = 1;
    j["out_dir"] = "out";
    j["threads"] = 0;
    j["parallel"] = true;
    j["case"] = "case2";
    j["case1"] = {{"n_users", 5},
                  {"radius_m", 500.0},
                  {"n_train", 2000},
                  {"n_test", 500},
                  {"pmax_dbm_range", {-20.0, 0.0}},
                  {"pmax_dbm_sweep", json::array()},
                  {"noise_dbm", -114.4},
                  {"circuit_power_w", 1.0},
                  {"power_amplifier_efficiency", 0.35},
                  {"bandwidth_hz", 180e3},
                  {"path_loss",
                   {{"intercept_db", 128.1}, {"slope_db_per_decade", 37.6}, {"min_distance_m", 10.0}}},
                  {"solver",
                   {{"tol", 1e-9},
                    {"max_outer", 60},
                    {"random_starts", 2},
                    {"power_floor_ratio", 1e-8}}},
                  {"hidden_layers", {32, 24, 16}},
                  {"train", train_json(300, "mse")}};
    j["cellular"] = {{"path_loss_exponent", 4.0},
                     {"sinr_threshold", 1.0},
                     {"bandwidth_hz", 180e3},
                     {"noise_dbm", -104.0},
                     {"power_amplifier_efficiency", 0.35},
                     {"user_density_per_km2", 100.0},
                     {"static_power_w", 11.0},
                     {"idle_power_w", 5.5},
                     {"density_bracket_per_km2", {0.1, 100.0}},
                     {"search", {{"rel_tol", 1e-6}, {"scan_points", 33}}}};
    j["case2"] = density_case_json(false);
    j["case3"] = density_case_json(true);
    j["sweep"] = {{"case", "case2"},
                  {"x", 420},
                  {"candidates", {{8, 8, 2}, {4, 4, 2}, {64, 32, 16, 8, 4, 2}}}};

    if (preset == "paper") {
        j["case1"]["n_users"] = 10;
        j["case1"]["n_train"] = 10000;
        j["case1"]["n_test"] = 10000;
        j["case1"]["hidden_layers"] = {18, 18, 16, 16, 14, 14, 12, 12, 10};
        for (const char* c : {"case2", "case3"}) {
            j[c]["n_total"] = 30000;
            j[c]["x_values"] = {300, 600, 1500, 2100, 3000};
        }
        j["sweep"]["x"] = 2100;
    }
    return j;
}

namespace {

void check_keys(const json& user, const json& schema, const std::string& path) {
    if (!user.is_object()) return;
    if (!schema.is_object())
        throw config_error("config key '" + path + "' does not take a nested object");
    for (const auto& [key, value] : user.items()) {
        if (!schema.contains(key))
            throw config_error("unknown config key: " + (path.empty() ? key : path + "." + key));
        if (value.is_object()) check_keys(value, schema.at(key), path.empty() ? key : path + "." + key);
    }
}

void deep_merge(json& base, const json& overlay) {
    for (const auto& [key, value] : overlay.items()) {
        if (value.is_object() && base.contains(key) && base.at(key).is_object())
            deep_merge(base[key], value);
        else
            base[key] = value;
    }
}

void apply_set(json& doc, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw config_error("--set expects key=value, got: " + kv);
    const std::string path = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);

    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= path.size(); ++i)
        if (i == path.size() || path[i] == '.') {
            if (i == start) throw config_error("empty path segment in --set " + kv);
            parts.push_back(path.substr(start, i - start));
            start = i + 1;
        }

    json* node = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
            throw config_error("unknown config key in --set: " + path);
        node = &(*node)[parts[i]];
    }
    if (!node->contains(parts.back())) throw config_error("unknown config key in --set: " + path);
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // bare strings allowed
    }
    (*node)[parts.back()] = parsed;
}

nn::Loss parse_loss(const std::string& s) {
    if (s == "relative_mse") return nn::Loss::RelativeMse;
    if (s == "mse") return nn::Loss::Mse;
    throw config_error("unknown loss: " + s + " (expected relative_mse or mse)");
}

nn::TrainConfig parse_train(const json& j, Exec exec) {
    nn::TrainConfig t;
    t.epochs = j.at("epochs").get<int>();
    t.batch_size = j.at("batch_size").get<int>();
    t.learning_rate = j.at("learning_rate").get<double>();
    t.adam_beta1 = j.at("adam_beta1").get<double>();
    t.adam_beta2 = j.at("adam_beta2").get<double>();
    t.adam_epsilon = j.at("adam_epsilon").get<double>();
    t.validation_fraction = j.at("validation_fraction").get<double>();
    t.shuffle_each_epoch = j.at("shuffle_each_epoch").get<bool>();
    t.loss = parse_loss(j.at("loss").get<std::string>());
    t.exec = exec;
    t.validate();
    return t;
}

netsim::CellularParams parse_cellular(const json& j) {
    netsim::CellularParams p;
    p.path_loss_exponent = j.at("path_loss_exponent").get<double>();
    p.sinr_threshold = j.at("sinr_threshold").get<double>();
    p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    p.noise_power_w = dbm_to_watt(j.at("noise_dbm").get<double>());
    const double eta = j.at("power_amplifier_efficiency").get<double>();
    if (!(eta > 0.0) || eta > 1.0) throw config_error("amplifier efficiency must lie in (0, 1]");
    p.amplifier_inefficiency = 1.0 / eta;
    p.user_density = j.at("user_density_per_km2").get<double>() * 1e-6;
    p.static_power_w = j.at("static_power_w").get<double>();
    p.idle_power_w = j.at("idle_power_w").get<double>();
    p.validate();
    return p;
}

std::vector<int> parse_layers(const json& j) {
    auto layers = j.get<std::vector<int>>();
    if (layers.empty()) throw config_error("hidden layer list cannot be empty");
    for (int v : layers)
        if (v <= 0) throw config_error("hidden layer sizes must be positive");
    return layers;
}

void parse_density_case(const json& root, const json& j, bool case3,
                        pipeline::DensityCaseConfig& c, Exec exec, std::uint64_t seed) {
    c.which = case3 ? pipeline::DensityCase::UnknownConsumption
                    : pipeline::DensityCase::NonPoissonDeployment;
    c.cellular = parse_cellular(root.at("cellular"));
    const auto bracket = root.at("cellular").at("density_bracket_per_km2").get<std::vector<double>>();
    if (bracket.size() != 2 || !(bracket[0] > 0.0) || !(bracket[1] > bracket[0]))
        throw config_error("density_bracket_per_km2 must be [lo, hi] with 0 < lo < hi");
    c.bracket.lo = bracket[0] * 1e-6;
    c.bracket.hi = bracket[1] * 1e-6;
    c.search.rel_tol = root.at("cellular").at("search").at("rel_tol").get<double>();
    c.search.scan_points = root.at("cellular").at("search").at("scan_points").get<std::size_t>();
    const auto prange = j.at("tx_power_dbm_range").get<std::vector<double>>();
    if (prange.size() != 2 || !(prange[1] >= prange[0]))
        throw config_error("tx_power_dbm_range must be [lo, hi]");
    c.p_dbm_lo = prange[0];
    c.p_dbm_hi = prange[1];
    c.n_total = j.at("n_total").get<std::size_t>();
    c.x_values = j.at("x_values").get<std::vector<std::size_t>>();
    if (c.x_values.empty()) throw config_error("x_values cannot be empty");
    for (std::size_t x : c.x_values)
        if (x > c.n_total) throw config_error("x_values entries must not exceed n_total");
    c.n_test = j.at("n_test").get<std::size_t>();
    c.hidden_layers = parse_layers(j.at("hidden_layers"));
    c.pretrain = parse_train(j.at("pretrain"), exec);
    c.finetune = parse_train(j.at("finetune"), exec);
    c.mixed = parse_train(j.at("mixed"), exec);
    c.n_seeds = j.at("n_seeds").get<std::size_t>();
    if (c.n_seeds == 0) throw config_error("n_seeds must be at least 1");
    c.master_seed = seed;
    c.exec = exec;
    if (!case3) {
        c.grid_mc.mc.n_realizations = j.at("grid_mc").at("n_realizations").get<std::size_t>();
        c.grid_mc.lambda_grid_points = j.at("grid_mc").at("lambda_grid_points").get<std::size_t>();
        c.grid_mc.mc.target_active_bs = j.at("grid_mc").at("target_active_bs").get<double>();
        c.grid_mc.kind = netsim::PointProcess::SquareGrid;
        c.grid_mc.mc.exec = exec;
    } else {
        const auto pc = j.at("uniform_law").at("pc_w").get<std::vector<double>>();
        const auto pidle = j.at("uniform_law").at("pidle_w").get<std::vector<double>>();
        if (pc.size() != 2 || pidle.size() != 2 || pc[1] < pc[0] || pidle[1] < pidle[0])
            throw config_error("uniform_law ranges must be [lo, hi]");
        c.consumption.pc_lo_w = pc[0];
        c.consumption.pc_hi_w = pc[1];
        c.consumption.pidle_lo_w = pidle[0];
        c.consumption.pidle_hi_w = pidle[1];
        c.consumption.pc_mean_w = j.at("gaussian_law").at("pc_mean_w").get<double>();
        c.consumption.pc_std_w = j.at("gaussian_law").at("pc_std_w").get<double>();
        c.consumption.pidle_mean_w = j.at("gaussian_law").at("pidle_mean_w").get<double>();
        c.consumption.pidle_std_w = j.at("gaussian_law").at("pidle_std_w").get<double>();
        if (c.consumption.pc_std_w < 0.0 || c.consumption.pidle_std_w < 0.0)
            throw config_error("gaussian_law std must be non-negative");
        c.consumption.p_dbm_lo = c.p_dbm_lo;
        c.consumption.p_dbm_hi = c.p_dbm_hi;
        c.consumption.bracket = c.bracket;
        c.consumption.search = c.search;
    }
}

RunConfig materialize(const json& doc) {
    RunConfig cfg;
    try {
        cfg.preset = doc.at("preset").get<std::string>();
        cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
        cfg.out_dir = doc.at("out_dir").get<std::string>();
        cfg.threads = doc.at("threads").get<int>();
        if (cfg.threads < 0) throw config_error("threads must be >= 0");
        cfg.parallel = doc.at("parallel").get<bool>();
        cfg.case_name = doc.at("case").get<std::string>();
        if (cfg.case_name != "case1" && cfg.case_name != "case2" && cfg.case_name != "case3")
            throw config_error("case must be one of case1, case2, case3");
        const Exec exec = cfg.parallel ? Exec::OpenMP : Exec::Serial;

        const json& c1 = doc.at("case1");
        cfg.case1.n_users = c1.at("n_users").get<std::size_t>();
        if (cfg.case1.n_users == 0) throw config_error("n_users must be >= 1");
        cfg.case1.radius_m = c1.at("radius_m").get<double>();
        if (!(cfg.case1.radius_m > 0.0)) throw config_error("radius_m must be positive");
        cfg.case1.n_train = c1.at("n_train").get<std::size_t>();
        cfg.case1.n_test = c1.at("n_test").get<std::size_t>();
        const auto prange = c1.at("pmax_dbm_range").get<std::vector<double>>();
        if (prange.size() != 2 || !(prange[1] >= prange[0]))
            throw config_error("pmax_dbm_range must be [lo, hi]");
        cfg.case1.pmax_dbm_lo = prange[0];
        cfg.case1.pmax_dbm_hi = prange[1];
        cfg.case1.pmax_dbm_sweep = c1.at("pmax_dbm_sweep").get<std::vector<double>>();
        cfg.case1.uplink.noise_power_w = dbm_to_watt(c1.at("noise_dbm").get<double>());
        cfg.case1.uplink.circuit_power_w = c1.at("circuit_power_w").get<double>();
        if (!(cfg.case1.uplink.circuit_power_w > 0.0))
            throw config_error("circuit_power_w must be positive");
        const double eta = c1.at("power_amplifier_efficiency").get<double>();
        if (!(eta > 0.0) || eta > 1.0) throw config_error("amplifier efficiency must lie in (0, 1]");
        cfg.case1.uplink.amplifier_inefficiency = 1.0 / eta;
        cfg.case1.uplink.bandwidth_hz = c1.at("bandwidth_hz").get<double>();
        const json& pl = c1.at("path_loss");
        cfg.case1.uplink.path_loss.intercept_db = pl.at("intercept_db").get<double>();
        cfg.case1.uplink.path_loss.slope_db_per_decade = pl.at("slope_db_per_decade").get<double>();
        cfg.case1.uplink.path_loss.min_distance_m = pl.at("min_distance_m").get<double>();
        if (!(cfg.case1.uplink.path_loss.min_distance_m > 0.0))
            throw config_error("path loss min_distance_m must be positive");
        const json& sv = c1.at("solver");
        cfg.case1.solver.tol = sv.at("tol").get<double>();
        if (!(cfg.case1.solver.tol > 0.0)) throw config_error("solver tol must be positive");
        cfg.case1.solver.max_outer = sv.at("max_outer").get<std::size_t>();
        cfg.case1.solver.random_starts = sv.at("random_starts").get<std::size_t>();
        cfg.case1.solver.power_floor_ratio = sv.at("power_floor_ratio").get<double>();
        if (!(cfg.case1.solver.power_floor_ratio > 0.0) || cfg.case1.solver.power_floor_ratio >= 1.0)
            throw config_error("power_floor_ratio must lie in (0, 1)");
        cfg.case1.hidden_layers = parse_layers(c1.at("hidden_layers"));
        cfg.case1.train = parse_train(c1.at("train"), exec);
        cfg.case1.master_seed = cfg.master_seed;
        cfg.case1.exec = exec;

        parse_density_case(doc, doc.at("case2"), false, cfg.case2, exec, cfg.master_seed);
        parse_density_case(doc, doc.at("case3"), true, cfg.case3, exec, cfg.master_seed);

        cfg.sweep.case_name = doc.at("sweep").at("case").get<std::string>();
        if (cfg.sweep.case_name != "case2" && cfg.sweep.case_name != "case3")
            throw config_error("sweep.case must be case2 or case3");
        cfg.sweep.x = doc.at("sweep").at("x").get<std::size_t>();
        cfg.sweep.candidates.clear();
        for (const auto& cand : doc.at("sweep").at("candidates"))
            cfg.sweep.candidates.push_back(parse_layers(cand));
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("invalid config value: ") + e.what());
    }
    cfg.raw = doc;
    return cfg;
}

}  // namespace

RunConfig load_run_config(const std::optional<std::filesystem::path>& config_path,
                          const std::optional<std::string>& preset,
                          const std::optional<std::uint64_t>& seed_override,
                          const std::optional<std::string>& out_override,
                          const std::vector<std::string>& set_overrides) {
    json user;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) throw config_error("cannot open config file: " + config_path->string());
        try {
            in >> user;
        } catch (const json::exception& e) {
            throw config_error("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!user.is_object()) throw config_error("config root must be a JSON object");
    }

    std::string preset_name = "desk";
    if (preset)
        preset_name = *preset;
    else if (user.contains("preset"))
        preset_name = user.at("preset").get<std::string>();

    json doc = default_config_json(preset_name);
    check_keys(user, doc, "");
    deep_merge(doc, user);
    doc["preset"] = preset_name;
    for (const auto& kv : set_overrides) apply_set(doc, kv);
    if (seed_override) doc["master_seed"] = *seed_override;
    if (out_override) doc["out_dir"] = *out_override;
    return materialize(doc);
}

}  // namespace eeopt::cli
