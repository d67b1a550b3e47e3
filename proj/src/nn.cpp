#include "eeopt/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "eeopt/common.hpp"

namespace eeopt::nn {

using json = nlohmann::ordered_json;

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
}

void MlpModel::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least input and output layers");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
        throw std::invalid_argument("parameter count does not chain with layer sizes");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l])
            throw std::invalid_argument("weight shape mismatch");
        if (biases[l].size() != layer_sizes[l + 1])
            throw std::invalid_argument("bias shape mismatch");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw std::invalid_argument("non-finite parameters");
    }
}

MlpModel init(const std::vector<int>& layer_sizes, OutputActivation output_activation,
              std::uint64_t rng_seed) {
    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.output_activation = output_activation;
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = std_dev * gauss(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(Eigen::VectorXd::Zero(fan_out));
    }
    m.validate();
    return m;
}

namespace {

inline void apply_output(const MlpModel& m, Eigen::VectorXd& v) {
    if (m.output_activation == OutputActivation::ClampedUnit)
        v = v.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.input_dim()) throw std::invalid_argument("input dimension mismatch");
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        a = (m.weights[l] * a + m.biases[l]).eval();
        if (l + 1 < m.weights.size()) a = a.cwiseMax(0.0);
    }
    apply_output(m, a);
    return a;
}

Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), m.output_dim());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = forward(m, X.row(i).transpose());
    return out;
}

double relative_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw std::invalid_argument("prediction/target shape mismatch");
    if (targets.size() == 0) throw std::invalid_argument("empty batch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < targets.rows(); ++i)
        for (Eigen::Index j = 0; j < targets.cols(); ++j) {
            const double y = targets(i, j);
            if (y == 0.0) throw std::invalid_argument("relative MSE undefined for zero target");
            const double e = (predictions(i, j) - y) / y;
            acc += e * e;
        }
    return acc / static_cast<double>(targets.size());
}

double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw std::invalid_argument("prediction/target shape mismatch");
    if (targets.size() == 0) throw std::invalid_argument("empty batch");
    return (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
}

double loss_value(Loss loss, const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
    return loss == Loss::RelativeMse ? relative_mse(predictions, targets) : mse(predictions, targets);
}

namespace {

Gradients zero_gradients(const MlpModel& m) {
    Gradients g;
    g.dW.reserve(m.weights.size());
    g.db.reserve(m.biases.size());
    for (const auto& w : m.weights) g.dW.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : m.biases) g.db.emplace_back(Eigen::VectorXd::Zero(b.size()));
    return g;
}

void add_gradients(Gradients& acc, const Gradients& other) {
    for (std::size_t l = 0; l < acc.dW.size(); ++l) {
        acc.dW[l] += other.dW[l];
        acc.db[l] += other.db[l];
    }
}

// Backprop for one sample; adds into `out`.
void accumulate_sample(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                       int row, double scale, Loss loss, Gradients& out,
                       std::vector<Eigen::VectorXd>& acts) {
    const std::size_t L = m.weights.size();
    acts.resize(L + 1);
    acts[0] = X.row(row).transpose();
    for (std::size_t l = 0; l < L; ++l) {
        acts[l + 1] = m.weights[l] * acts[l] + m.biases[l];
        if (l + 1 < L) acts[l + 1] = acts[l + 1].cwiseMax(0.0);
    }
    // Output treated as linear; ClampedUnit clipping is inference-only.
    Eigen::VectorXd delta(m.output_dim());
    for (int j = 0; j < m.output_dim(); ++j) {
        const double y = Y(row, j);
        const double pred = acts[L](j);
        if (loss == Loss::RelativeMse) {
            if (y == 0.0) throw std::invalid_argument("relative MSE undefined for zero target");
            delta(j) = scale * 2.0 * (pred - y) / (y * y);
        } else {
            delta(j) = scale * 2.0 * (pred - y);
        }
    }
    for (std::size_t l = L; l-- > 0;) {
        out.dW[l].noalias() += delta * acts[l].transpose();
        out.db[l] += delta;
        if (l > 0) {
            Eigen::VectorXd back = m.weights[l].transpose() * delta;
            // ReLU subgradient, defined as 0 at 0: active iff post-activation > 0.
            delta.resize(back.size());
            for (Eigen::Index i = 0; i < back.size(); ++i)
                delta(i) = acts[l](i) > 0.0 ? back(i) : 0.0;
        }
    }
}

constexpr std::size_t kGradChunk = 32;

}  // namespace

Gradients gradient(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   std::span<const int> rows, Loss loss, Exec exec) {
    m.validate();
    if (X.cols() != m.input_dim() || Y.cols() != m.output_dim() || X.rows() != Y.rows())
        throw std::invalid_argument("dataset/model dimension mismatch");
    if (rows.empty()) throw std::invalid_argument("empty batch");

    // Canonical order: ascending sample index, independent of caller order.
    std::vector<int> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    const double scale = 1.0 / static_cast<double>(sorted.size() * m.output_dim());

    const std::size_t n_chunks = (sorted.size() + kGradChunk - 1) / kGradChunk;
    std::vector<Gradients> partials(n_chunks);
    par_for(n_chunks, exec, [&](std::size_t c) {
        Gradients g = zero_gradients(m);
        std::vector<Eigen::VectorXd> acts;
        const std::size_t begin = c * kGradChunk;
        const std::size_t end = std::min(begin + kGradChunk, sorted.size());
        for (std::size_t i = begin; i < end; ++i)
            accumulate_sample(m, X, Y, sorted[i], scale, loss, g, acts);
        partials[c] = std::move(g);
    });
    Gradients total = std::move(partials[0]);
    for (std::size_t c = 1; c < n_chunks; ++c) add_gradients(total, partials[c]);
    return total;
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
        throw std::invalid_argument("ADAM betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("ADAM epsilon must be positive");
    if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0))
        throw std::invalid_argument("validation fraction must lie in (0, 1)");
}

AdamState make_adam_state(const MlpModel& m) {
    AdamState s;
    for (const auto& w : m.weights) {
        s.mW.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        s.vW.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : m.biases) {
        s.mb.emplace_back(Eigen::VectorXd::Zero(b.size()));
        s.vb.emplace_back(Eigen::VectorXd::Zero(b.size()));
    }
    s.step = 0;
    return s;
}

void adam_step(MlpModel& m, const Gradients& g, AdamState& s, const TrainConfig& cfg) {
    s.step += 1;
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(s.step));
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        s.mW[l] = cfg.adam_beta1 * s.mW[l] + (1.0 - cfg.adam_beta1) * g.dW[l];
        s.vW[l] = cfg.adam_beta2 * s.vW[l] + (1.0 - cfg.adam_beta2) * g.dW[l].cwiseProduct(g.dW[l]);
        m.weights[l].array() -= cfg.learning_rate * (s.mW[l].array() / c1) /
                                ((s.vW[l].array() / c2).sqrt() + cfg.adam_epsilon);
        s.mb[l] = cfg.adam_beta1 * s.mb[l] + (1.0 - cfg.adam_beta1) * g.db[l];
        s.vb[l] = cfg.adam_beta2 * s.vb[l] + (1.0 - cfg.adam_beta2) * g.db[l].cwiseProduct(g.db[l]);
        m.biases[l].array() -= cfg.learning_rate * (s.mb[l].array() / c1) /
                               ((s.vb[l].array() / c2).sqrt() + cfg.adam_epsilon);
    }
}

std::uint64_t parameter_checksum(const MlpModel& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& w : m.weights)
        h = fnv1a(w.data(), static_cast<std::size_t>(w.size()) * sizeof(double), h);
    for (const auto& b : m.biases)
        h = fnv1a(b.data(), static_cast<std::size_t>(b.size()) * sizeof(double), h);
    return h;
}

TrainReport train(MlpModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                  const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    if (X.cols() != model.input_dim() || Y.cols() != model.output_dim() || X.rows() != Y.rows())
        throw std::invalid_argument("dataset/model dimension mismatch");
    if (X.rows() < 2) throw std::invalid_argument("need at least 2 samples to hold out validation");

    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(X.rows());

    // Seeded one-time split.
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    {
        std::mt19937_64 rng(derive_seed(cfg.rng_seed, "validation-split"));
        std::shuffle(ids.begin(), ids.end(), rng);
    }
    int n_val = static_cast<int>(std::lround(cfg.validation_fraction * n));
    n_val = std::clamp(n_val, 1, n - 1);
    std::vector<int> val_ids(ids.end() - n_val, ids.end());
    std::vector<int> train_ids(ids.begin(), ids.end() - n_val);
    std::sort(val_ids.begin(), val_ids.end());
    std::sort(train_ids.begin(), train_ids.end());

    auto split_loss = [&](const std::vector<int>& rows) {
        Eigen::MatrixXd pred(static_cast<Eigen::Index>(rows.size()), model.output_dim());
        Eigen::MatrixXd targ(static_cast<Eigen::Index>(rows.size()), model.output_dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Eigen::VectorXd a = X.row(rows[i]).transpose();
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                a = (model.weights[l] * a + model.biases[l]).eval();
                if (l + 1 < model.weights.size()) a = a.cwiseMax(0.0);
            }
            // Loss on the linear output (clipping is inference-only).
            pred.row(static_cast<Eigen::Index>(i)) = a.transpose();
            targ.row(static_cast<Eigen::Index>(i)) = Y.row(rows[i]);
        }
        return loss_value(cfg.loss, pred, targ);
    };

    TrainReport report;
    AdamState adam = make_adam_state(model);
    std::vector<int> order = train_ids;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) {
            std::mt19937_64 rng(derive_seed(cfg.rng_seed, 1000 + static_cast<std::uint64_t>(epoch)));
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::span<const int> batch(order.data() + start, end - start);
            const Gradients g = gradient(model, X, Y, batch, cfg.loss, cfg.exec);
            adam_step(model, g, adam, cfg);
        }
        const double tl = split_loss(train_ids);
        const double vl = split_loss(val_ids);
        report.train_curve.push_back(tl);
        report.val_curve.push_back(vl);
        if (!std::isfinite(tl) || !std::isfinite(vl)) {
            report.diverged = true;
            break;
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.param_checksum = parameter_checksum(model);
    return report;
}

TrainReport fine_tune(MlpModel& pretrained, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                      const TrainConfig& cfg) {
    // Architecture is frozen: the dataset must match it exactly; no reshaping.
    if (X.cols() != pretrained.input_dim() || Y.cols() != pretrained.output_dim())
        throw std::invalid_argument("fine-tune dataset does not match the frozen architecture");
    return train(pretrained, X, Y, cfg);
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json arr = json::array();  // row-major
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

json columns_to_json(const ColumnList& cols) {
    json arr = json::array();
    for (const auto& c : cols)
        arr.push_back({{"name", c.name},
                       {"transform", transform_name(c.transform)},
                       {"standardized", c.standardized},
                       {"mean", c.mean},
                       {"stddev", c.stddev}});
    return arr;
}

ColumnList columns_from_json(const json& arr) {
    ColumnList cols;
    for (const auto& c : arr) {
        ColumnSpec spec;
        spec.name = c.at("name").get<std::string>();
        const std::string t = c.at("transform").get<std::string>();
        if (t == "log10")
            spec.transform = Transform::Log10;
        else if (t == "identity")
            spec.transform = Transform::Identity;
        else
            throw io_error("unknown column transform: " + t);
        spec.standardized = c.at("standardized").get<bool>();
        spec.mean = c.at("mean").get<double>();
        spec.stddev = c.at("stddev").get<double>();
        cols.push_back(std::move(spec));
    }
    return cols;
}

constexpr int kFormatMajor = 1;
constexpr int kFormatMinor = 0;

}  // namespace

void save(const MlpModel& m, const std::filesystem::path& path) {
    m.validate();
    json j;
    j["format"] = "eeopt-mlp";
    j["version"] = {{"major", kFormatMajor}, {"minor", kFormatMinor}};
    j["layer_sizes"] = m.layer_sizes;
    j["hidden_activation"] = "relu";
    j["output_activation"] =
        m.output_activation == OutputActivation::ClampedUnit ? "clamped_unit" : "linear";
    json weights = json::array(), biases = json::array();
    for (const auto& w : m.weights) weights.push_back(matrix_to_json(w));
    for (const auto& b : m.biases) biases.push_back(vector_to_json(b));
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["feature_columns"] = columns_to_json(m.feature_columns);
    j["target_columns"] = columns_to_json(m.target_columns);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open model file for writing: " + path.string());
    out << j.dump(1, '\t') << '\n';
    if (!out) throw io_error("failed writing model file: " + path.string());
}

MlpModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("model file is not valid JSON (" + path.string() + "): " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "eeopt-mlp")
            throw io_error("not an eeopt-mlp model file: " + path.string());
        const int major = j.at("version").at("major").get<int>();
        if (major != kFormatMajor)
            throw io_error("unsupported model format major version " + std::to_string(major));
        MlpModel m;
        m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        const std::string act = j.at("output_activation").get<std::string>();
        if (act == "clamped_unit")
            m.output_activation = OutputActivation::ClampedUnit;
        else if (act == "linear")
            m.output_activation = OutputActivation::Linear;
        else
            throw io_error("unknown output activation: " + act);
        const json& weights = j.at("weights");
        const json& biases = j.at("biases");
        for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
            const int rows = m.layer_sizes[l + 1], cols = m.layer_sizes[l];
            const json& wl = weights.at(l);
            const json& bl = biases.at(l);
            if (static_cast<int>(wl.size()) != rows * cols || static_cast<int>(bl.size()) != rows)
                throw io_error("parameter array size mismatch in " + path.string());
            Eigen::MatrixXd w(rows, cols);
            std::size_t k = 0;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) w(r, c) = wl.at(k++).get<double>();
            Eigen::VectorXd b(rows);
            for (int r = 0; r < rows; ++r) b(r) = bl.at(static_cast<std::size_t>(r)).get<double>();
            m.weights.push_back(std::move(w));
            m.biases.push_back(std::move(b));
        }
        m.feature_columns = columns_from_json(j.at("feature_columns"));
        m.target_columns = columns_from_json(j.at("target_columns"));
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw io_error("malformed model file (" + path.string() + "): " + e.what());
    } catch (const std::invalid_argument& e) {
        throw io_error("inconsistent model file (" + path.string() + "): " + e.what());
    }
}

}  // namespace eeopt::nn
