#include "eeopt/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include "eeopt/io.hpp"

namespace eeopt::pipeline {

void Dataset::validate() const {
    if (features.rows() != targets.rows())
        throw std::invalid_argument("feature/target row counts differ");
    if (static_cast<std::size_t>(features.cols()) != feature_columns.size())
        throw std::invalid_argument("feature column metadata mismatch");
    if (static_cast<std::size_t>(targets.cols()) != target_columns.size())
        throw std::invalid_argument("target column metadata mismatch");
    if (n_model_rows + n_empirical_rows != rows())
        throw std::invalid_argument("provenance counts do not sum to row count");
    if (normalized)
        for (const auto& c : feature_columns)
            if (c.standardized && !(c.stddev > 0.0))
                throw std::invalid_argument("normalized column must have positive std");
}

Dataset Dataset::head(std::size_t n) const {
    if (n > rows()) throw std::invalid_argument("head beyond dataset size");
    Dataset out = *this;
    out.features = features.topRows(static_cast<Eigen::Index>(n));
    out.targets = targets.topRows(static_cast<Eigen::Index>(n));
    if (provenance == Provenance::Model) {
        out.n_model_rows = n;
        out.n_empirical_rows = 0;
    } else if (provenance == Provenance::Empirical) {
        out.n_model_rows = 0;
        out.n_empirical_rows = n;
    } else {
        out.n_model_rows = std::min(n_model_rows, n);
        out.n_empirical_rows = n - out.n_model_rows;
    }
    return out;
}

namespace {

void column_stats(const Eigen::MatrixXd& m, Eigen::Index col, Transform t, double& mean,
                  double& stddev) {
    const Eigen::Index n = m.rows();
    if (n < 2) throw std::invalid_argument("need at least 2 rows to compute column stats");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += apply_transform(t, m(i, col));
    mean = acc / static_cast<double>(n);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = apply_transform(t, m(i, col)) - mean;
        sq += d * d;
    }
    stddev = std::sqrt(sq / static_cast<double>(n - 1));
    if (!(stddev > 0.0)) throw std::invalid_argument("degenerate column: zero variance");
}

}  // namespace

Dataset normalize(const Dataset& raw) {
    raw.validate();
    if (raw.normalized) throw std::invalid_argument("dataset already normalized");
    Dataset out = raw;
    for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
        ColumnSpec& spec = out.feature_columns[static_cast<std::size_t>(c)];
        column_stats(raw.features, c, spec.transform, spec.mean, spec.stddev);
        spec.standardized = true;
        for (Eigen::Index i = 0; i < out.features.rows(); ++i)
            out.features(i, c) =
                (apply_transform(spec.transform, raw.features(i, c)) - spec.mean) / spec.stddev;
    }
    for (Eigen::Index c = 0; c < out.targets.cols(); ++c) {
        ColumnSpec& spec = out.target_columns[static_cast<std::size_t>(c)];
        // Targets keep the transformed scale; stats recorded for reporting.
        column_stats(raw.targets, c, spec.transform, spec.mean, spec.stddev);
        spec.standardized = false;
        for (Eigen::Index i = 0; i < out.targets.rows(); ++i)
            out.targets(i, c) = apply_transform(spec.transform, raw.targets(i, c));
    }
    out.normalized = true;
    return out;
}

Dataset normalize_with(const Dataset& raw, const ColumnList& feature_stats,
                       const ColumnList& target_stats) {
    raw.validate();
    if (raw.normalized) throw std::invalid_argument("dataset already normalized");
    if (feature_stats.size() != raw.feature_columns.size() ||
        target_stats.size() != raw.target_columns.size())
        throw std::invalid_argument("external stats shape mismatch");
    Dataset out = raw;
    out.feature_columns = feature_stats;
    out.target_columns = target_stats;
    out.features = normalize_features(feature_stats, raw.features);
    for (Eigen::Index c = 0; c < out.targets.cols(); ++c)
        for (Eigen::Index i = 0; i < out.targets.rows(); ++i)
            out.targets(i, c) = apply_transform(target_stats[static_cast<std::size_t>(c)].transform,
                                                raw.targets(i, c));
    out.normalized = true;
    return out;
}

Dataset denormalize(const Dataset& ds) {
    ds.validate();
    if (!ds.normalized) throw std::invalid_argument("dataset is not normalized");
    Dataset out = ds;
    for (Eigen::Index c = 0; c < out.features.cols(); ++c) {
        const ColumnSpec& spec = ds.feature_columns[static_cast<std::size_t>(c)];
        for (Eigen::Index i = 0; i < out.features.rows(); ++i)
            out.features(i, c) =
                invert_transform(spec.transform, ds.features(i, c) * spec.stddev + spec.mean);
        out.feature_columns[static_cast<std::size_t>(c)].standardized = false;
    }
    out.targets = denormalize_targets(ds.target_columns, ds.targets);
    out.normalized = false;
    return out;
}

Eigen::MatrixXd normalize_features(const ColumnList& stats, const Eigen::MatrixXd& raw) {
    if (static_cast<std::size_t>(raw.cols()) != stats.size())
        throw std::invalid_argument("feature stats shape mismatch");
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const ColumnSpec& spec = stats[static_cast<std::size_t>(c)];
        if (!(spec.stddev > 0.0)) throw std::invalid_argument("stats column has nonpositive std");
        for (Eigen::Index i = 0; i < raw.rows(); ++i)
            out(i, c) = (apply_transform(spec.transform, raw(i, c)) - spec.mean) / spec.stddev;
    }
    return out;
}

Eigen::MatrixXd denormalize_targets(const ColumnList& stats, const Eigen::MatrixXd& transformed) {
    if (static_cast<std::size_t>(transformed.cols()) != stats.size())
        throw std::invalid_argument("target stats shape mismatch");
    Eigen::MatrixXd out(transformed.rows(), transformed.cols());
    for (Eigen::Index c = 0; c < transformed.cols(); ++c) {
        const ColumnSpec& spec = stats[static_cast<std::size_t>(c)];
        for (Eigen::Index i = 0; i < transformed.rows(); ++i) {
            double v = transformed(i, c);
            if (spec.standardized) v = v * spec.stddev + spec.mean;
            out(i, c) = invert_transform(spec.transform, v);
        }
    }
    return out;
}

Dataset mix(const Dataset& model_set, const Dataset& empirical_set) {
    model_set.validate();
    empirical_set.validate();
    if (model_set.normalized || empirical_set.normalized)
        throw std::invalid_argument("mix operates on raw datasets");
    if (empirical_set.rows() > 0) {
        if (model_set.features.cols() != empirical_set.features.cols() ||
            model_set.targets.cols() != empirical_set.targets.cols())
            throw std::invalid_argument("mix: column mismatch");
    }
    Dataset out = model_set;
    const Eigen::Index nm = model_set.features.rows();
    const Eigen::Index ne = empirical_set.features.rows();
    out.features.conservativeResize(nm + ne, Eigen::NoChange);
    out.targets.conservativeResize(nm + ne, Eigen::NoChange);
    if (ne > 0) {
        out.features.bottomRows(ne) = empirical_set.features;
        out.targets.bottomRows(ne) = empirical_set.targets;
    }
    out.provenance = Provenance::Mixed;
    out.n_model_rows = model_set.rows();
    out.n_empirical_rows = empirical_set.rows();
    return out;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::vector<std::string> header;
    for (const auto& c : ds.feature_columns) header.push_back(c.name);
    for (const auto& c : ds.target_columns) header.push_back(c.name);
    io::CsvBuilder csv(header);
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) csv.add(ds.features(i, c));
        for (Eigen::Index c = 0; c < ds.targets.cols(); ++c) csv.add(ds.targets(i, c));
        csv.end_row();
    }
    io::write_text_atomic(path, csv.str());

    std::string doc = "Columns of " + path.filename().string() + "\n";
    auto describe = [&](const ColumnSpec& c, const char* role) {
        doc += c.name;
        doc += ": ";
        doc += role;
        doc += ", transform=";
        doc += transform_name(c.transform);
        doc += c.standardized ? ", z-scored (mean=" + io::format_double(c.mean) +
                                    ", std=" + io::format_double(c.stddev) + ")"
                              : "";
        doc += "\n";
    };
    for (const auto& c : ds.feature_columns) describe(c, "feature");
    for (const auto& c : ds.target_columns) describe(c, "target");
    const char* prov = ds.provenance == Provenance::Model
                           ? "model"
                           : (ds.provenance == Provenance::Empirical ? "empirical" : "mixed");
    doc += "provenance: " + std::string(prov) + " (model rows: " +
           std::to_string(ds.n_model_rows) + ", empirical rows: " +
           std::to_string(ds.n_empirical_rows) + ")\n";
    io::write_text_atomic(path.string() + ".columns.txt", doc);
}

}  // namespace eeopt::pipeline
