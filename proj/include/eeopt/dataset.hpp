#ifndef EEOPT_DATASET_HPP
#define EEOPT_DATASET_HPP

#include <Eigen/Core>
#include <filesystem>
#include <string>

#include "eeopt/columns.hpp"

namespace eeopt::pipeline {

enum class Provenance { Model, Empirical, Mixed };

/// Feature/target matrix with per-column normalization metadata. Builders
/// emit raw physical values; normalize() applies the declared transforms and
/// z-scores feature columns. Provenance counts track how many rows came from
/// the analytic model vs. the empirical generator.
struct Dataset {
    Eigen::MatrixXd features;  // samples x input dims
    Eigen::MatrixXd targets;   // samples x output dims
    ColumnList feature_columns;
    ColumnList target_columns;
    Provenance provenance = Provenance::Model;
    std::size_t n_model_rows = 0;
    std::size_t n_empirical_rows = 0;
    bool normalized = false;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    void validate() const;
    Dataset head(std::size_t n) const;  // first n rows, same metadata
};

/// z-score features (after their declared transform) and transform targets.
/// Stats come from the dataset itself.
Dataset normalize(const Dataset& raw);

/// Same, but with externally supplied statistics (the pre-training set's), so
/// a frozen network keeps seeing consistent scales during fine-tuning.
Dataset normalize_with(const Dataset& raw, const ColumnList& feature_stats,
                       const ColumnList& target_stats);

/// Exact inverse of normalize (up to rounding).
Dataset denormalize(const Dataset& ds);

/// Apply a trained model's feature stats to raw features (evaluation path).
Eigen::MatrixXd normalize_features(const ColumnList& stats, const Eigen::MatrixXd& raw);

/// Invert target transforms on network outputs back to physical scale.
Eigen::MatrixXd denormalize_targets(const ColumnList& stats, const Eigen::MatrixXd& transformed);

/// Concatenation with Mixed provenance; row order is model rows then
/// empirical rows (the training loop shuffles).
Dataset mix(const Dataset& model_set, const Dataset& empirical_set);

/// One row per realization; 17-significant-digit floats. A sidecar
/// <path>.columns.txt documents every column.
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace eeopt::pipeline

#endif
