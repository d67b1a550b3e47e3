#ifndef EEOPT_COLUMNS_HPP
#define EEOPT_COLUMNS_HPP

#include <string>
#include <vector>

namespace eeopt {

enum class Transform { Identity, Log10 };

/// Per-column normalization record: declared transform plus the affine
/// statistics computed on the designated reference set. Feature columns are
/// z-scored after the transform; target columns keep the transformed scale
/// (the relative-error loss needs sign-definite targets) with the stats
/// recorded for reporting.
struct ColumnSpec {
    std::string name;
    Transform transform = Transform::Identity;
    bool standardized = false;
    double mean = 0.0;
    double stddev = 1.0;

    friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using ColumnList = std::vector<ColumnSpec>;

inline double apply_transform(Transform t, double v) {
    return t == Transform::Log10 ? std::log10(v) : v;
}
inline double invert_transform(Transform t, double v) {
    return t == Transform::Log10 ? std::pow(10.0, v) : v;
}

inline const char* transform_name(Transform t) {
    return t == Transform::Log10 ? "log10" : "identity";
}

}  // namespace eeopt

#endif
