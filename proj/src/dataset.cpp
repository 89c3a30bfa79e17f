#include "plnet/dataset.hpp"

#include "plnet/error.hpp"

#include <cmath>

namespace plnet {

namespace {

std::vector<std::string> default_ids(const char* prefix, Index count) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(i + 1));
    return ids;
}

void require_finite(const Matrix& m, const char* what) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j)))
                throw InputError(std::string(what) + " has a non-finite entry at (" +
                                 std::to_string(i) + ", " + std::to_string(j) + ")");
}

} // namespace

CountDataset::CountDataset(Matrix counts, Matrix design, Matrix offsets,
                           std::vector<std::string> sample_ids,
                           std::vector<std::string> variable_ids,
                           std::vector<std::string> covariate_ids)
    : counts_(std::move(counts)),
      design_(std::move(design)),
      offsets_(std::move(offsets)),
      sample_ids_(std::move(sample_ids)),
      variable_ids_(std::move(variable_ids)),
      covariate_ids_(std::move(covariate_ids)) {
    const Index n = counts_.rows();
    const Index p = counts_.cols();
    if (n < 1 || p < 1) throw InputError("count matrix must be non-empty");
    if (design_.rows() != n)
        throw InputError("design has " + std::to_string(design_.rows()) + " rows, counts have " +
                         std::to_string(n));
    if (offsets_.rows() != n || offsets_.cols() != p)
        throw InputError("offsets must be " + std::to_string(n) + " x " + std::to_string(p));
    require_finite(counts_, "counts");
    require_finite(design_, "design");
    require_finite(offsets_, "offsets");

    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) {
            const double y = counts_(i, j);
            if (y < 0.0 || y != std::floor(y))
                throw InputError("count at (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ") is not a non-negative integer");
            log_factorial_sum_ += std::lgamma(y + 1.0);
        }

    if (sample_ids_.empty()) sample_ids_ = default_ids("S", n);
    if (variable_ids_.empty()) variable_ids_ = default_ids("V", p);
    if (covariate_ids_.empty()) covariate_ids_ = default_ids("X", design_.cols());
    if (static_cast<Index>(sample_ids_.size()) != n ||
        static_cast<Index>(variable_ids_.size()) != p ||
        static_cast<Index>(covariate_ids_.size()) != design_.cols())
        throw InputError("identifier count does not match matrix dimensions");
}

CountDataset CountDataset::from_counts(Matrix counts) {
    const Index n = counts.rows();
    const Index p = counts.cols();
    return CountDataset(std::move(counts), Matrix::Ones(n, 1), Matrix::Zero(n, p), {}, {},
                        {"(Intercept)"});
}

CountDataset CountDataset::subset_rows(std::span<const Index> rows) const {
    const auto m = static_cast<Index>(rows.size());
    Matrix y(m, n_variables()), x(m, n_covariates()), o(m, n_variables());
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (Index r = 0; r < m; ++r) {
        const Index i = rows[static_cast<std::size_t>(r)];
        if (i < 0 || i >= n_samples()) throw InputError("row index out of range");
        y.row(r) = counts_.row(i);
        x.row(r) = design_.row(i);
        o.row(r) = offsets_.row(i);
        ids.push_back(sample_ids_[static_cast<std::size_t>(i)]);
    }
    return CountDataset(std::move(y), std::move(x), std::move(o), std::move(ids), variable_ids_,
                        covariate_ids_);
}

CountDataset CountDataset::with_design(Matrix design, std::vector<std::string> covariate_ids) const {
    return CountDataset(counts_, std::move(design), offsets_, sample_ids_, variable_ids_,
                        std::move(covariate_ids));
}

CountDataset CountDataset::with_offsets(Matrix offsets) const {
    return CountDataset(counts_, design_, std::move(offsets), sample_ids_, variable_ids_,
                        covariate_ids_);
}

} // namespace plnet
