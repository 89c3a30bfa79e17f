#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace plnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Observed counts Y (n x p) with design X (n x d) and offsets O (n x p).
///
/// Immutable once built; the constructor validates shapes, integrality and
/// finiteness and caches K(Y) = sum log(Y_ij!).
class CountDataset {
public:
    CountDataset(Matrix counts, Matrix design, Matrix offsets,
                 std::vector<std::string> sample_ids = {},
                 std::vector<std::string> variable_ids = {},
                 std::vector<std::string> covariate_ids = {});

    /// Counts only: intercept design and zero offsets.
    static CountDataset from_counts(Matrix counts);

    const Matrix& counts() const { return counts_; }
    const Matrix& design() const { return design_; }
    const Matrix& offsets() const { return offsets_; }
    const std::vector<std::string>& sample_ids() const { return sample_ids_; }
    const std::vector<std::string>& variable_ids() const { return variable_ids_; }
    const std::vector<std::string>& covariate_ids() const { return covariate_ids_; }

    Index n_samples() const { return counts_.rows(); }
    Index n_variables() const { return counts_.cols(); }
    Index n_covariates() const { return design_.cols(); }

    double log_factorial_sum() const { return log_factorial_sum_; }

    CountDataset subset_rows(std::span<const Index> rows) const;
    CountDataset with_design(Matrix design, std::vector<std::string> covariate_ids = {}) const;
    CountDataset with_offsets(Matrix offsets) const;

private:
    Matrix counts_;
    Matrix design_;
    Matrix offsets_;
    std::vector<std::string> sample_ids_;
    std::vector<std::string> variable_ids_;
    std::vector<std::string> covariate_ids_;
    double log_factorial_sum_ = 0.0;
};

/// Regression coefficients B (d x p) and precision Omega (p x p).
struct ModelParams {
    Matrix B;
    Matrix Omega;
};

/// Per-sample variational means M and variances S (both n x p).
/// S holds variances s^2, not standard deviations.
struct VariationalParams {
    Matrix M;
    Matrix S;
};

/// Smallest admissible variational variance.
inline constexpr double kVarianceFloor = 1e-8;

} // namespace plnet
