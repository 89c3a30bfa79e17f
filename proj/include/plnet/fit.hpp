#pragma once

#include "plnet/dataset.hpp"
#include "plnet/glasso.hpp"

#include <optional>
#include <vector>

namespace plnet {

struct FitConfig {
    double lambda = 0.0;         // +inf fits the empty network
    double outer_tol = 1e-4;     // relative change of J_sp
    int outer_max_iter = 50;
    double vstep_tol = 1e-6;     // projected-gradient sup-norm
    int vstep_max_iter = 500;
    double var_floor = kVarianceFloor;
    GlassoOptions glasso{};
};

void validate(const FitConfig& cfg);

/// Complete optimizer state; also the warm-start payload between fits.
struct FitState {
    ModelParams params;
    VariationalParams vparams;
};

struct FitResult {
    ModelParams params;
    VariationalParams vparams;
    std::vector<double> elbo_trace;  // J_sp at the start, then after each outer iteration
    double elbo = 0.0;               // unpenalized J at the final iterate
    Index n_edges = 0;
    int iterations = 0;
    bool converged = false;
    bool vstep_converged = true;     // every V-step met its gradient tolerance
    double lambda = 0.0;

    FitState state() const { return {params, vparams}; }
};

/// OLS of log(1 + Y) - O on X, column by column.
struct OlsFit {
    Matrix coefficients;  // d x p
    Matrix residuals;     // n x p
};
OlsFit ols_log_counts(const CountDataset& data, bool use_offsets = true);

/// Starting point: B0 from OLS, M0 = column-standardized (Pearson) residuals,
/// S0 = 0.1, Omega0 = graphical lasso at `lambda` on the latent covariance of (M0, S0).
FitState initialize(const CountDataset& data, double lambda, const GlassoOptions& glasso = {});

struct VStepResult {
    Matrix B;
    Matrix M;
    Matrix S;
    double elbo = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Maximizes J over (B, M, S >= var_floor) for fixed Omega.
VStepResult vstep(const CountDataset& data, const Matrix& omega, const FitState& start,
                  const FitConfig& cfg);

/// Maximizes J_sp over Omega for fixed variational parameters; `previous`
/// warm-starts the graphical lasso. lambda = 0 returns SigmaHat^{-1}.
Matrix mstep(const VariationalParams& vparams, double lambda, const GlassoOptions& glasso,
             const Matrix* previous = nullptr);

FitResult fit(const CountDataset& data, const FitConfig& cfg,
              const std::optional<FitState>& warm = std::nullopt);

struct PathCriteria {
    double lambda = 0.0;
    Index n_edges = 0;
    double elbo = 0.0;            // J
    double penalized_elbo = 0.0;  // J_sp
    double ebic = 0.0;
};

struct PathResult {
    std::vector<double> grid;  // strictly decreasing
    std::vector<FitResult> fits;
    std::vector<PathCriteria> criteria;
};

struct PathOptions {
    std::vector<double> grid;  // explicit grid; overrides the geometric default
    int n_lambda = 30;
    double min_ratio = 1e-3;
    double ebic_gamma = 0.0;
};

/// Geometric grid from lambda_max down to lambda_max * min_ratio.
std::vector<double> geometric_grid(double lambda_max, int n_lambda, double min_ratio);

/// Empty-network fit: the model with Omega constrained to be diagonal.
FitResult fit_empty(const CountDataset& data, const FitConfig& cfg);

/// Smallest lambda for which the empty-network fit is a fixed point of the
/// alternating scheme.
double path_lambda_max(const CountDataset& data, const FitResult& empty_fit);

/// Fits in decreasing lambda order, each warm-started from the previous one.
/// Without an explicit grid the path starts from the empty-network fit.
PathResult fit_path(const CountDataset& data, const PathOptions& options, const FitConfig& cfg);

} // namespace plnet
