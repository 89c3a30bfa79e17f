#pragma once

#include "plnet/dataset.hpp"

#include <vector>

namespace plnet {

/// min over PD Omega of -(n/2) log det Omega + (n/2) tr(SigmaHat Omega)
///                      + lambda * sum_{j != k} |Omega_jk|
struct GlassoProblem {
    Matrix sigma;
    double lambda = 0.0;
    double n = 1.0;
};

struct GlassoOptions {
    double tol = 1e-4;
    int max_iter = 100;
};

struct GlassoSolution {
    Matrix omega;
    Matrix w;  // Omega^{-1}, maintained alongside Omega
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // after each sweep
};

/// Smallest lambda at which the solution is diagonal: (n/2) max_{j != k} |SigmaHat_jk|.
/// Returns 0 for p < 2.
double lambda_max(const Matrix& sigma, double n);

/// Objective value; +inf when omega is not positive-definite.
double glasso_objective(const GlassoProblem& problem, const Matrix& omega);

/// Cold start from the diagonal solution diag(1 / SigmaHat_jj).
GlassoSolution solve_glasso(const GlassoProblem& problem, const GlassoOptions& options = {});

/// Warm start from a positive-definite precision matrix.
GlassoSolution solve_glasso(const GlassoProblem& problem, const GlassoOptions& options,
                            const Matrix& warm_omega);

} // namespace plnet
