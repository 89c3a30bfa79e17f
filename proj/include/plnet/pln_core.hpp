#pragma once

#include "plnet/dataset.hpp"

#include <string>
#include <vector>

namespace plnet {

/// A_ij = exp(o_ij + x_i.beta_j + m_ij + s2_ij / 2). Throws NumericalError
/// naming the first cell whose value is not finite.
Matrix expected_counts(const CountDataset& data, const ModelParams& params,
                       const VariationalParams& vparams);

/// SigmaHat = (M'M + diag(column sums of S)) / n.
Matrix latent_covariance(const VariationalParams& vparams);

/// sum_{j != k} |Omega_jk|, both triangles counted.
double offdiag_l1(const Matrix& omega);

/// log det of a symmetric positive-definite matrix; throws NumericalError
/// ("precision not PD") when the Cholesky factorization fails.
double log_det_spd(const Matrix& omega);

/// Variational lower bound J in closed matrix form.
double elbo(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams);

/// J - lambda * ||Omega||_{1,off}. An infinite lambda is accepted when Omega
/// is diagonal (empty network) and then contributes no penalty.
double penalized_elbo(const CountDataset& data, const ModelParams& params,
                      const VariationalParams& vparams, double lambda);

Matrix grad_B(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams);
Matrix grad_M(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams);
Matrix grad_S(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams);

struct ElboGradient {
    Matrix B;
    Matrix M;
    Matrix S;
};

/// J and (optionally) its gradient in (B, M, S) for a fixed precision whose
/// log-determinant is supplied. Does not throw on overflow: returns -inf so
/// that line searches can back off.
double elbo_fixed_precision(const CountDataset& data, const Matrix& omega, double log_det_omega,
                            const Eigen::Ref<const Matrix>& B, const Eigen::Ref<const Matrix>& M,
                            const Eigen::Ref<const Matrix>& S, ElboGradient* gradient);

struct PartialCorrelationEdge {
    Index source;  // source < target
    Index target;
    double rho;
};

struct PartialCorrelationGraph {
    std::vector<std::string> nodes;
    std::vector<PartialCorrelationEdge> edges;
};

/// Edges are pairs with |Omega_jk| > threshold, weighted by
/// rho_jk = -Omega_jk / sqrt(Omega_jj Omega_kk). Off-diagonal entries are read
/// through their symmetric average.
PartialCorrelationGraph partial_correlations(const Matrix& omega, double threshold,
                                             std::vector<std::string> nodes = {});

/// Number of unordered pairs j < k with Omega_jk != 0.
Index count_edges(const Matrix& omega);

struct PlnMoments {
    Vector mean;
    Vector variance;
    Matrix covariance;  // diagonal holds the variances
};

/// Marginal moments of Y ~ PLN(mu, Sigma).
PlnMoments pln_moments(const Vector& mu, const Matrix& sigma);

} // namespace plnet
