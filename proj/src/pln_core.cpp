#include "plnet/pln_core.hpp"

#include "plnet/error.hpp"

#include <cmath>
#include <limits>

namespace plnet {

namespace {

void check_shapes(const CountDataset& data, const ModelParams& params,
                  const VariationalParams& vparams) {
    const Index n = data.n_samples(), p = data.n_variables(), d = data.n_covariates();
    if (params.B.rows() != d || params.B.cols() != p)
        throw InputError("B must be " + std::to_string(d) + " x " + std::to_string(p));
    if (params.Omega.rows() != p || params.Omega.cols() != p)
        throw InputError("Omega must be " + std::to_string(p) + " x " + std::to_string(p));
    if (vparams.M.rows() != n || vparams.M.cols() != p || vparams.S.rows() != n ||
        vparams.S.cols() != p)
        throw InputError("variational parameters must be " + std::to_string(n) + " x " +
                         std::to_string(p));
}

void check_variances(const Matrix& S) {
    for (Index j = 0; j < S.cols(); ++j)
        for (Index i = 0; i < S.rows(); ++i)
            if (!(S(i, j) > 0.0))
                throw InputError("variational variance at (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ") is not positive");
}

} // namespace

Matrix expected_counts(const CountDataset& data, const ModelParams& params,
                       const VariationalParams& vparams) {
    check_shapes(data, params, vparams);
    check_variances(vparams.S);
    const Matrix exponent =
        data.offsets() + data.design() * params.B + vparams.M + 0.5 * vparams.S;
    Matrix A(exponent.rows(), exponent.cols());
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i) {
            A(i, j) = std::exp(exponent(i, j));
            if (!std::isfinite(A(i, j)))
                throw NumericalError("expected count overflows at cell (" + std::to_string(i) +
                                     ", " + std::to_string(j) + ")");
        }
    return A;
}

Matrix latent_covariance(const VariationalParams& vparams) {
    const Index n = vparams.M.rows();
    if (n < 1) throw InputError("latent covariance needs at least one sample");
    if (vparams.S.rows() != n || vparams.S.cols() != vparams.M.cols())
        throw InputError("M and S must have the same shape");
    Matrix sigma = vparams.M.transpose() * vparams.M;
    sigma.diagonal() += vparams.S.colwise().sum().transpose();
    sigma /= static_cast<double>(n);
    return sigma;
}

double offdiag_l1(const Matrix& omega) {
    return omega.cwiseAbs().sum() - omega.diagonal().cwiseAbs().sum();
}

double log_det_spd(const Matrix& omega) {
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) throw NumericalError("precision not PD");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double elbo_fixed_precision(const CountDataset& data, const Matrix& omega, double log_det_omega,
                            const Eigen::Ref<const Matrix>& B, const Eigen::Ref<const Matrix>& M,
                            const Eigen::Ref<const Matrix>& S, ElboGradient* gradient) {
    const double n = static_cast<double>(data.n_samples());
    const double p = static_cast<double>(data.n_variables());
    const Matrix& Y = data.counts();

    if ((S.array() <= 0.0).any()) return -std::numeric_limits<double>::infinity();

    const Matrix Z = data.offsets() + data.design() * B + M;
    const Matrix A = (Z + 0.5 * S).array().exp().matrix();
    const Matrix MOmega = M * omega;

    // -(n/2) tr(SigmaHat Omega) = -1/2 <M Omega, M> - 1/2 sum_ij S_ij Omega_jj
    const double trace_term = 0.5 * MOmega.cwiseProduct(M).sum() +
                              0.5 * (S * omega.diagonal()).sum();
    const double value = (Y.cwiseProduct(Z) - A).sum() + 0.5 * S.array().log().sum() +
                         0.5 * n * log_det_omega - trace_term + 0.5 * n * p -
                         data.log_factorial_sum();
    if (!std::isfinite(value)) return -std::numeric_limits<double>::infinity();

    if (gradient != nullptr) {
        const Matrix residual = Y - A;
        gradient->B = data.design().transpose() * residual;
        gradient->M = residual - MOmega;
        gradient->S = (S.cwiseInverse() - A).rowwise() - omega.diagonal().transpose();
        gradient->S *= 0.5;
    }
    return value;
}

double elbo(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams) {
    check_shapes(data, params, vparams);
    check_variances(vparams.S);
    const double log_det = log_det_spd(params.Omega);
    const double value = elbo_fixed_precision(data, params.Omega, log_det, params.B, vparams.M,
                                              vparams.S, nullptr);
    if (!std::isfinite(value)) throw NumericalError("ELBO is not finite (expected counts overflow)");
    return value;
}

double penalized_elbo(const CountDataset& data, const ModelParams& params,
                      const VariationalParams& vparams, double lambda) {
    if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
    const double value = elbo(data, params, vparams);
    const double norm = offdiag_l1(params.Omega);
    if (norm == 0.0) return value;
    return value - lambda * norm;
}

Matrix grad_B(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams) {
    const Matrix A = expected_counts(data, params, vparams);
    return data.design().transpose() * (data.counts() - A);
}

Matrix grad_M(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams) {
    const Matrix A = expected_counts(data, params, vparams);
    return data.counts() - A - vparams.M * params.Omega;
}

Matrix grad_S(const CountDataset& data, const ModelParams& params, const VariationalParams& vparams) {
    const Matrix A = expected_counts(data, params, vparams);
    Matrix g = (vparams.S.cwiseInverse() - A).rowwise() - params.Omega.diagonal().transpose();
    return 0.5 * g;
}

PartialCorrelationGraph partial_correlations(const Matrix& omega, double threshold,
                                             std::vector<std::string> nodes) {
    const Index p = omega.rows();
    if (omega.cols() != p) throw InputError("precision matrix must be square");
    if (!(threshold >= 0.0)) throw InputError("threshold must be non-negative");
    if (nodes.empty())
        for (Index j = 0; j < p; ++j) nodes.push_back("V" + std::to_string(j + 1));
    if (static_cast<Index>(nodes.size()) != p) throw InputError("node count does not match Omega");
    for (Index j = 0; j < p; ++j)
        if (!(omega(j, j) > 0.0)) throw NumericalError("precision not PD");

    PartialCorrelationGraph graph{std::move(nodes), {}};
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) {
            const double value = 0.5 * (omega(j, k) + omega(k, j));
            if (std::abs(value) > threshold)
                graph.edges.push_back({j, k, -value / std::sqrt(omega(j, j) * omega(k, k))});
        }
    return graph;
}

Index count_edges(const Matrix& omega) {
    Index count = 0;
    for (Index j = 0; j < omega.cols(); ++j)
        for (Index k = j + 1; k < omega.cols(); ++k)
            if (omega(j, k) != 0.0) ++count;
    return count;
}

PlnMoments pln_moments(const Vector& mu, const Matrix& sigma) {
    const Index p = mu.size();
    if (sigma.rows() != p || sigma.cols() != p) throw InputError("Sigma must be p x p");
    if (Eigen::LLT<Matrix>(sigma).info() != Eigen::Success)
        throw InputError("Sigma must be positive-definite");

    PlnMoments out{Vector(p), Vector(p), Matrix(p, p)};
    for (Index j = 0; j < p; ++j) out.mean(j) = std::exp(mu(j) + 0.5 * sigma(j, j));
    for (Index j = 0; j < p; ++j)
        for (Index k = 0; k < p; ++k)
            out.covariance(j, k) = std::expm1(sigma(j, k)) * out.mean(j) * out.mean(k);
    for (Index j = 0; j < p; ++j) {
        out.covariance(j, j) += out.mean(j);
        out.variance(j) = out.covariance(j, j);
    }
    return out;
}

} // namespace plnet
