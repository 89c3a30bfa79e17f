#include "plnet/fit.hpp"

#include "plnet/box_ascent.hpp"
#include "plnet/error.hpp"
#include "plnet/pln_core.hpp"
#include "plnet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plnet {

namespace {

constexpr double kInitialVariance = 0.1;

bool is_empty_network(double lambda) { return std::isinf(lambda); }

} // namespace

void validate(const FitConfig& cfg) {
    if (!(cfg.lambda >= 0.0)) throw InputError("lambda must be non-negative");
    if (!(cfg.outer_tol > 0.0) || !(cfg.vstep_tol > 0.0) || !(cfg.glasso.tol > 0.0))
        throw InputError("tolerances must be positive");
    if (cfg.outer_max_iter < 1 || cfg.vstep_max_iter < 1 || cfg.glasso.max_iter < 1)
        throw InputError("iteration caps must be at least 1");
    if (!(cfg.var_floor > 0.0)) throw InputError("variance floor must be positive");
}

OlsFit ols_log_counts(const CountDataset& data, bool use_offsets) {
    const Matrix& X = data.design();
    Matrix response = data.counts().array().log1p().matrix();
    if (use_offsets) response -= data.offsets();

    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < X.cols()) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Index k = qr.rank(); k < X.cols(); ++k) {
            if (!names.empty()) names += ", ";
            names += data.covariate_ids()[static_cast<std::size_t>(perm(k))];
        }
        throw InputError("design matrix is rank deficient; linearly dependent column(s): " + names);
    }
    OlsFit out;
    out.coefficients = qr.solve(response);
    out.residuals = response - X * out.coefficients;
    return out;
}

FitState initialize(const CountDataset& data, double lambda, const GlassoOptions& glasso) {
    const Index n = data.n_samples(), p = data.n_variables(), d = data.n_covariates();
    OlsFit ols = ols_log_counts(data);

    // Pearson residuals: residuals over the column's residual standard error.
    const double dof = static_cast<double>(std::max<Index>(n - d, 1));
    Matrix M(n, p);
    for (Index j = 0; j < p; ++j) {
        const double sigma = std::sqrt(ols.residuals.col(j).squaredNorm() / dof);
        if (sigma > 1e-12)
            M.col(j) = ols.residuals.col(j) / sigma;
        else
            M.col(j).setZero();
    }

    FitState state;
    state.params.B = std::move(ols.coefficients);
    state.vparams.M = std::move(M);
    state.vparams.S = Matrix::Constant(n, p, kInitialVariance);
    state.params.Omega = mstep(state.vparams, lambda, glasso);
    return state;
}

VStepResult vstep(const CountDataset& data, const Matrix& omega, const FitState& start,
                  const FitConfig& cfg) {
    const Index n = data.n_samples(), p = data.n_variables(), d = data.n_covariates();
    const Index nb = d * p, nm = n * p;
    if (start.params.B.rows() != d || start.params.B.cols() != p || start.vparams.M.rows() != n ||
        start.vparams.M.cols() != p || start.vparams.S.rows() != n || start.vparams.S.cols() != p)
        throw InputError("V-step start has inconsistent dimensions");
    const double log_det = log_det_spd(omega);

    Vector x(nb + 2 * nm);
    x.segment(0, nb) = start.params.B.reshaped();
    x.segment(nb, nm) = start.vparams.M.reshaped();
    x.segment(nb + nm, nm) = start.vparams.S.reshaped();
    Vector lower(x.size());
    lower.head(nb + nm).setConstant(-std::numeric_limits<double>::infinity());
    lower.tail(nm).setConstant(cfg.var_floor);

    ElboGradient grad;
    const AscentObjective objective = [&](const Vector& v, Vector& g) {
        const Eigen::Map<const Matrix> B(v.data(), d, p);
        const Eigen::Map<const Matrix> M(v.data() + nb, n, p);
        const Eigen::Map<const Matrix> S(v.data() + nb + nm, n, p);
        const double value = elbo_fixed_precision(data, omega, log_det, B, M, S, &grad);
        if (std::isfinite(value)) {
            g.segment(0, nb) = grad.B.reshaped();
            g.segment(nb, nm) = grad.M.reshaped();
            g.segment(nb + nm, nm) = grad.S.reshaped();
        }
        return value;
    };

    // diagonal of the negative Hessian: B: sum_i x_ik^2 A_ij, M: A + Omega_jj, S: 1/(2 S^2) + A/4
    const Matrix& X = data.design();
    const Matrix X2 = X.cwiseAbs2();
    const Matrix base = data.offsets();
    const CurvatureEstimate curvature = [&](const Vector& v, Vector& h) {
        const Eigen::Map<const Matrix> B(v.data(), d, p);
        const Eigen::Map<const Matrix> M(v.data() + nb, n, p);
        const Eigen::Map<const Matrix> S(v.data() + nb + nm, n, p);
        const Matrix A = (base + X * B + M + 0.5 * S).array().exp().matrix();
        h.resize(v.size());
        h.segment(0, nb) = (X2.transpose() * A).reshaped();
        h.segment(nb, nm) = (A.rowwise() + omega.diagonal().transpose()).reshaped();
        h.segment(nb + nm, nm) = (0.5 * S.array().square().inverse() + 0.25 * A.array()).matrix().reshaped();
    };

    BoxAscentOptions options;
    options.gradient_tol = cfg.vstep_tol;
    options.max_iter = cfg.vstep_max_iter;
    const BoxAscentResult res = maximize_box(objective, x, lower, options, curvature);

    VStepResult out;
    out.B = Eigen::Map<const Matrix>(x.data(), d, p);
    out.M = Eigen::Map<const Matrix>(x.data() + nb, n, p);
    out.S = Eigen::Map<const Matrix>(x.data() + nb + nm, n, p);
    out.elbo = res.value;
    out.iterations = res.iterations;
    out.converged = res.converged;
    return out;
}

Matrix mstep(const VariationalParams& vparams, double lambda, const GlassoOptions& glasso,
             const Matrix* previous) {
    if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
    const Matrix sigma = latent_covariance(vparams);
    if (is_empty_network(lambda)) {
        for (Index j = 0; j < sigma.rows(); ++j)
            if (!(sigma(j, j) > 0.0)) throw NumericalError("latent variance is not positive");
        return sigma.diagonal().cwiseInverse().asDiagonal();
    }
    const GlassoProblem problem{sigma, lambda, static_cast<double>(vparams.M.rows())};
    if (previous != nullptr && lambda > 0.0) return solve_glasso(problem, glasso, *previous).omega;
    return solve_glasso(problem, glasso).omega;
}

FitResult fit(const CountDataset& data, const FitConfig& cfg, const std::optional<FitState>& warm) {
    validate(cfg);
    FitState state = warm ? *warm : initialize(data, cfg.lambda, cfg.glasso);

    FitResult result;
    result.lambda = cfg.lambda;
    double current = penalized_elbo(data, state.params, state.vparams, cfg.lambda);
    result.elbo_trace.push_back(current);

    for (int iter = 1; iter <= cfg.outer_max_iter; ++iter) {
        VStepResult v = vstep(data, state.params.Omega, state, cfg);
        result.vstep_converged = result.vstep_converged && v.converged;
        state.params.B = std::move(v.B);
        state.vparams.M = std::move(v.M);
        state.vparams.S = std::move(v.S);
        state.params.Omega = mstep(state.vparams, cfg.lambda, cfg.glasso, &state.params.Omega);

        const double next = penalized_elbo(data, state.params, state.vparams, cfg.lambda);
        result.elbo_trace.push_back(next);
        result.iterations = iter;
        const double change = std::abs(next - current) / (1.0 + std::abs(next));
        current = next;
        if (change < cfg.outer_tol) {
            result.converged = true;
            break;
        }
    }

    result.elbo = elbo(data, state.params, state.vparams);
    result.n_edges = count_edges(state.params.Omega);
    result.params = std::move(state.params);
    result.vparams = std::move(state.vparams);
    return result;
}

std::vector<double> geometric_grid(double lambda_max, int n_lambda, double min_ratio) {
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
        throw InputError("lambda_max must be positive to build a grid");
    if (n_lambda < 1) throw InputError("grid needs at least one point");
    if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw InputError("min_ratio must lie in (0, 1)");
    std::vector<double> grid(static_cast<std::size_t>(n_lambda));
    if (n_lambda == 1) {
        grid[0] = lambda_max;
        return grid;
    }
    const double step = std::log(min_ratio) / (n_lambda - 1);
    for (int k = 0; k < n_lambda; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
    return grid;
}

FitResult fit_empty(const CountDataset& data, const FitConfig& cfg) {
    FitConfig empty = cfg;
    empty.lambda = std::numeric_limits<double>::infinity();
    // lambda_max is read off this fit, so it is run to a tight fixed point
    empty.outer_tol = std::min(cfg.outer_tol, 1e-12);
    empty.outer_max_iter = std::max(cfg.outer_max_iter, 200);
    empty.vstep_tol = std::min(cfg.vstep_tol, 1e-9);
    return fit(data, empty);
}

double path_lambda_max(const CountDataset& data, const FitResult& empty_fit) {
    const Matrix sigma = latent_covariance(empty_fit.vparams);
    // small relative margin keeps the first grid point off the boundary
    return lambda_max(sigma, static_cast<double>(data.n_samples())) * (1.0 + 1e-6);
}

PathResult fit_path(const CountDataset& data, const PathOptions& options, const FitConfig& cfg) {
    validate(cfg);
    PathResult path;
    std::optional<FitState> warm;
    if (options.grid.empty()) {
        const FitResult empty = fit_empty(data, cfg);
        path.grid = geometric_grid(path_lambda_max(data, empty), options.n_lambda, options.min_ratio);
        warm = empty.state();
    } else {
        path.grid = options.grid;
        for (std::size_t k = 0; k < path.grid.size(); ++k) {
            if (!(path.grid[k] >= 0.0) || !std::isfinite(path.grid[k]))
                throw InputError("grid values must be finite and non-negative");
            if (k > 0 && !(path.grid[k] < path.grid[k - 1]))
                throw InputError("grid must be strictly decreasing");
        }
    }

    for (const double lambda : path.grid) {
        FitConfig c = cfg;
        c.lambda = lambda;
        FitResult r = fit(data, c, warm);
        warm = r.state();
        path.criteria.push_back({lambda, r.n_edges, r.elbo, r.elbo_trace.back(),
                                 ebic(r, data, options.ebic_gamma)});
        path.fits.push_back(std::move(r));
    }
    return path;
}

} // namespace plnet
