#include "plnet/glasso.hpp"

#include "plnet/error.hpp"
#include "plnet/pln_core.hpp"

#include <cmath>
#include <limits>

namespace plnet {

namespace {

void validate(const GlassoProblem& problem) {
    const Matrix& s = problem.sigma;
    if (s.rows() != s.cols() || s.rows() < 1) throw InputError("covariance must be square");
    if (!(problem.lambda >= 0.0)) throw InputError("lambda must be non-negative");
    if (!(problem.n > 0.0)) throw InputError("sample scaling n must be positive");
    if (!s.allFinite()) throw InputError("covariance has non-finite entries");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + s.cwiseAbs().maxCoeff()))
        throw InputError("covariance must be symmetric");
    for (Index j = 0; j < s.rows(); ++j)
        if (!(s(j, j) > 0.0)) throw InputError("covariance diagonal must be positive");
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double mean_abs(const Matrix& m) {
    return m.cwiseAbs().sum() / static_cast<double>(m.size());
}

// Drops row and column j.
Matrix drop_index(const Matrix& m, Index j) {
    const Index p = m.rows();
    Matrix out(p - 1, p - 1);
    for (Index c = 0, oc = 0; c < p; ++c) {
        if (c == j) continue;
        for (Index r = 0, orow = 0; r < p; ++r) {
            if (r == j) continue;
            out(orow++, oc) = m(r, c);
        }
        ++oc;
    }
    return out;
}

Vector drop_entry(const Vector& v, Index j) {
    Vector out(v.size() - 1);
    for (Index r = 0, o = 0; r < v.size(); ++r)
        if (r != j) out(o++) = v(r);
    return out;
}

// Coordinate descent for min 1/2 t'Qt + s't + rho |t|_1, warm started at t.
void lasso_cd(const Matrix& Q, const Vector& s, double rho, Vector& t, double tol, int max_iter) {
    Vector qt = Q * t;
    for (int it = 0; it < max_iter; ++it) {
        double max_delta = 0.0;
        double max_abs = 0.0;
        for (Index k = 0; k < t.size(); ++k) {
            const double partial = s(k) + qt(k) - Q(k, k) * t(k);
            const double updated = -soft_threshold(partial, rho) / Q(k, k);
            const double delta = updated - t(k);
            if (delta != 0.0) {
                qt += delta * Q.col(k);
                t(k) = updated;
            }
            max_delta = std::max(max_delta, std::abs(delta));
            max_abs = std::max(max_abs, std::abs(updated));
        }
        if (max_delta <= tol * (1.0 + max_abs)) return;
    }
}

GlassoSolution run_sweeps(const GlassoProblem& problem, const GlassoOptions& options,
                          Matrix omega, Matrix w) {
    const Matrix& s = problem.sigma;
    const Index p = s.rows();
    const double rho = 2.0 * problem.lambda / problem.n;
    const double threshold = options.tol * mean_abs(s);
    const double inner_tol = options.tol / 10.0;
    constexpr int kInnerMaxIter = 1000;

    GlassoSolution sol;
    for (int sweep = 1; sweep <= options.max_iter && p > 1; ++sweep) {
        const Matrix w_before = w;
        for (Index j = 0; j < p; ++j) {
            // Inverse of the (p-1) x (p-1) block of Omega with row/column j removed.
            const Vector w12 = drop_entry(w.col(j), j);
            const Matrix omega11_inv = drop_index(w, j) - w12 * w12.transpose() / w(j, j);
            const Matrix Q = s(j, j) * omega11_inv;
            const Vector s12 = drop_entry(s.col(j), j);

            Vector theta = drop_entry(omega.col(j), j);
            lasso_cd(Q, s12, rho, theta, inner_tol, kInnerMaxIter);

            const double schur = 1.0 / s(j, j);
            const Vector u = omega11_inv * theta;
            const Matrix w11 = omega11_inv + u * u.transpose() / schur;
            const Vector w12_new = -u / schur;

            for (Index c = 0, oc = 0; c < p; ++c) {
                if (c == j) continue;
                for (Index r = 0, orow = 0; r < p; ++r) {
                    if (r == j) continue;
                    w(r, c) = w11(orow++, oc);
                }
                w(c, j) = w(j, c) = w12_new(oc);
                omega(c, j) = omega(j, c) = theta(oc);
                ++oc;
            }
            w(j, j) = s(j, j);
            omega(j, j) = schur + theta.dot(u);
        }
        sol.iterations = sweep;
        sol.objective_trace.push_back(glasso_objective(problem, omega));

        // the diagonal counts too: active off-diagonal entries of W settle
        // on the first sweep while the diagonal is still moving
        const double change = mean_abs(w - w_before);
        if (change <= threshold) {
            sol.converged = true;
            break;
        }
    }
    if (p == 1) sol.converged = true;

    sol.omega = std::move(omega);
    sol.w = std::move(w);
    sol.objective = glasso_objective(problem, sol.omega);
    if (!std::isfinite(sol.objective)) throw NumericalError("graphical lasso lost positive-definiteness");
    return sol;
}

} // namespace

double lambda_max(const Matrix& sigma, double n) {
    const Index p = sigma.rows();
    if (p < 2) return 0.0;
    double largest = 0.0;
    for (Index j = 0; j < p; ++j)
        for (Index k = 0; k < p; ++k)
            if (j != k) largest = std::max(largest, std::abs(sigma(j, k)));
    return 0.5 * n * largest;
}

double glasso_objective(const GlassoProblem& problem, const Matrix& omega) {
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double trace = problem.sigma.cwiseProduct(omega).sum();
    const double penalty = offdiag_l1(omega);
    return -0.5 * problem.n * log_det + 0.5 * problem.n * trace +
           (penalty == 0.0 ? 0.0 : problem.lambda * penalty);
}

GlassoSolution solve_glasso(const GlassoProblem& problem, const GlassoOptions& options) {
    validate(problem);
    if (!(options.tol > 0.0)) throw InputError("glasso tolerance must be positive");
    const Matrix& s = problem.sigma;

    if (problem.lambda == 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
        const double top = eig.eigenvalues().maxCoeff();
        if (!(eig.eigenvalues().minCoeff() > 1e-12 * top))
            throw NumericalError("singular covariance, positive lambda required");
        GlassoSolution sol;
        sol.w = s;
        sol.omega = s.llt().solve(Matrix::Identity(s.rows(), s.cols()));
        sol.omega = 0.5 * (sol.omega + sol.omega.transpose()).eval();
        sol.objective = glasso_objective(problem, sol.omega);
        sol.objective_trace.push_back(sol.objective);
        sol.converged = true;
        return sol;
    }

    Matrix omega = s.diagonal().cwiseInverse().asDiagonal();
    Matrix w = s.diagonal().asDiagonal();
    return run_sweeps(problem, options, std::move(omega), std::move(w));
}

GlassoSolution solve_glasso(const GlassoProblem& problem, const GlassoOptions& options,
                            const Matrix& warm_omega) {
    validate(problem);
    if (problem.lambda == 0.0) return solve_glasso(problem, options);
    if (!(options.tol > 0.0)) throw InputError("glasso tolerance must be positive");
    const Index p = problem.sigma.rows();
    if (warm_omega.rows() != p || warm_omega.cols() != p)
        throw InputError("warm start has the wrong dimension");
    Matrix omega = 0.5 * (warm_omega + warm_omega.transpose());
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) throw NumericalError("warm start precision not PD");
    Matrix w = llt.solve(Matrix::Identity(p, p));
    w = 0.5 * (w + w.transpose()).eval();
    return run_sweeps(problem, options, std::move(omega), std::move(w));
}

} // namespace plnet
