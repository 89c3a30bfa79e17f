#include "plnet/evaluation.hpp"

#include "plnet/error.hpp"
#include "plnet/pln_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plnet {

EdgeRanking rank_edges(std::span<const double> grid, std::span<const Matrix> omegas) {
    if (grid.size() != omegas.size()) throw InputError("grid and precision sequence differ in length");
    EdgeRanking ranking;
    if (omegas.empty()) return ranking;
    const Index p = omegas.front().rows();
    ranking.n_nodes = p;

    // Visit lambdas from the largest down so ties in the input order do not matter.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, p, false);
    std::size_t k = 0;
    while (k < order.size()) {
        // Group equal lambdas; within a group keep the largest |rho|.
        std::size_t end = k;
        while (end < order.size() && grid[order[end]] == grid[order[k]]) ++end;
        for (Index j = 0; j < p; ++j)
            for (Index l = j + 1; l < p; ++l) {
                if (seen(j, l)) continue;
                double best = -1.0;
                for (std::size_t g = k; g < end; ++g) {
                    const Matrix& omega = omegas[order[g]];
                    if (omega.rows() != p) throw InputError("precision matrices differ in size");
                    const double value = 0.5 * (omega(j, l) + omega(l, j));
                    if (value != 0.0)
                        best = std::max(best, std::abs(value) / std::sqrt(omega(j, j) * omega(l, l)));
                }
                if (best >= 0.0) {
                    seen(j, l) = true;
                    ranking.edges.push_back({j, l, grid[order[k]], best});
                }
            }
        k = end;
    }
    std::stable_sort(ranking.edges.begin(), ranking.edges.end(),
                     [](const ScoredEdge& a, const ScoredEdge& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.tiebreak != b.tiebreak) return a.tiebreak > b.tiebreak;
                         if (a.source != b.source) return a.source < b.source;
                         return a.target < b.target;
                     });
    return ranking;
}

EdgeRanking path_to_ranking(const PathResult& path) {
    std::vector<Matrix> omegas;
    omegas.reserve(path.fits.size());
    for (const FitResult& f : path.fits) omegas.push_back(f.params.Omega);
    return rank_edges(path.grid, omegas);
}

CurveSummary roc_pr(const EdgeRanking& ranking, const GroundTruthGraph& truth) {
    const Index p = truth.n_nodes();
    if (ranking.n_nodes != p && !ranking.edges.empty())
        throw InputError("ranking and truth have different node counts");
    const Index total = p * (p - 1) / 2;
    const Index positives = truth.n_edges();
    const Index negatives = total - positives;
    if (positives == 0 || negatives == 0)
        throw InputError("truth graph needs at least one edge and one non-edge");

    CurveSummary out;
    const auto P = static_cast<double>(positives), N = static_cast<double>(negatives);
    Index tp = 0, fp = 0;
    out.roc.push_back({0.0, 0.0});
    out.pr.push_back({0.0, 1.0});
    auto emit = [&] {
        out.roc.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
        const double predicted = static_cast<double>(tp + fp);
        out.pr.push_back({static_cast<double>(tp) / P, predicted > 0.0 ? static_cast<double>(tp) / predicted : 1.0});
    };

    std::vector<ScoredEdge> edges = ranking.edges;
    std::stable_sort(edges.begin(), edges.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
        return a.score != b.score ? a.score > b.score : a.tiebreak > b.tiebreak;
    });
    std::size_t k = 0;
    while (k < edges.size()) {
        std::size_t end = k;
        while (end < edges.size() && edges[end].score == edges[k].score &&
               edges[end].tiebreak == edges[k].tiebreak)
            ++end;
        for (std::size_t e = k; e < end; ++e) {
            if (edges[e].source < 0 || edges[e].target >= p || edges[e].source >= edges[e].target)
                throw InputError("ranking contains an invalid pair");
            if (truth.adjacency(edges[e].source, edges[e].target) != 0) ++tp; else ++fp;
        }
        emit();
        k = end;
    }
    if (tp + fp > total) throw InputError("ranking contains duplicate pairs");
    if (tp + fp < total) {
        tp = positives;
        fp = negatives;
        emit();
    }

    for (std::size_t i = 1; i < out.roc.size(); ++i) {
        out.auc += 0.5 * (out.roc[i].x - out.roc[i - 1].x) * (out.roc[i].y + out.roc[i - 1].y);
        out.aupr += 0.5 * (out.pr[i].x - out.pr[i - 1].x) * (out.pr[i].y + out.pr[i - 1].y);
    }
    return out;
}

Confusion confusion_at(const Matrix& omega, const GroundTruthGraph& truth) {
    const Index p = truth.n_nodes();
    if (omega.rows() != p || omega.cols() != p) throw InputError("estimate and truth differ in size");
    Confusion c;
    Index positives = 0, total = 0;
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) {
            ++total;
            const bool actual = truth.adjacency(j, k) != 0;
            const bool predicted = omega(j, k) != 0.0;
            positives += actual;
            if (predicted && actual) ++c.true_positives;
            if (predicted && !actual) ++c.false_positives;
        }
    const Index negatives = total - positives;
    const Index predicted = c.true_positives + c.false_positives;
    c.precision = predicted > 0 ? static_cast<double>(c.true_positives) / static_cast<double>(predicted) : 1.0;
    c.recall = positives > 0 ? static_cast<double>(c.true_positives) / static_cast<double>(positives) : 0.0;
    c.fallout = negatives > 0 ? static_cast<double>(c.false_positives) / static_cast<double>(negatives) : 0.0;
    return c;
}

Confusion confusion_at(const FitResult& fit, const GroundTruthGraph& truth) {
    return confusion_at(fit.params.Omega, truth);
}

double f1_score(const Confusion& c) {
    const double sum = c.precision + c.recall;
    return sum > 0.0 ? 2.0 * c.precision * c.recall / sum : 0.0;
}

BaselinePath baseline_glasso_log(const CountDataset& data, std::vector<double> grid,
                                 const GlassoOptions& options, int n_lambda, double min_ratio) {
    const Index n = data.n_samples(), p = data.n_variables();
    const OlsFit ols = ols_log_counts(data, /*use_offsets=*/false);
    Matrix residuals = ols.residuals;
    for (Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(residuals.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 1e-12) residuals.col(j) /= sd; else residuals.col(j).setZero();
    }
    BaselinePath out;
    out.covariance = residuals.transpose() * residuals / static_cast<double>(n);
    for (Index j = 0; j < p; ++j)
        if (out.covariance(j, j) < 1e-12) out.covariance(j, j) = 1.0;

    const double dn = static_cast<double>(n);
    if (grid.empty()) grid = geometric_grid(lambda_max(out.covariance, dn), n_lambda, min_ratio);
    out.grid = std::move(grid);

    out.omegas.reserve(out.grid.size());
    const Matrix* warm = nullptr;
    for (const double lambda : out.grid) {
        const GlassoProblem problem{out.covariance, lambda, dn};
        out.omegas.push_back(warm != nullptr ? solve_glasso(problem, options, *warm).omega
                                             : solve_glasso(problem, options).omega);
        warm = &out.omegas.back();
    }
    return out;
}

EdgeRanking baseline_ranking(const BaselinePath& path) { return rank_edges(path.grid, path.omegas); }

} // namespace plnet
