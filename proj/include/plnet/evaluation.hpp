#pragma once

#include "plnet/dataset.hpp"
#include "plnet/fit.hpp"
#include "plnet/glasso.hpp"
#include "plnet/simulation.hpp"

#include <span>
#include <vector>

namespace plnet {

struct ScoredEdge {
    Index source;  // source < target
    Index target;
    double score;     // larger is more reliable
    double tiebreak;  // secondary key, larger first
};

/// Candidate edges ordered from most to least reliable. Pairs absent from the
/// ranking are treated as tied last.
struct EdgeRanking {
    Index n_nodes = 0;
    std::vector<ScoredEdge> edges;

    Index total_pairs() const { return n_nodes * (n_nodes - 1) / 2; }
};

/// Scores each pair by the largest lambda at which it enters the support,
/// breaking ties by |partial correlation| at that lambda.
EdgeRanking rank_edges(std::span<const double> grid, std::span<const Matrix> omegas);
EdgeRanking path_to_ranking(const PathResult& path);

struct CurvePoint {
    double x;
    double y;
};

struct CurveSummary {
    std::vector<CurvePoint> roc;  // (false positive rate, true positive rate)
    std::vector<CurvePoint> pr;   // (recall, precision)
    double auc = 0.0;
    double aupr = 0.0;
};

/// ROC and precision-recall curves over the thresholds of the ranking, with
/// trapezoidal areas. Precision with no predicted edge is 1.
CurveSummary roc_pr(const EdgeRanking& ranking, const GroundTruthGraph& truth);

struct Confusion {
    double precision = 1.0;
    double recall = 0.0;
    double fallout = 0.0;
    Index true_positives = 0;
    Index false_positives = 0;
};

Confusion confusion_at(const Matrix& omega, const GroundTruthGraph& truth);
Confusion confusion_at(const FitResult& fit, const GroundTruthGraph& truth);

double f1_score(const Confusion& c);

struct BaselinePath {
    std::vector<double> grid;
    std::vector<Matrix> omegas;
    Matrix covariance;
};

/// Graphical lasso on the covariance of column-standardized residuals of
/// log(1 + Y) regressed on X, ignoring offsets. An empty grid builds the
/// geometric default from the covariance's lambda_max.
BaselinePath baseline_glasso_log(const CountDataset& data, std::vector<double> grid,
                                 const GlassoOptions& options = {}, int n_lambda = 30,
                                 double min_ratio = 1e-3);
EdgeRanking baseline_ranking(const BaselinePath& path);

} // namespace plnet
