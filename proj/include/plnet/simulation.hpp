#pragma once

#include "plnet/dataset.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace plnet {

using Rng = std::mt19937_64;
using Adjacency = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

enum class Topology { erdos_renyi, preferential_attachment, affiliation };

std::string to_string(Topology topology);
Topology parse_topology(const std::string& name);

/// Generator knobs. A negative ER probability means 2 / p.
struct GraphParams {
    double er_probability = -1.0;
    int attachment = 1;
    int blocks = 3;
    double within = 0.25;
    double between = 0.01;
};

struct GroundTruthGraph {
    Adjacency adjacency;  // symmetric, hollow, entries in {0, 1}
    Topology topology = Topology::erdos_renyi;

    Index n_nodes() const { return adjacency.rows(); }
    Index n_edges() const;
};

GroundTruthGraph gen_graph(Topology topology, Index p, const GraphParams& params, std::uint64_t seed);

/// Omega = v G + (|min eig(v G)| + u) I.
Matrix graph_to_precision(const Adjacency& graph, double u = 0.1, double v = 0.3);

/// Z_i ~ N(0, Omega^{-1}), Y_ij ~ Poisson(exp(o_ij + x_i'beta_j + Z_ij)).
CountDataset sample_pln(const Matrix& X, const Matrix& B, const Matrix& O, const Matrix& omega,
                        std::uint64_t seed);

/// Row-wise softmax of log-abundances.
Vector softmax(const Vector& log_abundance);

/// Negative binomial with mean `mean` and variance mean + mean^2 / dispersion
/// (gamma-Poisson mixture).
long sample_negative_binomial(Rng& rng, double mean, double dispersion);

struct SimulationKnobs {
    Index n = 0;
    Index p = 0;
    double nu = 0.0;
    double b = 0.0;
    double u = 0.1;
    double v = 0.3;
    double depth_mean = 1000.0;
    std::uint64_t seed = 0;
};

struct BenchmarkInstance {
    GroundTruthGraph truth;
    Matrix omega;
    CountDataset counts;
    std::vector<long> depths;
    SimulationKnobs knobs;
};

/// log a_i ~ N(x_i'B, Omega^{-1}); pi_i = softmax(log a_i); N_i ~ NB(depth_mean, nu);
/// Y_i ~ Multinomial(N_i, pi_i); offsets log N_i.
BenchmarkInstance sample_compositional(const Matrix& omega, const Matrix& X, const Matrix& B,
                                       double depth_mean, double nu, std::uint64_t seed,
                                       GroundTruthGraph truth = {});

struct AnovaDesign {
    Matrix X;                  // cell-means coding, n x groups
    std::vector<int> group;    // group index per row
    bool balanced = true;      // false when n is not a multiple of groups
};

AnovaDesign anova_design(Index n, int groups = 3);

/// iid U(-b, b) entries.
Matrix sample_coefficients(Index d, Index p, double b, std::uint64_t seed);

} // namespace plnet
