#include "plnet/simulation.hpp"

#include "plnet/error.hpp"

#include <cmath>
#include <numeric>

namespace plnet {

std::string to_string(Topology topology) {
    switch (topology) {
        case Topology::erdos_renyi: return "erdos_renyi";
        case Topology::preferential_attachment: return "preferential_attachment";
        case Topology::affiliation: return "affiliation";
    }
    return "unknown";
}

Topology parse_topology(const std::string& name) {
    if (name == "erdos_renyi" || name == "random") return Topology::erdos_renyi;
    if (name == "preferential_attachment" || name == "scale_free") return Topology::preferential_attachment;
    if (name == "affiliation" || name == "community") return Topology::affiliation;
    throw InputError("unknown topology '" + name + "'");
}

Index GroundTruthGraph::n_edges() const { return adjacency.sum() / 2; }

namespace {

void add_edge(Adjacency& g, Index a, Index b) { g(a, b) = g(b, a) = 1; }

Adjacency erdos_renyi(Index p, double prob, Rng& rng) {
    Adjacency g = Adjacency::Zero(p, p);
    std::bernoulli_distribution coin(prob);
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k)
            if (coin(rng)) add_edge(g, j, k);
    return g;
}

// Each new node attaches to `m` distinct existing nodes chosen with
// probability proportional to their degree.
Adjacency preferential_attachment(Index p, int m, Rng& rng) {
    Adjacency g = Adjacency::Zero(p, p);
    std::vector<Index> endpoints;  // each node repeated once per incident edge
    for (Index node = 1; node < p; ++node) {
        const Index links = std::min<Index>(m, node);
        std::vector<Index> targets;
        while (static_cast<Index>(targets.size()) < links) {
            Index t;
            if (endpoints.empty()) {
                t = std::uniform_int_distribution<Index>(0, node - 1)(rng);
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
                t = endpoints[pick(rng)];
            }
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (const Index t : targets) {
            add_edge(g, node, t);
            endpoints.push_back(node);
            endpoints.push_back(t);
        }
    }
    return g;
}

Adjacency affiliation(Index p, int blocks, double within, double between, Rng& rng) {
    Adjacency g = Adjacency::Zero(p, p);
    std::vector<int> block(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) block[static_cast<std::size_t>(j)] = static_cast<int>(j * blocks / p);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) {
            const double prob = block[static_cast<std::size_t>(j)] == block[static_cast<std::size_t>(k)] ? within : between;
            if (unif(rng) < prob) add_edge(g, j, k);
        }
    return g;
}

void check_probability(double prob, const char* what) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
}

Vector standard_normal(Index size, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(size);
    for (Index k = 0; k < size; ++k) z(k) = normal(rng);
    return z;
}

// Upper Cholesky factor U (Omega = U'U); U^{-1} e ~ N(0, Omega^{-1}).
Eigen::LLT<Matrix> precision_factor(const Matrix& omega) {
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) throw InputError("precision matrix must be positive-definite");
    return llt;
}

Vector sample_latent(const Eigen::LLT<Matrix>& llt, Rng& rng) {
    return llt.matrixU().solve(standard_normal(llt.rows(), rng));
}

} // namespace

GroundTruthGraph gen_graph(Topology topology, Index p, const GraphParams& params, std::uint64_t seed) {
    if (p < 2) throw InputError("graphs need at least 2 nodes");
    Rng rng(seed);
    GroundTruthGraph out;
    out.topology = topology;
    switch (topology) {
        case Topology::erdos_renyi: {
            const double prob = params.er_probability < 0.0 ? std::min(1.0, 2.0 / static_cast<double>(p))
                                                            : params.er_probability;
            check_probability(prob, "edge probability");
            out.adjacency = erdos_renyi(p, prob, rng);
            break;
        }
        case Topology::preferential_attachment:
            if (params.attachment < 1) throw InputError("attachment must be at least 1");
            out.adjacency = preferential_attachment(p, params.attachment, rng);
            break;
        case Topology::affiliation:
            if (params.blocks < 1 || params.blocks > p) throw InputError("block count must lie in [1, p]");
            check_probability(params.within, "within-block probability");
            check_probability(params.between, "between-block probability");
            out.adjacency = affiliation(p, params.blocks, params.within, params.between, rng);
            break;
    }
    return out;
}

Matrix graph_to_precision(const Adjacency& graph, double u, double v) {
    const Index p = graph.rows();
    if (graph.cols() != p) throw InputError("adjacency must be square");
    if (!(u > 0.0) || !(v > 0.0)) throw InputError("u and v must be positive");
    for (Index j = 0; j < p; ++j) {
        if (graph(j, j) != 0) throw InputError("adjacency must have a zero diagonal");
        for (Index k = 0; k < p; ++k)
            if (graph(j, k) != graph(k, j) || (graph(j, k) != 0 && graph(j, k) != 1))
                throw InputError("adjacency must be binary and symmetric");
    }
    Matrix omega = v * graph.cast<double>();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(omega, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    omega.diagonal().array() += std::abs(min_eig) + u;
    return omega;
}

CountDataset sample_pln(const Matrix& X, const Matrix& B, const Matrix& O, const Matrix& omega,
                        std::uint64_t seed) {
    const Index n = X.rows(), p = omega.rows();
    if (B.rows() != X.cols() || B.cols() != p || O.rows() != n || O.cols() != p)
        throw InputError("sample_pln: inconsistent dimensions");
    const auto llt = precision_factor(omega);
    Rng rng(seed);
    const Matrix eta = O + X * B;
    Matrix Y(n, p);
    for (Index i = 0; i < n; ++i) {
        const Vector z = sample_latent(llt, rng);
        for (Index j = 0; j < p; ++j) {
            const double rate = std::exp(eta(i, j) + z(j));
            if (!std::isfinite(rate)) throw NumericalError("Poisson rate overflows");
            Y(i, j) = static_cast<double>(std::poisson_distribution<long>(rate)(rng));
        }
    }
    return CountDataset(std::move(Y), X, O);
}

Vector softmax(const Vector& log_abundance) {
    const double top = log_abundance.maxCoeff();
    Vector out = (log_abundance.array() - top).exp().matrix();
    return out / out.sum();
}

long sample_negative_binomial(Rng& rng, double mean, double dispersion) {
    if (!(dispersion > 0.0)) throw InputError("negative binomial dispersion must be positive");
    if (!(mean > 0.0)) throw InputError("negative binomial mean must be positive");
    const double rate = std::gamma_distribution<double>(dispersion, mean / dispersion)(rng);
    if (rate <= 0.0) return 0;
    return std::poisson_distribution<long>(rate)(rng);
}

BenchmarkInstance sample_compositional(const Matrix& omega, const Matrix& X, const Matrix& B,
                                       double depth_mean, double nu, std::uint64_t seed,
                                       GroundTruthGraph truth) {
    const Index n = X.rows(), p = omega.rows();
    if (!(nu > 0.0)) throw InputError("nu must be positive");
    if (B.rows() != X.cols() || B.cols() != p) throw InputError("B must be d x p");
    const auto llt = precision_factor(omega);
    Rng rng(seed);

    const Matrix mean = X * B;
    Matrix Y = Matrix::Zero(n, p);
    Matrix O(n, p);
    std::vector<long> depths(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Vector log_abundance = mean.row(i).transpose() + sample_latent(llt, rng);
        const Vector pi = softmax(log_abundance);

        long depth = sample_negative_binomial(rng, depth_mean, nu);
        if (depth == 0) depth = sample_negative_binomial(rng, depth_mean, nu);
        depth = std::max(depth, 1L);
        depths[static_cast<std::size_t>(i)] = depth;

        // Multinomial through sequential conditional binomials.
        long remaining = depth;
        double mass = 1.0;
        for (Index j = 0; j < p && remaining > 0; ++j) {
            long draw = remaining;
            if (j + 1 < p) {
                const double q = std::clamp(pi(j) / mass, 0.0, 1.0);
                draw = std::binomial_distribution<long>(remaining, q)(rng);
            }
            Y(i, j) = static_cast<double>(draw);
            remaining -= draw;
            mass -= pi(j);
            if (mass <= 0.0) mass = 0.0;
        }
        O.row(i).setConstant(std::log(static_cast<double>(depth)));
    }

    SimulationKnobs knobs;
    knobs.n = n;
    knobs.p = p;
    knobs.nu = nu;
    knobs.depth_mean = depth_mean;
    knobs.seed = seed;
    if (truth.adjacency.size() == 0) {
        truth.adjacency = (omega.array() != 0.0).cast<int>();
        truth.adjacency.diagonal().setZero();
    }
    return {std::move(truth), omega, CountDataset(std::move(Y), X, std::move(O)), std::move(depths), knobs};
}

AnovaDesign anova_design(Index n, int groups) {
    if (groups < 1 || n < groups) throw InputError("ANOVA design needs n >= groups >= 1");
    AnovaDesign out;
    out.X = Matrix::Zero(n, groups);
    out.balanced = n % groups == 0;
    // Contiguous blocks whose sizes differ by at most one.
    for (Index i = 0; i < n; ++i) {
        const int g = static_cast<int>(i * groups / n);
        out.X(i, g) = 1.0;
        out.group.push_back(g);
    }
    return out;
}

Matrix sample_coefficients(Index d, Index p, double b, std::uint64_t seed) {
    if (!(b >= 0.0)) throw InputError("b must be non-negative");
    if (b == 0.0) return Matrix::Zero(d, p);
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(-b, b);
    Matrix B(d, p);
    for (Index l = 0; l < d; ++l)
        for (Index j = 0; j < p; ++j) B(l, j) = unif(rng);
    return B;
}

} // namespace plnet
