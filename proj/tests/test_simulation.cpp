#include "plnet/benchmark.hpp"
#include "plnet/error.hpp"
#include "plnet/pln_core.hpp"
#include "plnet/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <queue>

using namespace plnet;

namespace {

bool connected(const Adjacency& a) {
    const Index p = a.rows();
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    std::queue<Index> q;
    q.push(0);
    seen[0] = true;
    Index count = 1;
    while (!q.empty()) {
        const Index j = q.front();
        q.pop();
        for (Index k = 0; k < p; ++k)
            if (a(j, k) && !seen[static_cast<std::size_t>(k)]) {
                seen[static_cast<std::size_t>(k)] = true;
                ++count;
                q.push(k);
            }
    }
    return count == p;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("graph generators") {
    const auto two = gen_graph(Topology::erdos_renyi, 2, {1.0}, 1);
    CHECK(two.n_edges() == 1);
    CHECK(two.adjacency(0, 1) == 1);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto pa = gen_graph(Topology::preferential_attachment, 30, {}, seed);
        CHECK(pa.n_edges() == 29);
        CHECK(connected(pa.adjacency));
        for (const auto topo : {Topology::erdos_renyi, Topology::preferential_attachment, Topology::affiliation}) {
            const auto g = gen_graph(topo, 25, {}, seed);
            CHECK(g.adjacency == g.adjacency.transpose());
            CHECK(g.adjacency.diagonal().cwiseAbs().maxCoeff() == 0);
            CHECK(g.topology == topo);
        }
    }
    CHECK(gen_graph(Topology::affiliation, 9, {-1.0, 1, 3, 1.0, 0.0}, 3).n_edges() == 9);
    CHECK_THROWS_AS(gen_graph(Topology::erdos_renyi, 1, {}, 1), InputError);
    CHECK_THROWS_AS(gen_graph(Topology::erdos_renyi, 5, {1.5}, 1), InputError);
    CHECK(parse_topology("scale_free") == Topology::preferential_attachment);
    CHECK(parse_topology(to_string(Topology::affiliation)) == Topology::affiliation);
    CHECK_THROWS_AS(parse_topology("lattice"), InputError);
}

TEST_CASE("ER mean degree is about two") {
    std::vector<double> degrees;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        degrees.push_back(2.0 * static_cast<double>(gen_graph(Topology::erdos_renyi, 50, {}, seed).n_edges()) / 50.0);
    CHECK(mean_of(degrees) == doctest::Approx(2.0 * 49.0 / 50.0).epsilon(0.05));
}

TEST_CASE("preferential attachment has heavier-tailed degrees than ER") {
    std::vector<double> pa_max, er_max;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        pa_max.push_back(gen_graph(Topology::preferential_attachment, 200, {}, seed).adjacency.rowwise().sum().maxCoeff());
        er_max.push_back(gen_graph(Topology::erdos_renyi, 200, {}, seed).adjacency.rowwise().sum().maxCoeff());
    }
    CHECK(median(pa_max) > median(er_max));
}

TEST_CASE("precision from a graph") {
    CHECK(graph_to_precision(Adjacency::Zero(4, 4)).isApprox(0.1 * Matrix::Identity(4, 4)));
    Adjacency one(2, 2);
    one << 0, 1, 1, 0;
    Matrix expected{{0.4, 0.3}, {0.3, 0.4}};
    CHECK(graph_to_precision(one).isApprox(expected, 1e-14));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = gen_graph(Topology::erdos_renyi, 15, {0.3}, seed);
        const Matrix omega = graph_to_precision(g.adjacency, 0.1, 0.3);
        const Eigen::SelfAdjointEigenSolver<Matrix> es(omega);
        CHECK(std::abs(es.eigenvalues().minCoeff() - 0.1) < 1e-10);
        for (Index j = 0; j < 15; ++j)
            for (Index k = 0; k < 15; ++k)
                if (j != k) CHECK((omega(j, k) != 0.0) == (g.adjacency(j, k) != 0));
    }
    Adjacency bad = Adjacency::Zero(3, 3);
    bad(0, 1) = 1;
    CHECK_THROWS_AS(graph_to_precision(bad), InputError);
}

TEST_CASE("PLN sampler") {
    const Index n = 20000, p = 3;
    Matrix omega{{1.5, -0.4, 0.0}, {-0.4, 1.2, 0.3}, {0.0, 0.3, 2.0}};
    const Matrix B = Eigen::RowVector3d(1.0, 0.5, 1.5);
    const auto data = sample_pln(Matrix::Ones(n, 1), B, Matrix::Zero(n, p), omega, 9);
    const Matrix& Y = data.counts();
    CHECK(Y.minCoeff() >= 0.0);
    CHECK((Y.array() == Y.array().floor()).all());
    const auto moments = pln_moments(B.transpose(), omega.inverse());
    for (Index j = 0; j < p; ++j) {
        const double mean = Y.col(j).mean();
        const double se = std::sqrt(moments.variance(j) / static_cast<double>(n));
        CHECK(std::abs(mean - moments.mean(j)) < 4.0 * se);
    }
    // near-degenerate latent layer: Poisson with the fixed means
    const auto flat = sample_pln(Matrix::Ones(n, 1), B, Matrix::Zero(n, p), 1e8 * Matrix::Identity(p, p), 10);
    for (Index j = 0; j < p; ++j) {
        const double lam = std::exp(B(0, j));
        CHECK(std::abs(flat.counts().col(j).mean() - lam) < 4.0 * std::sqrt(lam / static_cast<double>(n)));
    }
    const auto again = sample_pln(Matrix::Ones(n, 1), B, Matrix::Zero(n, p), omega, 9);
    CHECK(again.counts() == Y);
}

TEST_CASE("softmax of log-abundances") {
    Vector a(5);
    a << 8, 8, 8, 9, 2;
    const Vector pi = softmax(a);
    double total = 0.0;
    for (int j = 0; j < 5; ++j) total += std::exp(a(j));
    for (int j = 0; j < 5; ++j) CHECK(pi(j) == doctest::Approx(std::exp(a(j)) / total).epsilon(1e-14));
    CHECK(pi.sum() == doctest::Approx(1.0));
    Vector big(2);
    big << 1000.0, 1000.0;
    CHECK(softmax(big)(0) == doctest::Approx(0.5));
}

TEST_CASE("negative binomial depths") {
    for (const double nu : {2.0, 10.0, 100.0}) {
        Rng rng(static_cast<std::uint64_t>(nu));
        std::vector<double> draws;
        for (int i = 0; i < 10000; ++i) draws.push_back(static_cast<double>(sample_negative_binomial(rng, 1000.0, nu)));
        const double target_var = 1000.0 + 1e6 / nu;
        CHECK(std::abs(mean_of(draws) - 1000.0) < 3.0 * std::sqrt(target_var / 10000.0));
        CHECK(std::abs(var_of(draws) / target_var - 1.0) < 0.10);
    }
    Rng rng(77);
    std::vector<double> draws;
    for (int i = 0; i < 10000; ++i) draws.push_back(static_cast<double>(sample_negative_binomial(rng, 1000.0, 1e6)));
    CHECK(std::abs(var_of(draws) / 1000.0 - 1.0) < 0.05);
    CHECK_THROWS_AS(sample_negative_binomial(rng, 1000.0, 0.0), InputError);
}

TEST_CASE("compositional instances") {
    const auto g = gen_graph(Topology::erdos_renyi, 8, {}, 4);
    const Matrix omega = graph_to_precision(g.adjacency);
    const Matrix X = anova_design(30, 3).X;
    const Matrix B = sample_coefficients(3, 8, 1.0, 5);
    const auto inst = sample_compositional(omega, X, B, 1000.0, 2.0, 6, g);
    const auto& data = inst.counts;
    for (Index i = 0; i < 30; ++i) {
        const auto N = static_cast<double>(inst.depths[static_cast<std::size_t>(i)]);
        CHECK(N >= 1.0);
        CHECK(data.counts().row(i).sum() == N);
        CHECK((data.offsets().row(i).array() == std::log(N)).all());
    }
    CHECK(data.design() == X);
    CHECK(inst.knobs.nu == 2.0);
    CHECK(inst.truth.adjacency == g.adjacency);
    const auto again = sample_compositional(omega, X, B, 1000.0, 2.0, 6, g);
    CHECK(again.counts.counts() == data.counts());
    CHECK_THROWS_AS(sample_compositional(omega, X, B, 1000.0, 0.0, 6, g), InputError);
}

TEST_CASE("ANOVA design") {
    const auto six = anova_design(6);
    CHECK(six.balanced);
    CHECK(six.X.colwise().sum() == Eigen::RowVector3d(2, 2, 2));
    CHECK((six.X.rowwise().sum().array() == 1.0).all());
    CHECK(Eigen::FullPivLU<Matrix>(six.X).rank() == 3);
    const auto seven = anova_design(7);
    CHECK_FALSE(seven.balanced);
    CHECK(seven.X.colwise().sum().maxCoeff() - seven.X.colwise().sum().minCoeff() <= 1.0);
}

TEST_CASE("uniform coefficients") {
    CHECK(sample_coefficients(3, 4, 0.0, 1).cwiseAbs().maxCoeff() == 0.0);
    const Matrix B = sample_coefficients(100, 1000, 2.0, 2);
    CHECK(B.cwiseAbs().maxCoeff() < 2.0);
    CHECK(std::abs(B.mean()) < 4.0 * std::sqrt(4.0 / 3.0 / 1e5));
    const double var = (B.array() - B.mean()).square().sum() / (1e5 - 1.0);
    // Var(x^2) for U(-b, b) is 4 b^4 / 45
    CHECK(std::abs(var - 4.0 / 3.0) < 4.0 * std::sqrt(4.0 * 16.0 / 45.0 / 1e5));
}

TEST_CASE("benchmark instances pair replicates across nu") {
    BenchSettings s;
    s.n = 20;
    s.p = 10;
    const auto a = make_bench_instance(s, 100.0, 3);
    const auto b = make_bench_instance(s, 2.0, 3);
    CHECK(a.truth.adjacency == b.truth.adjacency);
    CHECK(a.omega == b.omega);
    CHECK(a.truth.n_edges() > 0);
    CHECK(make_bench_instance(s, 2.0, 3).counts.counts() == b.counts.counts());
    CHECK(make_bench_instance(s, 2.0, 4).truth.adjacency != b.truth.adjacency);
}
