#include "helpers.hpp"
#include "oracles.hpp"

#include "plnet/benchmark.hpp"
#include "plnet/error.hpp"
#include "plnet/evaluation.hpp"

#include <doctest.h>

#include <random>

using namespace plnet;

namespace {

GroundTruthGraph truth_from(Index p, const std::vector<std::pair<Index, Index>>& edges) {
    GroundTruthGraph g;
    g.adjacency = Adjacency::Zero(p, p);
    for (const auto& [a, b] : edges) g.adjacency(a, b) = g.adjacency(b, a) = 1;
    return g;
}

std::vector<oracle::Candidate> as_candidates(const EdgeRanking& r) {
    std::vector<oracle::Candidate> out;
    for (const auto& e : r.edges)
        out.push_back({static_cast<int>(e.source), static_cast<int>(e.target), e.score, e.tiebreak});
    return out;
}

// Random ranking over a random subset of the pairs, with frequent ties.
EdgeRanking random_ranking(std::mt19937_64& rng, Index p, std::size_t max_candidates) {
    std::vector<std::pair<Index, Index>> pairs;
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) pairs.emplace_back(j, k);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::uniform_int_distribution<std::size_t> count(0, std::min(max_candidates, pairs.size()));
    std::uniform_int_distribution<int> level(0, 4);
    EdgeRanking r;
    r.n_nodes = p;
    const std::size_t c = count(rng);
    for (std::size_t e = 0; e < c; ++e)
        r.edges.push_back({pairs[e].first, pairs[e].second, static_cast<double>(level(rng)), static_cast<double>(level(rng) % 2)});
    return r;
}

GroundTruthGraph random_truth(std::mt19937_64& rng, Index p) {
    for (;;) {
        GroundTruthGraph g;
        g.adjacency = Adjacency::Zero(p, p);
        std::bernoulli_distribution coin(0.35);
        for (Index j = 0; j < p; ++j)
            for (Index k = j + 1; k < p; ++k)
                if (coin(rng)) g.adjacency(j, k) = g.adjacency(k, j) = 1;
        const Index e = g.n_edges();
        if (e > 0 && e < p * (p - 1) / 2) return g;
    }
}

} // namespace

TEST_CASE("ranking from a path") {
    CHECK(rank_edges({}, {}).edges.empty());

    Matrix wide = Matrix::Identity(3, 3), narrow = Matrix::Identity(3, 3);
    wide(0, 1) = wide(1, 0) = -0.2;
    narrow(0, 1) = narrow(1, 0) = -0.3;
    narrow(1, 2) = narrow(2, 1) = 0.5;
    const std::vector<double> grid{2.0, 1.0};
    const std::vector<Matrix> omegas{wide, narrow};
    const EdgeRanking r = rank_edges(grid, omegas);
    REQUIRE(r.edges.size() == 2);
    CHECK(r.edges[0].source == 0);
    CHECK(r.edges[0].target == 1);
    CHECK(r.edges[0].score == 2.0);
    CHECK(r.edges[0].tiebreak == doctest::Approx(0.2));
    CHECK(r.edges[1].score == 1.0);
    CHECK(r.total_pairs() == 3);

    // input order of the path does not matter
    const std::vector<double> rev_grid{1.0, 2.0};
    const std::vector<Matrix> rev_omegas{narrow, wide};
    const EdgeRanking rr = rank_edges(rev_grid, rev_omegas);
    REQUIRE(rr.edges.size() == 2);
    CHECK(rr.edges[0].source == r.edges[0].source);
    CHECK(rr.edges[0].target == r.edges[0].target);

    // same score: larger |rho| first
    Matrix both = Matrix::Identity(3, 3);
    both(0, 2) = both(2, 0) = 0.1;
    both(1, 2) = both(2, 1) = -0.4;
    const std::vector<double> g1{1.0};
    const std::vector<Matrix> o1{both};
    const EdgeRanking tie = rank_edges(g1, o1);
    REQUIRE(tie.edges.size() == 2);
    CHECK(tie.edges[0].source == 1);
}

TEST_CASE("perfect and worst rankings") {
    const auto truth = truth_from(4, {{0, 1}, {2, 3}});
    EdgeRanking perfect;
    perfect.n_nodes = 4;
    perfect.edges = {{0, 1, 2.0, 0.0}, {2, 3, 1.0, 0.0}};
    const auto best = roc_pr(perfect, truth);
    CHECK(best.auc == doctest::Approx(1.0));
    CHECK(best.aupr == doctest::Approx(1.0));

    EdgeRanking worst;
    worst.n_nodes = 4;
    double s = 10.0;
    for (Index j = 0; j < 4; ++j)
        for (Index k = j + 1; k < 4; ++k)
            if (!truth.adjacency(j, k)) worst.edges.push_back({j, k, s--, 0.0});
    CHECK(roc_pr(worst, truth).auc == doctest::Approx(0.0));
    CHECK(roc_pr(worst, truth).roc.back().x == 1.0);
    CHECK(roc_pr(worst, truth).roc.back().y == 1.0);
}

TEST_CASE("three-candidate example matches enumeration") {
    // pairs of 3 nodes: e1 = (0,1), e2 = (0,2), e3 = (1,2); truth {e1}
    const auto truth = truth_from(3, {{0, 1}});
    EdgeRanking r;
    r.n_nodes = 3;
    r.edges = {{0, 2, 3.0, 0.0}, {0, 1, 2.0, 0.0}, {1, 2, 1.0, 0.0}};
    const auto curve = roc_pr(r, truth);
    const auto brute = oracle::brute_force_curve(as_candidates(r), truth.adjacency);
    CHECK(curve.auc == doctest::Approx(brute.auc).epsilon(1e-15));
    CHECK(curve.aupr == doctest::Approx(brute.aupr).epsilon(1e-15));
    // by hand: ROC (0,0) (.5,0) (.5,1) (1,1) -> 0.5; PR (0,1) (0,0) (1,.5) (1,1/3) -> 0.25
    CHECK(curve.auc == doctest::Approx(0.5));
    CHECK(curve.aupr == doctest::Approx(0.25));
}

TEST_CASE("curves agree with brute-force enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = 3 + static_cast<Index>(trial % 3);  // 3 to 10 candidate pairs
        const auto truth = random_truth(rng, p);
        const auto ranking = random_ranking(rng, p, 10);
        const auto curve = roc_pr(ranking, truth);
        const auto brute = oracle::brute_force_curve(as_candidates(ranking), truth.adjacency);
        CHECK(curve.auc == doctest::Approx(brute.auc).epsilon(1e-12));
        CHECK(curve.aupr == doctest::Approx(brute.aupr).epsilon(1e-12));
        CHECK(curve.auc == doctest::Approx(oracle::mann_whitney_auc(as_candidates(ranking), truth.adjacency)).epsilon(1e-12));
        REQUIRE(curve.roc.size() == brute.roc.size());
        for (std::size_t k = 0; k < brute.roc.size(); ++k) {
            CHECK(curve.roc[k].x == doctest::Approx(brute.roc[k].first));
            CHECK(curve.roc[k].y == doctest::Approx(brute.roc[k].second));
            CHECK(curve.pr[k].y == doctest::Approx(brute.pr[k].second));
        }
    }
}

TEST_CASE("reversal and rescaling") {
    std::mt19937_64 rng(7);
    const auto truth = random_truth(rng, 6);
    EdgeRanking r, rev, scaled;
    r.n_nodes = rev.n_nodes = scaled.n_nodes = 6;
    double s = 0.0;
    for (Index j = 0; j < 6; ++j)
        for (Index k = j + 1; k < 6; ++k, s += 1.0) {
            const double score = std::fmod(s * 7.0, 15.0);
            r.edges.push_back({j, k, score, 0.0});
            rev.edges.push_back({j, k, -score, 0.0});
            scaled.edges.push_back({j, k, std::exp(score / 3.0), 0.0});
        }
    CHECK(roc_pr(r, truth).auc + roc_pr(rev, truth).auc == doctest::Approx(1.0));
    CHECK(roc_pr(r, truth).auc == doctest::Approx(roc_pr(scaled, truth).auc));
    CHECK(roc_pr(r, truth).aupr == doctest::Approx(roc_pr(scaled, truth).aupr));
}

TEST_CASE("degenerate truth is rejected") {
    EdgeRanking r;
    r.n_nodes = 3;
    CHECK_THROWS_AS(roc_pr(r, truth_from(3, {})), InputError);
    CHECK_THROWS_AS(roc_pr(r, truth_from(3, {{0, 1}, {0, 2}, {1, 2}})), InputError);
    EdgeRanking dup;
    dup.n_nodes = 3;
    dup.edges = {{0, 1, 1.0, 0.0}, {0, 1, 1.0, 0.0}, {0, 2, 0.5, 0.0}, {1, 2, 0.2, 0.0}};
    CHECK_THROWS_AS(roc_pr(dup, truth_from(3, {{0, 1}})), InputError);
}

TEST_CASE("pointwise confusion") {
    const auto truth = truth_from(5, {{0, 1}, {1, 2}, {3, 4}});
    const auto empty = confusion_at(Matrix::Identity(5, 5), truth);
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.fallout == 0.0);
    CHECK(f1_score(empty) == 0.0);
    const auto full = confusion_at(Matrix::Ones(5, 5), truth);
    CHECK(full.recall == 1.0);
    CHECK(full.fallout == 1.0);
    // estimate {01, 02, 34, 24}: TP {01, 34}, FP {02, 24}; 7 negatives
    Matrix est = Matrix::Identity(5, 5);
    for (const auto& [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {3, 4}, {2, 4}}) est(a, b) = est(b, a) = 0.1;
    const auto c = confusion_at(est, truth);
    CHECK(c.true_positives == 2);
    CHECK(c.false_positives == 2);
    CHECK(c.precision == doctest::Approx(0.5));
    CHECK(c.recall == doctest::Approx(2.0 / 3.0));
    CHECK(c.fallout == doctest::Approx(2.0 / 7.0));
    CHECK(f1_score(c) == doctest::Approx(2.0 * 0.5 * (2.0 / 3.0) / (0.5 + 2.0 / 3.0)));
}

TEST_CASE("log-transform baseline") {
    BenchSettings s;
    s.n = 30;
    s.p = 8;
    const auto inst = make_bench_instance(s, 10.0, 2);
    const auto base = baseline_glasso_log(inst.counts, {}, {}, 10, 0.01);
    REQUIRE(base.omegas.size() == 10);
    Matrix off = base.omegas.front();
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() == 0.0);
    CHECK(base.covariance.diagonal().isApprox(Vector::Ones(8)));
    const auto again = baseline_glasso_log(inst.counts, {}, {}, 10, 0.01);
    CHECK(again.omegas.back() == base.omegas.back());
    // offsets are ignored
    const auto shifted = baseline_glasso_log(inst.counts.with_offsets(Matrix::Zero(30, 8)), {}, {}, 10, 0.01);
    CHECK(shifted.covariance == base.covariance);
    const auto ranking = baseline_ranking(base);
    CHECK(ranking.n_nodes == 8);
    CHECK_FALSE(ranking.edges.empty());
}
