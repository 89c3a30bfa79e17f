#pragma once

#include "plnet/evaluation.hpp"
#include "plnet/fit.hpp"
#include "plnet/simulation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace plnet {

/// Scoring variants run on each simulated instance.
enum class BenchMethod {
    pln_offset,     // PLN network with the instance design and log-depth offsets
    pln_intercept,  // PLN network with an intercept-only design, log-depth offsets
    pln_no_offset,  // PLN network with the instance design, zero offsets
    glasso_log,     // graphical lasso on log(1 + Y) residuals, offsets ignored
};

std::string to_string(BenchMethod method);
BenchMethod parse_bench_method(const std::string& name);

struct BenchSettings {
    Topology topology = Topology::erdos_renyi;
    GraphParams graph{};
    Index n = 40;
    Index p = 20;
    std::vector<double> nus{100.0, 10.0, 2.0};
    double b = 1.0;
    bool anova = false;  // three-group ANOVA design instead of an intercept
    double u = 0.1;
    double v = 0.3;
    double depth_mean = 1000.0;
    int replicates = 20;
    std::uint64_t seed = 1;
    int n_lambda = 30;
    double min_ratio = 1e-2;
    std::vector<BenchMethod> methods{BenchMethod::pln_offset, BenchMethod::glasso_log};
    FitConfig fit{};
    int threads = 1;
};

struct BenchRow {
    BenchMethod method;
    Topology topology;
    Index n;
    Index p;
    double nu;
    double b;
    int replicate;
    double auc;
    double aupr;
};

struct BenchSummary {
    BenchMethod method;
    double nu;
    double b;
    int replicates;
    double median_auc;
    double median_aupr;
};

/// Derives independent stream seeds from a base seed and labels.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Instance for one (nu, replicate) cell. Graph, coefficients and design depend
/// only on the replicate, so settings differing in nu are paired.
BenchmarkInstance make_bench_instance(const BenchSettings& settings, double nu, int replicate);

/// Edge ranking produced by `method` on an instance.
EdgeRanking bench_ranking(const BenchmarkInstance& instance, BenchMethod method,
                          const BenchSettings& settings);

std::vector<BenchRow> run_bench(const BenchSettings& settings);
std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

double median(std::vector<double> values);

} // namespace plnet
