#pragma once

#include "plnet/dataset.hpp"
#include "plnet/fit.hpp"

#include <cstdint>
#include <vector>

namespace plnet {

struct StarsConfig {
    int n_subsamples = 50;
    int subsample_size = 0;  // 0 picks the default for n
    double beta2 = 0.05;     // 2 * beta
    std::uint64_t seed = 1;
    int threads = 1;
};

/// floor(10 sqrt(n)) when that is below n, otherwise floor(0.8 n).
int default_subsample_size(Index n);

struct StabilityProfile {
    std::vector<double> grid;
    std::vector<Matrix> inclusion;   // per lambda: p x p edge inclusion frequencies
    std::vector<double> stability;   // 1 - 2 * mean edge variance
    std::size_t selected_index = 0;
    double selected_lambda = 0.0;
    bool all_empty = false;          // every subsample network was empty at every lambda
};

/// stab = 1 - 2 mean_{j<k} p_jk (1 - p_jk) over all p(p-1)/2 pairs.
double stability_from_frequencies(const Matrix& inclusion);

/// Monotonized rule: scan from the largest lambda, stop before the first
/// stability value below 1 - beta2. Returns 0 if the first value already fails.
std::size_t stars_select_index(const std::vector<double>& stability, double beta2);

/// Subsamples of m rows are drawn without replacement from `seed`; each is
/// fitted along grid * m / n, which keeps the per-sample penalty 2 lambda / n
/// of the full-data grid.
StabilityProfile stars(const CountDataset& data, const std::vector<double>& grid,
                       const StarsConfig& cfg, const FitConfig& fit_cfg);

/// -2 J + log(n) (|E| + p d) + gamma log C(p(p+1)/2, |E|).
double ebic(const FitResult& fit, const CountDataset& data, double gamma);

/// Log binomial coefficient via log-gamma.
double log_binomial(double total, double chosen);

/// Argmin of EBIC over the path; ties go to the larger lambda.
std::size_t select_ebic_index(const std::vector<double>& ebic_values);

enum class SelectionMethod { stars, ebic };

struct Selection {
    std::size_t index = 0;
    double lambda = 0.0;
    const FitResult* fit = nullptr;
};

Selection select_ebic(const PathResult& path);
Selection select_stars(const PathResult& path, const StabilityProfile& profile);

} // namespace plnet
