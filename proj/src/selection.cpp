#include "plnet/selection.hpp"

#include "plnet/error.hpp"
#include "plnet/parallel.hpp"
#include "plnet/pln_core.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

namespace plnet {

int default_thread_budget() {
    if (const char* env = std::getenv("PLNET_THREADS")) {
        const int value = std::atoi(env);
        if (value > 0) return value;
    }
    return 1;
}

int default_subsample_size(Index n) {
    const auto rule = static_cast<Index>(std::floor(10.0 * std::sqrt(static_cast<double>(n))));
    if (rule < n) return static_cast<int>(rule);
    return static_cast<int>(std::floor(0.8 * static_cast<double>(n)));
}

double stability_from_frequencies(const Matrix& inclusion) {
    const Index p = inclusion.rows();
    if (p < 2) return 1.0;
    double total = 0.0;
    for (Index j = 0; j < p; ++j)
        for (Index k = j + 1; k < p; ++k) total += inclusion(j, k) * (1.0 - inclusion(j, k));
    const double pairs = 0.5 * static_cast<double>(p * (p - 1));
    return 1.0 - 2.0 * total / pairs;
}

std::size_t stars_select_index(const std::vector<double>& stability, double beta2) {
    if (stability.empty()) throw InputError("empty stability profile");
    const double threshold = 1.0 - beta2;
    std::size_t chosen = 0;
    for (std::size_t k = 0; k < stability.size(); ++k) {
        if (stability[k] < threshold) break;
        chosen = k;
    }
    return chosen;
}

StabilityProfile stars(const CountDataset& data, const std::vector<double>& grid,
                       const StarsConfig& cfg, const FitConfig& fit_cfg) {
    const Index n = data.n_samples(), p = data.n_variables();
    if (grid.empty()) throw InputError("StARS needs a non-empty grid");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] < grid[k - 1])) throw InputError("grid must be strictly decreasing");
    if (cfg.n_subsamples < 2) throw InputError("StARS needs at least 2 subsamples");
    if (!(cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) throw InputError("beta2 must lie in (0, 1)");
    const int m = cfg.subsample_size > 0 ? cfg.subsample_size : default_subsample_size(n);
    if (m >= n || m < 2) throw InputError("subsample size must satisfy 2 <= m < n");

    // Draws happen up front so the profile does not depend on scheduling.
    std::mt19937_64 rng(cfg.seed);
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    std::vector<std::vector<Index>> subsamples;
    for (int b = 0; b < cfg.n_subsamples; ++b) {
        std::vector<Index> rows = all;
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(static_cast<std::size_t>(m));
        std::sort(rows.begin(), rows.end());
        subsamples.push_back(std::move(rows));
    }

    using Support = std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>>;
    std::vector<Support> supports(subsamples.size());
    // Same per-sample penalty rho = 2 lambda / n on every subsample.
    PathOptions path_options;
    const double scale = static_cast<double>(m) / static_cast<double>(n);
    for (const double lambda : grid) path_options.grid.push_back(lambda * scale);
    parallel_for(subsamples.size(), cfg.threads, [&](std::size_t b) {
        const CountDataset sub = data.subset_rows(subsamples[b]);
        const PathResult path = fit_path(sub, path_options, fit_cfg);
        for (const FitResult& f : path.fits) supports[b].push_back(f.params.Omega.array() != 0.0);
    });

    StabilityProfile profile;
    profile.grid = grid;
    bool any_edge = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Matrix freq = Matrix::Zero(p, p);
        for (const Support& s : supports) freq += s[k].cast<double>();
        freq /= static_cast<double>(supports.size());
        freq.diagonal().setZero();
        any_edge = any_edge || freq.sum() > 0.0;
        profile.stability.push_back(stability_from_frequencies(freq));
        profile.inclusion.push_back(std::move(freq));
    }
    if (!any_edge) {
        profile.all_empty = true;
        profile.selected_index = 0;
    } else {
        profile.selected_index = stars_select_index(profile.stability, cfg.beta2);
    }
    profile.selected_lambda = grid[profile.selected_index];
    return profile;
}

double log_binomial(double total, double chosen) {
    if (chosen < 0.0 || chosen > total) throw InputError("invalid binomial coefficient");
    return std::lgamma(total + 1.0) - std::lgamma(chosen + 1.0) - std::lgamma(total - chosen + 1.0);
}

double ebic(const FitResult& fit, const CountDataset& data, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("EBIC gamma must lie in [0, 1]");
    const double n = static_cast<double>(data.n_samples());
    const double p = static_cast<double>(data.n_variables());
    const double d = static_cast<double>(data.n_covariates());
    const double edges = static_cast<double>(fit.n_edges);
    double value = -2.0 * fit.elbo + std::log(n) * (edges + p * d);
    if (gamma > 0.0) value += gamma * log_binomial(p * (p + 1.0) / 2.0, edges);
    return value;
}

std::size_t select_ebic_index(const std::vector<double>& ebic_values) {
    if (ebic_values.empty()) throw InputError("empty criterion list");
    std::size_t best = 0;
    for (std::size_t k = 1; k < ebic_values.size(); ++k)
        if (ebic_values[k] < ebic_values[best]) best = k;
    return best;
}

Selection select_ebic(const PathResult& path) {
    std::vector<double> values;
    for (const PathCriteria& c : path.criteria) values.push_back(c.ebic);
    const std::size_t k = select_ebic_index(values);
    return {k, path.grid[k], &path.fits[k]};
}

Selection select_stars(const PathResult& path, const StabilityProfile& profile) {
    if (profile.grid != path.grid) throw InputError("stability profile and path use different grids");
    const std::size_t k = profile.selected_index;
    return {k, path.grid[k], &path.fits[k]};
}

} // namespace plnet
