#include "plnet/benchmark.hpp"

#include "plnet/error.hpp"
#include "plnet/parallel.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace plnet {

std::string to_string(BenchMethod method) {
    switch (method) {
        case BenchMethod::pln_offset: return "pln_offset";
        case BenchMethod::pln_intercept: return "pln_intercept";
        case BenchMethod::pln_no_offset: return "pln_no_offset";
        case BenchMethod::glasso_log: return "glasso_log";
    }
    return "unknown";
}

BenchMethod parse_bench_method(const std::string& name) {
    if (name == "pln_offset") return BenchMethod::pln_offset;
    if (name == "pln_intercept") return BenchMethod::pln_intercept;
    if (name == "pln_no_offset") return BenchMethod::pln_no_offset;
    if (name == "glasso_log") return BenchMethod::glasso_log;
    throw InputError("unknown benchmark method '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined labels
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

BenchmarkInstance make_bench_instance(const BenchSettings& settings, double nu, int replicate) {
    const auto rep = static_cast<std::uint64_t>(replicate);
    GroundTruthGraph truth =
        gen_graph(settings.topology, settings.p, settings.graph, derive_seed(settings.seed, rep, 1));
    // Resample degenerate graphs so that ROC/PR curves are defined.
    for (std::uint64_t attempt = 2; truth.n_edges() == 0 && attempt < 100; ++attempt)
        truth = gen_graph(settings.topology, settings.p, settings.graph, derive_seed(settings.seed, rep, attempt * 1000));
    const Matrix omega = graph_to_precision(truth.adjacency, settings.u, settings.v);
    const Matrix X = settings.anova ? anova_design(settings.n, 3).X : Matrix::Ones(settings.n, 1);
    const Matrix B = sample_coefficients(X.cols(), settings.p, settings.b, derive_seed(settings.seed, rep, 2));
    const auto nu_label = static_cast<std::uint64_t>(nu * 1000.0);
    BenchmarkInstance inst = sample_compositional(omega, X, B, settings.depth_mean, nu,
                                                  derive_seed(settings.seed, rep, 3 + nu_label), truth);
    inst.knobs.b = settings.b;
    inst.knobs.u = settings.u;
    inst.knobs.v = settings.v;
    return inst;
}

EdgeRanking bench_ranking(const BenchmarkInstance& instance, BenchMethod method,
                          const BenchSettings& settings) {
    const CountDataset& data = instance.counts;
    PathOptions options;
    options.n_lambda = settings.n_lambda;
    options.min_ratio = settings.min_ratio;
    switch (method) {
        case BenchMethod::pln_offset:
            return path_to_ranking(fit_path(data, options, settings.fit));
        case BenchMethod::pln_intercept:
            return path_to_ranking(fit_path(
                data.with_design(Matrix::Ones(data.n_samples(), 1), {"(Intercept)"}), options, settings.fit));
        case BenchMethod::pln_no_offset:
            return path_to_ranking(fit_path(
                data.with_offsets(Matrix::Zero(data.n_samples(), data.n_variables())), options, settings.fit));
        case BenchMethod::glasso_log:
            return baseline_ranking(
                baseline_glasso_log(data, {}, settings.fit.glasso, settings.n_lambda, settings.min_ratio));
    }
    throw InputError("unknown benchmark method");
}

std::vector<BenchRow> run_bench(const BenchSettings& settings) {
    if (settings.replicates < 1) throw InputError("need at least one replicate");
    struct Cell {
        double nu;
        int replicate;
    };
    std::vector<Cell> cells;
    for (const double nu : settings.nus)
        for (int r = 0; r < settings.replicates; ++r) cells.push_back({nu, r});

    std::vector<std::vector<BenchRow>> per_cell(cells.size());
    parallel_for(cells.size(), settings.threads, [&](std::size_t c) {
        const BenchmarkInstance inst = make_bench_instance(settings, cells[c].nu, cells[c].replicate);
        for (const BenchMethod method : settings.methods) {
            const CurveSummary curve = roc_pr(bench_ranking(inst, method, settings), inst.truth);
            per_cell[c].push_back({method, settings.topology, settings.n, settings.p, cells[c].nu,
                                   settings.b, cells[c].replicate, curve.auc, curve.aupr});
        }
    });
    std::vector<BenchRow> rows;
    for (auto& cell : per_cell) rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InputError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
    std::map<std::tuple<int, double, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<std::tuple<int, double, double>> order;
    for (const BenchRow& r : rows) {
        const auto key = std::make_tuple(static_cast<int>(r.method), r.nu, r.b);
        if (!groups.contains(key)) order.push_back(key);
        groups[key].first.push_back(r.auc);
        groups[key].second.push_back(r.aupr);
    }
    std::vector<BenchSummary> out;
    for (const auto& key : order) {
        const auto& [aucs, auprs] = groups[key];
        out.push_back({static_cast<BenchMethod>(std::get<0>(key)), std::get<1>(key), std::get<2>(key),
                       static_cast<int>(aucs.size()), median(aucs), median(auprs)});
    }
    return out;
}

} // namespace plnet
