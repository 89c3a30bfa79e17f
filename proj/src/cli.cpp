#include "plnet/cli.hpp"

#include "plnet/benchmark.hpp"
#include "plnet/error.hpp"
#include "plnet/io.hpp"
#include "plnet/parallel.hpp"
#include "plnet/pln_core.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace plnet::cli {

namespace fs = std::filesystem;

namespace {

struct DataFlags {
    std::string counts;
    std::string covariates;
    std::string offsets;
    std::string offset_mode = "none";
    bool no_intercept = false;

    void add(CLI::App* app) {
        app->add_option("--counts", counts, "count table CSV (rows: samples)")->required();
        app->add_option("--covariates", covariates, "covariate table CSV");
        app->add_option("--offsets", offsets, "offset table CSV (requires --offset-mode file)");
        app->add_option("--offset-mode", offset_mode, "none | total_counts | file")
            ->check(CLI::IsMember({"none", "total_counts", "file"}));
        app->add_flag("--no-intercept", no_intercept, "omit the intercept column");
    }

    CountDataset load() const {
        DatasetSources src;
        src.counts = counts;
        if (!covariates.empty()) src.covariates = fs::path(covariates);
        if (!offsets.empty()) src.offsets = fs::path(offsets);
        src.offset_mode = parse_offset_mode(offset_mode);
        src.intercept = !no_intercept;
        return read_dataset(src);
    }
};

struct OptimFlags {
    double outer_tol = 1e-4;
    int outer_max_iter = 50;
    double vstep_tol = 1e-6;
    int vstep_max_iter = 500;

    void add(CLI::App* app) {
        app->add_option("--outer-tol", outer_tol, "relative change of the penalized ELBO")->capture_default_str();
        app->add_option("--max-iter", outer_max_iter, "outer iteration cap")->capture_default_str();
        app->add_option("--vstep-tol", vstep_tol, "projected-gradient tolerance")->capture_default_str();
        app->add_option("--vstep-max-iter", vstep_max_iter, "V-step iteration cap")->capture_default_str();
    }

    FitConfig config(double lambda) const {
        FitConfig cfg;
        cfg.lambda = lambda;
        cfg.outer_tol = outer_tol;
        cfg.outer_max_iter = outer_max_iter;
        cfg.vstep_tol = vstep_tol;
        cfg.vstep_max_iter = vstep_max_iter;
        validate(cfg);
        return cfg;
    }
};

struct GridFlags {
    std::vector<double> lambdas;
    int n_lambda = 30;
    double min_ratio = 1e-3;

    void add(CLI::App* app, bool explicit_grid = true) {
        if (explicit_grid) app->add_option("--lambdas", lambdas, "explicit decreasing grid")->delimiter(',');
        app->add_option("--n-lambda", n_lambda, "grid size")->capture_default_str();
        app->add_option("--min-ratio", min_ratio, "smallest lambda / lambda_max")->capture_default_str();
    }

    PathOptions options(double gamma) const {
        if (n_lambda < 1) throw InputError("--n-lambda must be at least 1");
        if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw InputError("--min-ratio must lie in (0, 1)");
        PathOptions opt;
        opt.grid = lambdas;
        opt.n_lambda = n_lambda;
        opt.min_ratio = min_ratio;
        opt.ebic_gamma = gamma;
        return opt;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out << text;
}

int cmd_fit(const DataFlags& data_flags, const OptimFlags& optim, double lambda, const std::string& outdir,
            std::ostream& out) {
    const CountDataset data = data_flags.load();
    const FitResult result = fit(data, optim.config(lambda));
    write_results(outdir, result, data);
    out << "lambda " << format_double(result.lambda) << " edges " << result.n_edges << " iterations "
        << result.iterations << (result.converged ? "" : " (not converged)") << '\n';
    return ok;
}

int cmd_path(const DataFlags& data_flags, const OptimFlags& optim, const GridFlags& grid, const std::string& outdir,
             std::ostream& out) {
    const CountDataset data = data_flags.load();
    const PathResult path = fit_path(data, grid.options(0.0), optim.config(0.0));
    write_results(outdir, path, data);
    out << "fitted " << path.grid.size() << " lambdas from " << format_double(path.grid.front()) << " to "
        << format_double(path.grid.back()) << '\n';
    return ok;
}

struct SelectFlags {
    std::string method = "stars";
    std::uint64_t seed = 1;
    int subsamples = 50;
    int subsample_size = 0;
    double beta2 = 0.05;
    double gamma = 0.0;
};

int cmd_select(const DataFlags& data_flags, const OptimFlags& optim, const GridFlags& grid, const SelectFlags& sel,
               int threads, const std::string& outdir, std::ostream& out, std::ostream& err) {
    if (!(sel.gamma >= 0.0 && sel.gamma <= 1.0)) throw InputError("--gamma must lie in [0, 1]");
    const CountDataset data = data_flags.load();
    const FitConfig cfg = optim.config(0.0);
    const PathResult path = fit_path(data, grid.options(sel.gamma), cfg);

    Selection choice;
    std::optional<StabilityProfile> profile;
    if (sel.method == "stars") {
        StarsConfig sc;
        sc.n_subsamples = sel.subsamples;
        sc.subsample_size = sel.subsample_size;
        sc.beta2 = sel.beta2;
        sc.seed = sel.seed;
        sc.threads = threads;
        profile = stars(data, path.grid, sc, cfg);
        choice = select_stars(path, *profile);
        if (profile->all_empty) err << "warning: every subsample network is empty; selecting the largest lambda\n";
    } else {
        choice = select_ebic(path);
    }

    write_results(outdir, path, data, profile ? &*profile : nullptr);
    if (profile) write_results(outdir, *profile);
    write_results(fs::path(outdir) / "selected", *choice.fit, data);
    std::ostringstream summary;
    summary << "method,index,lambda,n_edges\n"
            << sel.method << ',' << choice.index << ',' << format_double(choice.lambda) << ','
            << choice.fit->n_edges << '\n';
    write_text(fs::path(outdir) / "selection.csv", summary.str());
    out << "selected lambda " << format_double(choice.lambda) << " (" << sel.method << ") with "
        << choice.fit->n_edges << " edges\n";
    return ok;
}

struct SimFlags {
    std::string topology = "erdos_renyi";
    Index n = 40;
    Index p = 20;
    double nu = 10.0;
    double b = 1.0;
    bool anova = false;
    double u = 0.1;
    double v = 0.3;
    double depth_mean = 1000.0;
    std::uint64_t seed = 1;

    void add(CLI::App* app, bool single_nu) {
        app->add_option("--topology", topology, "erdos_renyi | preferential_attachment | affiliation")
            ->capture_default_str();
        app->add_option("--n", n, "samples")->capture_default_str();
        app->add_option("--p", p, "variables")->capture_default_str();
        if (single_nu) app->add_option("--nu", nu, "depth dispersion")->capture_default_str();
        app->add_option("--b", b, "coefficient range U(-b, b)")->capture_default_str();
        app->add_flag("--anova", anova, "three-group ANOVA design");
        app->add_option("--u", u, "diagonal shift")->capture_default_str();
        app->add_option("--v", v, "edge strength")->capture_default_str();
        app->add_option("--depth-mean", depth_mean, "mean sequencing depth")->capture_default_str();
        app->add_option("--seed", seed, "random seed")->capture_default_str();
    }

    BenchSettings settings() const {
        if (n < 2 || p < 2) throw InputError("--n and --p must be at least 2");
        if (!(depth_mean > 0.0)) throw InputError("--depth-mean must be positive");
        BenchSettings s;
        s.topology = parse_topology(topology);
        s.n = n;
        s.p = p;
        s.b = b;
        s.anova = anova;
        s.u = u;
        s.v = v;
        s.depth_mean = depth_mean;
        s.seed = seed;
        return s;
    }
};

int cmd_simulate(const SimFlags& flags, const std::string& outdir, std::ostream& out) {
    if (!(flags.nu > 0.0)) throw InputError("--nu must be positive");
    const BenchSettings settings = flags.settings();
    const BenchmarkInstance inst = make_bench_instance(settings, flags.nu, 0);
    const CountDataset& data = inst.counts;
    const fs::path dir(outdir);
    fs::create_directories(dir);

    write_matrix_csv(dir / "counts.csv", data.counts(), data.sample_ids(), data.variable_ids(), "sample", true);
    std::ostringstream cov;
    cov << "sample" << (settings.anova ? ",group" : "") << '\n';
    const AnovaDesign design = anova_design(settings.n, 3);
    for (Index i = 0; i < data.n_samples(); ++i) {
        cov << data.sample_ids()[static_cast<std::size_t>(i)];
        if (settings.anova) cov << ",G" << design.group[static_cast<std::size_t>(i)] + 1;
        cov << '\n';
    }
    write_text(dir / "covariates.csv", cov.str());
    write_matrix_csv(dir / "offsets.csv", data.offsets(), data.sample_ids(), data.variable_ids(), "sample");
    write_truth_csv(dir / "truth_edges.csv", inst.truth, data.variable_ids());

    nlohmann::json omega = nlohmann::json::array();
    for (Index i = 0; i < inst.omega.rows(); ++i)
        for (Index j = 0; j < inst.omega.cols(); ++j) omega.push_back(inst.omega(i, j));
    const nlohmann::json doc{
        {"format", "plnet-instance"},
        {"version", 1},
        {"topology", to_string(settings.topology)},
        {"n", settings.n},
        {"p", settings.p},
        {"nu", flags.nu},
        {"b", settings.b},
        {"anova", settings.anova},
        {"u", settings.u},
        {"v", settings.v},
        {"depth_mean", settings.depth_mean},
        {"seed", settings.seed},
        {"n_edges", inst.truth.n_edges()},
        {"depths", inst.depths},
        {"Omega", {{"rows", inst.omega.rows()}, {"cols", inst.omega.cols()}, {"data", std::move(omega)}}},
    };
    write_text(dir / "instance.json", doc.dump(2) + "\n");
    out << "simulated " << settings.n << " x " << settings.p << " counts with " << inst.truth.n_edges()
        << " true edges\n";
    return ok;
}

std::vector<std::string> header_nodes(const std::string& counts) {
    const CsvTable table = read_csv(counts);
    if (table.header.size() < 3) throw InputError("counts file needs at least two variables");
    return {table.header.begin() + 1, table.header.end()};
}

int cmd_evaluate(const std::string& ranking_path, const std::string& truth_path, const std::string& counts,
                 const std::string& model_path, const std::string& outdir, std::ostream& out) {
    const auto nodes = header_nodes(counts);
    const EdgeRanking ranking = read_ranking_csv(ranking_path, nodes);
    const GroundTruthGraph truth = read_truth_csv(truth_path, nodes);
    const CurveSummary curve = roc_pr(ranking, truth);
    const fs::path dir(outdir);

    std::ostringstream metrics;
    metrics << "auc,aupr,n_candidates,n_true";
    std::optional<Confusion> conf;
    if (!model_path.empty()) {
        const StoredModel model = read_model_json(model_path);
        if (model.variables != nodes) throw InputError("model variables do not match the counts header");
        conf = confusion_at(model.params.Omega, truth);
        metrics << ",precision,recall,fallout,f1";
    }
    metrics << '\n'
            << format_double(curve.auc) << ',' << format_double(curve.aupr) << ',' << ranking.edges.size() << ','
            << truth.n_edges();
    if (conf)
        metrics << ',' << format_double(conf->precision) << ',' << format_double(conf->recall) << ','
                << format_double(conf->fallout) << ',' << format_double(f1_score(*conf));
    metrics << '\n';
    write_text(dir / "metrics.csv", metrics.str());
    write_curve_csv(dir / "roc.csv", curve.roc, "fpr", "tpr");
    write_curve_csv(dir / "pr.csv", curve.pr, "recall", "precision");
    out << "auc " << format_double(curve.auc) << " aupr " << format_double(curve.aupr) << '\n';
    return ok;
}

int cmd_bench(const SimFlags& flags, const std::vector<double>& nus, int replicates,
              const std::vector<std::string>& methods, const GridFlags& grid, const OptimFlags& optim, int threads,
              const std::string& outdir, std::ostream& out) {
    BenchSettings settings = flags.settings();
    if (nus.empty() || std::any_of(nus.begin(), nus.end(), [](double nu) { return !(nu > 0.0); }))
        throw InputError("--nus must be positive");
    settings.nus = nus;
    settings.replicates = replicates;
    settings.methods.clear();
    for (const auto& m : methods) settings.methods.push_back(parse_bench_method(m));
    (void)grid.options(0.0);
    settings.n_lambda = grid.n_lambda;
    settings.min_ratio = grid.min_ratio;
    settings.fit = optim.config(0.0);
    settings.threads = threads;

    const auto rows = run_bench(settings);
    std::ostringstream table;
    table << "method,topology,n,p,nu,b,replicate,auc,aupr\n";
    for (const BenchRow& r : rows)
        table << to_string(r.method) << ',' << to_string(r.topology) << ',' << r.n << ',' << r.p << ','
              << format_double(r.nu) << ',' << format_double(r.b) << ',' << r.replicate << ','
              << format_double(r.auc) << ',' << format_double(r.aupr) << '\n';
    std::ostringstream summary;
    summary << "method,nu,b,replicates,median_auc,median_aupr\n";
    for (const BenchSummary& s : summarize(rows)) {
        summary << to_string(s.method) << ',' << format_double(s.nu) << ',' << format_double(s.b) << ','
                << s.replicates << ',' << format_double(s.median_auc) << ',' << format_double(s.median_aupr)
                << '\n';
        out << to_string(s.method) << " nu=" << s.nu << " median AUC " << s.median_auc << " AUPR "
            << s.median_aupr << '\n';
    }
    write_text(fs::path(outdir) / "bench.csv", table.str());
    write_text(fs::path(outdir) / "summary.csv", summary.str());
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse network inference for multivariate counts (Poisson log-normal model)", "plnet"};
    app.require_subcommand(1);

    DataFlags data_flags;
    OptimFlags optim;
    GridFlags grid;
    std::string outdir = ".";
    int threads = default_thread_budget();
    double lambda = 0.0;

    auto* fit_cmd = app.add_subcommand("fit", "fit the network at a single lambda");
    data_flags.add(fit_cmd);
    optim.add(fit_cmd);
    fit_cmd->add_option("--lambda", lambda, "penalty level")->required();
    fit_cmd->add_option("--out", outdir, "output directory")->required();

    auto* path_cmd = app.add_subcommand("path", "fit a warm-started regularization path");
    data_flags.add(path_cmd);
    optim.add(path_cmd);
    grid.add(path_cmd);
    path_cmd->add_option("--out", outdir, "output directory")->required();

    SelectFlags sel;
    auto* select_cmd = app.add_subcommand("select", "fit a path and choose lambda");
    data_flags.add(select_cmd);
    optim.add(select_cmd);
    grid.add(select_cmd);
    select_cmd->add_option("--method", sel.method, "stars | ebic")
        ->check(CLI::IsMember({"stars", "ebic"}))
        ->capture_default_str();
    select_cmd->add_option("--seed", sel.seed, "subsampling seed")->capture_default_str();
    select_cmd->add_option("--subsamples", sel.subsamples, "number of subsamples")->capture_default_str();
    select_cmd->add_option("--subsample-size", sel.subsample_size, "rows per subsample (0: default rule)");
    select_cmd->add_option("--beta2", sel.beta2, "instability threshold")->capture_default_str();
    select_cmd->add_option("--gamma", sel.gamma, "EBIC gamma")->capture_default_str();
    select_cmd->add_option("--threads", threads, "worker threads");
    select_cmd->add_option("--out", outdir, "output directory")->required();

    SimFlags sim;
    auto* sim_cmd = app.add_subcommand("simulate", "draw a compositional benchmark instance");
    sim.add(sim_cmd, true);
    sim_cmd->add_option("--out", outdir, "output directory")->required();

    std::string ranking_path, truth_path, counts_path, model_path;
    auto* eval_cmd = app.add_subcommand("evaluate", "score an edge ranking against a truth edge list");
    eval_cmd->add_option("--ranking", ranking_path, "ranking.csv from path/select")->required();
    eval_cmd->add_option("--truth", truth_path, "truth_edges.csv")->required();
    eval_cmd->add_option("--counts", counts_path, "counts CSV providing node names")->required();
    eval_cmd->add_option("--model", model_path, "model.json for pointwise precision/recall");
    eval_cmd->add_option("--out", outdir, "output directory")->required();

    SimFlags bench_sim;
    std::vector<double> nus{100.0, 10.0, 2.0};
    int replicates = 20;
    std::vector<std::string> methods{"pln_offset", "glasso_log"};
    GridFlags bench_grid;
    bench_grid.min_ratio = 1e-2;
    OptimFlags bench_optim;
    auto* bench_cmd = app.add_subcommand("bench", "simulate, fit and score replicated instances");
    bench_sim.add(bench_cmd, false);
    bench_cmd->add_option("--nus", nus, "depth dispersions")->delimiter(',');
    bench_cmd->add_option("--replicates", replicates, "replicates per nu")->capture_default_str();
    bench_cmd->add_option("--methods", methods, "pln_offset, pln_intercept, pln_no_offset, glasso_log")
        ->delimiter(',');
    bench_grid.add(bench_cmd, false);
    bench_optim.add(bench_cmd);
    bench_cmd->add_option("--threads", threads, "worker threads");
    bench_cmd->add_option("--out", outdir, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return input_error;
    }

    try {
        if (threads < 1) throw InputError("--threads must be at least 1");
        if (*fit_cmd) return cmd_fit(data_flags, optim, lambda, outdir, out);
        if (*path_cmd) return cmd_path(data_flags, optim, grid, outdir, out);
        if (*select_cmd) return cmd_select(data_flags, optim, grid, sel, threads, outdir, out, err);
        if (*sim_cmd) return cmd_simulate(sim, outdir, out);
        if (*eval_cmd) return cmd_evaluate(ranking_path, truth_path, counts_path, model_path, outdir, out);
        if (*bench_cmd) return cmd_bench(bench_sim, nus, replicates, methods, bench_grid, bench_optim, threads, outdir, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << '\n';
        return numerical_error;
    }
    return input_error;
}

} // namespace plnet::cli
