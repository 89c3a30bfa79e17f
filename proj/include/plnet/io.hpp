#pragma once

#include "plnet/dataset.hpp"
#include "plnet/evaluation.hpp"
#include "plnet/fit.hpp"
#include "plnet/selection.hpp"
#include "plnet/simulation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plnet {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated with a header row; double-quoted fields may contain commas.
CsvTable read_csv(const std::filesystem::path& path);

/// 17 significant digits (%.17g); throws NumericalError on NaN/Inf.
std::string format_double(double value);

enum class OffsetMode { none, total_counts, file };
OffsetMode parse_offset_mode(const std::string& name);

struct DatasetSources {
    std::filesystem::path counts;
    std::optional<std::filesystem::path> covariates;
    std::optional<std::filesystem::path> offsets;
    OffsetMode offset_mode = OffsetMode::none;
    bool intercept = true;
};

/// Counts CSV: first column row identifiers, header row of variable names.
/// Covariate columns that do not parse as numbers are expanded to indicator
/// columns (levels sorted, first level dropped when an intercept is present).
CountDataset read_dataset(const DatasetSources& sources);

/// Writes a matrix with a leading identifier column.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const std::string& id_header = "id",
                      bool integral = false);

/// edges.csv, model.json and criteria.csv for a single fit.
void write_results(const std::filesystem::path& outdir, const FitResult& fit, const CountDataset& data);

/// edges.csv (every lambda), path.json, criteria.csv and ranking.csv for a path;
/// criteria.csv gains a stability column when a profile is supplied.
void write_results(const std::filesystem::path& outdir, const PathResult& path, const CountDataset& data,
                   const StabilityProfile* profile = nullptr);

/// stability.csv: lambda, stability, selected flag.
void write_results(const std::filesystem::path& outdir, const StabilityProfile& profile);

std::string model_json(const FitResult& fit, const CountDataset& data);

struct StoredModel {
    double lambda = 0.0;
    ModelParams params;
    std::vector<std::string> variables;
};
StoredModel read_model_json(const std::filesystem::path& path);

void write_ranking_csv(const std::filesystem::path& path, const EdgeRanking& ranking,
                       const std::vector<std::string>& nodes);
EdgeRanking read_ranking_csv(const std::filesystem::path& path, const std::vector<std::string>& nodes);

void write_truth_csv(const std::filesystem::path& path, const GroundTruthGraph& truth,
                     const std::vector<std::string>& nodes);
GroundTruthGraph read_truth_csv(const std::filesystem::path& path, const std::vector<std::string>& nodes);

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points,
                     const std::string& x_name, const std::string& y_name);

} // namespace plnet
