#include "plnet/io.hpp"

#include "plnet/error.hpp"
#include "plnet/pln_core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace plnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& text) {
    if (text.empty()) return std::nullopt;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) return std::nullopt;
    return value;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_for_write(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::map<std::string, std::size_t> index_rows(const CsvTable& table, const fs::path& path) {
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        if (!index.emplace(table.rows[r][0], r).second)
            throw InputError("duplicate row identifier '" + table.rows[r][0] + "' in " + path.string());
    return index;
}

std::size_t lookup_row(const std::map<std::string, std::size_t>& index, const std::string& id,
                       const fs::path& path) {
    const auto it = index.find(id);
    if (it == index.end())
        throw InputError("row identifier '" + id + "' is missing from " + path.string());
    return it->second;
}

Index node_index(const std::map<std::string, Index>& nodes, const std::string& name, const fs::path& path) {
    const auto it = nodes.find(name);
    if (it == nodes.end()) throw InputError("unknown node '" + name + "' in " + path.string());
    return it->second;
}

std::map<std::string, Index> node_map(const std::vector<std::string>& nodes) {
    std::map<std::string, Index> out;
    for (std::size_t k = 0; k < nodes.size(); ++k) out.emplace(nodes[k], static_cast<Index>(k));
    return out;
}

json matrix_json(const Matrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(m(i, j))) throw NumericalError("refusing to write a non-finite matrix entry");
            data.push_back(m(i, j));
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols) throw InputError("matrix data has the wrong length");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
    return m;
}

double finite(double value) {
    if (!std::isfinite(value)) throw NumericalError("refusing to write a non-finite value");
    return value;
}

json fit_json(const FitResult& fit, const CountDataset& data) {
    json trace = json::array();
    for (const double v : fit.elbo_trace) trace.push_back(finite(v));
    return {
        {"format", "plnet-model"},
        {"version", 1},
        {"lambda", finite(fit.lambda)},
        {"dimensions", {{"n", data.n_samples()}, {"p", data.n_variables()}, {"d", data.n_covariates()}}},
        {"variables", data.variable_ids()},
        {"covariates", data.covariate_ids()},
        {"B", matrix_json(fit.params.B)},
        {"Omega", matrix_json(fit.params.Omega)},
        {"n_edges", fit.n_edges},
        {"elbo", finite(fit.elbo)},
        {"converged", fit.converged},
        {"vstep_converged", fit.vstep_converged},
        {"iterations", fit.iterations},
        {"elbo_trace", std::move(trace)},
    };
}

void write_edges(std::ostream& out, const FitResult& fit, const CountDataset& data) {
    const PartialCorrelationGraph graph = partial_correlations(fit.params.Omega, 0.0, data.variable_ids());
    for (const auto& e : graph.edges)
        out << quote_if_needed(graph.nodes[static_cast<std::size_t>(e.source)]) << ','
            << quote_if_needed(graph.nodes[static_cast<std::size_t>(e.target)]) << ',' << format_double(e.rho)
            << ',' << format_double(fit.lambda) << '\n';
}

constexpr const char* kEdgesHeader = "source,target,partial_correlation,lambda\n";

} // namespace

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        for (auto& f : fields) f = trim(std::move(f));
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw InputError("'" + path.string() + "' is empty");
    return table;
}

std::string format_double(double value) {
    if (!std::isfinite(value)) throw NumericalError("refusing to write a non-finite value");
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

OffsetMode parse_offset_mode(const std::string& name) {
    if (name == "none") return OffsetMode::none;
    if (name == "total_counts") return OffsetMode::total_counts;
    if (name == "file") return OffsetMode::file;
    throw InputError("unknown offset mode '" + name + "'");
}

CountDataset read_dataset(const DatasetSources& sources) {
    const CsvTable counts = read_csv(sources.counts);
    if (counts.header.size() < 2) throw InputError("counts file needs an identifier column and at least one variable");
    const auto n = static_cast<Index>(counts.rows.size());
    const auto p = static_cast<Index>(counts.header.size() - 1);
    if (n == 0) throw InputError("counts file has no rows");

    std::vector<std::string> sample_ids, variable_ids(counts.header.begin() + 1, counts.header.end());
    Matrix Y(n, p);
    for (Index i = 0; i < n; ++i) {
        const auto& row = counts.rows[static_cast<std::size_t>(i)];
        sample_ids.push_back(row[0]);
        for (Index j = 0; j < p; ++j) {
            const auto value = parse_number(row[static_cast<std::size_t>(j + 1)]);
            if (!value || *value < 0.0 || *value != std::floor(*value))
                throw InputError("count '" + row[static_cast<std::size_t>(j + 1)] + "' for sample '" + row[0] +
                                 "' is not a non-negative integer");
            Y(i, j) = *value;
        }
    }
    if (std::set<std::string>(sample_ids.begin(), sample_ids.end()).size() != sample_ids.size())
        throw InputError("duplicate sample identifier in " + sources.counts.string());

    // Design.
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;
    if (sources.intercept) {
        columns.emplace_back(static_cast<std::size_t>(n), 1.0);
        names.emplace_back("(Intercept)");
    }
    if (sources.covariates) {
        const CsvTable cov = read_csv(*sources.covariates);
        const auto index = index_rows(cov, *sources.covariates);
        std::vector<std::size_t> order;
        for (const auto& id : sample_ids) order.push_back(lookup_row(index, id, *sources.covariates));
        for (std::size_t c = 1; c < cov.header.size(); ++c) {
            std::vector<std::string> raw;
            for (const std::size_t r : order) raw.push_back(cov.rows[r][c]);
            const bool numeric = std::all_of(raw.begin(), raw.end(),
                                             [](const std::string& s) { return parse_number(s).has_value(); });
            if (numeric) {
                std::vector<double> col;
                for (const auto& s : raw) col.push_back(*parse_number(s));
                columns.push_back(std::move(col));
                names.push_back(cov.header[c]);
                continue;
            }
            const std::set<std::string> levels(raw.begin(), raw.end());
            auto level = levels.begin();
            if (sources.intercept) ++level;
            for (; level != levels.end(); ++level) {
                std::vector<double> col;
                for (const auto& s : raw) col.push_back(s == *level ? 1.0 : 0.0);
                columns.push_back(std::move(col));
                names.push_back(cov.header[c] + *level);
            }
        }
    }
    if (columns.empty()) throw InputError("design has no columns (no intercept and no covariates)");
    Matrix X(n, static_cast<Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (Index i = 0; i < n; ++i) X(i, static_cast<Index>(c)) = columns[c][static_cast<std::size_t>(i)];

    // Offsets.
    Matrix O = Matrix::Zero(n, p);
    switch (sources.offset_mode) {
        case OffsetMode::none: break;
        case OffsetMode::total_counts:
            for (Index i = 0; i < n; ++i) O.row(i).setConstant(std::log(std::max(Y.row(i).sum(), 1.0)));
            break;
        case OffsetMode::file: {
            if (!sources.offsets) throw InputError("offset mode 'file' needs an offsets file");
            const CsvTable off = read_csv(*sources.offsets);
            const auto index = index_rows(off, *sources.offsets);
            std::map<std::string, std::size_t> col_index;
            for (std::size_t c = 1; c < off.header.size(); ++c) col_index.emplace(off.header[c], c);
            for (Index j = 0; j < p; ++j) {
                const auto it = col_index.find(variable_ids[static_cast<std::size_t>(j)]);
                if (it == col_index.end())
                    throw InputError("variable '" + variable_ids[static_cast<std::size_t>(j)] +
                                     "' is missing from the offsets file");
                for (Index i = 0; i < n; ++i) {
                    const auto& cell =
                        off.rows[lookup_row(index, sample_ids[static_cast<std::size_t>(i)], *sources.offsets)][it->second];
                    const auto value = parse_number(cell);
                    if (!value) throw InputError("offset '" + cell + "' is not a number");
                    O(i, j) = *value;
                }
            }
            break;
        }
    }
    if (sources.offsets && sources.offset_mode != OffsetMode::file)
        throw InputError("an offsets file was given but offset mode is not 'file'");

    return CountDataset(std::move(Y), std::move(X), std::move(O), std::move(sample_ids),
                        std::move(variable_ids), std::move(names));
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const std::string& id_header, bool integral) {
    if (static_cast<Index>(row_ids.size()) != m.rows() || static_cast<Index>(col_ids.size()) != m.cols())
        throw InputError("identifier count does not match matrix");
    auto out = open_for_write(path);
    out << quote_if_needed(id_header);
    for (const auto& c : col_ids) out << ',' << quote_if_needed(c);
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << quote_if_needed(row_ids[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < m.cols(); ++j) {
            if (integral)
                out << ',' << static_cast<long long>(m(i, j));
            else
                out << ',' << format_double(m(i, j));
        }
        out << '\n';
    }
}

std::string model_json(const FitResult& fit, const CountDataset& data) {
    return fit_json(fit, data).dump(2) + "\n";
}

void write_results(const fs::path& outdir, const FitResult& fit, const CountDataset& data) {
    // Render everything before touching the filesystem so a failure leaves no partial output.
    std::ostringstream edges;
    edges << kEdgesHeader;
    write_edges(edges, fit, data);
    const std::string model = model_json(fit, data);
    std::ostringstream criteria;
    criteria << "lambda,n_edges,elbo,penalized_elbo,ebic\n"
             << format_double(fit.lambda) << ',' << fit.n_edges << ',' << format_double(fit.elbo) << ','
             << format_double(fit.elbo_trace.back()) << ',' << format_double(ebic(fit, data, 0.0)) << '\n';

    open_for_write(outdir / "edges.csv") << edges.str();
    open_for_write(outdir / "model.json") << model;
    open_for_write(outdir / "criteria.csv") << criteria.str();
}

void write_results(const fs::path& outdir, const PathResult& path, const CountDataset& data,
                   const StabilityProfile* profile) {
    if (profile != nullptr && profile->grid != path.grid)
        throw InputError("stability profile and path use different grids");
    std::ostringstream edges;
    edges << kEdgesHeader;
    json fits = json::array();
    for (const FitResult& f : path.fits) {
        write_edges(edges, f, data);
        fits.push_back(fit_json(f, data));
    }
    json grid = json::array();
    for (const double l : path.grid) grid.push_back(finite(l));
    const json doc{{"format", "plnet-path"}, {"version", 1}, {"grid", std::move(grid)}, {"fits", std::move(fits)}};

    std::ostringstream criteria;
    criteria << "lambda,n_edges,elbo,penalized_elbo,ebic" << (profile ? ",stability" : "") << '\n';
    for (std::size_t k = 0; k < path.criteria.size(); ++k) {
        const PathCriteria& c = path.criteria[k];
        criteria << format_double(c.lambda) << ',' << c.n_edges << ',' << format_double(c.elbo) << ','
                 << format_double(c.penalized_elbo) << ',' << format_double(c.ebic);
        if (profile) criteria << ',' << format_double(profile->stability[k]);
        criteria << '\n';
    }

    open_for_write(outdir / "edges.csv") << edges.str();
    open_for_write(outdir / "path.json") << doc.dump(2) << '\n';
    open_for_write(outdir / "criteria.csv") << criteria.str();
    write_ranking_csv(outdir / "ranking.csv", path_to_ranking(path), data.variable_ids());
}

void write_results(const fs::path& outdir, const StabilityProfile& profile) {
    std::ostringstream out;
    out << "lambda,stability,selected\n";
    for (std::size_t k = 0; k < profile.grid.size(); ++k)
        out << format_double(profile.grid[k]) << ',' << format_double(profile.stability[k]) << ','
            << (k == profile.selected_index ? 1 : 0) << '\n';
    open_for_write(outdir / "stability.csv") << out.str();
}

StoredModel read_model_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
        StoredModel model;
        model.lambda = doc.at("lambda").get<double>();
        model.params.B = matrix_from_json(doc.at("B"));
        model.params.Omega = matrix_from_json(doc.at("Omega"));
        model.variables = doc.at("variables").get<std::vector<std::string>>();
        return model;
    } catch (const json::exception& e) {
        throw InputError("malformed model file '" + path.string() + "': " + e.what());
    }
}

void write_ranking_csv(const fs::path& path, const EdgeRanking& ranking, const std::vector<std::string>& nodes) {
    std::ostringstream out;
    out << "source,target,score,tiebreak\n";
    for (const ScoredEdge& e : ranking.edges)
        out << quote_if_needed(nodes.at(static_cast<std::size_t>(e.source))) << ','
            << quote_if_needed(nodes.at(static_cast<std::size_t>(e.target))) << ',' << format_double(e.score)
            << ',' << format_double(e.tiebreak) << '\n';
    open_for_write(path) << out.str();
}

EdgeRanking read_ranking_csv(const fs::path& path, const std::vector<std::string>& nodes) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 3) throw InputError("ranking file needs source,target,score columns");
    const auto index = node_map(nodes);
    EdgeRanking ranking;
    ranking.n_nodes = static_cast<Index>(nodes.size());
    for (const auto& row : table.rows) {
        Index a = node_index(index, row[0], path), b = node_index(index, row[1], path);
        if (a == b) throw InputError("self-loop in ranking file");
        if (a > b) std::swap(a, b);
        const auto score = parse_number(row[2]);
        const auto tiebreak = table.header.size() > 3 ? parse_number(row[3]) : std::optional<double>(0.0);
        if (!score || !tiebreak) throw InputError("non-numeric score in " + path.string());
        ranking.edges.push_back({a, b, *score, *tiebreak});
    }
    return ranking;
}

void write_truth_csv(const fs::path& path, const GroundTruthGraph& truth, const std::vector<std::string>& nodes) {
    std::ostringstream out;
    out << "source,target\n";
    for (Index j = 0; j < truth.n_nodes(); ++j)
        for (Index k = j + 1; k < truth.n_nodes(); ++k)
            if (truth.adjacency(j, k) != 0)
                out << quote_if_needed(nodes.at(static_cast<std::size_t>(j))) << ','
                    << quote_if_needed(nodes.at(static_cast<std::size_t>(k))) << '\n';
    open_for_write(path) << out.str();
}

GroundTruthGraph read_truth_csv(const fs::path& path, const std::vector<std::string>& nodes) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2) throw InputError("truth file needs source,target columns");
    const auto index = node_map(nodes);
    const auto p = static_cast<Index>(nodes.size());
    GroundTruthGraph truth;
    truth.adjacency = Adjacency::Zero(p, p);
    for (const auto& row : table.rows) {
        const Index a = node_index(index, row[0], path), b = node_index(index, row[1], path);
        if (a == b) throw InputError("self-loop in truth file");
        truth.adjacency(a, b) = truth.adjacency(b, a) = 1;
    }
    return truth;
}

void write_curve_csv(const fs::path& path, const std::vector<CurvePoint>& points, const std::string& x_name,
                     const std::string& y_name) {
    std::ostringstream out;
    out << x_name << ',' << y_name << '\n';
    for (const CurvePoint& pt : points) out << format_double(pt.x) << ',' << format_double(pt.y) << '\n';
    open_for_write(path) << out.str();
}

} // namespace plnet
