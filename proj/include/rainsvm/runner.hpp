#pragma once

// Experiment matrix (tiles x scales x window lengths x horizons), its JSON
// config/results formats, and the table/curve reports derived from results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "ingest.hpp"
#include "labeling.hpp"
#include "modelselect.hpp"
#include "parallel.hpp"
#include "svm.hpp"

namespace rainsvm {

inline constexpr const char* kToolVersion = "0.1.0";

struct Scale {
    std::size_t width = 0;
    std::size_t height = 0;

    std::string label() const { return std::to_string(width) + "x" + std::to_string(height); }
    auto operator<=>(const Scale&) const = default;
};

struct DataSource {
    std::optional<std::string> manifest;
    std::optional<SynthParams> synthetic;
};

struct ExperimentConfig {
    std::vector<int> tiles{1, 13, 25};
    std::vector<Scale> scales{{172, 123}, {87, 61}};
    std::vector<std::size_t> window_lengths{2, 4, 6, 8};
    std::vector<std::size_t> horizons{1, 2, 3, 4, 5, 6, 7, 14, 30};
    std::optional<CropRect> crop; ///< full frame when absent
    SplitSpec split;
    CGrid c_grid;
    SolverSettings solver;
    DataSource data;
    std::uint64_t seed = 1;

    void validate() const {
        if (tiles.empty() || scales.empty() || window_lengths.empty() || horizons.empty())
            throw Error(ErrorCode::invalid_argument, "tiles, scales, window lengths and horizons must be non-empty");
        for (int t : tiles)
            (void)TileId(t);
        for (auto n : window_lengths)
            if (n < 1)
                throw Error(ErrorCode::invalid_argument, "window length must be at least 1");
        for (auto k : horizons)
            if (k < 1)
                throw Error(ErrorCode::invalid_argument, "horizon must be at least 1");
        for (const auto& s : scales)
            if (s.width < 1 || s.height < 1)
                throw Error(ErrorCode::invalid_argument, "scale dimensions must be positive");
        split.validate();
        c_grid.validate();
        solver.validate();
        if (data.manifest.has_value() == data.synthetic.has_value())
            throw Error(ErrorCode::invalid_argument, "data source must name exactly one of manifest or synthetic");
        if (data.synthetic)
            data.synthetic->validate();
    }
};

struct CellResult {
    int tile = 1;
    Scale scale;
    std::size_t n = 0;
    std::size_t k = 0;
    EvalReport svm;
    EvalReport persistence;
    EvalReport majority;
    int selected_exponent = 0;
    bool converged = true;    ///< final model
    bool cv_converged = true; ///< every CV fit
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::size_t test_first_end = 0;
    std::size_t test_last_end = 0;
};

struct ResultsMatrix {
    ExperimentConfig config;
    CropRect crop;
    std::size_t days = 0;
    std::vector<CellResult> cells;

    const CellResult* find(int tile, const Scale& scale, std::size_t n, std::size_t k) const {
        for (const auto& c : cells)
            if (c.tile == tile && c.scale == scale && c.n == n && c.k == k)
                return &c;
        return nullptr;
    }
    const CellResult& at(int tile, const Scale& scale, std::size_t n, std::size_t k) const {
        if (const auto* c = find(tile, scale, n, k))
            return *c;
        throw Error(ErrorCode::invalid_argument, "no result for tile " + std::to_string(tile) + ", scale " +
                                                     scale.label() + ", n=" + std::to_string(n) +
                                                     ", k=" + std::to_string(k));
    }
};

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

inline void to_json(json& j, const Scale& s) { j = json::array({s.width, s.height}); }
inline void from_json(const json& j, Scale& s) {
    if (!j.is_array() || j.size() != 2)
        throw Error(ErrorCode::parse_error, "scale must be a [width, height] pair");
    s.width = j.at(0).get<std::size_t>();
    s.height = j.at(1).get<std::size_t>();
}

inline void to_json(json& j, const CropRect& r) {
    j = json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.cw}, {"height", r.ch}};
}
inline void from_json(const json& j, CropRect& r) {
    r.x0 = j.at("x0").get<std::size_t>();
    r.y0 = j.at("y0").get<std::size_t>();
    r.cw = j.at("width").get<std::size_t>();
    r.ch = j.at("height").get<std::size_t>();
}

inline void to_json(json& j, const SplitSpec& s) {
    j = json{{"train_fraction", s.train_fraction}, {"fold_count", s.fold_count}};
}
inline void from_json(const json& j, SplitSpec& s) {
    s.train_fraction = j.value("train_fraction", s.train_fraction);
    s.fold_count = j.value("fold_count", s.fold_count);
}

inline void to_json(json& j, const CGrid& g) { j = json{{"lo", g.lo}, {"hi", g.hi}}; }
inline void from_json(const json& j, CGrid& g) {
    g.lo = j.value("lo", g.lo);
    g.hi = j.value("hi", g.hi);
}

inline void to_json(json& j, const SolverSettings& s) {
    j = json{{"tolerance", s.tolerance}, {"max_epochs", s.max_epochs}, {"deterministic", s.deterministic}};
}
inline void from_json(const json& j, SolverSettings& s) {
    s.tolerance = j.value("tolerance", s.tolerance);
    s.max_epochs = j.value("max_epochs", s.max_epochs);
    s.deterministic = j.value("deterministic", s.deterministic);
}

inline void to_json(json& j, const SynthParams& p) {
    j = json{{"seed", p.seed},
             {"days", p.days},
             {"width", p.width},
             {"height", p.height},
             {"blob_count", p.blob_count},
             {"blob_radius", p.blob_radius},
             {"advection_x", p.advection_x},
             {"advection_y", p.advection_y},
             {"seasonal_amplitude", p.seasonal_amplitude},
             {"mean_lifetime", p.mean_lifetime},
             {"start", format_date(p.start)}};
}
inline void from_json(const json& j, SynthParams& p) {
    p.seed = j.value("seed", p.seed);
    p.days = j.value("days", p.days);
    p.width = j.value("width", p.width);
    p.height = j.value("height", p.height);
    p.blob_count = j.value("blob_count", p.blob_count);
    p.blob_radius = j.value("blob_radius", p.blob_radius);
    p.advection_x = j.value("advection_x", p.advection_x);
    p.advection_y = j.value("advection_y", p.advection_y);
    p.seasonal_amplitude = j.value("seasonal_amplitude", p.seasonal_amplitude);
    p.mean_lifetime = j.value("mean_lifetime", p.mean_lifetime);
    if (j.contains("start"))
        p.start = parse_date(j.at("start").get<std::string>());
}

inline void to_json(json& j, const DataSource& d) {
    j = json::object();
    if (d.manifest)
        j["manifest"] = *d.manifest;
    if (d.synthetic)
        j["synthetic"] = *d.synthetic;
}
inline void from_json(const json& j, DataSource& d) {
    if (j.contains("manifest"))
        d.manifest = j.at("manifest").get<std::string>();
    if (j.contains("synthetic"))
        d.synthetic = j.at("synthetic").get<SynthParams>();
}

inline void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"tiles", c.tiles},
             {"scales", c.scales},
             {"window_lengths", c.window_lengths},
             {"horizons", c.horizons},
             {"split", c.split},
             {"c_grid", c.c_grid},
             {"solver", c.solver},
             {"data", c.data},
             {"seed", c.seed}};
    if (c.crop)
        j["crop"] = *c.crop;
}

/// Missing keys keep their defaults. The top-level seed is applied to a
/// synthetic source that does not carry its own.
inline void from_json(const json& j, ExperimentConfig& c) {
    c.tiles = j.value("tiles", c.tiles);
    if (j.contains("scales"))
        c.scales = j.at("scales").get<std::vector<Scale>>();
    c.window_lengths = j.value("window_lengths", c.window_lengths);
    c.horizons = j.value("horizons", c.horizons);
    if (j.contains("crop"))
        c.crop = j.at("crop").get<CropRect>();
    if (j.contains("split"))
        c.split = j.at("split").get<SplitSpec>();
    if (j.contains("c_grid"))
        c.c_grid = j.at("c_grid").get<CGrid>();
    if (j.contains("solver"))
        c.solver = j.at("solver").get<SolverSettings>();
    c.seed = j.value("seed", c.seed);
    if (j.contains("data"))
        c.data = j.at("data").get<DataSource>();
    if (c.data.synthetic && !(j.contains("data") && j["data"].contains("synthetic") &&
                              j["data"]["synthetic"].contains("seed")))
        c.data.synthetic->seed = c.seed;
}

inline void to_json(json& j, const EvalReport& r) {
    json cm = json::array();
    for (const auto& row : r.confusion.counts)
        cm.push_back(row);
    json precision = json::array(), recall = json::array(), f1 = json::array();
    for (const auto& s : r.per_class) {
        precision.push_back(s.precision);
        recall.push_back(s.recall);
        f1.push_back(s.f1);
    }
    j = json{{"confusion", cm},       {"precision", precision},  {"recall", recall},  {"f1", f1},
             {"macro_f1", r.macro_f1}, {"accuracy", r.accuracy}, {"samples", r.samples}};
}
inline void from_json(const json& j, EvalReport& r) {
    const auto& cm = j.at("confusion");
    for (std::size_t i = 0; i < kClassCount; ++i)
        for (std::size_t k = 0; k < kClassCount; ++k)
            r.confusion.counts[i][k] = cm.at(i).at(k).get<std::uint64_t>();
    for (std::size_t i = 0; i < kClassCount; ++i) {
        r.per_class[i].precision = j.at("precision").at(i).get<double>();
        r.per_class[i].recall = j.at("recall").at(i).get<double>();
        r.per_class[i].f1 = j.at("f1").at(i).get<double>();
    }
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.samples = j.at("samples").get<std::size_t>();
}

inline void to_json(json& j, const CellResult& c) {
    j = json{{"tile", c.tile},
             {"scale", c.scale},
             {"n", c.n},
             {"k", c.k},
             {"svm", c.svm},
             {"persistence", c.persistence},
             {"majority", c.majority},
             {"selected_c_exponent", c.selected_exponent},
             {"converged", c.converged},
             {"cv_converged", c.cv_converged},
             {"train_count", c.train_count},
             {"test_count", c.test_count},
             {"test_first_end", c.test_first_end},
             {"test_last_end", c.test_last_end}};
}
inline void from_json(const json& j, CellResult& c) {
    c.tile = j.at("tile").get<int>();
    c.scale = j.at("scale").get<Scale>();
    c.n = j.at("n").get<std::size_t>();
    c.k = j.at("k").get<std::size_t>();
    c.svm = j.at("svm").get<EvalReport>();
    c.persistence = j.at("persistence").get<EvalReport>();
    c.majority = j.at("majority").get<EvalReport>();
    c.selected_exponent = j.at("selected_c_exponent").get<int>();
    c.converged = j.at("converged").get<bool>();
    c.cv_converged = j.at("cv_converged").get<bool>();
    c.train_count = j.at("train_count").get<std::size_t>();
    c.test_count = j.at("test_count").get<std::size_t>();
    c.test_first_end = j.at("test_first_end").get<std::size_t>();
    c.test_last_end = j.at("test_last_end").get<std::size_t>();
}

/// FNV-1a over the compact JSON form of the config.
inline std::string config_hash(const ExperimentConfig& config) {
    const std::string text = json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json conventions_json() {
    return json{{"split", "chronological"},
                {"fold_scheme", "contiguous"},
                {"cv_metric", "macro_f1"},
                {"c_tie_break", "smallest"},
                {"multiclass", "one-vs-one"},
                {"f1_zero_division", 0},
                {"macro_average_over", "classes occurring in truth or predictions"},
                {"labels_from", "cropped full-resolution map"},
                {"preprocessing", "crop, level/15, area-average downscale"}};
}

inline void to_json(json& j, const ResultsMatrix& r) {
    j = json{{"metadata",
              {{"tool_version", kToolVersion},
               {"config_hash", config_hash(r.config)},
               {"conventions", conventions_json()},
               {"crop", r.crop},
               {"days", r.days}}},
             {"config", r.config},
             {"cells", r.cells}};
}
inline void from_json(const json& j, ResultsMatrix& r) {
    r.config = j.at("config").get<ExperimentConfig>();
    r.crop = j.at("metadata").at("crop").get<CropRect>();
    r.days = j.at("metadata").at("days").get<std::size_t>();
    r.cells = j.at("cells").get<std::vector<CellResult>>();
}

inline std::string serialize(const ResultsMatrix& r) { return json(r).dump(2) + "\n"; }

inline ResultsMatrix parse_results(const std::string& text) {
    try {
        return json::parse(text).get<ResultsMatrix>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("results file: ") + e.what());
    }
}

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig config;
    try {
        config = json::parse(text).get<ExperimentConfig>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::missing_file, path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Running

/// Inputs shared read-only by every cell: per-tile label streams from the
/// cropped full-resolution maps, and per-scale preprocessed images with their
/// day-by-day Gram matrices.
struct PreparedData {
    CropRect crop;
    std::vector<Date> dates;
    std::map<int, std::vector<RainClass>> labels;
    std::vector<std::vector<GrayImage>> images; ///< indexed like config.scales
    std::vector<GramMatrix> image_grams;
};

inline std::vector<IntensityMap> load_source(const ExperimentConfig& config,
                                             const std::filesystem::path& base_dir = {}) {
    if (config.data.synthetic)
        return generate_synthetic(*config.data.synthetic);
    std::filesystem::path manifest = *config.data.manifest;
    if (manifest.is_relative() && !base_dir.empty())
        manifest = base_dir / manifest;
    return load_series(manifest);
}

inline PreparedData prepare(const ExperimentConfig& config, const std::vector<IntensityMap>& series) {
    if (series.empty())
        throw Error(ErrorCode::empty_input, "no maps in the source series");
    PreparedData data;
    data.crop = config.crop.value_or(CropRect{0, 0, series.front().width, series.front().height});
    if (!data.crop.fits(series.front().width, series.front().height))
        throw Error(ErrorCode::out_of_bounds, "crop rectangle does not fit the source maps");
    for (const auto& s : config.scales)
        if (s.width > data.crop.cw || s.height > data.crop.ch)
            throw Error(ErrorCode::invalid_argument, "scale " + s.label() + " exceeds the cropped map");

    std::vector<IntensityMap> cropped;
    cropped.reserve(series.size());
    for (const auto& m : series) {
        cropped.push_back(crop(m, data.crop));
        data.dates.push_back(m.date);
    }
    for (int t : config.tiles)
        data.labels[t] = tile_labels(cropped, TileId(t));
    for (const auto& s : config.scales) {
        std::vector<GrayImage> imgs;
        imgs.reserve(cropped.size());
        for (const auto& m : cropped)
            imgs.push_back(downscale(to_gray(m), s.width, s.height));
        data.image_grams.push_back(GramMatrix::of_images(imgs));
        data.images.push_back(std::move(imgs));
    }
    return data;
}

struct CellCoord {
    int tile;
    std::size_t scale_index;
    std::size_t n;
    std::size_t k;
};

inline std::vector<CellCoord> cell_coords(const ExperimentConfig& config) {
    std::vector<CellCoord> coords;
    for (int t : config.tiles)
        for (std::size_t s = 0; s < config.scales.size(); ++s)
            for (auto n : config.window_lengths)
                for (auto k : config.horizons)
                    coords.push_back({t, s, n, k});
    return coords;
}

/// Everything needed to evaluate one cell, kept for tests that inspect the
/// test samples behind the reported scores.
struct CellArtifacts {
    CellResult result;
    std::vector<std::size_t> test_end_indices;
    std::vector<RainClass> svm_predictions;
    std::vector<RainClass> persistence_predictions;
};

inline CellArtifacts run_cell(const ExperimentConfig& config, const PreparedData& data, const CellCoord& cell) {
    CellArtifacts art;
    CellResult& res = art.result;
    res.tile = cell.tile;
    res.scale = config.scales[cell.scale_index];
    res.n = cell.n;
    res.k = cell.k;

    auto windows = build_windows(data.images[cell.scale_index], data.labels.at(cell.tile), cell.n, cell.k);
    auto [train, test] = chrono_split(std::move(windows), config.split);
    const auto folds = fold_assign(train, config.split.fold_count);

    std::vector<std::size_t> train_ends;
    train_ends.reserve(train.size());
    for (const auto& s : train)
        train_ends.push_back(s.end_index);
    const GramMatrix gram = GramMatrix::of_windows(data.image_grams[cell.scale_index], train_ends, cell.n);

    const CvResult cv = select_c(train, config.c_grid, folds, config.solver, &gram);
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto model = train_multiclass(train, all, cv.selected_c(), config.solver, &gram);

    std::vector<RainClass> train_labels;
    for (const auto& s : train)
        train_labels.push_back(s.label);
    const RainClass majority = majority_predict(ClassFrequencies::of(train_labels));

    std::vector<RainClass> truth, majority_pred;
    for (const auto& s : test) {
        truth.push_back(s.label);
        art.svm_predictions.push_back(predict(model, s.features));
        art.persistence_predictions.push_back(persistence_predict(s));
        majority_pred.push_back(majority);
        art.test_end_indices.push_back(s.end_index);
    }
    res.svm = evaluate(truth, art.svm_predictions);
    res.persistence = evaluate(truth, art.persistence_predictions);
    res.majority = evaluate(truth, majority_pred);
    res.selected_exponent = cv.selected_exponent;
    res.converged = model.converged();
    res.cv_converged = cv.all_converged();
    res.train_count = train.size();
    res.test_count = test.size();
    res.test_first_end = test.front().end_index;
    res.test_last_end = test.back().end_index;
    return art;
}

/// Evaluates every (tile, scale, n, k) cell on up to `jobs` threads. Cells
/// are stored in config order regardless of completion order.
inline ResultsMatrix run_experiment(const ExperimentConfig& config, const std::vector<IntensityMap>& series,
                                    std::size_t jobs = 1) {
    config.validate();
    const PreparedData data = prepare(config, series);
    const auto coords = cell_coords(config);

    ResultsMatrix results;
    results.config = config;
    results.crop = data.crop;
    results.days = series.size();
    results.cells.resize(coords.size());
    parallel_for(coords.size(), jobs, [&](std::size_t i) {
        const auto& c = coords[i];
        try {
            results.cells[i] = run_cell(config, data, c).result;
        } catch (const Error& e) {
            throw Error(e.code(), "cell (tile " + std::to_string(c.tile) + ", scale " +
                                      config.scales[c.scale_index].label() + ", n=" + std::to_string(c.n) +
                                      ", k=" + std::to_string(c.k) + "): " + e.what());
        }
    });
    return results;
}

inline ResultsMatrix run_experiment(const ExperimentConfig& config, std::size_t jobs = 1,
                                    const std::filesystem::path& base_dir = {}) {
    config.validate();
    return run_experiment(config, load_source(config, base_dir), jobs);
}

// ---------------------------------------------------------------------------
// Reports

enum class Metric { macro_f1, accuracy };

inline Metric parse_metric(const std::string& name) {
    if (name == "macro_f1")
        return Metric::macro_f1;
    if (name == "accuracy")
        return Metric::accuracy;
    throw Error(ErrorCode::invalid_argument, "unknown metric '" + name + "'");
}

inline double metric_value(const EvalReport& r, Metric m) {
    return m == Metric::macro_f1 ? r.macro_f1 : r.accuracy;
}

/// Rounds half away from zero, the convention of the published tables.
inline double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_up(value, decimals));
    return buf;
}

inline std::string horizon_label(std::size_t k) { return std::to_string(k) + "DA"; }

/// Scores in percent for one tile: a row per (scale, n), a column per horizon.
struct F1Table {
    struct Row {
        Scale scale;
        std::size_t n = 0;
        std::vector<double> values;
        double mean = 0.0;
        std::vector<bool> is_max;
    };
    int tile = 1;
    std::vector<std::size_t> horizons;
    std::vector<Row> rows;
    std::vector<double> column_means;
};

inline F1Table f1_table(const ResultsMatrix& results, int tile, Metric metric = Metric::macro_f1) {
    const auto& cfg = results.config;
    if (std::find(cfg.tiles.begin(), cfg.tiles.end(), tile) == cfg.tiles.end())
        throw Error(ErrorCode::invalid_argument, "tile " + std::to_string(tile) + " not in results");
    F1Table table;
    table.tile = tile;
    table.horizons = cfg.horizons;
    for (const auto& s : cfg.scales)
        for (auto n : cfg.window_lengths) {
            F1Table::Row row;
            row.scale = s;
            row.n = n;
            for (auto k : cfg.horizons)
                row.values.push_back(100.0 * metric_value(results.at(tile, s, n, k).svm, metric));
            double sum = 0.0;
            for (double v : row.values)
                sum += v;
            row.mean = sum / static_cast<double>(row.values.size());
            table.rows.push_back(std::move(row));
        }
    for (std::size_t h = 0; h < table.horizons.size(); ++h) {
        double sum = 0.0, best = -1.0;
        for (const auto& r : table.rows) {
            sum += r.values[h];
            best = std::max(best, r.values[h]);
        }
        table.column_means.push_back(sum / static_cast<double>(table.rows.size()));
        for (auto& r : table.rows) {
            r.is_max.resize(table.horizons.size());
            r.is_max[h] = r.values[h] == best;
        }
    }
    return table;
}

inline void write_f1_table_csv(std::ostream& out, const F1Table& t) {
    out << "scale,n";
    for (auto k : t.horizons)
        out << ',' << horizon_label(k);
    out << ",mean";
    for (auto k : t.horizons)
        out << ",is_max_" << horizon_label(k);
    out << '\n';
    for (const auto& r : t.rows) {
        out << r.scale.label() << ',' << r.n;
        for (double v : r.values)
            out << ',' << fixed(v, 0);
        out << ',' << fixed(r.mean, 2);
        for (bool m : r.is_max)
            out << ',' << (m ? 1 : 0);
        out << '\n';
    }
    out << "mean,";
    for (double v : t.column_means)
        out << ',' << fixed(v, 2);
    out << ',';
    for (std::size_t h = 0; h < t.horizons.size(); ++h)
        out << ',';
    out << '\n';
}

/// Per tile and horizon, max - min over the (scale, n) inputs, in percentage points.
struct RangeTable {
    std::vector<int> tiles;
    std::vector<std::size_t> horizons;
    std::vector<std::vector<double>> ranges; ///< [tile][horizon]
};

inline RangeTable range_table(const ResultsMatrix& results, Metric metric = Metric::macro_f1) {
    const auto& cfg = results.config;
    RangeTable table;
    table.tiles = cfg.tiles;
    table.horizons = cfg.horizons;
    for (int tile : cfg.tiles) {
        std::vector<double> row;
        for (auto k : cfg.horizons) {
            double lo = 1e300, hi = -1e300;
            for (const auto& s : cfg.scales)
                for (auto n : cfg.window_lengths) {
                    const double v = 100.0 * metric_value(results.at(tile, s, n, k).svm, metric);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            row.push_back(hi - lo);
        }
        table.ranges.push_back(std::move(row));
    }
    return table;
}

inline void write_range_table_csv(std::ostream& out, const RangeTable& t) {
    out << "tile";
    for (auto k : t.horizons)
        out << ',' << horizon_label(k);
    out << '\n';
    for (std::size_t i = 0; i < t.tiles.size(); ++i) {
        out << t.tiles[i];
        for (double v : t.ranges[i])
            out << ',' << fixed(v, 0);
        out << '\n';
    }
}

enum class GroupBy { window_length, scale, tile };

inline GroupBy parse_group_by(const std::string& name) {
    if (name == "window_length")
        return GroupBy::window_length;
    if (name == "scale")
        return GroupBy::scale;
    if (name == "tile")
        return GroupBy::tile;
    throw Error(ErrorCode::invalid_argument, "unknown grouping '" + name + "'");
}

inline const char* to_string(GroupBy g) {
    switch (g) {
    case GroupBy::window_length: return "window_length";
    case GroupBy::scale: return "scale";
    case GroupBy::tile: return "tile";
    }
    return "?";
}

struct Curve {
    std::string group;
    std::string series; ///< "svm" or "persistence"
    std::vector<double> values; ///< percent, per horizon
};

struct CurveSet {
    GroupBy group_by = GroupBy::tile;
    std::vector<std::size_t> horizons;
    std::vector<Curve> curves;
};

/// Mean score per group value and horizon over all other dimensions. Tile
/// grouping also emits the persistence baseline averaged over the same cells.
inline CurveSet mean_curves(const ResultsMatrix& results, GroupBy group_by, Metric metric = Metric::macro_f1) {
    const auto& cfg = results.config;
    CurveSet set;
    set.group_by = group_by;
    set.horizons = cfg.horizons;

    struct Group {
        std::string label;
        std::vector<int> tiles;
        std::vector<Scale> scales;
        std::vector<std::size_t> ns;
    };
    std::vector<Group> groups;
    switch (group_by) {
    case GroupBy::window_length:
        for (auto n : cfg.window_lengths)
            groups.push_back({"n=" + std::to_string(n), cfg.tiles, cfg.scales, {n}});
        break;
    case GroupBy::scale:
        for (const auto& s : cfg.scales)
            groups.push_back({s.label(), cfg.tiles, {s}, cfg.window_lengths});
        break;
    case GroupBy::tile:
        for (int t : cfg.tiles)
            groups.push_back({"tile " + std::to_string(t), {t}, cfg.scales, cfg.window_lengths});
        break;
    }

    for (const auto& g : groups) {
        Curve svm{g.label, "svm", {}};
        Curve pers{g.label, "persistence", {}};
        for (auto k : cfg.horizons) {
            double s_sum = 0.0, p_sum = 0.0;
            std::size_t count = 0;
            for (int t : g.tiles)
                for (const auto& sc : g.scales)
                    for (auto n : g.ns) {
                        const auto& cell = results.at(t, sc, n, k);
                        s_sum += 100.0 * metric_value(cell.svm, metric);
                        p_sum += 100.0 * metric_value(cell.persistence, metric);
                        ++count;
                    }
            svm.values.push_back(s_sum / static_cast<double>(count));
            pers.values.push_back(p_sum / static_cast<double>(count));
        }
        set.curves.push_back(std::move(svm));
        if (group_by == GroupBy::tile)
            set.curves.push_back(std::move(pers));
    }
    return set;
}

inline void write_curves_csv(std::ostream& out, const CurveSet& set) {
    out << to_string(set.group_by) << ",series";
    for (auto k : set.horizons)
        out << ',' << horizon_label(k);
    out << '\n';
    for (const auto& c : set.curves) {
        out << c.group << ',' << c.series;
        for (double v : c.values)
            out << ',' << fixed(v, 2);
        out << '\n';
    }
}

/// Writes tile_<id>.csv per tile, ranges.csv and curves_<grouping>.csv.
/// Returns the files written.
inline std::vector<std::filesystem::path> write_reports(const ResultsMatrix& results,
                                                        const std::filesystem::path& dir,
                                                        Metric metric = Metric::macro_f1) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, auto&& writer) {
        std::ostringstream ss;
        writer(ss);
        write_text(dir / name, ss.str());
        written.push_back(dir / name);
    };
    for (int tile : results.config.tiles)
        emit("tile_" + std::to_string(tile) + ".csv",
             [&](std::ostream& o) { write_f1_table_csv(o, f1_table(results, tile, metric)); });
    emit("ranges.csv", [&](std::ostream& o) { write_range_table_csv(o, range_table(results, metric)); });
    for (auto g : {GroupBy::window_length, GroupBy::scale, GroupBy::tile})
        emit(std::string("curves_") + to_string(g) + ".csv",
             [&](std::ostream& o) { write_curves_csv(o, mean_curves(results, g, metric)); });
    return written;
}

} // namespace rainsvm
