// rainsvm command line: synth | prep | run | report

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rainsvm/rainsvm.hpp"

namespace fs = std::filesystem;
using namespace rainsvm;

namespace {

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
    config.seed = seed;
    if (config.data.synthetic)
        config.data.synthetic->seed = seed;
}

CropRect parse_crop(const std::string& text) {
    std::size_t x0, y0, w, h;
    char tail;
    if (std::sscanf(text.c_str(), "%zu,%zu,%zu,%zu%c", &x0, &y0, &w, &h, &tail) != 4)
        throw Error(ErrorCode::parse_error, "crop must be x0,y0,width,height");
    return {x0, y0, w, h};
}

int cmd_synth(const SynthParams& params, const fs::path& out) {
    const auto series = generate_synthetic(params);
    write_series(out, series);
    std::cerr << "wrote " << series.size() << " maps and manifest.csv to " << out.string() << '\n';
    return 0;
}

struct PrepOptions {
    std::string config;
    std::string manifest;
    std::vector<int> tiles{1, 13, 25};
    std::string crop;
    std::vector<std::string> dumps; ///< "n:k" window datasets to dump per tile and scale
    std::string out;
};

int cmd_prep(const PrepOptions& opt) {
    ExperimentConfig config;
    fs::path base;
    if (!opt.config.empty()) {
        config = load_config(opt.config);
        base = fs::path(opt.config).parent_path();
    } else if (!opt.manifest.empty()) {
        config.data.manifest = opt.manifest;
        config.tiles = opt.tiles;
    } else {
        throw Error(ErrorCode::invalid_argument, "prep needs --config or --manifest");
    }
    if (!opt.crop.empty())
        config.crop = parse_crop(opt.crop);

    const auto series = load_source(config, base);
    const PreparedData data = prepare(config, series);
    std::vector<IntensityMap> cropped;
    for (const auto& m : series)
        cropped.push_back(crop(m, data.crop));

    fs::create_directories(opt.out);
    for (int t : config.tiles) {
        std::ostringstream labels, seasons;
        write_labels_csv(labels, cropped, TileId(t));
        write_seasonality_csv(seasons, monthly_seasonality(cropped, TileId(t)));
        write_text(fs::path(opt.out) / ("labels_tile_" + std::to_string(t) + ".csv"), labels.str());
        write_text(fs::path(opt.out) / ("seasonality_tile_" + std::to_string(t) + ".csv"), seasons.str());
    }
    for (const auto& spec : opt.dumps) {
        std::size_t n = 0, k = 0;
        char tail;
        if (std::sscanf(spec.c_str(), "%zu:%zu%c", &n, &k, &tail) != 2)
            throw Error(ErrorCode::parse_error, "--dump expects n:k, got '" + spec + "'");
        for (int t : config.tiles)
            for (std::size_t s = 0; s < config.scales.size(); ++s) {
                const auto& sc = config.scales[s];
                const auto windows = build_windows(data.images[s], data.labels.at(t), n, k);
                const fs::path file = fs::path(opt.out) / ("windows_tile" + std::to_string(t) + "_" + sc.label() +
                                                          "_n" + std::to_string(n) + "_k" + std::to_string(k) + ".bin");
                std::ofstream os(file, std::ios::binary);
                write_dataset(os, {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(sc.width),
                                   static_cast<std::uint32_t>(sc.height), static_cast<std::uint32_t>(k)},
                              windows);
            }
    }
    std::cerr << "prepared " << series.size() << " days for " << config.tiles.size() << " tiles in " << opt.out
              << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
            std::size_t jobs, const std::string& tables, Metric metric) {
    ExperimentConfig config = load_config(config_path);
    if (seed)
        apply_seed(config, *seed);
    const auto results = run_experiment(config, jobs, fs::path(config_path).parent_path());
    write_text(out, serialize(results));
    std::cerr << "wrote " << results.cells.size() << " cells to " << out << '\n';
    if (!tables.empty())
        write_reports(results, tables, metric);
    return 0;
}

int cmd_report(const std::string& in, const std::string& tables, Metric metric) {
    const auto results = parse_results(read_text(in));
    for (const auto& f : write_reports(results, tables, metric))
        std::cerr << "wrote " << f.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regional rainfall-class prediction with linear SVMs on daily precipitation maps"};
    app.require_subcommand(1);

    SynthParams synth;
    std::string synth_out, synth_start;
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic map series and manifest");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--days", synth.days, "number of daily maps");
    synth_cmd->add_option("--width", synth.width, "map width in pixels");
    synth_cmd->add_option("--height", synth.height, "map height in pixels");
    synth_cmd->add_option("--blob-count", synth.blob_count, "mean number of active rain cells");
    synth_cmd->add_option("--blob-radius", synth.blob_radius, "rain cell radius in pixels");
    synth_cmd->add_option("--advection-x", synth.advection_x, "eastward drift, pixels/day");
    synth_cmd->add_option("--advection-y", synth.advection_y, "southward drift, pixels/day");
    synth_cmd->add_option("--seasonal-amplitude", synth.seasonal_amplitude, "seasonal modulation in [0,1]");
    synth_cmd->add_option("--mean-lifetime", synth.mean_lifetime, "mean rain cell lifetime, days");
    synth_cmd->add_option("--start", synth_start, "first date (YYYY-MM-DD)");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();

    PrepOptions prep;
    auto* prep_cmd = app.add_subcommand("prep", "write tile label and monthly seasonality CSVs");
    auto* prep_config = prep_cmd->add_option("--config", prep.config, "experiment config (data source, tiles, crop)");
    prep_cmd->add_option("--manifest", prep.manifest, "series manifest (date,path)")->excludes(prep_config);
    prep_cmd->add_option("--tiles", prep.tiles, "tiles to label")->delimiter(',');
    prep_cmd->add_option("--crop", prep.crop, "crop rectangle x0,y0,width,height");
    prep_cmd->add_option("--dump", prep.dumps, "also dump window datasets for n:k (repeatable)");
    prep_cmd->add_option("--out", prep.out, "output directory")->required();

    std::string run_config, run_out, run_tables, metric_name = "macro_f1";
    std::uint64_t run_seed = 0;
    std::size_t jobs = 1;
    auto* run_cmd = app.add_subcommand("run", "run the experiment matrix");
    run_cmd->add_option("--config", run_config, "experiment config JSON")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run_out, "results JSON")->required();
    auto* seed_opt = run_cmd->add_option("--seed", run_seed, "override the config seed");
    run_cmd->add_option("--jobs", jobs, "parallel cells (0 = all cores)");
    run_cmd->add_option("--tables", run_tables, "also write report CSVs to this directory");
    run_cmd->add_option("--metric", metric_name, "table metric")->check(CLI::IsMember({"macro_f1", "accuracy"}));

    std::string report_in, report_tables;
    auto* report_cmd = app.add_subcommand("report", "write tables and curves from a results file");
    report_cmd->add_option("--in", report_in, "results JSON")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--tables", report_tables, "output directory")->required();
    report_cmd->add_option("--metric", metric_name, "table metric")->check(CLI::IsMember({"macro_f1", "accuracy"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    try {
        if (*synth_cmd) {
            if (!synth_start.empty())
                synth.start = parse_date(synth_start);
            return cmd_synth(synth, synth_out);
        }
        if (*prep_cmd)
            return cmd_prep(prep);
        if (*run_cmd)
            return cmd_run(run_config, run_out, *seed_opt ? std::optional<std::uint64_t>(run_seed) : std::nullopt,
                           jobs, run_tables, parse_metric(metric_name));
        if (*report_cmd)
            return cmd_report(report_in, report_tables, parse_metric(metric_name));
    } catch (const rainsvm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
