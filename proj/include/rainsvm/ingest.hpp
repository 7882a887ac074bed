#pragma once

// Daily precipitation maps: storage types, PGM/manifest I/O, the crop ->
// grayscale -> downscale preprocessing chain, and a deterministic synthetic
// series generator used in place of the radar archive.

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace rainsvm {

using Date = std::chrono::year_month_day;

inline constexpr std::uint8_t kMaxLevel = 15;

inline Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
        throw Error(ErrorCode::parse_error, "bad ISO date '" + text + "'");
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok())
        throw Error(ErrorCode::parse_error, "invalid calendar date '" + text + "'");
    return date;
}

inline std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

inline Date add_days(const Date& date, long days) {
    return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

/// Row-major dated grid. IntensityMap holds levels 0..15, GrayImage holds
/// normalized values in [0,1].
template <typename T>
struct DatedGrid {
    Date date{};
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<T> values;

    DatedGrid() = default;
    DatedGrid(Date d, std::size_t w, std::size_t h, T fill = T{})
        : date(d), width(w), height(h), values(w * h, fill) {}

    T& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
    const T& at(std::size_t x, std::size_t y) const { return values[y * width + x]; }

    bool operator==(const DatedGrid&) const = default;
};

using IntensityMap = DatedGrid<std::uint8_t>;
using GrayImage = DatedGrid<float>;

struct CropRect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t cw = 0;
    std::size_t ch = 0;

    bool fits(std::size_t width, std::size_t height) const {
        return cw > 0 && ch > 0 && x0 + cw <= width && y0 + ch <= height;
    }
    bool operator==(const CropRect&) const = default;
};

inline void validate(const IntensityMap& map) {
    if (map.values.size() != map.width * map.height)
        throw Error(ErrorCode::dimension_mismatch, "level grid size does not match width x height");
    for (auto v : map.values)
        if (v > kMaxLevel)
            throw Error(ErrorCode::value_out_of_range,
                        "level " + std::to_string(v) + " exceeds " + std::to_string(kMaxLevel));
}

template <typename T>
DatedGrid<T> crop(const DatedGrid<T>& src, const CropRect& rect) {
    if (!rect.fits(src.width, src.height))
        throw Error(ErrorCode::out_of_bounds, "crop rectangle exceeds " + std::to_string(src.width) +
                                                  "x" + std::to_string(src.height) + " source");
    DatedGrid<T> out(src.date, rect.cw, rect.ch);
    for (std::size_t j = 0; j < rect.ch; ++j) {
        auto row = src.values.begin() + static_cast<std::ptrdiff_t>((rect.y0 + j) * src.width + rect.x0);
        std::copy(row, row + static_cast<std::ptrdiff_t>(rect.cw), out.values.begin() + static_cast<std::ptrdiff_t>(j * rect.cw));
    }
    return out;
}

inline GrayImage to_gray(const IntensityMap& map) {
    GrayImage out(map.date, map.width, map.height);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        out.values[i] = static_cast<float>(map.values[i]) / static_cast<float>(kMaxLevel);
    return out;
}

namespace detail {

struct AxisWeight {
    std::size_t source;
    double weight;
};

// For each target cell, the source pixels it overlaps and the overlap length
// normalized by the cell width, so the weights of every cell sum to one.
inline std::vector<std::vector<AxisWeight>> box_weights(std::size_t source, std::size_t target) {
    std::vector<std::vector<AxisWeight>> cells(target);
    const double scale = static_cast<double>(source) / static_cast<double>(target);
    for (std::size_t o = 0; o < target; ++o) {
        const double lo = static_cast<double>(o) * scale;
        const double hi = static_cast<double>(o + 1) * scale;
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto last = std::min(source, static_cast<std::size_t>(std::ceil(hi)));
        for (std::size_t p = first; p < last; ++p) {
            const double overlap =
                std::min(hi, static_cast<double>(p + 1)) - std::max(lo, static_cast<double>(p));
            if (overlap > 0.0)
                cells[o].push_back({p, overlap / scale});
        }
    }
    return cells;
}

} // namespace detail

/// Area-average resampling: every output pixel is the mean of the source area
/// it covers when [0,w)x[0,h) is mapped uniformly onto the target grid.
inline GrayImage downscale(const GrayImage& img, std::size_t target_w, std::size_t target_h) {
    if (target_w < 1 || target_h < 1 || target_w > img.width || target_h > img.height)
        throw Error(ErrorCode::invalid_argument,
                    "downscale target " + std::to_string(target_w) + "x" + std::to_string(target_h) +
                        " does not fit source " + std::to_string(img.width) + "x" + std::to_string(img.height));
    const auto wx = detail::box_weights(img.width, target_w);
    const auto wy = detail::box_weights(img.height, target_h);

    // Horizontal pass into a target_w x height buffer, then vertical pass.
    std::vector<double> rows(target_w * img.height, 0.0);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t o = 0; o < target_w; ++o) {
            double acc = 0.0;
            for (const auto& [p, w] : wx[o])
                acc += w * img.values[y * img.width + p];
            rows[y * target_w + o] = acc;
        }

    GrayImage out(img.date, target_w, target_h);
    for (std::size_t o = 0; o < target_h; ++o)
        for (std::size_t x = 0; x < target_w; ++x) {
            double acc = 0.0;
            for (const auto& [p, w] : wy[o])
                acc += w * rows[p * target_w + x];
            out.values[o * target_w + x] = static_cast<float>(std::clamp(acc, 0.0, 1.0));
        }
    return out;
}

/// Crop, map levels to [0,1], then area-average down to the target scale.
inline GrayImage preprocess(const IntensityMap& map, const CropRect& rect, std::size_t target_w,
                            std::size_t target_h) {
    return downscale(to_gray(crop(map, rect)), target_w, target_h);
}

// ---------------------------------------------------------------------------
// PGM (P5) and manifest I/O

inline IntensityMap read_pgm(const std::filesystem::path& path, Date date = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::missing_file, path.string());

    auto next_token = [&]() {
        std::string tok;
        while (in) {
            int c = in.peek();
            if (c == '#') {
                std::string comment;
                std::getline(in, comment);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        in >> tok;
        return tok;
    };

    if (next_token() != "P5")
        throw Error(ErrorCode::parse_error, path.string() + " is not a binary PGM (P5)");
    std::size_t w = 0, h = 0;
    unsigned maxval = 0;
    try {
        w = std::stoul(next_token());
        h = std::stoul(next_token());
        maxval = static_cast<unsigned>(std::stoul(next_token()));
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::parse_error, path.string() + ": malformed PGM header");
    }
    if (w == 0 || h == 0 || maxval == 0 || maxval > 255)
        throw Error(ErrorCode::parse_error, path.string() + ": unsupported PGM geometry or depth");
    in.get(); // single whitespace before raster

    IntensityMap map(date, w, h);
    in.read(reinterpret_cast<char*>(map.values.data()), static_cast<std::streamsize>(w * h));
    if (in.gcount() != static_cast<std::streamsize>(w * h))
        throw Error(ErrorCode::io_error, path.string() + ": truncated raster");
    try {
        validate(map);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
    return map;
}

inline void write_pgm(const std::filesystem::path& path, const IntensityMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << "P5\n" << map.width << ' ' << map.height << '\n' << static_cast<unsigned>(kMaxLevel) << '\n';
    out.write(reinterpret_cast<const char*>(map.values.data()), static_cast<std::streamsize>(map.values.size()));
    if (!out)
        throw Error(ErrorCode::io_error, "short write to " + path.string());
}

/// Reads a `date,path` manifest (paths relative to the manifest directory)
/// and returns the maps sorted by date.
inline std::vector<IntensityMap> load_series(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw Error(ErrorCode::missing_file, manifest_path.string());

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::parse_error, manifest_path.string() + ": empty manifest");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "date,path")
        throw Error(ErrorCode::parse_error, manifest_path.string() + ": header must be 'date,path'");

    const auto base = manifest_path.parent_path();
    std::vector<IntensityMap> series;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(ErrorCode::parse_error,
                        manifest_path.string() + ":" + std::to_string(lineno) + ": expected date,path");
        const Date date = parse_date(line.substr(0, comma));
        std::filesystem::path file = line.substr(comma + 1);
        if (file.is_relative())
            file = base / file;
        series.push_back(read_pgm(file, date));
    }
    if (series.empty())
        throw Error(ErrorCode::empty_input, manifest_path.string() + ": no rows");

    std::stable_sort(series.begin(), series.end(),
                     [](const IntensityMap& a, const IntensityMap& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].date == series[i - 1].date)
            throw Error(ErrorCode::duplicate_date, format_date(series[i].date));
        if (series[i].width != series[0].width || series[i].height != series[0].height)
            throw Error(ErrorCode::dimension_mismatch,
                        format_date(series[i].date) + " is " + std::to_string(series[i].width) + "x" +
                            std::to_string(series[i].height) + ", series is " +
                            std::to_string(series[0].width) + "x" + std::to_string(series[0].height));
    }
    return series;
}

/// Writes one PGM per day plus `manifest.csv` into `dir`.
inline void write_series(const std::filesystem::path& dir, const std::vector<IntensityMap>& series) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest)
        throw Error(ErrorCode::io_error, "cannot write manifest in " + dir.string());
    manifest << "date,path\n";
    for (const auto& map : series) {
        const std::string name = format_date(map.date) + ".pgm";
        write_pgm(dir / name, map);
        manifest << format_date(map.date) << ',' << name << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic series

struct SynthParams {
    std::uint64_t seed = 1;
    std::size_t days = 2835;
    std::size_t width = 400;
    std::size_t height = 320;
    double blob_count = 6.0;          ///< mean number of simultaneously active rain cells
    double blob_radius = 24.0;        ///< pixels
    double advection_x = 40.0;        ///< pixels/day, positive = eastward
    double advection_y = 0.0;         ///< pixels/day, positive = southward
    double seasonal_amplitude = 0.5;  ///< relative modulation of cell rate and peak, in [0,1]
    double mean_lifetime = 5.0;       ///< days
    Date start{std::chrono::year{2012}, std::chrono::January, std::chrono::day{1}};

    void validate() const {
        if (days < 1)
            throw Error(ErrorCode::invalid_argument, "synthetic series needs at least one day");
        if (width < 5 || height < 5)
            throw Error(ErrorCode::invalid_argument, "synthetic maps must be at least 5x5");
        if (!(blob_count >= 0.0) || !(blob_radius > 0.0) || !(mean_lifetime > 0.0))
            throw Error(ErrorCode::invalid_argument, "blob count, radius and lifetime must be positive");
        if (!(seasonal_amplitude >= 0.0 && seasonal_amplitude <= 1.0))
            throw Error(ErrorCode::invalid_argument, "seasonal amplitude must lie in [0,1]");
        if (!std::isfinite(advection_x) || !std::isfinite(advection_y))
            throw Error(ErrorCode::invalid_argument, "advection velocity must be finite");
        if (!start.ok())
            throw Error(ErrorCode::invalid_argument, "invalid start date");
    }
};

namespace detail {

// Explicit transforms over mt19937_64 so the series is identical across
// standard library implementations (the std distributions are not).
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    unsigned poisson(double mean) {
        const double limit = std::exp(-mean);
        unsigned k = 0;
        for (double p = uniform(); p > limit; p *= uniform())
            ++k;
        return k;
    }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
};

struct RainCell {
    double x, y;
    double vx, vy;
    double peak;
    int days_left;
};

inline int day_of_year(const Date& date) {
    const Date jan1{date.year(), std::chrono::January, std::chrono::day{1}};
    return static_cast<int>((std::chrono::sys_days{date} - std::chrono::sys_days{jan1}).count());
}

} // namespace detail

/// Seasonal factor in [-1,1]; peaks in mid-July.
inline double seasonal_phase(const Date& date) {
    return std::sin(2.0 * std::numbers::pi * (detail::day_of_year(date) - 105) / 365.25);
}

/// Gaussian rain cells spawned by a seasonally modulated Poisson process,
/// advected by a constant velocity and rendered to levels 0..15.
inline std::vector<IntensityMap> generate_synthetic(const SynthParams& params) {
    params.validate();
    detail::PortableRng rng(params.seed);

    const double w = static_cast<double>(params.width);
    const double h = static_cast<double>(params.height);
    const double r = params.blob_radius;
    const double sigma = r / 2.0;
    const double reach = 3.0 * sigma;
    const double travel = 2.0 * params.mean_lifetime;
    // Spawn region extends upstream so cells drift in across the boundary.
    const double x_lo = -r - std::max(params.advection_x, 0.0) * travel;
    const double x_hi = w + r - std::min(params.advection_x, 0.0) * travel;
    const double y_lo = -r - std::max(params.advection_y, 0.0) * travel;
    const double y_hi = h + r - std::min(params.advection_y, 0.0) * travel;
    const double area_ratio = ((x_hi - x_lo) * (y_hi - y_lo)) / ((w + 2 * r) * (h + 2 * r));

    std::vector<detail::RainCell> cells;
    std::vector<IntensityMap> series;
    series.reserve(params.days);
    std::vector<double> field(params.width * params.height);

    for (std::size_t day = 0; day < params.days; ++day) {
        const Date date = add_days(params.start, static_cast<long>(day));
        const double season = 1.0 + params.seasonal_amplitude * seasonal_phase(date);

        const double rate = params.blob_count * area_ratio / params.mean_lifetime * season;
        const unsigned spawned = rng.poisson(std::max(rate, 0.0));
        for (unsigned s = 0; s < spawned; ++s) {
            detail::RainCell c{};
            c.x = rng.uniform(x_lo, x_hi);
            c.y = rng.uniform(y_lo, y_hi);
            c.vx = params.advection_x * rng.uniform(0.8, 1.2);
            c.vy = params.advection_y * rng.uniform(0.8, 1.2);
            const double strength = 0.35 + 0.65 * rng.uniform();
            c.peak = 17.0 * strength * season / (1.0 + params.seasonal_amplitude);
            c.days_left = 1 + static_cast<int>(rng.exponential(params.mean_lifetime));
            cells.push_back(c);
        }

        std::fill(field.begin(), field.end(), 0.0);
        for (const auto& c : cells) {
            const auto xs = static_cast<long>(std::floor(c.x - reach));
            const auto xe = static_cast<long>(std::ceil(c.x + reach));
            const auto ys = static_cast<long>(std::floor(c.y - reach));
            const auto ye = static_cast<long>(std::ceil(c.y + reach));
            for (long py = std::max(ys, 0L); py <= std::min(ye, static_cast<long>(params.height) - 1); ++py)
                for (long px = std::max(xs, 0L); px <= std::min(xe, static_cast<long>(params.width) - 1); ++px) {
                    const double dx = static_cast<double>(px) + 0.5 - c.x;
                    const double dy = static_cast<double>(py) + 0.5 - c.y;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 <= reach * reach)
                        field[static_cast<std::size_t>(py) * params.width + static_cast<std::size_t>(px)] +=
                            c.peak * std::exp(-d2 / (2.0 * sigma * sigma));
                }
        }

        IntensityMap map(date, params.width, params.height);
        for (std::size_t i = 0; i < field.size(); ++i)
            map.values[i] = static_cast<std::uint8_t>(std::clamp(std::floor(field[i]), 0.0, 15.0));
        series.push_back(std::move(map));

        for (auto& c : cells) {
            c.x += c.vx;
            c.y += c.vy;
            --c.days_left;
        }
        std::erase_if(cells, [](const detail::RainCell& c) { return c.days_left <= 0; });
    }
    return series;
}

} // namespace rainsvm
