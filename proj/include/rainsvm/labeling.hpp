#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"

namespace rainsvm {

enum class RainClass : std::uint8_t { light = 0, moderate = 1, heavy = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<RainClass, kClassCount> kAllClasses{RainClass::light, RainClass::moderate,
                                                                  RainClass::heavy};

constexpr std::size_t index_of(RainClass c) { return static_cast<std::size_t>(c); }

inline RainClass class_from_index(std::size_t i) {
    if (i >= kClassCount)
        throw Error(ErrorCode::value_out_of_range, "rain class " + std::to_string(i));
    return static_cast<RainClass>(i);
}

inline const char* to_string(RainClass c) {
    switch (c) {
    case RainClass::light: return "light";
    case RainClass::moderate: return "moderate";
    case RainClass::heavy: return "heavy";
    }
    return "?";
}

inline constexpr std::size_t kGridSide = 5;
inline constexpr std::size_t kTileCount = kGridSide * kGridSide;

/// Tile number 1..25, row-major from the north-west corner.
class TileId {
public:
    explicit TileId(int index) : index_(index) {
        if (index < 1 || index > static_cast<int>(kTileCount))
            throw Error(ErrorCode::value_out_of_range, "tile id " + std::to_string(index) + " not in [1,25]");
    }
    int index() const { return index_; }
    std::size_t row() const { return static_cast<std::size_t>(index_ - 1) / kGridSide; }
    std::size_t column() const { return static_cast<std::size_t>(index_ - 1) % kGridSide; }

    auto operator<=>(const TileId&) const = default;

private:
    int index_;
};

namespace detail {

// Start and extent of band `i` when `length` pixels are split into five bands,
// the first (length % 5) bands taking one extra pixel.
inline std::pair<std::size_t, std::size_t> grid_band(std::size_t length, std::size_t i) {
    const std::size_t base = length / kGridSide;
    const std::size_t extra = length % kGridSide;
    return {i * base + std::min(i, extra), base + (i < extra ? 1 : 0)};
}

} // namespace detail

inline CropRect tile_bounds(TileId tile, std::size_t width, std::size_t height) {
    if (width < kGridSide || height < kGridSide)
        throw Error(ErrorCode::invalid_argument, "image " + std::to_string(width) + "x" + std::to_string(height) +
                                                     " too small for a 5x5 grid");
    const auto [x0, cw] = detail::grid_band(width, tile.column());
    const auto [y0, ch] = detail::grid_band(height, tile.row());
    return {x0, y0, cw, ch};
}

inline RainClass quantize_level(int level) {
    if (level < 0 || level > kMaxLevel)
        throw Error(ErrorCode::value_out_of_range, "intensity level " + std::to_string(level));
    if (level <= 2)
        return RainClass::light;
    if (level <= 5)
        return RainClass::moderate;
    return RainClass::heavy;
}

/// A tile takes the class of the highest level observed anywhere inside it.
inline RainClass tile_class(const IntensityMap& map, TileId tile) {
    const CropRect r = tile_bounds(tile, map.width, map.height);
    std::uint8_t peak = 0;
    for (std::size_t y = r.y0; y < r.y0 + r.ch; ++y) {
        const auto* row = map.values.data() + y * map.width;
        peak = std::max(peak, *std::max_element(row + r.x0, row + r.x0 + r.cw));
    }
    return quantize_level(peak);
}

inline std::vector<RainClass> tile_labels(std::span<const IntensityMap> series, TileId tile) {
    std::vector<RainClass> labels;
    labels.reserve(series.size());
    for (const auto& map : series)
        labels.push_back(tile_class(map, tile));
    return labels;
}

struct ClassFrequencies {
    std::array<double, kClassCount> f{};

    double light() const { return f[0]; }
    double moderate() const { return f[1]; }
    double heavy() const { return f[2]; }
    double operator[](RainClass c) const { return f[index_of(c)]; }

    static ClassFrequencies from_counts(const std::array<std::size_t, kClassCount>& counts) {
        const std::size_t total = counts[0] + counts[1] + counts[2];
        if (total == 0)
            throw Error(ErrorCode::empty_input, "no samples to compute class frequencies");
        ClassFrequencies out;
        for (std::size_t i = 0; i < kClassCount; ++i)
            out.f[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
        return out;
    }

    static ClassFrequencies of(std::span<const RainClass> labels) {
        std::array<std::size_t, kClassCount> counts{};
        for (auto c : labels)
            ++counts[index_of(c)];
        return from_counts(counts);
    }
};

inline ClassFrequencies class_frequencies(std::span<const IntensityMap> series, TileId tile) {
    if (series.empty())
        throw Error(ErrorCode::empty_input, "class frequencies of an empty series");
    const auto labels = tile_labels(series, tile);
    return ClassFrequencies::of(labels);
}

struct SeasonalityRow {
    unsigned month = 0;
    std::size_t count = 0;
    std::optional<ClassFrequencies> freq; ///< empty when count == 0
};

using SeasonalityTable = std::array<SeasonalityRow, 12>;

inline SeasonalityTable monthly_seasonality(std::span<const IntensityMap> series, TileId tile) {
    if (series.empty())
        throw Error(ErrorCode::empty_input, "seasonality of an empty series");
    std::array<std::array<std::size_t, kClassCount>, 12> counts{};
    for (const auto& map : series) {
        if (!map.date.ok())
            throw Error(ErrorCode::invalid_argument, "map without a valid date");
        const unsigned m = static_cast<unsigned>(map.date.month());
        ++counts[m - 1][index_of(tile_class(map, tile))];
    }
    SeasonalityTable table;
    for (unsigned m = 0; m < 12; ++m) {
        auto& row = table[m];
        row.month = m + 1;
        row.count = counts[m][0] + counts[m][1] + counts[m][2];
        if (row.count > 0)
            row.freq = ClassFrequencies::from_counts(counts[m]);
    }
    return table;
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_labels_csv(std::ostream& out, std::span<const IntensityMap> series, TileId tile) {
    out << "date,tile,class\n";
    for (const auto& map : series)
        out << format_date(map.date) << ',' << tile.index() << ',' << index_of(tile_class(map, tile)) << '\n';
}

inline void write_seasonality_csv(std::ostream& out, const SeasonalityTable& table) {
    out << "month,f_light,f_moderate,f_heavy,count\n";
    char buf[128];
    for (const auto& row : table) {
        if (row.freq)
            std::snprintf(buf, sizeof buf, "%u,%.6f,%.6f,%.6f,%zu\n", row.month, row.freq->light(),
                          row.freq->moderate(), row.freq->heavy(), row.count);
        else
            std::snprintf(buf, sizeof buf, "%u,,,,0\n", row.month);
        out << buf;
    }
}

} // namespace rainsvm
