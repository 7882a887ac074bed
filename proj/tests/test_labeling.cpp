#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "rainsvm/labeling.hpp"

using namespace rainsvm;

namespace {

const Date kStart{std::chrono::year{2013}, std::chrono::January, std::chrono::day{1}};

IntensityMap blank(std::size_t w = 20, std::size_t h = 15, Date d = kStart) { return IntensityMap(d, w, h); }

// Map whose tile has the given max level and zeros elsewhere.
IntensityMap with_peak(TileId tile, std::uint8_t level, Date d = kStart) {
    auto m = blank(20, 15, d);
    const auto r = tile_bounds(tile, m.width, m.height);
    m.at(r.x0 + r.cw - 1, r.y0) = level;
    return m;
}

} // namespace

TEST(TileBounds, PaperScaleCorners) {
    EXPECT_EQ(tile_bounds(TileId(1), 172, 123), (CropRect{0, 0, 35, 25}));
    EXPECT_EQ(tile_bounds(TileId(13), 172, 123), (CropRect{70, 50, 34, 25}));
    EXPECT_EQ(tile_bounds(TileId(25), 172, 123), (CropRect{138, 99, 34, 24}));
}

TEST(TileBounds, TooSmall) {
    EXPECT_THROW(tile_bounds(TileId(1), 4, 10), Error);
    EXPECT_THROW(TileId(0), Error);
    EXPECT_THROW(TileId(26), Error);
}

TEST(TileBounds, PartitionProperty) {
    std::vector<std::pair<std::size_t, std::size_t>> sizes{{172, 123}, {87, 61}, {5, 5}, {400, 320}, {43, 31}};
    std::mt19937 rng(5);
    for (int i = 0; i < 40; ++i)
        sizes.emplace_back(std::uniform_int_distribution<std::size_t>(5, 97)(rng),
                           std::uniform_int_distribution<std::size_t>(5, 97)(rng));
    for (auto [w, h] : sizes) {
        std::vector<int> owner(w * h, 0);
        std::size_t area = 0;
        for (int t = 1; t <= 25; ++t) {
            const auto r = tile_bounds(TileId(t), w, h);
            ASSERT_TRUE(r.fits(w, h));
            area += r.cw * r.ch;
            for (std::size_t y = r.y0; y < r.y0 + r.ch; ++y)
                for (std::size_t x = r.x0; x < r.x0 + r.cw; ++x)
                    ASSERT_EQ(owner[y * w + x]++, 0) << w << "x" << h << " tile " << t;
        }
        EXPECT_EQ(area, w * h);
    }
}

TEST(TileBounds, RowMajorNumbering) {
    const auto t7 = tile_bounds(TileId(7), 100, 100);
    EXPECT_EQ(t7.x0, 20u);
    EXPECT_EQ(t7.y0, 20u);
    EXPECT_EQ(TileId(5).column(), 4u);
    EXPECT_EQ(TileId(5).row(), 0u);
    EXPECT_EQ(TileId(21).row(), 4u);
}

TEST(Quantize, Examples) {
    EXPECT_EQ(quantize_level(0), RainClass::light);
    EXPECT_EQ(quantize_level(2), RainClass::light);
    EXPECT_EQ(quantize_level(3), RainClass::moderate);
    EXPECT_EQ(quantize_level(4), RainClass::moderate);
    EXPECT_EQ(quantize_level(5), RainClass::moderate);
    EXPECT_EQ(quantize_level(6), RainClass::heavy);
    EXPECT_EQ(quantize_level(15), RainClass::heavy);
    EXPECT_THROW(quantize_level(16), Error);
    EXPECT_THROW(quantize_level(-1), Error);
}

TEST(Quantize, Monotone) {
    for (int l = 1; l <= 15; ++l)
        EXPECT_LE(index_of(quantize_level(l - 1)), index_of(quantize_level(l)));
}

TEST(TileClass, Examples) {
    EXPECT_EQ(tile_class(blank(), TileId(13)), RainClass::light);
    EXPECT_EQ(tile_class(with_peak(TileId(13), 7), TileId(13)), RainClass::heavy);
    EXPECT_EQ(tile_class(with_peak(TileId(13), 5), TileId(13)), RainClass::moderate);
    // Rain in a neighbouring tile does not leak across the boundary.
    EXPECT_EQ(tile_class(with_peak(TileId(12), 9), TileId(13)), RainClass::light);
}

TEST(TileClass, PermutationInvariantWithinTile) {
    std::mt19937 rng(9);
    auto m = blank(30, 25);
    std::uniform_int_distribution<int> lvl(0, 15);
    for (auto& v : m.values)
        v = static_cast<std::uint8_t>(lvl(rng) / 3);
    const TileId tile(8);
    const auto r = tile_bounds(tile, m.width, m.height);
    const auto expected = tile_class(m, tile);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> inside;
        for (std::size_t y = r.y0; y < r.y0 + r.ch; ++y)
            for (std::size_t x = r.x0; x < r.x0 + r.cw; ++x)
                inside.push_back(m.at(x, y));
        std::shuffle(inside.begin(), inside.end(), rng);
        std::size_t i = 0;
        for (std::size_t y = r.y0; y < r.y0 + r.ch; ++y)
            for (std::size_t x = r.x0; x < r.x0 + r.cw; ++x)
                m.at(x, y) = inside[i++];
        EXPECT_EQ(tile_class(m, tile), expected);
    }
}

TEST(ClassFrequencies, Examples) {
    const TileId t(1);
    std::vector<IntensityMap> zeros(6, blank());
    const auto f0 = class_frequencies(zeros, t);
    EXPECT_EQ(f0.f, (std::array<double, 3>{1.0, 0.0, 0.0}));

    std::vector<IntensityMap> lmmh{with_peak(t, 1), with_peak(t, 3), with_peak(t, 5), with_peak(t, 12)};
    const auto f1 = class_frequencies(lmmh, t);
    EXPECT_DOUBLE_EQ(f1.light(), 0.25);
    EXPECT_DOUBLE_EQ(f1.moderate(), 0.5);
    EXPECT_DOUBLE_EQ(f1.heavy(), 0.25);

    std::vector<IntensityMap> one{with_peak(t, 15)};
    EXPECT_EQ(class_frequencies(one, t).f, (std::array<double, 3>{0.0, 0.0, 1.0}));

    EXPECT_THROW(class_frequencies(std::vector<IntensityMap>{}, t), Error);
}

TEST(ClassFrequencies, SumToOne) {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> lvl(0, 15);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<IntensityMap> series;
        const int days = 1 + trial * 7;
        for (int d = 0; d < days; ++d)
            series.push_back(with_peak(TileId(25), static_cast<std::uint8_t>(lvl(rng))));
        const auto f = class_frequencies(series, TileId(25));
        EXPECT_NEAR(f.light() + f.moderate() + f.heavy(), 1.0, 1e-9);
    }
}

TEST(Seasonality, AllDryYear) {
    std::vector<IntensityMap> year;
    for (long d = 0; d < 365; ++d)
        year.push_back(blank(20, 15, add_days(kStart, d)));
    const auto table = monthly_seasonality(year, TileId(13));
    for (const auto& row : table) {
        ASSERT_TRUE(row.freq);
        EXPECT_EQ(row.freq->f, (std::array<double, 3>{1.0, 0.0, 0.0}));
    }
    EXPECT_EQ(table[0].count, 31u);
    EXPECT_EQ(table[1].count, 28u);
}

TEST(Seasonality, HeavyOnlyInJuly) {
    std::vector<IntensityMap> series;
    for (long d = 0; d < 2 * 365; ++d) {
        const Date date = add_days(kStart, d);
        const bool july = date.month() == std::chrono::July;
        series.push_back(with_peak(TileId(1), july ? 9 : 1, date));
    }
    const auto table = monthly_seasonality(series, TileId(1));
    for (const auto& row : table) {
        ASSERT_TRUE(row.freq);
        EXPECT_EQ(row.freq->heavy(), row.month == 7 ? 1.0 : 0.0);
    }
    EXPECT_EQ(table[6].count, 62u);
}

TEST(Seasonality, OnlyMarch) {
    std::vector<IntensityMap> march;
    const Date first{std::chrono::year{2014}, std::chrono::March, std::chrono::day{1}};
    for (long d = 0; d < 31; ++d)
        march.push_back(with_peak(TileId(2), d % 2 ? 4 : 0, add_days(first, d)));
    const auto table = monthly_seasonality(march, TileId(2));
    int empty = 0;
    for (const auto& row : table) {
        if (row.month == 3) {
            EXPECT_EQ(row.count, 31u);
            ASSERT_TRUE(row.freq);
            EXPECT_NEAR(row.freq->moderate(), 15.0 / 31.0, 1e-12);
        } else {
            EXPECT_EQ(row.count, 0u);
            EXPECT_FALSE(row.freq);
            ++empty;
        }
    }
    EXPECT_EQ(empty, 11);
}

TEST(Csv, LabelAndSeasonalityFormats) {
    std::vector<IntensityMap> series{with_peak(TileId(13), 0), with_peak(TileId(13), 4, add_days(kStart, 1)),
                                     with_peak(TileId(13), 8, add_days(kStart, 2))};
    std::ostringstream labels;
    write_labels_csv(labels, series, TileId(13));
    EXPECT_EQ(labels.str(), "date,tile,class\n2013-01-01,13,0\n2013-01-02,13,1\n2013-01-03,13,2\n");

    std::ostringstream seasons;
    write_seasonality_csv(seasons, monthly_seasonality(series, TileId(13)));
    const std::string text = seasons.str();
    EXPECT_EQ(text.rfind("month,f_light,f_moderate,f_heavy,count\n1,0.333333,0.333333,0.333333,3\n2,,,,0\n", 0),
              0u);
}
