#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "rainsvm/dataset.hpp"

using namespace rainsvm;

namespace {

const Date kStart{std::chrono::year{2012}, std::chrono::January, std::chrono::day{1}};

// Pixel values encode (day, position) so any mix-up is visible.
std::vector<GrayImage> tagged_images(std::size_t days, std::size_t w, std::size_t h) {
    std::vector<GrayImage> out;
    for (std::size_t d = 0; d < days; ++d) {
        GrayImage img(add_days(kStart, static_cast<long>(d)), w, h);
        for (std::size_t i = 0; i < img.values.size(); ++i)
            img.values[i] = static_cast<float>(d * 1000 + i) / 1.0e6f;
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<RainClass> cycling_labels(std::size_t days) {
    std::vector<RainClass> out;
    for (std::size_t d = 0; d < days; ++d)
        out.push_back(class_from_index(d % 3));
    return out;
}

std::vector<WindowSample> indexed_samples(std::size_t count) {
    std::vector<WindowSample> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i].end_index = i + 3;
    return out;
}

std::vector<std::size_t> fold_sizes(const std::vector<std::size_t>& folds, std::size_t fold_count) {
    std::vector<std::size_t> sizes(fold_count, 0);
    for (auto f : folds)
        ++sizes[f];
    return sizes;
}

} // namespace

TEST(BuildWindows, SmallExample) {
    const auto images = tagged_images(5, 2, 2);
    const auto labels = cycling_labels(5);
    const auto s = build_windows(images, labels, 2, 1);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].end_index, 1u);
    EXPECT_EQ(s[2].end_index, 3u);
    EXPECT_EQ(s[0].label, labels[2]);
    EXPECT_EQ(s[0].last_image_class, labels[1]);
    EXPECT_EQ(s[0].horizon, 1u);
    // Oldest image first.
    EXPECT_EQ(std::vector<float>(s[0].features.begin(), s[0].features.begin() + 4), images[0].values);
    EXPECT_EQ(std::vector<float>(s[0].features.begin() + 4, s[0].features.end()), images[1].values);
}

TEST(BuildWindows, CountProperty) {
    const auto images = tagged_images(200, 1, 1);
    const auto labels = cycling_labels(200);
    for (std::size_t T : {38u, 39u, 40u, 77u, 200u})
        for (std::size_t n : {2u, 4u, 6u, 8u})
            for (std::size_t k = 1; k <= 30; ++k) {
                std::span<const GrayImage> im(images.data(), T);
                std::span<const RainClass> lb(labels.data(), T);
                const auto s = build_windows(im, lb, n, k);
                ASSERT_EQ(s.size(), T - n - k + 1);
                for (const auto& w : s)
                    ASSERT_EQ(w.label, labels[w.end_index + k]);
            }
}

TEST(BuildWindows, PaperSizes) {
    // 2831 samples for T=2835, n=4, k=1; checked on 1x1 images to keep it cheap.
    const auto images = tagged_images(2835, 1, 1);
    EXPECT_EQ(build_windows(images, cycling_labels(2835), 4, 1).size(), 2831u);

    const auto big = tagged_images(3, 172, 123);
    const auto s = build_windows(big, cycling_labels(3), 2, 1);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].features.size(), 42312u);

    const auto small = tagged_images(3, 87, 61);
    EXPECT_EQ(build_windows(small, cycling_labels(3), 2, 1)[0].features.size(), 2u * 87u * 61u);
}

TEST(BuildWindows, Errors) {
    const auto images = tagged_images(5, 2, 2);
    EXPECT_THROW(build_windows(images, cycling_labels(4), 2, 1), Error);
    EXPECT_THROW(build_windows(images, cycling_labels(5), 4, 2), Error);
    EXPECT_THROW(build_windows(images, cycling_labels(5), 0, 1), Error);
    EXPECT_THROW(build_windows(images, cycling_labels(5), 2, 0), Error);
    auto ragged = images;
    ragged[3] = GrayImage(kStart, 3, 2);
    EXPECT_THROW(build_windows(ragged, cycling_labels(5), 2, 1), Error);
}

TEST(BuildWindows, LosslessReconstruction) {
    const std::size_t w = 5, h = 3, px = w * h;
    const auto images = tagged_images(40, w, h);
    for (std::size_t n : {1u, 3u, 8u}) {
        const auto samples = build_windows(images, cycling_labels(40), n, 2);
        for (const auto& s : samples)
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t day = s.end_index + 1 - n + j;
                const std::vector<float> block(s.features.begin() + static_cast<std::ptrdiff_t>(j * px),
                                               s.features.begin() + static_cast<std::ptrdiff_t>((j + 1) * px));
                ASSERT_EQ(block, images[day].values);
            }
    }
}

TEST(ChronoSplit, Examples) {
    auto s10 = chrono_split(indexed_samples(10), {});
    EXPECT_EQ(s10.train.size(), 9u);
    EXPECT_EQ(s10.test.size(), 1u);

    auto big = chrono_split(indexed_samples(2831), {});
    EXPECT_EQ(big.train.size(), 2547u);
    EXPECT_EQ(big.test.size(), 284u);

    EXPECT_THROW(chrono_split(indexed_samples(1), {}), Error);
}

TEST(ChronoSplit, OrderPreservedNothingLost) {
    for (std::size_t N : {2u, 11u, 57u, 300u, 2831u})
        for (double frac : {0.5, 0.75, 0.9}) {
            if (train_count(N, frac) == 0 || train_count(N, frac) == N)
                continue;
            const auto split = chrono_split(indexed_samples(N), {frac, 10});
            ASSERT_EQ(split.train.size() + split.test.size(), N);
            EXPECT_LT(split.train.back().end_index, split.test.front().end_index);
            for (std::size_t i = 0; i < split.train.size(); ++i)
                ASSERT_EQ(split.train[i].end_index, i + 3);
            for (std::size_t i = 0; i < split.test.size(); ++i)
                ASSERT_EQ(split.test[i].end_index, split.train.size() + i + 3);
        }
}

TEST(ChronoSplit, RejectsInvalidSpecAndOrder) {
    EXPECT_THROW(chrono_split(indexed_samples(10), {1.0, 10}), Error);
    EXPECT_THROW(chrono_split(indexed_samples(10), {0.9, 1}), Error);
    auto shuffled = indexed_samples(10);
    std::swap(shuffled[2], shuffled[5]);
    EXPECT_THROW(chrono_split(shuffled, {}), Error);
}

TEST(TrainCount, FloorIsRobustToRounding) {
    EXPECT_EQ(train_count(100, 0.29), 29u);
    EXPECT_EQ(train_count(10, 0.9), 9u);
    EXPECT_EQ(train_count(2831, 0.9), 2547u);
}

TEST(FoldAssign, Examples) {
    EXPECT_EQ(fold_sizes(fold_assign(25, 10), 10), (std::vector<std::size_t>{3, 3, 3, 3, 3, 2, 2, 2, 2, 2}));
    EXPECT_EQ(fold_sizes(fold_assign(10, 10), 10), std::vector<std::size_t>(10, 1));
    EXPECT_THROW(fold_assign(5, 10), Error);
    EXPECT_THROW(fold_assign(5, 1), Error);
}

TEST(FoldAssign, ContiguousPartition) {
    for (std::size_t N = 10; N < 400; N += 13) {
        const auto folds = fold_assign(N, 10);
        ASSERT_EQ(folds.size(), N);
        for (std::size_t i = 1; i < N; ++i)
            ASSERT_TRUE(folds[i] == folds[i - 1] || folds[i] == folds[i - 1] + 1);
        EXPECT_EQ(folds.front(), 0u);
        EXPECT_EQ(folds.back(), 9u);
        const auto sizes = fold_sizes(folds, 10);
        EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    }
}

TEST(DatasetFile, RoundTripAndLayout) {
    const auto images = tagged_images(9, 3, 2);
    const auto samples = build_windows(images, cycling_labels(9), 2, 3);
    std::stringstream buf;
    write_dataset(buf, {2, 3, 2, 3}, samples);
    const std::string bytes = buf.str();
    // 24-byte header, then per record 4 + 1 + 1 + 12 * 4 bytes.
    EXPECT_EQ(bytes.size(), 24u + samples.size() * (6u + 48u));
    EXPECT_EQ(bytes.substr(0, 4), "RSWD");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2u);

    const auto [header, back] = read_dataset(buf);
    EXPECT_EQ(header.n, 2u);
    EXPECT_EQ(header.width, 3u);
    EXPECT_EQ(header.horizon, 3u);
    EXPECT_EQ(back, samples);
}

TEST(DatasetFile, Errors) {
    std::stringstream junk("nope");
    EXPECT_THROW(read_dataset(junk), Error);
    const auto samples = build_windows(tagged_images(4, 2, 2), cycling_labels(4), 2, 1);
    std::stringstream out;
    EXPECT_THROW(write_dataset(out, {3, 2, 2, 1}, samples), Error);
    std::stringstream truncated;
    write_dataset(truncated, {2, 2, 2, 1}, samples);
    std::string bytes = truncated.str();
    bytes.resize(bytes.size() - 3);
    std::stringstream in(bytes);
    EXPECT_THROW(read_dataset(in), Error);
}
