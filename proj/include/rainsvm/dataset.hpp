#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "labeling.hpp"

namespace rainsvm {

/// n consecutive images (oldest first, each row-major) and the tile class
/// `horizon` days after the last one.
struct WindowSample {
    std::vector<float> features;
    RainClass label = RainClass::light;
    std::size_t end_index = 0;
    std::size_t horizon = 0;
    RainClass last_image_class = RainClass::light;

    bool operator==(const WindowSample&) const = default;
};

struct SplitSpec {
    double train_fraction = 0.9;
    std::size_t fold_count = 10;

    void validate() const {
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw Error(ErrorCode::invalid_argument, "train fraction must lie strictly between 0 and 1");
        if (fold_count < 2)
            throw Error(ErrorCode::invalid_argument, "need at least two folds");
    }
};

inline std::vector<WindowSample> build_windows(std::span<const GrayImage> images, std::span<const RainClass> labels,
                                               std::size_t n, std::size_t k) {
    if (n < 1 || k < 1)
        throw Error(ErrorCode::invalid_argument, "window length and horizon must be at least 1");
    if (images.size() != labels.size())
        throw Error(ErrorCode::dimension_mismatch, std::to_string(images.size()) + " images but " +
                                                       std::to_string(labels.size()) + " labels");
    const std::size_t T = images.size();
    if (T < n + k)
        throw Error(ErrorCode::too_short, "series of " + std::to_string(T) + " days cannot hold n=" +
                                              std::to_string(n) + " with k=" + std::to_string(k));
    const std::size_t pixels = images.front().width * images.front().height;
    for (const auto& img : images)
        if (img.width != images.front().width || img.height != images.front().height ||
            img.values.size() != pixels)
            throw Error(ErrorCode::dimension_mismatch, "images in a window series must share dimensions");

    std::vector<WindowSample> samples;
    samples.reserve(T - n - k + 1);
    for (std::size_t t = n - 1; t + k < T; ++t) {
        WindowSample s;
        s.features.reserve(n * pixels);
        for (std::size_t d = t + 1 - n; d <= t; ++d)
            s.features.insert(s.features.end(), images[d].values.begin(), images[d].values.end());
        s.label = labels[t + k];
        s.end_index = t;
        s.horizon = k;
        s.last_image_class = labels[t];
        samples.push_back(std::move(s));
    }
    return samples;
}

inline std::size_t train_count(std::size_t total, double train_fraction) {
    // The epsilon absorbs products such as 0.29 * 100 = 28.999999999999996.
    return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total) + 1e-9));
}

struct Split {
    std::vector<WindowSample> train;
    std::vector<WindowSample> test;
};

/// Leading samples train, trailing samples test; no shuffling.
inline Split chrono_split(std::vector<WindowSample> samples, const SplitSpec& spec) {
    spec.validate();
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].end_index <= samples[i - 1].end_index)
            throw Error(ErrorCode::invalid_argument, "samples must be ordered by end index");
    const std::size_t n_train = train_count(samples.size(), spec.train_fraction);
    if (n_train == 0 || n_train == samples.size())
        throw Error(ErrorCode::empty_input, "split of " + std::to_string(samples.size()) +
                                                " samples leaves an empty train or test set");
    Split out;
    out.test.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                    std::make_move_iterator(samples.end()));
    samples.resize(n_train);
    out.train = std::move(samples);
    return out;
}

/// Contiguous chronological folds; the first (N % folds) folds hold one extra sample.
inline std::vector<std::size_t> fold_assign(std::size_t sample_count, std::size_t fold_count) {
    if (fold_count < 2)
        throw Error(ErrorCode::invalid_argument, "need at least two folds");
    if (sample_count < fold_count)
        throw Error(ErrorCode::too_short, std::to_string(sample_count) + " samples cannot fill " +
                                              std::to_string(fold_count) + " folds");
    std::vector<std::size_t> fold(sample_count);
    const std::size_t base = sample_count / fold_count;
    const std::size_t extra = sample_count % fold_count;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < fold_count; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::fill_n(fold.begin() + static_cast<std::ptrdiff_t>(pos), size, f);
        pos += size;
    }
    return fold;
}

inline std::vector<std::size_t> fold_assign(std::span<const WindowSample> train, std::size_t fold_count) {
    return fold_assign(train.size(), fold_count);
}

// ---------------------------------------------------------------------------
// Binary dump: little-endian header (magic, n, w, h, k, count as u32) followed
// by records (end_index i32, label u8, last_image_class u8, n*w*h f32).

inline constexpr std::uint32_t kDatasetMagic = 0x44575352; // "RSWD"

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b.data(), 4);
}

inline std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4))
        throw Error(ErrorCode::io_error, "unexpected end of binary stream");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint64_t get_u64(std::istream& in) {
    const std::uint64_t lo = get_u32(in);
    return lo | (static_cast<std::uint64_t>(get_u32(in)) << 32);
}

inline void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline std::uint8_t get_u8(std::istream& in) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof())
        throw Error(ErrorCode::io_error, "unexpected end of binary stream");
    return static_cast<std::uint8_t>(c);
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

} // namespace detail

struct DatasetHeader {
    std::uint32_t n = 0, width = 0, height = 0, horizon = 0;
};

inline void write_dataset(std::ostream& out, const DatasetHeader& header, std::span<const WindowSample> samples) {
    const std::size_t dim = std::size_t{header.n} * header.width * header.height;
    detail::put_u32(out, kDatasetMagic);
    detail::put_u32(out, header.n);
    detail::put_u32(out, header.width);
    detail::put_u32(out, header.height);
    detail::put_u32(out, header.horizon);
    detail::put_u32(out, static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
        if (s.features.size() != dim)
            throw Error(ErrorCode::dimension_mismatch, "sample feature length differs from n*w*h");
        detail::put_u32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(s.end_index)));
        detail::put_u8(out, static_cast<std::uint8_t>(s.label));
        detail::put_u8(out, static_cast<std::uint8_t>(s.last_image_class));
        for (float v : s.features)
            detail::put_f32(out, v);
    }
    if (!out)
        throw Error(ErrorCode::io_error, "failed writing dataset");
}

inline std::pair<DatasetHeader, std::vector<WindowSample>> read_dataset(std::istream& in) {
    if (detail::get_u32(in) != kDatasetMagic)
        throw Error(ErrorCode::parse_error, "not a window dataset (bad magic)");
    DatasetHeader h;
    h.n = detail::get_u32(in);
    h.width = detail::get_u32(in);
    h.height = detail::get_u32(in);
    h.horizon = detail::get_u32(in);
    const std::uint32_t count = detail::get_u32(in);
    const std::size_t dim = std::size_t{h.n} * h.width * h.height;
    std::vector<WindowSample> samples(count);
    for (auto& s : samples) {
        s.end_index = static_cast<std::size_t>(static_cast<std::int32_t>(detail::get_u32(in)));
        s.label = class_from_index(detail::get_u8(in));
        s.last_image_class = class_from_index(detail::get_u8(in));
        s.horizon = h.horizon;
        s.features.resize(dim);
        for (auto& v : s.features)
            v = detail::get_f32(in);
    }
    return {h, std::move(samples)};
}

} // namespace rainsvm
