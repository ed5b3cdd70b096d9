#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "has/error.hpp"

namespace has {

using Intensity = std::uint8_t;

inline constexpr int kLevels = 256;

/// 8-bit single-channel raster, row-major: pixel (row, col) lives at
/// pixels[row * width + col].
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(std::size_t width, std::size_t height, Intensity fill = 0)
        : width_(width), height_(height), pixels_(checked_area(width, height), fill) {}

    GrayImage(std::size_t width, std::size_t height, std::vector<Intensity> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (pixels_.size() != checked_area(width, height))
            throw Error(ErrorCode::invalid_argument,
                        "pixel buffer holds " + std::to_string(pixels_.size()) + " values, expected " +
                            std::to_string(width * height));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }

    Intensity at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    Intensity& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const Intensity> pixels() const noexcept { return pixels_; }
    std::span<Intensity> pixels() noexcept { return pixels_; }

    std::span<const Intensity> row(std::size_t r) const noexcept {
        return std::span<const Intensity>(pixels_).subspan(r * width_, width_);
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    static std::size_t checked_area(std::size_t width, std::size_t height) {
        if (width == 0 || height == 0)
            throw Error(ErrorCode::invalid_argument, "image dimensions must be at least 1x1");
        return width * height;
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<Intensity> pixels_;
};

/// 256-bin intensity frequency table.
struct Histogram {
    std::array<std::uint64_t, kLevels> counts{};

    std::uint64_t total() const noexcept {
        return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    }

    int nonzero_bins() const noexcept {
        return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c != 0; }));
    }

    std::uint64_t operator[](int v) const { return counts[static_cast<std::size_t>(v)]; }

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

inline Histogram compute_histogram(std::span<const Intensity> pixels) {
    Histogram h;
    for (Intensity v : pixels)
        ++h.counts[v];
    return h;
}

inline Histogram compute_histogram(const GrayImage& img) { return compute_histogram(img.pixels()); }

/// One material's closed intensity interval together with the peak that
/// produced it.
struct Region {
    int lower = 0;
    int upper = 255;
    int peak = 0;

    friend bool operator==(const Region&, const Region&) = default;
};

/// Ordered intervals partitioning [0, 255].
struct RegionMap {
    std::vector<Region> regions;

    std::size_t size() const noexcept { return regions.size(); }

    /// Index of the region containing intensity v, or size() if none.
    std::size_t region_of(int v) const noexcept {
        for (std::size_t i = 0; i < regions.size(); ++i)
            if (v >= regions[i].lower && v <= regions[i].upper)
                return i;
        return regions.size();
    }

    /// True when intervals are contiguous, ordered, cover [0, 255] and each
    /// contains its peak.
    bool is_partition() const noexcept {
        if (regions.empty() || regions.front().lower != 0 || regions.back().upper != 255)
            return false;
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const Region& r = regions[i];
            if (r.lower > r.upper || r.peak < r.lower || r.peak > r.upper)
                return false;
            if (i > 0 && regions[i - 1].upper + 1 != r.lower)
                return false;
        }
        return true;
    }

    friend bool operator==(const RegionMap&, const RegionMap&) = default;
};

/// Per-pixel region index. `regions` describes the intensity intervals that
/// produced the labels; it is empty for maps that do not come from intensity
/// intervals (e.g. phantom ground truth).
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t region_count = 0;
    std::vector<std::uint16_t> labels;
    RegionMap regions;

    std::uint16_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

} // namespace has
