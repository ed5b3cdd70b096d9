#pragma once

// Histogram estimation by band-wise merging of non-overlapping median
// blocks.
//
// The image is cut into horizontal bands of k pixel rows. Each band is tiled
// left to right by k x k blocks (stride k, trailing blocks keep only the
// pixels that exist). Absolute differences between consecutive block medians
// are tabulated as (alpha = difference, beta = frequency). The band's merge
// threshold tau is the alpha minimising beta * (1 - alpha); consecutive
// blocks whose medians differ by less than tau are chained into groups, and
// every pixel of a group is replaced by the median of all the group's raw
// pixels. The histogram of the result is the estimated histogram.

#include <algorithm>
#include <cstdint>
#include <array>
#include <cstdlib>
#include <span>
#include <thread>
#include <vector>

#include "has/error.hpp"
#include "has/image.hpp"

namespace has {

/// Side length of the square merge kernel (>= 2).
class KernelSize {
public:
    explicit KernelSize(std::size_t k) : k_(k) {
        if (k < 2)
            throw Error(ErrorCode::invalid_argument, "kernel size must be at least 2");
    }
    std::size_t value() const noexcept { return k_; }

    friend bool operator==(const KernelSize&, const KernelSize&) = default;

private:
    std::size_t k_;
};

struct PixelSpan {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t area() const noexcept { return rows * cols; }
    friend bool operator==(const PixelSpan&, const PixelSpan&) = default;
};

struct PatchMedian {
    std::size_t band_index = 0;
    std::size_t block_index = 0;
    Intensity median = 0;
    PixelSpan span;
};

/// Distinct absolute median differences (alpha, ascending) and their
/// frequencies (beta) for one band.
struct DifferenceDistribution {
    std::vector<int> alpha;
    std::vector<std::uint64_t> beta;

    bool empty() const noexcept { return alpha.empty(); }
};

struct MergeThreshold {
    int tau = 0;
};

/// Lower median: for an even count the smaller of the two central values.
inline Intensity lower_median(std::span<Intensity> values) {
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

/// Lower median of a 256-bin count table holding `n` samples.
inline Intensity lower_median(const std::array<std::uint32_t, kLevels>& counts, std::uint64_t n) {
    const std::uint64_t rank = (n - 1) / 2;
    std::uint64_t seen = 0;
    for (int v = 0; v < kLevels; ++v) {
        seen += counts[static_cast<std::size_t>(v)];
        if (seen > rank)
            return static_cast<Intensity>(v);
    }
    return 255;
}

inline std::size_t band_count(const GrayImage& img, KernelSize kernel) {
    return (img.height() + kernel.value() - 1) / kernel.value();
}

inline std::vector<PatchMedian> patch_medians(const GrayImage& img, std::size_t band, KernelSize kernel) {
    const std::size_t k = kernel.value();
    if (band * k >= img.height())
        throw Error(ErrorCode::band_out_of_range,
                    "band " + std::to_string(band) + " starts past image height " + std::to_string(img.height()));
    const std::size_t row0 = band * k;
    const std::size_t rows = std::min(k, img.height() - row0);
    const std::size_t blocks = (img.width() + k - 1) / k;

    std::vector<PatchMedian> out;
    out.reserve(blocks);
    std::vector<Intensity> scratch;
    scratch.reserve(k * k);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t col0 = b * k;
        const PixelSpan span{row0, col0, rows, std::min(k, img.width() - col0)};
        scratch.clear();
        for (std::size_t r = 0; r < span.rows; ++r)
            for (std::size_t c = 0; c < span.cols; ++c)
                scratch.push_back(img.at(span.row + r, span.col + c));
        out.push_back({band, b, lower_median(scratch), span});
    }
    return out;
}

inline DifferenceDistribution difference_distribution(std::span<const PatchMedian> medians) {
    DifferenceDistribution dist;
    if (medians.size() < 2)
        return dist;
    std::array<std::uint64_t, kLevels> freq{};
    for (std::size_t i = 0; i + 1 < medians.size(); ++i)
        ++freq[static_cast<std::size_t>(std::abs(int(medians[i + 1].median) - int(medians[i].median)))];
    for (int a = 0; a < kLevels; ++a) {
        if (freq[static_cast<std::size_t>(a)] == 0)
            continue;
        dist.alpha.push_back(a);
        dist.beta.push_back(freq[static_cast<std::size_t>(a)]);
    }
    return dist;
}

/// tau = alpha(argmin_i beta(i) * (1 - alpha(i))); ties go to the smaller
/// alpha, an empty distribution gives 0.
inline MergeThreshold merge_threshold(const DifferenceDistribution& dist) {
    if (dist.empty())
        return {};
    std::size_t best = 0;
    std::int64_t best_value = 0;
    for (std::size_t i = 0; i < dist.alpha.size(); ++i) {
        const std::int64_t value = static_cast<std::int64_t>(dist.beta[i]) * (1 - dist.alpha[i]);
        if (i == 0 || value < best_value) {
            best = i;
            best_value = value;
        }
    }
    return {dist.alpha[best]};
}

/// Consecutive-block groups of one band: block i+1 joins the current group
/// when its median differs from the group's last block by less than tau.
/// Returned as [first, last) block index ranges.
inline std::vector<std::pair<std::size_t, std::size_t>> merge_groups(std::span<const PatchMedian> medians,
                                                                     MergeThreshold tau) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= medians.size(); ++i) {
        if (i == medians.size() || std::abs(int(medians[i].median) - int(medians[i - 1].median)) >= tau.tau) {
            groups.emplace_back(start, i);
            start = i;
        }
    }
    return groups;
}

/// Writes the merged band into `out`, which must have the dimensions of `img`.
inline void merge_band(const GrayImage& img, std::span<const PatchMedian> medians, MergeThreshold tau,
                       GrayImage& out) {
    if (out.width() != img.width() || out.height() != img.height())
        throw Error(ErrorCode::dimension_mismatch, "merge output must match the input image");
    for (auto [first, last] : merge_groups(medians, tau)) {
        std::array<std::uint32_t, kLevels> counts{};
        std::uint64_t n = 0;
        for (std::size_t b = first; b < last; ++b) {
            const PixelSpan& s = medians[b].span;
            for (std::size_t r = 0; r < s.rows; ++r)
                for (std::size_t c = 0; c < s.cols; ++c)
                    ++counts[img.at(s.row + r, s.col + c)];
            n += s.area();
        }
        const Intensity combined = lower_median(counts, n);
        for (std::size_t b = first; b < last; ++b) {
            const PixelSpan& s = medians[b].span;
            for (std::size_t r = 0; r < s.rows; ++r)
                std::fill_n(out.pixels().begin() + static_cast<std::ptrdiff_t>((s.row + r) * img.width() + s.col),
                            s.cols, combined);
        }
    }
}

/// Runs the full band pipeline on one band; used by filter_image.
inline MergeThreshold filter_band(const GrayImage& img, std::size_t band, KernelSize kernel, GrayImage& out) {
    const auto medians = patch_medians(img, band, kernel);
    const MergeThreshold tau = merge_threshold(difference_distribution(medians));
    merge_band(img, medians, tau, out);
    return tau;
}

inline void check_kernel(const GrayImage& img, KernelSize kernel) {
    if (kernel.value() > std::min(img.width(), img.height()))
        throw Error(ErrorCode::kernel_too_large, "kernel " + std::to_string(kernel.value()) + " exceeds image " +
                                                     std::to_string(img.width()) + "x" +
                                                     std::to_string(img.height()));
}

/// Applies the merge filter to every band. Bands are independent; with
/// threads > 1 they are split into contiguous chunks, one worker each.
inline GrayImage filter_image(const GrayImage& img, KernelSize kernel, unsigned threads = 1) {
    check_kernel(img, kernel);
    GrayImage out(img.width(), img.height());
    const std::size_t bands = band_count(img, kernel);
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, bands);
    if (workers == 1) {
        for (std::size_t b = 0; b < bands; ++b)
            filter_band(img, b, kernel, out);
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t first = bands * w / workers;
        const std::size_t last = bands * (w + 1) / workers;
        pool.emplace_back([&, first, last] {
            for (std::size_t b = first; b < last; ++b)
                filter_band(img, b, kernel, out);
        });
    }
    pool.clear(); // joins
    return out;
}

inline Histogram estimate_histogram(const GrayImage& img, KernelSize kernel, unsigned threads = 1) {
    return compute_histogram(filter_image(img, kernel, threads));
}

} // namespace has
