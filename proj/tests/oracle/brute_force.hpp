#pragma once

// Dense, obviously-correct reference implementations for test comparisons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

struct Rect {
    std::size_t row, col, rows, cols;
};

/// Tiles a band of `band_rows` rows and `width` columns with k-wide blocks by
/// walking every column and starting a new block every k columns.
inline std::vector<Rect> tile_band(std::size_t row0, std::size_t band_rows, std::size_t width, std::size_t k) {
    std::vector<Rect> out;
    for (std::size_t c = 0; c < width; ++c) {
        if (c % k == 0)
            out.push_back({row0, c, band_rows, 0});
        ++out.back().cols;
    }
    return out;
}

/// Every partition of n consecutive blocks into runs (2^(n-1) of them); the
/// one where cuts fall exactly at |m[i+1] - m[i]| >= tau.
inline std::vector<std::pair<std::size_t, std::size_t>> chaining_partition(const std::vector<int>& medians, int tau) {
    const std::size_t n = medians.size();
    if (n == 0)
        return {};
    std::vector<std::pair<std::size_t, std::size_t>> found;
    int matches = 0;
    for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (n - 1)); ++cuts) {
        bool ok = true;
        for (std::size_t i = 0; i + 1 < n && ok; ++i) {
            const bool cut = (cuts >> i) & 1;
            const bool should_cut = std::abs(medians[i + 1] - medians[i]) >= tau;
            ok = cut == should_cut;
        }
        if (!ok)
            continue;
        ++matches;
        found.clear();
        std::size_t start = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (i + 1 == n || ((cuts >> i) & 1)) {
                found.push_back({start, i + 1});
                start = i + 1;
            }
    }
    return matches == 1 ? found : std::vector<std::pair<std::size_t, std::size_t>>{};
}

/// Per-pixel median over a clamped window, by full sort.
inline std::vector<std::uint8_t> median_filter(const std::vector<std::uint8_t>& px, long w, long h, long window) {
    std::vector<std::uint8_t> out(px.size());
    const long half = window / 2;
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            std::vector<std::uint8_t> vals;
            for (long dr = -half; dr <= half; ++dr)
                for (long dc = -half; dc <= half; ++dc) {
                    const long rr = std::min(std::max(r + dr, 0L), h - 1);
                    const long cc = std::min(std::max(c + dc, 0L), w - 1);
                    vals.push_back(px[static_cast<std::size_t>(rr * w + cc)]);
                }
            std::sort(vals.begin(), vals.end());
            out[static_cast<std::size_t>(r * w + c)] = vals[vals.size() / 2];
        }
    return out;
}

/// Direct 2D Gaussian convolution (unrounded) with clamped borders and the
/// 2D kernel formed from exp(-(x^2 + y^2) / 2 sigma^2), radius ceil(3 sigma).
inline std::vector<double> gaussian_dense(const std::vector<std::uint8_t>& px, long w, long h, double sigma) {
    const long radius = static_cast<long>(std::ceil(3.0 * sigma));
    double norm = 0.0;
    for (long y = -radius; y <= radius; ++y)
        for (long x = -radius; x <= radius; ++x)
            norm += std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
    std::vector<double> out(px.size());
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            double acc = 0.0;
            for (long y = -radius; y <= radius; ++y)
                for (long x = -radius; x <= radius; ++x) {
                    const long rr = std::min(std::max(r + y, 0L), h - 1);
                    const long cc = std::min(std::max(c + x, 0L), w - 1);
                    acc += std::exp(-(x * x + y * y) / (2.0 * sigma * sigma)) * px[static_cast<std::size_t>(rr * w + cc)];
                }
            out[static_cast<std::size_t>(r * w + c)] = acc / norm;
        }
    return out;
}

/// Nearest peak by scanning all peaks; ties to the lower peak.
inline std::vector<int> nearest_peak_labels(const std::vector<int>& peaks) {
    std::vector<int> label(256);
    for (int v = 0; v < 256; ++v) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(peaks.size()); ++i)
            if (std::abs(v - peaks[static_cast<std::size_t>(i)]) < std::abs(v - peaks[static_cast<std::size_t>(best)]))
                best = i;
        label[static_cast<std::size_t>(v)] = best;
    }
    return label;
}

} // namespace oracle
