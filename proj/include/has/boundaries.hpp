#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "has/error.hpp"
#include "has/image.hpp"
#include "has/peak_detect.hpp"

namespace has {

enum class BoundaryRule { distance, histogram };

namespace detail {

inline void require_peaks(const PeakSet& peaks) {
    if (peaks.peaks.empty())
        throw Error(ErrorCode::invalid_argument, "at least one peak is required");
    for (std::size_t i = 1; i < peaks.peaks.size(); ++i)
        if (peaks.peaks[i].intensity <= peaks.peaks[i - 1].intensity)
            throw Error(ErrorCode::invalid_argument, "peak intensities must be strictly increasing");
}

// `uppers[i]` is the last intensity of region i; the final region ends at 255.
inline RegionMap regions_from_uppers(const PeakSet& peaks, const std::vector<int>& uppers) {
    RegionMap map;
    int lower = 0;
    for (std::size_t i = 0; i < peaks.peaks.size(); ++i) {
        const int upper = i + 1 < peaks.peaks.size() ? uppers[i] : 255;
        map.regions.push_back({lower, upper, peaks.peaks[i].intensity});
        lower = upper + 1;
    }
    return map;
}

} // namespace detail

/// Nearest-peak assignment; an intensity equidistant from two peaks belongs
/// to the lower one.
inline RegionMap boundaries_distance(const PeakSet& peaks) {
    detail::require_peaks(peaks);
    std::vector<int> uppers;
    for (std::size_t i = 0; i + 1 < peaks.peaks.size(); ++i)
        uppers.push_back((peaks.peaks[i].intensity + peaks.peaks[i + 1].intensity) / 2);
    return detail::regions_from_uppers(peaks, uppers);
}

/// Boundary between adjacent peaks at the least frequent intensity strictly
/// between them (lowest on ties); the boundary belongs to the lower region.
/// Adjacent peak intensities leave nothing in between, so the lower region
/// ends at its own peak.
inline RegionMap boundaries_histogram(const PeakSet& peaks, const Histogram& hist) {
    detail::require_peaks(peaks);
    std::vector<int> uppers;
    for (std::size_t i = 0; i + 1 < peaks.peaks.size(); ++i) {
        const int lo = peaks.peaks[i].intensity;
        const int hi = peaks.peaks[i + 1].intensity;
        int best = lo;
        for (int v = lo + 1; v < hi; ++v)
            if (best == lo || hist[v] < hist[best])
                best = v;
        uppers.push_back(best);
    }
    return detail::regions_from_uppers(peaks, uppers);
}

inline RegionMap boundaries(BoundaryRule rule, const PeakSet& peaks, const Histogram& hist) {
    return rule == BoundaryRule::distance ? boundaries_distance(peaks) : boundaries_histogram(peaks, hist);
}

inline LabelMap segment(const GrayImage& img, const RegionMap& regions) {
    if (!regions.is_partition())
        throw Error(ErrorCode::invalid_argument, "regions must partition [0, 255]");
    std::array<std::uint16_t, kLevels> lut{};
    for (int v = 0; v < kLevels; ++v)
        lut[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(regions.region_of(v));

    LabelMap out;
    out.width = img.width();
    out.height = img.height();
    out.region_count = regions.size();
    out.regions = regions;
    out.labels.resize(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), out.labels.begin(), [&](Intensity v) { return lut[v]; });
    return out;
}

} // namespace has
