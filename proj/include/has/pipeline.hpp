#pragma once

#include "has/boundaries.hpp"
#include "has/image.hpp"
#include "has/merge_filter.hpp"
#include "has/peak_detect.hpp"

namespace has {

struct SegmentOptions {
    std::size_t kernel = 2;
    BoundaryRule rule = BoundaryRule::histogram;
    bool label_raw = false; // label the input instead of the filtered image
    unsigned threads = 1;
};

struct Segmentation {
    GrayImage filtered;
    Histogram estimated;
    PeakTrace trace;
    RegionMap regions;
    LabelMap labels;
};

/// Merge filter -> estimated histogram -> peaks -> boundaries -> labels.
inline Segmentation segment_image(const GrayImage& img, const SegmentOptions& opts = {}) {
    Segmentation s;
    s.filtered = filter_image(img, KernelSize(opts.kernel), opts.threads);
    s.estimated = compute_histogram(s.filtered);
    s.trace = trace_peaks(s.estimated);
    s.regions = boundaries(opts.rule, s.trace.peaks, s.estimated);
    s.labels = segment(opts.label_raw ? img : s.filtered, s.regions);
    return s;
}

} // namespace has
