#pragma once

// Significant-peak detection on an (estimated) histogram with a two-sided
// vote accumulator.
//
// Bins are sorted by decreasing frequency and re-expressed as offsets from
// the most frequent intensity (the anchor). Each side of the anchor is
// processed separately on offset magnitudes: a cursor walks outward from 1;
// at every stop the working set G holds all offsets at least as frequent as
// the cursor's offset, the cursor skips the run of consecutive offsets in G,
// and every offset of G still beyond the cursor gets a vote. Offsets far
// from the anchor therefore collect more votes. Votes are scaled by bin
// frequency, thresholded against their mean, mapped back to intensities and
// contiguous survivors collapse into one peak each.

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "has/error.hpp"
#include "has/image.hpp"

namespace has {

enum class Side { negative, positive };

struct OffsetEntry {
    int offset = 0;
    std::uint64_t frequency = 0;

    friend bool operator==(const OffsetEntry&, const OffsetEntry&) = default;
};

/// Non-empty bins as offsets from the anchor, by decreasing frequency (ties by
/// increasing intensity). entries.front() is the anchor itself.
struct OffsetTable {
    int anchor = 0;
    std::vector<OffsetEntry> entries;

    /// Offset magnitudes of one side, in table order.
    std::vector<int> side_offsets(Side side) const {
        std::vector<int> out;
        for (const OffsetEntry& e : entries) {
            if (side == Side::positive && e.offset > 0)
                out.push_back(e.offset);
            else if (side == Side::negative && e.offset < 0)
                out.push_back(-e.offset);
        }
        return out;
    }
};

/// Votes for offset magnitudes 1..votes.size() on one side (votes[e - 1]).
struct AccumulatorState {
    Side side = Side::positive;
    std::vector<std::uint32_t> votes;

    std::uint32_t vote(int e) const { return votes[static_cast<std::size_t>(e - 1)]; }
};

/// Frequency-scaled votes, same indexing as AccumulatorState.
struct ScoredAccumulator {
    Side side = Side::positive;
    int anchor = 0;
    std::vector<std::uint32_t> votes;
    std::vector<std::uint64_t> scores;
};

/// Intensities surviving the mean threshold on either side, plus the anchor.
struct PeakMask {
    int anchor = 0;
    std::array<bool, kLevels> kept{};
    std::array<std::uint64_t, kLevels> score{};
};

struct Peak {
    int intensity = 0;
    std::uint64_t score = 0;

    friend bool operator==(const Peak&, const Peak&) = default;
};

/// Detected material peaks, strictly increasing in intensity.
struct PeakSet {
    std::vector<Peak> peaks;

    std::size_t size() const noexcept { return peaks.size(); }
    std::vector<int> intensities() const {
        std::vector<int> out;
        for (const Peak& p : peaks)
            out.push_back(p.intensity);
        return out;
    }

    friend bool operator==(const PeakSet&, const PeakSet&) = default;
};

inline OffsetTable build_offset_table(const Histogram& hist) {
    std::vector<int> order;
    for (int v = 0; v < kLevels; ++v)
        if (hist[v] != 0)
            order.push_back(v);
    if (order.empty())
        throw Error(ErrorCode::empty_histogram, "histogram has no populated bins");
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return hist[a] > hist[b]; });

    OffsetTable table;
    table.anchor = order.front();
    table.entries.reserve(order.size());
    for (int v : order)
        table.entries.push_back({v - table.anchor, hist[v]});
    return table;
}

inline AccumulatorState build_side_accumulator(const OffsetTable& table, Side side) {
    AccumulatorState acc;
    acc.side = side;
    const std::vector<int> sorted = table.side_offsets(side);
    if (sorted.empty())
        return acc;

    const int max_offset = *std::max_element(sorted.begin(), sorted.end());
    acc.votes.assign(static_cast<std::size_t>(max_offset), 0);

    // rank[e]: position of offset e in the frequency-sorted list, -1 if absent
    std::array<int, kLevels + 1> rank;
    rank.fill(-1);
    for (std::size_t i = 0; i < sorted.size(); ++i)
        rank[static_cast<std::size_t>(sorted[i])] = static_cast<int>(i);

    int cursor = 1;
    while (cursor < max_offset) {
        const int f = rank[static_cast<std::size_t>(cursor)];
        if (f < 0) {
            ++cursor;
            continue;
        }
        auto in_working_set = [&](int e) {
            return e <= max_offset && rank[static_cast<std::size_t>(e)] >= 0 &&
                   rank[static_cast<std::size_t>(e)] <= f;
        };
        while (in_working_set(cursor + 1))
            ++cursor;
        ++cursor;
        for (int i = 0; i <= f; ++i)
            if (sorted[static_cast<std::size_t>(i)] > cursor)
                ++acc.votes[static_cast<std::size_t>(sorted[static_cast<std::size_t>(i)] - 1)];
    }
    return acc;
}

/// score[e] = votes[e] * frequency of the bin at anchor -/+ e.
inline ScoredAccumulator scale_accumulator(const AccumulatorState& acc, const Histogram& hist,
                                           const OffsetTable& table) {
    ScoredAccumulator out;
    out.side = acc.side;
    out.anchor = table.anchor;
    out.votes = acc.votes;
    out.scores.assign(acc.votes.size(), 0);
    const int sign = acc.side == Side::positive ? 1 : -1;
    for (std::size_t i = 0; i < acc.votes.size(); ++i) {
        if (acc.votes[i] == 0)
            continue;
        const int v = table.anchor + sign * static_cast<int>(i + 1);
        out.scores[i] = static_cast<std::uint64_t>(acc.votes[i]) * hist[v];
    }
    return out;
}

namespace detail {

// Keeps offsets whose score exceeds the mean score of the voted offsets.
inline void keep_above_mean(const ScoredAccumulator& side, PeakMask& mask) {
    std::uint64_t sum = 0;
    std::uint64_t voted = 0;
    for (std::size_t i = 0; i < side.votes.size(); ++i) {
        if (side.votes[i] != 0) {
            sum += side.scores[i];
            ++voted;
        }
    }
    if (voted == 0)
        return;
    const int sign = side.side == Side::positive ? 1 : -1;
    for (std::size_t i = 0; i < side.votes.size(); ++i) {
        // score > sum / voted, kept in integers
        if (side.votes[i] != 0 && side.scores[i] * voted > sum) {
            const int v = mask.anchor + sign * static_cast<int>(i + 1);
            mask.kept[static_cast<std::size_t>(v)] = true;
            mask.score[static_cast<std::size_t>(v)] = side.scores[i];
        }
    }
}

} // namespace detail

inline PeakMask threshold_and_join(const ScoredAccumulator& left, const ScoredAccumulator& right) {
    PeakMask mask;
    mask.anchor = right.anchor;
    mask.kept[static_cast<std::size_t>(mask.anchor)] = true;
    detail::keep_above_mean(left, mask);
    detail::keep_above_mean(right, mask);
    return mask;
}

/// Collapses each run of consecutive kept intensities to one peak at its
/// highest score (ties to the lower intensity); the anchor's run is
/// represented by the anchor.
inline PeakSet merge_contiguous_peaks(const PeakMask& mask) {
    PeakSet out;
    int v = 0;
    while (v < kLevels) {
        if (!mask.kept[static_cast<std::size_t>(v)]) {
            ++v;
            continue;
        }
        const int first = v;
        while (v < kLevels && mask.kept[static_cast<std::size_t>(v)])
            ++v;
        const int last = v - 1;
        if (mask.anchor >= first && mask.anchor <= last) {
            out.peaks.push_back({mask.anchor, mask.score[static_cast<std::size_t>(mask.anchor)]});
            continue;
        }
        int best = first;
        for (int u = first + 1; u <= last; ++u)
            if (mask.score[static_cast<std::size_t>(u)] > mask.score[static_cast<std::size_t>(best)])
                best = u;
        out.peaks.push_back({best, mask.score[static_cast<std::size_t>(best)]});
    }
    return out;
}

/// Every intermediate of one detect_peaks run, for inspection and dumps.
struct PeakTrace {
    OffsetTable table;
    ScoredAccumulator left;
    ScoredAccumulator right;
    PeakMask mask;
    PeakSet peaks;
};

inline PeakTrace trace_peaks(const Histogram& hist) {
    PeakTrace t;
    t.table = build_offset_table(hist);
    t.left = scale_accumulator(build_side_accumulator(t.table, Side::negative), hist, t.table);
    t.right = scale_accumulator(build_side_accumulator(t.table, Side::positive), hist, t.table);
    t.mask = threshold_and_join(t.left, t.right);
    t.peaks = merge_contiguous_peaks(t.mask);
    return t;
}

inline PeakSet detect_peaks(const Histogram& hist) { return trace_peaks(hist).peaks; }

/// CSV with one row per intensity: intensity,frequency,votes,score,kept.
inline void write_accumulator_csv(std::ostream& out, const Histogram& hist, const PeakTrace& trace) {
    out << "intensity,frequency,votes,score,kept\n";
    for (int v = 0; v < kLevels; ++v) {
        const int offset = v - trace.table.anchor;
        const ScoredAccumulator& side = offset < 0 ? trace.left : trace.right;
        const std::size_t idx = static_cast<std::size_t>(std::abs(offset));
        std::uint32_t votes = 0;
        std::uint64_t score = 0;
        if (offset != 0 && idx <= side.votes.size()) {
            votes = side.votes[idx - 1];
            score = side.scores[idx - 1];
        }
        out << v << ',' << hist[v] << ',' << votes << ',' << score << ','
            << (trace.mask.kept[static_cast<std::size_t>(v)] ? 1 : 0) << '\n';
    }
}

} // namespace has
