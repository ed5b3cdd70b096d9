#pragma once

// Synthetic IC-layer phantoms with known per-pixel material labels.
//
// Random numbers come from SplitMix64 (Steele, Lea & Flood 2014), spelled out
// below so that phantoms are bit-identical everywhere:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Stream splitting: layout geometry draws from a generator seeded with
// `seed ^ 0x6A09E667F3BCC909`; the noise of pixel row r draws from a generator
// seeded with `mix(seed + (r + 1) * 0x9E3779B97F4A7C15)` where mix is the
// output function above. Rows can therefore be generated in any order.
//
// Gaussian samples use one Box-Muller branch per pair of uniforms:
//   u1 = ((a >> 11) + 1) * 2^-53,  u2 = (b >> 11) * 2^-53
//   z  = sqrt(-2 ln u1) * cos(2 pi u2)
// and a pixel is clamp(round(mean + sigma * z), 0, 255).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "has/error.hpp"
#include "has/image.hpp"

namespace has {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi) noexcept {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(next() % span);
    }

    double gaussian() noexcept {
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

enum class PhantomLayout { stripes, rectangles_with_vias, metal_tracks };

inline std::string to_string(PhantomLayout layout) {
    switch (layout) {
    case PhantomLayout::stripes: return "stripes";
    case PhantomLayout::rectangles_with_vias: return "rectangles-with-vias";
    case PhantomLayout::metal_tracks: return "metal-tracks";
    }
    return "unknown";
}

struct Material {
    int mean = 0;
    double sigma = 0.0;
};

/// Material 0 is the substrate/background in every layout.
struct PhantomSpec {
    std::size_t width = 512;
    std::size_t height = 512;
    std::vector<Material> materials;
    PhantomLayout layout = PhantomLayout::rectangles_with_vias;
    std::size_t via_size = 8;
    std::uint64_t seed = 1;
};

struct Phantom {
    GrayImage image;
    LabelMap truth;
};

inline void validate(const PhantomSpec& spec) {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::invalid_spec, why); };
    if (spec.width == 0 || spec.height == 0)
        fail("width and height must be at least 1");
    if (spec.materials.empty() || spec.materials.size() > 16)
        fail("between 1 and 16 materials are required, got " + std::to_string(spec.materials.size()));
    for (std::size_t i = 0; i < spec.materials.size(); ++i) {
        const Material& m = spec.materials[i];
        if (m.mean < 0 || m.mean > 255)
            fail("material " + std::to_string(i) + " mean outside [0, 255]");
        if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma))
            fail("material " + std::to_string(i) + " sigma must be finite and >= 0");
        for (std::size_t j = 0; j < i; ++j)
            if (spec.materials[j].mean == m.mean)
                fail("material means must be pairwise distinct");
    }
    if (spec.layout == PhantomLayout::rectangles_with_vias && spec.via_size == 0)
        fail("via_size must be at least 1");
}

namespace detail {

inline void fill_rect(std::vector<std::uint16_t>& labels, std::size_t width, std::size_t height, long r0, long c0,
                      long r1, long c1, std::uint16_t value) {
    r0 = std::max(0L, r0);
    c0 = std::max(0L, c0);
    r1 = std::min(static_cast<long>(height), r1);
    c1 = std::min(static_cast<long>(width), c1);
    for (long r = r0; r < r1; ++r)
        for (long c = c0; c < c1; ++c)
            labels[static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c)] = value;
}

// Vertical stripes of jittered width cycling through all materials.
inline void layout_stripes(const PhantomSpec& spec, SplitMix64& rng, std::vector<std::uint16_t>& labels) {
    const std::size_t m = spec.materials.size();
    const long nominal = std::max<long>(1, static_cast<long>(spec.width / (4 * m)));
    long col = 0;
    std::uint16_t material = 0;
    while (col < static_cast<long>(spec.width)) {
        const long w = std::max<long>(1, nominal + rng.uniform_int(-static_cast<int>(nominal / 2),
                                                                   static_cast<int>(nominal / 2)));
        fill_rect(labels, spec.width, spec.height, 0, col, static_cast<long>(spec.height), col + w, material);
        col += w;
        material = static_cast<std::uint16_t>((material + 1) % m);
    }
}

// A grid of jittered structure rectangles (material 1) on substrate, each
// carrying a lattice of square vias cycling through materials 2..m-1.
inline void layout_rectangles(const PhantomSpec& spec, SplitMix64& rng, std::vector<std::uint16_t>& labels) {
    const std::size_t m = spec.materials.size();
    if (m < 2)
        return;
    const long cell = std::max<long>(12, static_cast<long>(std::min(spec.width, spec.height) / 8));
    const long margin = cell / 6;
    const int jitter = static_cast<int>(std::max<long>(1, cell / 16));
    const long via = static_cast<long>(spec.via_size);
    std::size_t via_counter = 0;
    for (long top = 0; top < static_cast<long>(spec.height); top += cell) {
        for (long left = 0; left < static_cast<long>(spec.width); left += cell) {
            const long r0 = top + margin + rng.uniform_int(-jitter, jitter);
            const long c0 = left + margin + rng.uniform_int(-jitter, jitter);
            const long r1 = top + cell - margin + rng.uniform_int(-jitter, jitter);
            const long c1 = left + cell - margin + rng.uniform_int(-jitter, jitter);
            fill_rect(labels, spec.width, spec.height, r0, c0, r1, c1, 1);
            if (m < 3)
                continue;
            const long inset = std::max<long>(1, via / 2);
            for (long vr = r0 + inset; vr + via + inset <= r1; vr += 2 * via) {
                for (long vc = c0 + inset; vc + via + inset <= c1; vc += 2 * via) {
                    const auto material = static_cast<std::uint16_t>(2 + via_counter++ % (m - 2));
                    fill_rect(labels, spec.width, spec.height, vr, vc, vr + via, vc + via, material);
                }
            }
        }
    }
}

// Horizontal metal tracks cycling through materials 1..m-1, joined by
// occasional vertical straps.
inline void layout_tracks(const PhantomSpec& spec, SplitMix64& rng, std::vector<std::uint16_t>& labels) {
    const std::size_t m = spec.materials.size();
    if (m < 2)
        return;
    const long pitch = std::max<long>(6, static_cast<long>(spec.height / 12));
    const long track = std::max<long>(2, pitch / 2);
    std::size_t index = 0;
    for (long top = pitch / 4; top < static_cast<long>(spec.height); top += pitch, ++index) {
        const auto material = static_cast<std::uint16_t>(1 + index % (m - 1));
        const long start = rng.uniform_int(0, static_cast<int>(std::max<long>(1, pitch)));
        fill_rect(labels, spec.width, spec.height, top, start, top + track, static_cast<long>(spec.width), material);
        for (long c = start; c + track < static_cast<long>(spec.width); c += 2 * pitch)
            if (rng.uniform() < 0.3)
                fill_rect(labels, spec.width, spec.height, top + track, c, top + pitch, c + track, material);
    }
}

} // namespace detail

/// Fraction of pixels carrying each material label.
inline std::vector<double> material_coverage(const LabelMap& truth) {
    std::vector<double> out(truth.region_count, 0.0);
    for (auto l : truth.labels)
        out[l] += 1.0;
    for (double& f : out)
        f /= static_cast<double>(truth.labels.size());
    return out;
}

inline Phantom generate_phantom(const PhantomSpec& spec) {
    validate(spec);
    const std::size_t w = spec.width;
    const std::size_t h = spec.height;

    LabelMap truth;
    truth.width = w;
    truth.height = h;
    truth.region_count = spec.materials.size();
    truth.labels.assign(w * h, 0);

    SplitMix64 layout_rng(spec.seed ^ 0x6A09E667F3BCC909ull);
    switch (spec.layout) {
    case PhantomLayout::stripes: detail::layout_stripes(spec, layout_rng, truth.labels); break;
    case PhantomLayout::rectangles_with_vias: detail::layout_rectangles(spec, layout_rng, truth.labels); break;
    case PhantomLayout::metal_tracks: detail::layout_tracks(spec, layout_rng, truth.labels); break;
    }

    const auto coverage = material_coverage(truth);
    for (std::size_t i = 0; i < coverage.size(); ++i)
        if (coverage[i] < 0.01)
            throw Error(ErrorCode::invalid_spec, "layout " + to_string(spec.layout) + " at " + std::to_string(w) +
                                                     "x" + std::to_string(h) + " gives material " +
                                                     std::to_string(i) + " less than 1% of the pixels");

    GrayImage image(w, h);
    for (std::size_t r = 0; r < h; ++r) {
        SplitMix64 rng(SplitMix64::mix(spec.seed + (r + 1) * 0x9E3779B97F4A7C15ull));
        for (std::size_t c = 0; c < w; ++c) {
            const Material& mat = spec.materials[truth.labels[r * w + c]];
            const double value = static_cast<double>(mat.mean) + mat.sigma * rng.gaussian();
            image.at(r, c) = static_cast<Intensity>(std::clamp(std::lround(value), 0L, 255L));
        }
    }
    return {std::move(image), std::move(truth)};
}

/// Adds a left-to-right ramp rising from 0 to max_delta, saturating at 255.
inline GrayImage add_intensity_gradient(const GrayImage& img, int max_delta) {
    if (max_delta < 0 || max_delta > 255)
        throw Error(ErrorCode::invalid_argument, "max_delta must be in [0, 255]");
    GrayImage out = img;
    const std::size_t span = img.width() - 1;
    for (std::size_t c = 0; c < img.width(); ++c) {
        const std::size_t delta = span == 0 ? 0 : (2 * static_cast<std::size_t>(max_delta) * c + span) / (2 * span);
        for (std::size_t r = 0; r < img.height(); ++r)
            out.at(r, c) = static_cast<Intensity>(std::min<std::size_t>(255, img.at(r, c) + delta));
    }
    return out;
}

/// Reads the phantom config format:
///
///     # comment
///     width = 512
///     height = 512
///     layout = rectangles-with-vias   # stripes | rectangles-with-vias | metal-tracks
///     via_size = 8
///     seed = 1
///     material = 60 12                # mean sigma, one line per material
inline PhantomSpec parse_phantom_spec(std::istream& in, const std::string& origin = "<spec>") {
    PhantomSpec spec;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::invalid_spec, "line " + std::to_string(line_no) + ": " + why, origin);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                fail("expected `key = value`");
            continue;
        }
        std::istringstream key_stream(line.substr(0, eq));
        std::string key;
        key_stream >> key;
        std::istringstream value(line.substr(eq + 1));
        auto read_unsigned = [&](auto& target) {
            long long v = -1;
            if (!(value >> v) || v < 0)
                fail("`" + key + "` needs a non-negative integer");
            target = static_cast<std::remove_reference_t<decltype(target)>>(v);
        };
        if (key == "width") {
            read_unsigned(spec.width);
        } else if (key == "height") {
            read_unsigned(spec.height);
        } else if (key == "via_size") {
            read_unsigned(spec.via_size);
        } else if (key == "seed") {
            unsigned long long s = 0;
            if (!(value >> s))
                fail("`seed` needs an unsigned integer");
            spec.seed = s;
        } else if (key == "layout") {
            std::string name;
            value >> name;
            if (name == "stripes")
                spec.layout = PhantomLayout::stripes;
            else if (name == "rectangles-with-vias")
                spec.layout = PhantomLayout::rectangles_with_vias;
            else if (name == "metal-tracks")
                spec.layout = PhantomLayout::metal_tracks;
            else
                fail("unknown layout `" + name + "`");
        } else if (key == "material") {
            Material m;
            if (!(value >> m.mean >> m.sigma))
                fail("`material` needs `mean sigma`");
            spec.materials.push_back(m);
        } else {
            fail("unknown key `" + key + "`");
        }
        std::string rest;
        if (value >> rest)
            fail("trailing text after `" + key + "`");
    }
    try {
        validate(spec);
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_spec, e.what(), origin);
    }
    return spec;
}

inline PhantomSpec load_phantom_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::file_not_found, "cannot open phantom spec", path);
    return parse_phantom_spec(in, path);
}

} // namespace has
