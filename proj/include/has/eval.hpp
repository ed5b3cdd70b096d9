#pragma once

// Ground-truth separation scoring and the baseline filters it compares
// against. A method's score is the L1 distance between the normalized
// intensity distributions of foreground and background pixels in its
// processed image: 0 for indistinguishable classes, 2 for disjoint ones.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "has/boundaries.hpp"
#include "has/error.hpp"
#include "has/image.hpp"
#include "has/io.hpp"
#include "has/merge_filter.hpp"
#include "has/peak_detect.hpp"

namespace has {

struct GroundTruth {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> foreground; // 1 = foreground, 0 = background

    GroundTruth() = default;
    GroundTruth(std::size_t w, std::size_t h, std::vector<std::uint8_t> mask)
        : width(w), height(h), foreground(std::move(mask)) {
        if (foreground.size() != w * h)
            throw Error(ErrorCode::dimension_mismatch, "mask size does not match its dimensions");
        const auto fg = std::count(foreground.begin(), foreground.end(), std::uint8_t{1});
        if (fg == 0 || fg == static_cast<std::ptrdiff_t>(foreground.size()))
            throw Error(ErrorCode::empty_class, "ground truth needs foreground and background pixels");
    }

    /// Every label other than `background` becomes foreground.
    static GroundTruth from_labels(const LabelMap& labels, std::uint16_t background = 0) {
        std::vector<std::uint8_t> mask(labels.labels.size());
        std::transform(labels.labels.begin(), labels.labels.end(), mask.begin(),
                       [&](std::uint16_t l) { return static_cast<std::uint8_t>(l != background); });
        return GroundTruth(labels.width, labels.height, std::move(mask));
    }

    /// As a 0/255 image, the on-disk ground-truth format.
    GrayImage to_image() const {
        std::vector<Intensity> px(foreground.size());
        std::transform(foreground.begin(), foreground.end(), px.begin(),
                       [](std::uint8_t f) { return static_cast<Intensity>(f ? 255 : 0); });
        return GrayImage(width, height, std::move(px));
    }
};

/// Reads a 0 = background / 255 = foreground mask; any other value is rejected.
inline GroundTruth load_ground_truth(const std::string& path) {
    const GrayImage img = load_image(path);
    std::vector<std::uint8_t> mask(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Intensity v = img.pixels()[i];
        if (v != 0 && v != 255)
            throw Error(ErrorCode::unsupported_format,
                        "ground truth pixel " + std::to_string(i) + " is " + std::to_string(v) + ", expected 0 or 255",
                        path);
        mask[i] = v == 255;
    }
    try {
        return GroundTruth(img.width(), img.height(), std::move(mask));
    } catch (const Error& e) {
        throw Error(e.code(), e.what(), path);
    }
}

using Distribution = std::array<double, kLevels>;

struct ClassDistributions {
    Distribution foreground{};
    Distribution background{};
};

inline ClassDistributions split_distributions(const GrayImage& img, const GroundTruth& gt) {
    if (img.width() != gt.width || img.height() != gt.height)
        throw Error(ErrorCode::dimension_mismatch, "image is " + std::to_string(img.width()) + "x" +
                                                       std::to_string(img.height()) + ", ground truth is " +
                                                       std::to_string(gt.width) + "x" + std::to_string(gt.height));
    std::array<std::uint64_t, kLevels> fg{}, bg{};
    std::uint64_t nf = 0, nb = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (gt.foreground[i]) {
            ++fg[img.pixels()[i]];
            ++nf;
        } else {
            ++bg[img.pixels()[i]];
            ++nb;
        }
    }
    if (nf == 0 || nb == 0)
        throw Error(ErrorCode::empty_class, "ground truth needs foreground and background pixels");
    ClassDistributions out;
    for (std::size_t v = 0; v < kLevels; ++v) {
        out.foreground[v] = static_cast<double>(fg[v]) / static_cast<double>(nf);
        out.background[v] = static_cast<double>(bg[v]) / static_cast<double>(nb);
    }
    return out;
}

inline double manhattan_separation(const Distribution& fg, const Distribution& bg) {
    double sum = 0.0;
    for (std::size_t v = 0; v < kLevels; ++v)
        sum += std::abs(fg[v] - bg[v]);
    return sum;
}

inline Intensity round_to_intensity(double v) {
    return static_cast<Intensity>(std::clamp(std::lround(v), 0L, 255L));
}

/// Normalized 1D Gaussian taps for offsets -radius..radius, radius = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : taps)
        w /= sum;
    return taps;
}

/// Separable Gaussian smoothing with clamped borders.
inline GrayImage baseline_gaussian(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0))
        throw Error(ErrorCode::invalid_argument, "sigma must be positive");
    const auto taps = gaussian_kernel(sigma);
    const long radius = static_cast<long>(taps.size() / 2);
    const long w = static_cast<long>(img.width());
    const long h = static_cast<long>(img.height());

    std::vector<double> horizontal(img.size());
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            double acc = 0.0;
            for (long k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] *
                       img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(std::clamp(c + k, 0L, w - 1)));
            horizontal[static_cast<std::size_t>(r * w + c)] = acc;
        }

    GrayImage out(img.width(), img.height());
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            double acc = 0.0;
            for (long k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] *
                       horizontal[static_cast<std::size_t>(std::clamp(r + k, 0L, h - 1) * w + c)];
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = round_to_intensity(acc);
        }
    return out;
}

/// Classical sliding-window median (stride 1, clamped borders).
inline GrayImage baseline_median(const GrayImage& img, int window) {
    if (window % 2 == 0)
        throw Error(ErrorCode::even_window, "median window must be odd, got " + std::to_string(window));
    if (window < 3)
        throw Error(ErrorCode::invalid_argument, "median window must be at least 3");
    const long half = window / 2;
    const long w = static_cast<long>(img.width());
    const long h = static_cast<long>(img.height());
    GrayImage out(img.width(), img.height());
    std::vector<Intensity> values(static_cast<std::size_t>(window * window));
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            std::size_t n = 0;
            for (long dr = -half; dr <= half; ++dr)
                for (long dc = -half; dc <= half; ++dc)
                    values[n++] = img.at(static_cast<std::size_t>(std::clamp(r + dr, 0L, h - 1)),
                                         static_cast<std::size_t>(std::clamp(c + dc, 0L, w - 1)));
            const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
            std::nth_element(values.begin(), mid, values.end());
            out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = *mid;
        }
    return out;
}

/// Perona-Malik diffusion, conduction exp(-(d / kappa)^2) on the four
/// nearest-neighbour differences; border pixels see themselves beyond the
/// edge (zero flux).
inline GrayImage baseline_anisotropic_diffusion(const GrayImage& img, int iterations, double kappa, double lambda) {
    if (iterations < 1)
        throw Error(ErrorCode::invalid_argument, "iterations must be at least 1");
    if (!(kappa > 0.0))
        throw Error(ErrorCode::invalid_argument, "kappa must be positive");
    if (!(lambda > 0.0 && lambda <= 0.25))
        throw Error(ErrorCode::invalid_argument, "lambda must be in (0, 0.25]");
    const std::size_t w = img.width();
    const std::size_t h = img.height();
    std::vector<double> cur(img.pixels().begin(), img.pixels().end());
    std::vector<double> next(cur.size());
    auto conduction = [kappa](double d) { return std::exp(-(d / kappa) * (d / kappa)); };
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const double centre = cur[r * w + c];
                const double dn = cur[(r > 0 ? r - 1 : r) * w + c] - centre;
                const double ds = cur[(r + 1 < h ? r + 1 : r) * w + c] - centre;
                const double de = cur[r * w + (c + 1 < w ? c + 1 : c)] - centre;
                const double dw = cur[r * w + (c > 0 ? c - 1 : c)] - centre;
                next[r * w + c] = centre + lambda * (conduction(dn) * dn + conduction(ds) * ds +
                                                     conduction(de) * de + conduction(dw) * dw);
            }
        cur.swap(next);
    }
    GrayImage out(w, h);
    std::transform(cur.begin(), cur.end(), out.pixels().begin(), round_to_intensity);
    return out;
}

/// Label 0 below t, label 1 at or above t.
inline LabelMap baseline_fixed_threshold(const GrayImage& img, int t) {
    if (t < 0 || t > 255)
        throw Error(ErrorCode::invalid_argument, "threshold must be in [0, 255]");
    LabelMap out;
    out.width = img.width();
    out.height = img.height();
    out.region_count = 2;
    out.labels.resize(img.size());
    std::transform(img.pixels().begin(), img.pixels().end(), out.labels.begin(),
                   [t](Intensity v) { return static_cast<std::uint16_t>(v >= t ? 1 : 0); });
    if (t > 0)
        out.regions.regions = {{0, t - 1, (t - 1) / 2}, {t, 255, (t + 255) / 2}};
    return out;
}

enum class Method { raw, gaussian, median, anisotropic_diffusion, has_distance, has_histogram };

inline constexpr std::array<Method, 6> kAllMethods{Method::raw,
                                                   Method::gaussian,
                                                   Method::median,
                                                   Method::anisotropic_diffusion,
                                                   Method::has_distance,
                                                   Method::has_histogram};

inline std::string to_string(Method m) {
    switch (m) {
    case Method::raw: return "raw";
    case Method::gaussian: return "gaussian";
    case Method::median: return "median";
    case Method::anisotropic_diffusion: return "anisotropic-diffusion";
    case Method::has_distance: return "has-distance";
    case Method::has_histogram: return "has-histogram";
    }
    return "unknown";
}

/// Defaults for the baselines. The anisotropic-diffusion values are a common
/// Perona-Malik setting, not tuned for any image.
struct EvalConfig {
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    double gaussian_sigma = 1.5;
    int median_window = 3;
    int ad_iterations = 10;
    double ad_kappa = 30.0;
    double ad_lambda = 0.2;
    std::size_t kernel = 2;
    unsigned threads = 1;
};

struct SeparationReport {
    std::string method;
    double score = 0.0;
    std::string params;
};

/// Processed image for one method. Both HAS rows score the merge-filtered
/// image; the rule only changes which regions a later segmentation draws.
inline GrayImage process(Method m, const GrayImage& img, const EvalConfig& cfg) {
    switch (m) {
    case Method::raw: return img;
    case Method::gaussian: return baseline_gaussian(img, cfg.gaussian_sigma);
    case Method::median: return baseline_median(img, cfg.median_window);
    case Method::anisotropic_diffusion:
        return baseline_anisotropic_diffusion(img, cfg.ad_iterations, cfg.ad_kappa, cfg.ad_lambda);
    case Method::has_distance:
    case Method::has_histogram: return filter_image(img, KernelSize(cfg.kernel), cfg.threads);
    }
    return img;
}

inline std::string method_params(Method m, const EvalConfig& cfg) {
    auto num = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.')
            s.pop_back();
        return s;
    };
    switch (m) {
    case Method::raw: return "";
    case Method::gaussian: return "sigma=" + num(cfg.gaussian_sigma);
    case Method::median: return "window=" + std::to_string(cfg.median_window);
    case Method::anisotropic_diffusion:
        return "iterations=" + std::to_string(cfg.ad_iterations) + ";kappa=" + num(cfg.ad_kappa) +
               ";lambda=" + num(cfg.ad_lambda);
    case Method::has_distance: return "kernel=" + std::to_string(cfg.kernel) + ";rule=distance";
    case Method::has_histogram: return "kernel=" + std::to_string(cfg.kernel) + ";rule=histogram";
    }
    return "";
}

inline std::vector<SeparationReport> evaluate(const GrayImage& img, const GroundTruth& gt, const EvalConfig& cfg) {
    if (img.width() != gt.width || img.height() != gt.height)
        throw Error(ErrorCode::dimension_mismatch, "image and ground truth dimensions differ");
    std::vector<SeparationReport> out;
    GrayImage has_filtered;
    bool have_filtered = false;
    for (Method m : cfg.methods) {
        GrayImage processed;
        if (m == Method::has_distance || m == Method::has_histogram) {
            if (!have_filtered) {
                has_filtered = process(m, img, cfg);
                have_filtered = true;
            }
            processed = has_filtered;
        } else {
            processed = process(m, img, cfg);
        }
        const auto d = split_distributions(processed, gt);
        out.push_back({to_string(m), manhattan_separation(d.foreground, d.background), method_params(m, cfg)});
    }
    return out;
}

inline void write_reports_csv(std::ostream& out, const std::vector<SeparationReport>& reports) {
    out << "method,score,params\n";
    char buf[32];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%.6f", r.score);
        out << r.method << ',' << buf << ',' << r.params << '\n';
    }
}

inline nlohmann::json reports_json(const std::vector<SeparationReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports)
        arr.push_back({{"method", r.method}, {"score", r.score}, {"params", r.params}});
    return arr;
}

} // namespace has
