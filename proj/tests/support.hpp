#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "has/image.hpp"
#include "has/synth.hpp"

namespace test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("has_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline has::GrayImage random_image(std::mt19937_64& rng, std::size_t w, std::size_t h, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<has::Intensity> px(w * h);
    for (auto& p : px)
        p = static_cast<has::Intensity>(dist(rng));
    return has::GrayImage(w, h, std::move(px));
}

/// Piecewise-constant blobs plus noise: closer to real inputs than uniform noise.
inline has::GrayImage blocky_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
    std::uniform_int_distribution<int> level(0, 255);
    std::normal_distribution<double> noise(0.0, 6.0);
    const int a = level(rng), b = level(rng);
    const std::size_t split = std::uniform_int_distribution<std::size_t>(0, w)(rng);
    std::vector<has::Intensity> px(w * h);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const double v = (c < split ? a : b) + noise(rng);
            px[r * w + c] = static_cast<has::Intensity>(std::clamp(v, 0.0, 255.0));
        }
    return has::GrayImage(w, h, std::move(px));
}

/// The three-material polysilicon-like phantom used throughout the suites.
inline has::PhantomSpec three_material_spec(double sigma = 12.0, std::uint64_t seed = 1) {
    has::PhantomSpec spec;
    spec.width = 512;
    spec.height = 512;
    spec.materials = {{60, sigma}, {130, sigma}, {210, sigma}};
    spec.layout = has::PhantomLayout::rectangles_with_vias;
    spec.via_size = 8;
    spec.seed = seed;
    return spec;
}

} // namespace test
