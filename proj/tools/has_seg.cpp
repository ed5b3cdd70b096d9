// has_seg: segment SEM images by histogram peaks, inspect histograms,
// generate phantoms, and score filters against ground truth.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "has/has.hpp"

namespace fs = std::filesystem;

namespace {

std::string strip_extension(const std::string& path) {
    fs::path p(path);
    return (p.parent_path() / p.stem()).string();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw has::Error(has::ErrorCode::io_failure, "cannot open for writing", path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out)
        throw has::Error(has::ErrorCode::io_failure, "write failed", path);
}

void write_histogram_csv(const has::Histogram& h, const std::string& path) {
    auto out = open_output(path);
    out << "intensity,count\n";
    for (int v = 0; v < has::kLevels; ++v)
        out << v << ',' << h[v] << '\n';
    finish(out, path);
}

struct SegmentArgs {
    std::string input;
    std::string out;
    std::size_t kernel = 2;
    std::string rule = "histogram";
    bool raw_labels = false;
    bool debug = false;
};

struct HistogramArgs {
    std::string input;
    std::string out;
    std::size_t kernel = 2;
};

struct SynthArgs {
    std::string spec;
    std::string out;
};

struct EvalArgs {
    std::string image;
    std::string truth;
    std::string out;
    std::vector<std::string> methods;
    has::EvalConfig cfg;
};

int run_segment(const SegmentArgs& a, unsigned threads) {
    const has::GrayImage img = has::load_image(a.input);
    has::SegmentOptions opts;
    opts.kernel = a.kernel;
    opts.rule = a.rule == "distance" ? has::BoundaryRule::distance : has::BoundaryRule::histogram;
    opts.label_raw = a.raw_labels;
    opts.threads = threads;
    const has::Segmentation s = has::segment_image(img, opts);

    const std::string out = a.out.empty() ? strip_extension(a.input) + ".labels.png" : a.out;
    has::save_label_map(s.labels, out);
    std::cout << "wrote " << out << " (" << s.regions.size() << " regions)\n";
    if (a.debug) {
        const std::string stem = strip_extension(out);
        write_histogram_csv(s.estimated, stem + ".histogram.csv");
        const std::string acc = stem + ".accumulator.csv";
        auto f = open_output(acc);
        has::write_accumulator_csv(f, s.estimated, s.trace);
        finish(f, acc);
        std::cout << "wrote " << stem << ".histogram.csv, " << acc << '\n';
    }
    return 0;
}

int run_histogram(const HistogramArgs& a, unsigned threads) {
    const has::GrayImage img = has::load_image(a.input);
    const std::string stem = a.out.empty() ? strip_extension(a.input) : a.out;
    const has::Histogram raw = has::compute_histogram(img);
    const has::Histogram est = has::estimate_histogram(img, has::KernelSize(a.kernel), threads);
    write_histogram_csv(raw, stem + ".raw.csv");
    write_histogram_csv(est, stem + ".estimated.csv");
    std::cout << "non-zero bins: raw " << raw.nonzero_bins() << ", estimated " << est.nonzero_bins() << '\n';
    return 0;
}

int run_synth(const SynthArgs& a) {
    const has::PhantomSpec spec = has::load_phantom_spec(a.spec);
    const has::Phantom p = has::generate_phantom(spec);
    const std::string stem = a.out.empty() ? strip_extension(a.spec) : a.out;

    has::GrayImage truth(p.truth.width, p.truth.height);
    std::transform(p.truth.labels.begin(), p.truth.labels.end(), truth.pixels().begin(),
                   [](std::uint16_t l) { return static_cast<has::Intensity>(l); });
    has::save_image(p.image, stem + ".pgm");
    has::save_image(truth, stem + ".truth.pgm");
    // material 0 is background for the binary evaluation mask
    std::vector<std::uint8_t> fg(p.truth.labels.size());
    std::transform(p.truth.labels.begin(), p.truth.labels.end(), fg.begin(),
                   [](std::uint16_t l) { return static_cast<std::uint8_t>(l != 0); });
    if (spec.materials.size() > 1)
        has::save_image(has::GroundTruth(p.truth.width, p.truth.height, fg).to_image(), stem + ".mask.pgm");
    std::cout << "wrote " << stem << ".pgm, " << stem << ".truth.pgm";
    if (spec.materials.size() > 1)
        std::cout << ", " << stem << ".mask.pgm";
    std::cout << '\n';
    return 0;
}

int run_eval(EvalArgs a, unsigned threads) {
    const has::GrayImage img = has::load_image(a.image);
    const has::GroundTruth gt = has::load_ground_truth(a.truth);
    if (img.width() != gt.width || img.height() != gt.height)
        throw has::Error(has::ErrorCode::dimension_mismatch,
                         "image " + a.image + " is " + std::to_string(img.width()) + "x" +
                             std::to_string(img.height()) + " but ground truth is " + std::to_string(gt.width) + "x" +
                             std::to_string(gt.height),
                         a.truth);
    a.cfg.threads = threads;
    if (!a.methods.empty()) {
        a.cfg.methods.clear();
        for (const auto& name : a.methods)
            for (has::Method m : has::kAllMethods)
                if (has::to_string(m) == name)
                    a.cfg.methods.push_back(m);
    }
    const auto reports = has::evaluate(img, gt, a.cfg);
    has::write_reports_csv(std::cout, reports);
    if (!a.out.empty()) {
        auto csv = open_output(a.out + ".csv");
        has::write_reports_csv(csv, reports);
        finish(csv, a.out + ".csv");
        auto json = open_output(a.out + ".json");
        json << has::reports_json(reports).dump(2) << '\n';
        finish(json, a.out + ".json");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Histogram-based auto segmentation for SEM images"};
    app.require_subcommand(1);
    app.fallthrough(); // --threads may follow the subcommand

    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads for the merge filter")
        ->envname("HAS_SEG_THREADS")
        ->check(CLI::Range(1u, 256u));

    auto kernel_check = CLI::Range(std::size_t{2}, std::size_t{4096});

    SegmentArgs seg;
    auto* segment = app.add_subcommand("segment", "Label an image by material");
    segment->add_option("input", seg.input, "Input PGM or PNG")->required();
    segment->add_option("--out", seg.out, "Label map PNG (default <input>.labels.png)");
    segment->add_option("--kernel", seg.kernel, "Merge kernel size; at most the smallest feature width")
        ->check(kernel_check)
        ->capture_default_str();
    segment->add_option("--rule", seg.rule, "Boundary rule")
        ->check(CLI::IsMember({"histogram", "distance"}))
        ->capture_default_str();
    segment->add_flag("--raw-labels", seg.raw_labels, "Label the input image instead of the filtered one");
    segment->add_flag("--debug-dump", seg.debug, "Also write estimated-histogram and accumulator CSVs");

    HistogramArgs hist;
    auto* histogram = app.add_subcommand("histogram", "Write raw and estimated histograms as CSV");
    histogram->add_option("input", hist.input, "Input PGM or PNG")->required();
    histogram->add_option("--out", hist.out, "Output prefix (default: input without extension)");
    histogram->add_option("--kernel", hist.kernel, "Merge kernel size")->check(kernel_check)->capture_default_str();

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Generate a phantom from a config file");
    synth->add_option("spec", syn.spec, "Phantom config")->required();
    synth->add_option("--out", syn.out, "Output prefix (default: config without extension)");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score filters by foreground/background separation");
    eval->add_option("image", ev.image, "Input image")->required();
    eval->add_option("truth", ev.truth, "Ground truth PGM, 0 background / 255 foreground")->required();
    eval->add_option("--out", ev.out, "Write <out>.csv and <out>.json");
    eval->add_option("--methods", ev.methods, "Subset of methods")
        ->check(CLI::IsMember({"raw", "gaussian", "median", "anisotropic-diffusion", "has-distance", "has-histogram"}));
    eval->add_option("--kernel", ev.cfg.kernel, "Merge kernel size")->check(kernel_check)->capture_default_str();
    eval->add_option("--sigma", ev.cfg.gaussian_sigma, "Gaussian sigma")->capture_default_str();
    eval->add_option("--median-window", ev.cfg.median_window, "Median window (odd)")->capture_default_str();
    eval->add_option("--ad-iterations", ev.cfg.ad_iterations, "Diffusion iterations")->capture_default_str();
    eval->add_option("--ad-kappa", ev.cfg.ad_kappa, "Diffusion conduction scale")->capture_default_str();
    eval->add_option("--ad-lambda", ev.cfg.ad_lambda, "Diffusion step, (0, 0.25]")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*segment)
            return run_segment(seg, threads);
        if (*histogram)
            return run_histogram(hist, threads);
        if (*synth)
            return run_synth(syn);
        if (*eval)
            return run_eval(ev, threads);
    } catch (const has::Error& e) {
        std::cerr << "has_seg: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "has_seg: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
