#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iecc/clustering.hpp"
#include "iecc/codec.hpp"
#include "iecc/errors.hpp"
#include "iecc/metrics.hpp"
#include "iecc/raster.hpp"
#include "iecc/stats.hpp"

namespace iecc {

constexpr const char* report_schema_version = "1";

enum class ColorMode : std::uint8_t { gray, rgb };

inline const char* color_mode_name(ColorMode m) { return m == ColorMode::gray ? "gray" : "rgb"; }

inline std::optional<ColorMode> parse_color_mode(const std::string& name) {
    if (name == "gray") return ColorMode::gray;
    if (name == "rgb") return ColorMode::rgb;
    return std::nullopt;
}

struct BenchPlan {
    std::vector<Algorithm> algorithms{Algorithm::kmeans, Algorithm::kmeanspp, Algorithm::fcm,
                                      Algorithm::fcmpp};
    std::vector<int> k_values{4, 8, 16, 32};
    int runs = 30;
    std::uint64_t base_seed = 1;
    int restarts = 1;
    double tolerance = 1e-4;
    int max_iterations = 300;
    double fuzzifier = 2.0;
    std::vector<ColorMode> color_modes{ColorMode::gray, ColorMode::rgb};
    bool aggregate_duplicates = true; // weighted-unique fast path for the matrix

    void validate() const {
        if (runs < 1) throw degenerate_input_error("bench plan: runs must be >= 1");
        if (algorithms.empty()) throw degenerate_input_error("bench plan: no algorithms");
        if (k_values.empty()) throw degenerate_input_error("bench plan: no K values");
        if (color_modes.empty()) throw degenerate_input_error("bench plan: no color modes");
        for (int k : k_values)
            if (k < 2 || k > 256)
                throw degenerate_input_error("bench plan: K=" + std::to_string(k) +
                                             " outside [2,256]");
        if (restarts < 1) throw degenerate_input_error("bench plan: restarts must be >= 1");
    }

    ClusterConfig cluster_config(Algorithm algorithm, int k, std::uint64_t seed) const {
        ClusterConfig c;
        c.algorithm = algorithm;
        c.k = k;
        c.seed = seed;
        c.restarts = restarts;
        c.tolerance = tolerance;
        c.max_iterations = max_iterations;
        c.fuzzifier = fuzzifier;
        c.aggregate_duplicates = aggregate_duplicates;
        return c;
    }
};

struct BenchInput {
    std::string name;
    RasterImage image;
};

// One row of the per-run matrix. Skipped cells (K above the image's distinct
// colors, or no RGB source for rgb mode) keep their coordinates so pairing
// stays visible in the CSV.
struct BenchCell {
    std::string image;
    ColorMode mode = ColorMode::gray;
    std::string source_color; // native_gray | converted_gray | rgb
    Algorithm algorithm = Algorithm::kmeans;
    int k = 0;
    int run = 0;
    std::uint64_t seed = 0;
    int restarts = 1;
    bool skipped = false;
    std::string skip_reason;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    MetricsReport metrics;
};

struct BenchResult {
    BenchPlan plan;
    std::vector<BenchCell> cells;
};

namespace detail {

struct ModeView {
    bool available = false;
    std::string source_color;
    RasterImage image;
    std::size_t distinct_colors = 0;
};

inline ModeView make_mode_view(const RasterImage& src, ColorMode mode) {
    ModeView v;
    if (mode == ColorMode::gray) {
        v.available = true;
        if (src.channels == 3) {
            v.image = to_grayscale(src);
            v.source_color = "converted_gray";
        } else {
            v.image = src;
            v.source_color = "native_gray";
        }
    } else if (src.channels == 3) {
        v.available = true;
        v.image = src;
        v.source_color = "rgb";
    }
    if (v.available) v.distinct_colors = count_distinct_colors(v.image);
    return v;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_double_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

inline BenchResult run_bench(const std::vector<BenchInput>& images, const BenchPlan& plan) {
    plan.validate();
    if (images.empty()) throw degenerate_input_error("bench: empty image set");
    BenchResult result;
    result.plan = plan;
    for (const auto& input : images) {
        require_valid(input.image, "bench");
        for (ColorMode mode : plan.color_modes) {
            const detail::ModeView view = detail::make_mode_view(input.image, mode);
            const std::vector<PixelPoint> points =
                view.available ? to_pixel_points(view.image) : std::vector<PixelPoint>{};
            for (Algorithm algorithm : plan.algorithms)
                for (int k : plan.k_values)
                    for (int run = 0; run < plan.runs; ++run) {
                        BenchCell cell;
                        cell.image = input.name;
                        cell.mode = mode;
                        cell.source_color = view.source_color;
                        cell.algorithm = algorithm;
                        cell.k = k;
                        cell.run = run;
                        cell.seed = plan.base_seed + std::uint64_t(run);
                        cell.restarts = plan.restarts;
                        if (!view.available) {
                            cell.skipped = true;
                            cell.skip_reason = "no rgb source";
                        } else if (std::size_t(k) > view.distinct_colors) {
                            cell.skipped = true;
                            cell.skip_reason =
                                "K=" + std::to_string(k) + " exceeds distinct colors=" +
                                std::to_string(view.distinct_colors);
                        } else {
                            const ClusterConfig config =
                                plan.cluster_config(algorithm, k, cell.seed);
                            const ClusterOutcome outcome = run_clustering(points, config);
                            const CompressedImage container = make_container(
                                view.image, outcome.centroids, outcome.assignments,
                                static_cast<std::uint8_t>(algorithm), config.seed);
                            const RasterImage reconstructed = decode(container);
                            cell.iterations = outcome.iterations;
                            cell.converged = outcome.converged;
                            cell.objective = outcome.objective;
                            cell.metrics = metrics_report(view.image, reconstructed);
                            cell.metrics.ratio_eq1 = compression_ratio(
                                view.image.width, view.image.height, view.image.channels, k);
                            cell.metrics.ratio_on_disk =
                                double(view.image.samples.size()) /
                                double(serialized_size(container));
                        }
                        result.cells.push_back(std::move(cell));
                    }
        }
    }
    return result;
}

inline std::string runs_csv(const BenchResult& result) {
    std::string out = "schema_version,image,mode,source_color,algorithm,k,run,seed,restarts,"
                      "max_iterations,tolerance,aggregated_duplicates,"
                      "status,iterations,converged,objective,mse,rmse,psnr_db,ssim,ratio_eq1,"
                      "ratio_on_disk\n";
    for (const auto& c : result.cells) {
        out += report_schema_version;
        out += ',' + c.image + ',' + color_mode_name(c.mode) + ',' + c.source_color + ',' +
               algorithm_name(c.algorithm) + ',' + std::to_string(c.k) + ',' +
               std::to_string(c.run) + ',' + std::to_string(c.seed) + ',' +
               std::to_string(c.restarts) + ',' + std::to_string(result.plan.max_iterations) +
               ',' + detail::fmt_double_short(result.plan.tolerance) + ',' +
               (result.plan.aggregate_duplicates ? "1" : "0") + ',';
        if (c.skipped) {
            out += "skipped,,,,,,,,,\n";
            continue;
        }
        out += "ok," + std::to_string(c.iterations) + ',' + (c.converged ? "1" : "0") + ',' +
               detail::fmt_double(c.objective) + ',' + detail::fmt_double(c.metrics.mse) + ',' +
               detail::fmt_double(c.metrics.rmse) + ',';
        out += std::isinf(c.metrics.psnr) ? "inf" : detail::fmt_double(c.metrics.psnr);
        out += ',' + detail::fmt_double(c.metrics.ssim) + ',' +
               detail::fmt_double(*c.metrics.ratio_eq1) + ',' +
               detail::fmt_double(*c.metrics.ratio_on_disk) + '\n';
    }
    return out;
}

enum class BenchMetric : std::uint8_t { rmse, psnr, ssim };

inline const char* bench_metric_name(BenchMetric m) {
    switch (m) {
    case BenchMetric::rmse: return "rmse";
    case BenchMetric::psnr: return "psnr";
    case BenchMetric::ssim: return "ssim";
    }
    return "?";
}

inline double cell_metric(const BenchCell& c, BenchMetric m) {
    switch (m) {
    case BenchMetric::rmse: return c.metrics.rmse;
    case BenchMetric::psnr: return c.metrics.psnr;
    case BenchMetric::ssim: return c.metrics.ssim;
    }
    return 0.0;
}

inline MetricOrientation bench_metric_orientation(BenchMetric m) {
    return m == BenchMetric::rmse ? MetricOrientation::lower_is_better
                                  : MetricOrientation::higher_is_better;
}

// Per-run value for the significance test: the mean of a metric over every
// non-skipped (image, K) cell of one algorithm/mode/run. Skip status depends
// only on (image, mode, K), so the per-run sets stay paired across
// algorithms.
inline std::vector<std::pair<std::string, std::vector<double>>>
per_run_values(const BenchResult& result, BenchMetric metric, ColorMode mode) {
    std::vector<std::pair<std::string, std::vector<double>>> table;
    for (Algorithm a : result.plan.algorithms) {
        std::vector<double> sums(std::size_t(result.plan.runs), 0.0);
        std::vector<std::size_t> counts(std::size_t(result.plan.runs), 0);
        for (const auto& c : result.cells) {
            if (c.algorithm != a || c.mode != mode || c.skipped) continue;
            sums[std::size_t(c.run)] += cell_metric(c, metric);
            ++counts[std::size_t(c.run)];
        }
        if (counts[0] == 0) continue; // mode absent for every image
        std::vector<double> values(std::size_t(result.plan.runs));
        for (int r = 0; r < result.plan.runs; ++r)
            values[std::size_t(r)] = sums[std::size_t(r)] / double(counts[std::size_t(r)]);
        table.emplace_back(algorithm_name(a), std::move(values));
    }
    return table;
}

struct SignificanceEntry {
    std::string algorithm;
    BenchMetric metric = BenchMetric::rmse;
    ColorMode mode = ColorMode::gray;
    ComparisonCell cell;
};

struct SignificanceTable {
    std::string baseline;
    std::vector<SignificanceEntry> entries;
};

inline SignificanceTable compute_significance(const BenchResult& result,
                                              Algorithm baseline = Algorithm::kmeanspp) {
    SignificanceTable table;
    table.baseline = algorithm_name(baseline);
    for (BenchMetric metric : {BenchMetric::rmse, BenchMetric::psnr, BenchMetric::ssim})
        for (ColorMode mode : result.plan.color_modes) {
            const auto runs = per_run_values(result, metric, mode);
            if (runs.size() < 2) continue;
            const auto rows =
                compare_algorithms(runs, table.baseline, bench_metric_orientation(metric));
            for (const auto& row : rows)
                table.entries.push_back({row.algorithm, metric, mode, row.cell});
        }
    return table;
}

// Table 5 layout: one row per algorithm, column groups of
// {rmse, psnr, ssim} x {p-value, defeated, method} x color mode.
inline std::string significance_csv(const SignificanceTable& table) {
    std::vector<std::string> algorithms;
    std::vector<std::pair<BenchMetric, ColorMode>> groups;
    for (const auto& e : table.entries) {
        if (std::find(algorithms.begin(), algorithms.end(), e.algorithm) == algorithms.end())
            algorithms.push_back(e.algorithm);
        const auto group = std::make_pair(e.metric, e.mode);
        if (std::find(groups.begin(), groups.end(), group) == groups.end())
            groups.push_back(group);
    }
    std::string out = "schema_version,baseline,algorithm";
    for (const auto& [metric, mode] : groups) {
        const std::string prefix =
            std::string(bench_metric_name(metric)) + "_" + color_mode_name(mode);
        out += ',' + prefix + "_p," + prefix + "_defeated," + prefix + "_method";
    }
    out += '\n';
    for (const auto& algorithm : algorithms) {
        out += report_schema_version;
        out += ',' + table.baseline + ',' + algorithm;
        for (const auto& [metric, mode] : groups) {
            const SignificanceEntry* entry = nullptr;
            for (const auto& e : table.entries)
                if (e.algorithm == algorithm && e.metric == metric && e.mode == mode) entry = &e;
            if (!entry) {
                out += ",,,";
                continue;
            }
            if (entry->cell.undefined)
                out += ",undefined,0,";
            else
                out += ',' + detail::fmt_double_short(entry->cell.p_value) + ',' +
                       (entry->cell.defeated ? "1" : "0") + ',' +
                       wilcoxon_method_name(entry->cell.method);
        }
        out += '\n';
    }
    return out;
}

// Median quality per K: the Fig. 9-style distortion curve data.
inline std::string quality_vs_k_csv(const BenchResult& result) {
    std::string out =
        "schema_version,image,mode,algorithm,k,median_rmse,median_psnr_db,median_ssim\n";
    std::vector<std::string> image_names;
    for (const auto& c : result.cells)
        if (std::find(image_names.begin(), image_names.end(), c.image) == image_names.end())
            image_names.push_back(c.image);
    for (const auto& image : image_names)
        for (ColorMode mode : result.plan.color_modes)
            for (Algorithm a : result.plan.algorithms)
                for (int k : result.plan.k_values) {
                    std::vector<double> rmse_v, psnr_v, ssim_v;
                    for (const auto& c : result.cells) {
                        if (c.image != image || c.mode != mode || c.algorithm != a ||
                            c.k != k || c.skipped)
                            continue;
                        rmse_v.push_back(c.metrics.rmse);
                        psnr_v.push_back(c.metrics.psnr);
                        ssim_v.push_back(c.metrics.ssim);
                    }
                    if (rmse_v.empty()) continue;
                    out += report_schema_version;
                    out += ',' + image + ',' + color_mode_name(mode) + ',' + algorithm_name(a) +
                           ',' + std::to_string(k) + ',' +
                           detail::fmt_double(median(rmse_v)) + ',' +
                           detail::fmt_double(median(psnr_v)) + ',' +
                           detail::fmt_double(median(ssim_v)) + '\n';
                }
    return out;
}

struct CentroidStudyRow {
    std::string frame;
    bool training = false;
    double rmse_shared = 0.0;
    double rmse_per_image = 0.0;
};

// Shared-vs-per-image centroid comparison over a frame sequence: train a
// palette on one frame, reuse it everywhere, and compare against a palette
// learned per frame.
inline std::vector<CentroidStudyRow> centroid_study(const std::vector<BenchInput>& frames,
                                                    std::size_t train_index,
                                                    const ClusterConfig& config) {
    if (frames.empty()) throw degenerate_input_error("centroid study: empty frame set");
    if (train_index >= frames.size())
        throw degenerate_input_error("centroid study: training index " +
                                     std::to_string(train_index) + " out of range");
    const ClusterOutcome trained =
        run_clustering(to_pixel_points(frames[train_index].image), config);
    std::vector<CentroidStudyRow> rows;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CentroidStudyRow row;
        row.frame = frames[i].name;
        row.training = i == train_index;
        const CompressedImage shared = encode_with_palette(frames[i].image, trained.centroids);
        row.rmse_shared = rmse(frames[i].image, decode(shared));
        const CompressedImage own = encode(frames[i].image, config);
        row.rmse_per_image = rmse(frames[i].image, decode(own));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string centroid_study_csv(const std::vector<CentroidStudyRow>& rows) {
    std::string out = "schema_version,frame,training,rmse_shared,rmse_per_image\n";
    for (const auto& r : rows) {
        out += report_schema_version;
        out += ',' + r.frame + ',' + (r.training ? "1" : "0") + ',' +
               detail::fmt_double(r.rmse_shared) + ',' + detail::fmt_double(r.rmse_per_image) +
               '\n';
    }
    return out;
}

inline void save_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

} // namespace iecc
