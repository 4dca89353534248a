// Command-line surface: compress, decompress, metrics, bench, iec-sim,
// histogram. Exit codes: 0 success, 2 usage error, 3 input/data error,
// 4 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "iecc/bench.hpp"
#include "iecc/iec.hpp"
#include "iecc/iecc.hpp"
#include "iecc/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_input = 3;
constexpr int exit_internal = 4;

std::vector<std::uint8_t> read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw iecc::io_error("cannot open: " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_binary(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw iecc::io_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw iecc::io_error("write failed: " + path);
}

json metric_value(double v) {
    if (std::isinf(v)) return json("inf");
    return json(v);
}

json report_json(const iecc::MetricsReport& r) {
    json j;
    j["mse"] = r.mse;
    j["rmse"] = r.rmse;
    j["psnr_db"] = metric_value(r.psnr);
    j["ssim"] = r.ssim;
    j["ratio_eq1"] = r.ratio_eq1 ? json(*r.ratio_eq1) : json(nullptr);
    j["ratio_on_disk"] = r.ratio_on_disk ? json(*r.ratio_on_disk) : json(nullptr);
    return j;
}

std::string csv_field(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return iecc::detail::fmt_double(v.get<double>());
}

// Flat one-row CSV rendering of a JSON report, for --format csv.
std::string report_csv(const json& j) {
    std::string header, row;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!header.empty()) {
            header += ',';
            row += ',';
        }
        header += it.key();
        if (it.value().is_number_unsigned())
            row += std::to_string(it.value().get<std::uint64_t>());
        else if (it.value().is_number_integer())
            row += std::to_string(it.value().get<std::int64_t>());
        else if (it.value().is_number_float())
            row += iecc::detail::fmt_double(it.value().get<double>());
        else if (it.value().is_boolean())
            row += it.value().get<bool>() ? "1" : "0";
        else
            row += csv_field(it.value());
    }
    return header + "\n" + row + "\n";
}

void print_report(const json& j, const std::string& format) {
    if (format == "csv")
        std::cout << report_csv(j);
    else
        std::cout << j.dump(2) << "\n";
}

struct CommonFlags {
    int k = 16;
    std::string algo = "kmeanspp";
    std::uint64_t seed = 0;
    int restarts = 1;
    double fuzzifier = 2.0;
    double tolerance = 1e-4;
    int max_iterations = 300;
    bool exact_duplicates = false;

    iecc::ClusterConfig cluster_config() const {
        iecc::ClusterConfig c;
        const auto a = iecc::parse_algorithm(algo);
        if (!a) throw iecc::degenerate_input_error("unknown algorithm: " + algo);
        c.algorithm = *a;
        c.k = k;
        c.seed = seed;
        c.restarts = restarts;
        c.fuzzifier = fuzzifier;
        c.tolerance = tolerance;
        c.max_iterations = max_iterations;
        c.aggregate_duplicates = !exact_duplicates;
        return c;
    }
};

void add_cluster_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--k", f.k, "Palette size K")->check(CLI::Range(2, 256));
    cmd->add_option("--algo", f.algo, "Clustering algorithm")
        ->check(CLI::IsMember({"kmeans", "kmeanspp", "fcm", "fcmpp"}));
    cmd->add_option("--restarts", f.restarts, "Best-of-R restarts")->check(CLI::Range(1, 1000));
    cmd->add_option("--fuzzifier", f.fuzzifier, "FCM fuzzifier m (> 1)");
    cmd->add_option("--tolerance", f.tolerance, "Centroid-shift stop threshold");
    cmd->add_option("--max-iterations", f.max_iterations, "Iteration cap")
        ->check(CLI::Range(1, 100000));
    cmd->add_flag("--exact-duplicates", f.exact_duplicates,
                  "Cluster duplicate pixels individually instead of aggregating "
                  "unique colors with multiplicity weights");
}

// Positional output wins over the global --output; commands with a natural
// default directory fall back to it.
std::string resolve_output(const std::string& positional, const std::string& global,
                           const char* fallback = nullptr) {
    if (!positional.empty()) return positional;
    if (!global.empty()) return global;
    if (fallback) return fallback;
    throw iecc::degenerate_input_error("no output path given (positional or --output)");
}

std::string source_color_label(const iecc::RasterImage& loaded, bool converted) {
    if (loaded.channels == 3) return "rgb";
    return converted ? "converted_gray" : "native_gray";
}

std::vector<std::string> list_pngs(const std::string& dir) {
    if (!fs::is_directory(dir)) throw iecc::io_error("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw iecc::io_error("no .png frames in: " + dir);
    return files;
}

int cmd_compress(const std::string& input, const std::string& output, const CommonFlags& flags,
                 bool gray, const std::string& format) {
    iecc::RasterImage image = iecc::read_png(input);
    bool converted = false;
    if (gray && image.channels == 3) {
        image = iecc::to_grayscale(image);
        converted = true;
    }
    const iecc::ClusterConfig config = flags.cluster_config();
    const iecc::CompressedImage container = iecc::encode(image, config);
    const std::vector<std::uint8_t> bytes = iecc::serialize(container);
    write_binary(output, bytes);

    iecc::MetricsReport report = iecc::metrics_report(image, iecc::decode(container));
    report.ratio_eq1 = iecc::compression_ratio(image.width, image.height, image.channels, flags.k);
    report.ratio_on_disk = double(image.samples.size()) / double(bytes.size());

    json j;
    j["schema_version"] = iecc::report_schema_version;
    j["input"] = input;
    j["output"] = output;
    j["width"] = image.width;
    j["height"] = image.height;
    j["channels"] = image.channels;
    j["color_mode"] = source_color_label(image, converted);
    j["k"] = flags.k;
    j["algorithm"] = flags.algo;
    j["seed"] = flags.seed;
    j["restarts"] = flags.restarts;
    j["container_bytes"] = bytes.size();
    j.update(report_json(report));
    print_report(j, format);
    return exit_ok;
}

int cmd_decompress(const std::string& input, const std::string& output) {
    const iecc::CompressedImage container = iecc::deserialize(read_binary(input));
    iecc::write_png(output, iecc::decode(container));
    return exit_ok;
}

int cmd_metrics(const std::string& original, const std::string& reconstructed,
                const std::string& format) {
    const iecc::RasterImage a = iecc::read_png(original);
    const iecc::RasterImage b = iecc::read_png(reconstructed);
    const iecc::MetricsReport report = iecc::metrics_report(a, b);
    json j;
    j["schema_version"] = iecc::report_schema_version;
    j["original"] = original;
    j["reconstructed"] = reconstructed;
    j.update(report_json(report));
    print_report(j, format);
    return exit_ok;
}

int cmd_histogram(const std::string& input, const std::string& output) {
    const iecc::RasterImage image = iecc::read_png(input);
    const iecc::Histogram h = iecc::histogram(image);
    std::string csv = h.channels() == 1 ? "schema_version,value,count\n"
                                        : "schema_version,value,count_r,count_g,count_b\n";
    for (int v = 0; v < 256; ++v) {
        csv += iecc::report_schema_version;
        csv += ',' + std::to_string(v);
        for (int c = 0; c < h.channels(); ++c)
            csv += ',' + std::to_string(h.bins[std::size_t(c)][std::size_t(v)]);
        csv += '\n';
    }
    iecc::save_text(output, csv);
    return exit_ok;
}

int cmd_iec_sim(const std::string& frame_dir, const std::string& output_dir,
                const CommonFlags& flags, double threshold, const std::string& metric_name,
                bool gray, const std::string& format) {
    const auto metric = iecc::parse_similarity_metric(metric_name);
    if (!metric) throw iecc::degenerate_input_error("unknown similarity metric: " + metric_name);
    const std::vector<std::string> files = list_pngs(frame_dir);
    std::vector<iecc::RasterImage> frames;
    std::vector<std::string> stems;
    for (const auto& f : files) {
        iecc::RasterImage img = iecc::read_png(f);
        if (gray && img.channels == 3) img = iecc::to_grayscale(img);
        frames.push_back(std::move(img));
        stems.push_back(fs::path(f).stem().string());
    }
    fs::create_directories(output_dir);

    iecc::IecConfig config;
    config.threshold_value = threshold;
    config.metric = *metric;
    config.encoder = flags.cluster_config();

    const iecc::IecReport report = iecc::run_stream(
        frames, config, [&](std::size_t i, const iecc::TransmissionDecision& d) {
            if (d.sent)
                write_binary((fs::path(output_dir) / (stems[i] + ".iecc")).string(),
                             iecc::serialize(*d.container));
        });

    json j;
    j["schema_version"] = iecc::report_schema_version;
    j["frame_dir"] = frame_dir;
    j["threshold"] = threshold;
    j["metric"] = metric_name;
    j["k"] = flags.k;
    j["algorithm"] = flags.algo;
    j["seed"] = flags.seed;
    j["frames_seen"] = report.frames_seen;
    j["frames_sent"] = report.frames_sent;
    j["bytes_sent"] = report.bytes_sent;
    j["bytes_baseline"] = report.bytes_baseline;
    j["savings"] = report.savings;
    json decisions = json::array();
    for (const auto& d : report.decisions) {
        json row;
        row["frame"] = d.frame;
        row["file"] = stems[d.frame];
        row["action"] = d.sent ? "send" : "skip";
        row["similarity"] = d.similarity ? json(*d.similarity) : json(nullptr);
        row["container_bytes"] = d.container_bytes;
        decisions.push_back(row);
    }
    j["decisions"] = decisions;
    iecc::save_text((fs::path(output_dir) / "iec_report.json").string(), j.dump(2) + "\n");
    print_report(j, format);
    return exit_ok;
}

int cmd_bench(const std::vector<std::string>& image_paths, const std::string& output_dir,
              iecc::BenchPlan plan, const std::vector<std::string>& algo_names,
              const std::vector<std::string>& mode_names, const std::string& study_dir,
              std::size_t train_frame, const CommonFlags& study_flags) {
    plan.algorithms.clear();
    for (const auto& name : algo_names) {
        const auto a = iecc::parse_algorithm(name);
        if (!a) throw iecc::degenerate_input_error("unknown algorithm: " + name);
        plan.algorithms.push_back(*a);
    }
    plan.color_modes.clear();
    for (const auto& name : mode_names) {
        const auto m = iecc::parse_color_mode(name);
        if (!m) throw iecc::degenerate_input_error("unknown color mode: " + name);
        plan.color_modes.push_back(*m);
    }

    std::vector<iecc::BenchInput> images;
    for (const auto& p : image_paths)
        images.push_back({fs::path(p).stem().string(), iecc::read_png(p)});

    fs::create_directories(output_dir);
    const iecc::BenchResult result = iecc::run_bench(images, plan);
    json files = json::array();
    const auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(output_dir) / name).string();
        iecc::save_text(path, content);
        files.push_back(path);
    };
    emit("runs.csv", iecc::runs_csv(result));
    emit("quality_vs_k.csv", iecc::quality_vs_k_csv(result));
    const bool has_baseline =
        std::find(plan.algorithms.begin(), plan.algorithms.end(), iecc::Algorithm::kmeanspp) !=
        plan.algorithms.end();
    if (has_baseline && plan.algorithms.size() >= 2)
        emit("significance.csv", iecc::significance_csv(iecc::compute_significance(result)));

    if (!study_dir.empty()) {
        std::vector<iecc::BenchInput> frames;
        for (const auto& f : list_pngs(study_dir)) {
            iecc::RasterImage img = iecc::read_png(f);
            frames.push_back({fs::path(f).stem().string(), std::move(img)});
        }
        const auto rows = iecc::centroid_study(frames, train_frame, study_flags.cluster_config());
        emit("centroid_study.csv", iecc::centroid_study_csv(rows));
    }

    json j;
    j["schema_version"] = iecc::report_schema_version;
    j["cells"] = result.cells.size();
    j["base_seed"] = plan.base_seed;
    j["runs"] = plan.runs;
    j["restarts"] = plan.restarts;
    j["files"] = files;
    std::cout << j.dump(2) << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Palette-clustering image codec with change-gated transmission"};
    app.require_subcommand(1);

    // Global flags; subcommands fall through to them.
    std::string format = "json";
    std::uint64_t seed = 0;
    std::string output;
    app.add_option("--format", format, "Report format for stdout")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", seed, "PRNG seed (bench: base seed, run r uses base+r)");
    app.add_option("--output", output, "Output path (file or directory, per subcommand)");

    // compress
    auto* compress = app.add_subcommand("compress", "Compress a PNG into an .iecc container");
    compress->fallthrough();
    std::string c_input, c_output;
    CommonFlags c_flags;
    bool c_gray = false;
    compress->add_option("input", c_input, "Input PNG")->required();
    compress->add_option("output", c_output, "Output container");
    add_cluster_flags(compress, c_flags);
    compress->add_flag("--gray", c_gray, "Convert RGB input to grayscale before encoding");

    // decompress
    auto* decompress = app.add_subcommand("decompress", "Decode an .iecc container to PNG");
    decompress->fallthrough();
    std::string d_input, d_output;
    decompress->add_option("input", d_input, "Input container")->required();
    decompress->add_option("output", d_output, "Output PNG");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Full-reference quality metrics for two PNGs");
    metrics->fallthrough();
    std::string m_original, m_reconstructed;
    metrics->add_option("original", m_original, "Original PNG")->required();
    metrics->add_option("reconstructed", m_reconstructed, "Reconstructed PNG")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Run the algorithm/K benchmark matrix");
    bench->fallthrough();
    std::vector<std::string> b_images;
    iecc::BenchPlan b_plan;
    std::vector<std::string> b_algos{"kmeans", "kmeanspp", "fcm", "fcmpp"};
    std::vector<std::string> b_modes{"gray", "rgb"};
    std::string b_study_dir;
    std::size_t b_train_frame = 0;
    CommonFlags b_study_flags;
    bool b_exact_duplicates = false;
    bench->add_option("--images", b_images, "Input PNGs")->required()->expected(-1);
    bench->add_option("--algos", b_algos, "Algorithms to compare")
        ->check(CLI::IsMember({"kmeans", "kmeanspp", "fcm", "fcmpp"}));
    bench->add_option("--ks", b_plan.k_values, "Palette sizes")->check(CLI::Range(2, 256));
    bench->add_option("--runs", b_plan.runs, "Runs per cell")->check(CLI::Range(1, 100000));
    bench->add_option("--restarts", b_plan.restarts, "Best-of-R restarts per run")
        ->check(CLI::Range(1, 1000));
    bench->add_option("--modes", b_modes, "Color modes")->check(CLI::IsMember({"gray", "rgb"}));
    bench->add_option("--tolerance", b_plan.tolerance, "Centroid-shift stop threshold");
    bench->add_option("--max-iterations", b_plan.max_iterations, "Iteration cap")
        ->check(CLI::Range(1, 100000));
    bench->add_option("--fuzzifier", b_plan.fuzzifier, "FCM fuzzifier m (> 1)");
    bench->add_option("--centroid-study", b_study_dir,
                      "Frame directory for the shared-vs-per-image centroid comparison");
    bench->add_option("--train-frame", b_train_frame, "Training frame index for the study");
    bench->add_option("--k", b_study_flags.k, "Palette size for the centroid study")
        ->check(CLI::Range(2, 256));
    bench->add_option("--algo", b_study_flags.algo, "Algorithm for the centroid study")
        ->check(CLI::IsMember({"kmeans", "kmeanspp", "fcm", "fcmpp"}));
    bench->add_flag("--exact-duplicates", b_exact_duplicates,
                    "Cluster duplicate pixels individually (reference path)");

    // iec-sim
    auto* iec_sim = app.add_subcommand("iec-sim", "Change-gated transmission over a frame dir");
    iec_sim->fallthrough();
    std::string i_dir;
    CommonFlags i_flags;
    double i_threshold = 0.95;
    std::string i_metric = "ssim";
    bool i_gray = false;
    iec_sim->add_option("frames", i_dir, "Directory of PNG frames")->required();
    iec_sim->add_option("--threshold", i_threshold, "Similarity threshold in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    iec_sim->add_option("--metric", i_metric, "Similarity metric")
        ->check(CLI::IsMember({"ssim", "one_minus_nrmse"}));
    add_cluster_flags(iec_sim, i_flags);
    iec_sim->add_flag("--gray", i_gray, "Convert RGB frames to grayscale");

    // histogram
    auto* hist = app.add_subcommand("histogram", "Per-channel 256-bin tonal histogram CSV");
    hist->fallthrough();
    std::string h_input, h_output;
    hist->add_option("input", h_input, "Input PNG")->required();
    hist->add_option("output", h_output, "Output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*compress) {
            c_flags.seed = seed;
            return cmd_compress(c_input, resolve_output(c_output, output), c_flags, c_gray,
                                format);
        }
        if (*decompress) return cmd_decompress(d_input, resolve_output(d_output, output));
        if (*metrics) return cmd_metrics(m_original, m_reconstructed, format);
        if (*bench) {
            b_plan.base_seed = seed;
            b_plan.aggregate_duplicates = !b_exact_duplicates;
            b_study_flags.restarts = b_plan.restarts;
            b_study_flags.seed = b_plan.base_seed;
            b_study_flags.tolerance = b_plan.tolerance;
            b_study_flags.max_iterations = b_plan.max_iterations;
            b_study_flags.fuzzifier = b_plan.fuzzifier;
            b_study_flags.exact_duplicates = b_exact_duplicates;
            return cmd_bench(b_images, resolve_output("", output, "bench_out"), b_plan, b_algos,
                             b_modes, b_study_dir, b_train_frame, b_study_flags);
        }
        if (*iec_sim) {
            i_flags.seed = seed;
            return cmd_iec_sim(i_dir, resolve_output("", output, "iec_out"), i_flags, i_threshold,
                               i_metric, i_gray, format);
        }
        if (*hist) return cmd_histogram(h_input, resolve_output(h_output, output));
        std::cerr << "no subcommand\n";
        return exit_usage;
    } catch (const iecc::malformed_container_error& e) {
        std::cerr << "error: malformed container ("
                  << iecc::malformed_container_error::category_name(e.category())
                  << "): " << e.what() << "\n";
        return exit_input;
    } catch (const iecc::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}
