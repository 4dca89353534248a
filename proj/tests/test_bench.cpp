#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "iecc/bench.hpp"
#include "support/synthetic.hpp"

using namespace iecc;

namespace {

BenchPlan tiny_plan() {
    BenchPlan plan;
    plan.algorithms = {Algorithm::kmeans, Algorithm::kmeanspp};
    plan.k_values = {4, 8};
    plan.runs = 4;
    plan.base_seed = 9;
    plan.color_modes = {ColorMode::gray, ColorMode::rgb};
    return plan;
}

std::vector<BenchInput> tiny_images() {
    return {{"gradient", testsupport::gradient_image(24, 24)},
            {"blobs", testsupport::blobs_image(24, 24, 3)}};
}

// Parse one CSV column by header name.
std::vector<std::string> csv_column(const std::string& csv, const std::string& name) {
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> names;
    std::istringstream hs(header);
    for (std::string f; std::getline(hs, f, ',');) names.push_back(f);
    const auto it = std::find(names.begin(), names.end(), name);
    REQUIRE(it != names.end());
    const std::size_t col = std::size_t(it - names.begin());
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
        while (fields.size() < names.size()) fields.emplace_back();
        out.push_back(fields[col]);
    }
    return out;
}

} // namespace

TEST_CASE("bench runs the full matrix with paired seeds") {
    const BenchResult result = run_bench(tiny_images(), tiny_plan());
    REQUIRE(result.cells.size() == 2 * 2 * 2 * 2 * 4); // images x modes x algos x Ks x runs
    for (const auto& c : result.cells) {
        REQUIRE_FALSE(c.skipped);
        REQUIRE(c.seed == result.plan.base_seed + std::uint64_t(c.run));
    }
}

TEST_CASE("bench output is deterministic") {
    const BenchResult a = run_bench(tiny_images(), tiny_plan());
    const BenchResult b = run_bench(tiny_images(), tiny_plan());
    REQUIRE(runs_csv(a) == runs_csv(b));
    REQUIRE(quality_vs_k_csv(a) == quality_vs_k_csv(b));
    REQUIRE(significance_csv(compute_significance(a)) ==
            significance_csv(compute_significance(b)));
}

TEST_CASE("a one-cell plan emits a single data row") {
    BenchPlan plan = tiny_plan();
    plan.algorithms = {Algorithm::kmeanspp};
    plan.k_values = {4};
    plan.runs = 1;
    plan.color_modes = {ColorMode::gray};
    const BenchResult result = run_bench({tiny_images()[0]}, plan);
    const std::string csv = runs_csv(result);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2); // header + one row
}

TEST_CASE("degenerate K cells are skipped, not fatal") {
    BenchPlan plan = tiny_plan();
    plan.k_values = {4, 64};
    plan.runs = 2;
    plan.color_modes = {ColorMode::gray};
    auto eng = rng::make_engine(15);
    std::vector<BenchInput> images{
        {"limited", testsupport::random_limited_raster(eng, 16, 16, 1, 10)}};
    REQUIRE(count_distinct_colors(images[0].image) >= 4);
    REQUIRE(count_distinct_colors(images[0].image) < 64);
    const BenchResult result = run_bench(images, plan);
    std::size_t skipped = 0, ok = 0;
    for (const auto& c : result.cells) {
        if (c.skipped) {
            REQUIRE(c.k == 64);
            REQUIRE(c.skip_reason.find("distinct colors") != std::string::npos);
            ++skipped;
        } else {
            REQUIRE(c.k == 4);
            ++ok;
        }
    }
    REQUIRE(skipped == 2 * 2); // algos x runs
    REQUIRE(ok == 2 * 2);
}

TEST_CASE("gray-only sources skip rgb mode cells") {
    BenchPlan plan = tiny_plan();
    plan.k_values = {4};
    plan.runs = 1;
    auto eng = rng::make_engine(16);
    std::vector<BenchInput> images{{"gray", testsupport::random_raster(eng, 12, 12, 1)}};
    const BenchResult result = run_bench(images, plan);
    for (const auto& c : result.cells)
        if (c.mode == ColorMode::rgb) {
            REQUIRE(c.skipped);
            REQUIRE(c.skip_reason == "no rgb source");
        } else {
            REQUIRE_FALSE(c.skipped);
            REQUIRE(c.source_color == "native_gray");
        }
}

TEST_CASE("significance flags are recomputable from the per-run cells") {
    const BenchResult result = run_bench(tiny_images(), tiny_plan());
    const SignificanceTable table = compute_significance(result);
    REQUIRE_FALSE(table.entries.empty());
    for (const auto& entry : table.entries) {
        const auto runs = per_run_values(result, entry.metric, entry.mode);
        const auto recomputed =
            compare_algorithms(runs, "kmeanspp", bench_metric_orientation(entry.metric));
        bool found = false;
        for (const auto& row : recomputed)
            if (row.algorithm == entry.algorithm) {
                found = true;
                REQUIRE(row.cell.defeated == entry.cell.defeated);
                if (!entry.cell.undefined)
                    REQUIRE(row.cell.p_value == Catch::Approx(entry.cell.p_value).margin(1e-12));
            }
        REQUIRE(found);
    }
}

TEST_CASE("runs csv carries exact doubles for recomputation") {
    const BenchResult result = run_bench(tiny_images(), tiny_plan());
    const std::string csv = runs_csv(result);
    const auto rmse_fields = csv_column(csv, "rmse");
    std::size_t i = 0;
    for (const auto& c : result.cells) {
        if (!c.skipped) REQUIRE(std::stod(rmse_fields[i]) == c.metrics.rmse);
        ++i;
    }
}

TEST_CASE("an image is served best by its own palette across a frame set") {
    const auto frames = testsupport::drifting_frames(6, 24, 24);
    ClusterConfig config;
    config.algorithm = Algorithm::kmeanspp;
    config.k = 6;
    config.seed = 12;
    config.restarts = 6;
    config.aggregate_duplicates = true;
    std::vector<Centroids> palettes;
    for (const auto& f : frames)
        palettes.push_back(run_clustering(to_pixel_points(f), config).centroids);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double own = rmse(frames[i], decode(encode_with_palette(frames[i], palettes[i])));
        for (std::size_t j = 0; j < frames.size(); ++j) {
            if (i == j) continue;
            const double foreign =
                rmse(frames[i], decode(encode_with_palette(frames[i], palettes[j])));
            REQUIRE(own <= foreign + 1e-12);
        }
    }
}

TEST_CASE("centroid study marks the training frame and writes one row per frame") {
    const auto raw = testsupport::drifting_frames(6, 24, 24);
    std::vector<BenchInput> frames;
    for (std::size_t i = 0; i < raw.size(); ++i)
        frames.push_back({"frame_" + std::to_string(i), raw[i]});
    ClusterConfig config;
    config.algorithm = Algorithm::kmeanspp;
    config.k = 8;
    config.seed = 3;
    config.restarts = 3;
    config.aggregate_duplicates = true;
    const auto rows = centroid_study(frames, 0, config);
    REQUIRE(rows.size() == 6);
    REQUIRE(rows[0].training);
    REQUIRE(rows[0].rmse_shared == Catch::Approx(rows[0].rmse_per_image).margin(1e-12));
    for (std::size_t i = 1; i < rows.size(); ++i) REQUIRE_FALSE(rows[i].training);
    REQUIRE_THROWS_AS(centroid_study(frames, 99, config), degenerate_input_error);
}
