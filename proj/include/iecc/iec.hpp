#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iecc/codec.hpp"
#include "iecc/errors.hpp"
#include "iecc/metrics.hpp"
#include "iecc/raster.hpp"

namespace iecc {

enum class SimilarityMetric : std::uint8_t { ssim, one_minus_nrmse };

inline const char* similarity_metric_name(SimilarityMetric m) {
    return m == SimilarityMetric::ssim ? "ssim" : "one_minus_nrmse";
}

inline std::optional<SimilarityMetric> parse_similarity_metric(const std::string& name) {
    if (name == "ssim") return SimilarityMetric::ssim;
    if (name == "one_minus_nrmse") return SimilarityMetric::one_minus_nrmse;
    return std::nullopt;
}

inline double frame_similarity(const RasterImage& a, const RasterImage& b, SimilarityMetric m) {
    if (m == SimilarityMetric::ssim) return ssim(a, b);
    return 1.0 - rmse(a, b) / 255.0;
}

struct IecConfig {
    double threshold_value = 0.95;
    SimilarityMetric metric = SimilarityMetric::ssim;
    ClusterConfig encoder;

    void validate() const {
        if (threshold_value < 0.0 || threshold_value > 1.0)
            throw degenerate_input_error("iec config: threshold must be in [0,1]");
    }
};

// Either Skip(similarity) or Send(similarity, container). The first frame is
// always sent and has no similarity (there is nothing stored to compare to).
struct TransmissionDecision {
    bool sent = false;
    std::optional<double> similarity;
    std::optional<CompressedImage> container;
};

// Change-gated encoder: keep a reference frame, transmit a new frame only
// when its similarity to the reference drops below the threshold, and make
// the transmitted frame the new reference.
class IecSession {
public:
    explicit IecSession(IecConfig config) : config_(std::move(config)) { config_.validate(); }

    TransmissionDecision step(const RasterImage& frame) {
        require_valid(frame, "iec step");
        TransmissionDecision decision;
        if (stored_image_) {
            require_same_shape(*stored_image_, frame, "iec step");
            decision.similarity = frame_similarity(frame, *stored_image_, config_.metric);
            decision.sent = *decision.similarity < config_.threshold_value;
        } else {
            decision.sent = true;
        }
        ++frames_seen_;
        bytes_baseline_ += frame.samples.size();
        if (decision.sent) {
            decision.container = encode(frame, config_.encoder);
            ++frames_sent_;
            bytes_sent_ += serialized_size(*decision.container);
            stored_image_ = frame; // raw frame, not its reconstruction
        }
        return decision;
    }

    const std::optional<RasterImage>& stored_image() const { return stored_image_; }
    const IecConfig& config() const { return config_; }
    std::uint64_t frames_seen() const { return frames_seen_; }
    std::uint64_t frames_sent() const { return frames_sent_; }
    std::uint64_t frames_skipped() const { return frames_seen_ - frames_sent_; }
    std::uint64_t bytes_sent() const { return bytes_sent_; }
    std::uint64_t bytes_baseline() const { return bytes_baseline_; }

private:
    IecConfig config_;
    std::optional<RasterImage> stored_image_;
    std::uint64_t frames_seen_ = 0;
    std::uint64_t frames_sent_ = 0;
    std::uint64_t bytes_sent_ = 0;
    std::uint64_t bytes_baseline_ = 0;
};

struct IecFrameRecord {
    std::size_t frame = 0;
    bool sent = false;
    std::optional<double> similarity;
    std::size_t container_bytes = 0; // 0 when skipped
};

struct IecReport {
    std::uint64_t frames_seen = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_baseline = 0;
    double savings = 0.0; // 1 - bytes_sent / bytes_baseline
    std::vector<IecFrameRecord> decisions;
};

using IecDecisionSink = std::function<void(std::size_t, const TransmissionDecision&)>;

inline IecReport run_stream(const std::vector<RasterImage>& frames, const IecConfig& config,
                            const IecDecisionSink& on_decision = {}) {
    if (frames.empty()) throw degenerate_input_error("iec run_stream: empty frame sequence");
    IecSession session(config);
    IecReport report;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const TransmissionDecision decision = session.step(frames[i]);
        IecFrameRecord rec;
        rec.frame = i;
        rec.sent = decision.sent;
        rec.similarity = decision.similarity;
        rec.container_bytes = decision.container ? serialized_size(*decision.container) : 0;
        report.decisions.push_back(rec);
        if (on_decision) on_decision(i, decision);
    }
    report.frames_seen = session.frames_seen();
    report.frames_sent = session.frames_sent();
    report.bytes_sent = session.bytes_sent();
    report.bytes_baseline = session.bytes_baseline();
    report.savings = 1.0 - double(report.bytes_sent) / double(report.bytes_baseline);
    return report;
}

} // namespace iecc
