#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgvad/scoring.hpp"

namespace sgvad {

/// One detection criterion curve and its area. Curve points are the
/// operating points of the threshold sweep, x non-decreasing; the AUC is the
/// trapezoidal integral over them.
struct EvalResult {
    std::string criterion;
    double auc = 0.0;
    std::vector<Vec2> curve;
};

using VideoAnnotations = std::map<std::string, AnnotationFile>;

/// ROC AUC over per-frame scores and binary labels. Requires both classes.
EvalResult frame_level_auc(std::span<const double> frame_scores, std::span<const int> frame_labels);

/// Region-based criterion: detected-GT-region rate vs false-positive regions
/// per frame, AUC over x in [0, 1].
EvalResult rbdc(std::span<const ScoredRegion> detections, const VideoAnnotations& gt,
                double iou_min = 0.1);

/// Track-based criterion: a GT track counts as detected once the fraction of
/// its regions matched reaches `track_coverage_min`.
EvalResult tbdc(std::span<const ScoredRegion> detections, const VideoAnnotations& gt,
                double iou_min = 0.1, double track_coverage_min = 0.1);

/// Dense per-pixel score map, row-major.
struct ScoreMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct MaskRegion {
    BBox bbox;     // tight box around the component, exclusive right/bottom edge
    double score;  // max map value inside the component

    friend bool operator==(const MaskRegion&, const MaskRegion&) = default;
};

/// Binarizes the map at `threshold` (strictly above) and emits one region per
/// 8-connected component of at least `min_pixels` pixels.
std::vector<MaskRegion> mask_to_regions(const ScoreMap& map, double threshold, int min_pixels = 10);

/// Per-frame max region score (frames without regions sit below every finite
/// score) and per-frame anomaly labels, both indexed 0..total_frame-1 in
/// ascending video-id order; used to feed frame_level_auc from files.
struct FrameSeries {
    std::vector<double> scores;
    std::vector<int> labels;
};
FrameSeries frame_series(std::span<const ScoredRegion> regions, const VideoAnnotations& gt);

void write_results(std::ostream& out, std::span<const EvalResult> results);
std::vector<EvalResult> read_results(std::istream& in);

/// Minimal standalone SVG line plot of one criterion curve.
void write_curve_svg(std::ostream& out, const EvalResult& result);

}  // namespace sgvad
