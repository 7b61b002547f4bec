#include "sgvad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sgvad {

using nlohmann::json;

namespace {

// Trapezoidal area of a curve restricted to x in [0, 1]. The curve has
// non-decreasing x; a final point short of x = 1 extends horizontally.
double area_over_unit_range(const std::vector<Vec2>& curve) {
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const Vec2& a = curve[i];
        const Vec2& b = curve[i + 1];
        if (a.x >= 1.0) break;
        if (b.x <= a.x) continue;
        Vec2 end = b;
        if (b.x > 1.0) {
            const double t = (1.0 - a.x) / (b.x - a.x);
            end = {1.0, a.y + t * (b.y - a.y)};
        }
        area += (end.x - a.x) * (a.y + end.y) / 2.0;
    }
    if (!curve.empty() && curve.back().x < 1.0) {
        area += (1.0 - curve.back().x) * curve.back().y;
    }
    return area;
}

// Detection thresholds that flip at least one state, highest first.
std::vector<double> descending_unique(std::vector<double> values) {
    std::sort(values.begin(), values.end(), std::greater<>());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

struct MatchedDetections {
    // Per GT region: highest score of any detection overlapping it enough.
    std::vector<double> gt_match_score;
    // Track key per GT region, aligned with gt_match_score.
    std::vector<std::pair<std::string, std::int64_t>> gt_track;
    // Scores of detections that overlap no GT region in their frame.
    std::vector<double> false_positive_scores;
    std::int64_t total_frames = 0;
};

MatchedDetections match_detections(std::span<const ScoredRegion> detections,
                                   const VideoAnnotations& gt, double iou_min) {
    if (gt.empty()) throw std::invalid_argument("evaluation: ground truth is empty");

    std::set<std::string> unknown;
    for (const ScoredRegion& d : detections) {
        if (!gt.contains(d.video_id)) unknown.insert(d.video_id);
    }
    if (!unknown.empty()) {
        std::ostringstream msg;
        msg << "evaluation: scored videos missing from ground truth:";
        for (const std::string& id : unknown) msg << ' ' << id;
        throw std::invalid_argument(msg.str());
    }

    MatchedDetections out;
    struct GtRef {
        std::size_t slot;
        BBox bbox;
    };
    std::map<std::string, std::map<std::int64_t, std::vector<GtRef>>> gt_by_frame;
    for (const auto& [video_id, file] : gt) {
        out.total_frames += file.total_frame;
        for (const GroundTruthAnnotation& a : file.annotations) {
            gt_by_frame[video_id][a.frame_id].push_back({out.gt_match_score.size(), a.bbox});
            out.gt_match_score.push_back(-std::numeric_limits<double>::infinity());
            out.gt_track.emplace_back(video_id, a.track_id);
        }
    }
    if (out.gt_match_score.empty()) {
        throw std::invalid_argument("evaluation: ground truth holds no annotations");
    }

    for (const ScoredRegion& d : detections) {
        bool matched = false;
        const auto video_it = gt_by_frame.find(d.video_id);
        if (video_it != gt_by_frame.end()) {
            const auto frame_it = video_it->second.find(d.frame_id);
            if (frame_it != video_it->second.end()) {
                // One detection may cover several GT regions in its frame.
                for (const GtRef& ref : frame_it->second) {
                    if (iou(d.bbox, ref.bbox) >= iou_min) {
                        matched = true;
                        out.gt_match_score[ref.slot] = std::max(out.gt_match_score[ref.slot], d.score);
                    }
                }
            }
        }
        if (!matched) out.false_positive_scores.push_back(d.score);
    }
    return out;
}

// Shared sweep: y(tau) from per-unit detection thresholds, x(tau) from false
// positives per frame. Units are GT regions for RBDC and GT tracks for TBDC.
EvalResult sweep_curve(std::string criterion, const std::vector<double>& unit_thresholds,
                       const std::vector<double>& fp_scores, std::int64_t total_frames,
                       const std::vector<double>& all_scores) {
    EvalResult result;
    result.criterion = std::move(criterion);
    result.curve.push_back({0.0, 0.0});
    if (total_frames <= 0) throw std::invalid_argument("evaluation: total frame count is zero");

    std::vector<double> sorted_units = unit_thresholds;
    std::sort(sorted_units.begin(), sorted_units.end(), std::greater<>());
    std::vector<double> sorted_fps = fp_scores;
    std::sort(sorted_fps.begin(), sorted_fps.end(), std::greater<>());

    const double total_units = static_cast<double>(unit_thresholds.size());
    for (double tau : descending_unique(all_scores)) {
        // Arrays are sorted descending; elements before the bound are >= tau.
        const auto detected =
            std::upper_bound(sorted_units.begin(), sorted_units.end(), tau, std::greater<>());
        const auto fps = std::upper_bound(sorted_fps.begin(), sorted_fps.end(), tau, std::greater<>());
        const double y = static_cast<double>(detected - sorted_units.begin()) / total_units;
        const double x =
            static_cast<double>(fps - sorted_fps.begin()) / static_cast<double>(total_frames);
        result.curve.push_back({x, y});
    }
    result.auc = area_over_unit_range(result.curve);
    return result;
}

}  // namespace

EvalResult frame_level_auc(std::span<const double> frame_scores,
                           std::span<const int> frame_labels) {
    if (frame_scores.size() != frame_labels.size()) {
        throw std::invalid_argument("frame_level_auc: scores and labels differ in length");
    }
    std::size_t positives = 0;
    for (int label : frame_labels) positives += label ? 1 : 0;
    const std::size_t negatives = frame_labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw std::invalid_argument("frame_level_auc: labels hold a single class, AUC undefined");
    }

    std::vector<std::size_t> order(frame_scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&frame_scores](std::size_t a, std::size_t b) {
        return frame_scores[a] > frame_scores[b];
    });

    EvalResult result;
    result.criterion = "frame";
    result.curve.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        // Tie groups move as one threshold step.
        std::size_t j = i;
        while (j < order.size() && frame_scores[order[j]] == frame_scores[order[i]]) {
            if (frame_labels[order[j]]) ++tp; else ++fp;
            ++j;
        }
        i = j;
        result.curve.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                                static_cast<double>(tp) / static_cast<double>(positives)});
    }
    result.auc = area_over_unit_range(result.curve);
    return result;
}

EvalResult rbdc(std::span<const ScoredRegion> detections, const VideoAnnotations& gt,
                double iou_min) {
    const MatchedDetections matched = match_detections(detections, gt, iou_min);
    std::vector<double> all_scores;
    all_scores.reserve(detections.size());
    for (const ScoredRegion& d : detections) all_scores.push_back(d.score);
    return sweep_curve("rbdc", matched.gt_match_score, matched.false_positive_scores,
                       matched.total_frames, all_scores);
}

EvalResult tbdc(std::span<const ScoredRegion> detections, const VideoAnnotations& gt,
                double iou_min, double track_coverage_min) {
    const MatchedDetections matched = match_detections(detections, gt, iou_min);

    std::map<std::pair<std::string, std::int64_t>, std::vector<double>> track_scores;
    for (std::size_t i = 0; i < matched.gt_match_score.size(); ++i) {
        track_scores[matched.gt_track[i]].push_back(matched.gt_match_score[i]);
    }
    // A track is detected at tau iff the k-th best of its region match scores
    // is >= tau, where k regions make up the required coverage fraction.
    std::vector<double> track_thresholds;
    for (auto& [track, scores] : track_scores) {
        std::sort(scores.begin(), scores.end(), std::greater<>());
        const std::size_t needed = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::ceil(track_coverage_min * static_cast<double>(scores.size()))));
        track_thresholds.push_back(scores[needed - 1]);
    }

    std::vector<double> all_scores;
    all_scores.reserve(detections.size());
    for (const ScoredRegion& d : detections) all_scores.push_back(d.score);
    return sweep_curve("tbdc", track_thresholds, matched.false_positive_scores,
                       matched.total_frames, all_scores);
}

std::vector<MaskRegion> mask_to_regions(const ScoreMap& map, double threshold, int min_pixels) {
    if (map.width <= 0 || map.height <= 0 ||
        map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
        throw std::invalid_argument("mask_to_regions: malformed score map");
    }
    std::vector<int> label(map.values.size(), -1);
    std::vector<MaskRegion> regions;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::size_t at = static_cast<std::size_t>(y) * map.width + x;
            if (label[at] >= 0 || map.at(x, y) <= threshold) continue;

            int min_x = x, max_x = x, min_y = y, max_y = y;
            int pixels = 0;
            double peak = -std::numeric_limits<double>::infinity();
            stack.clear();
            stack.emplace_back(x, y);
            label[at] = static_cast<int>(regions.size());
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++pixels;
                min_x = std::min(min_x, cx); max_x = std::max(max_x, cx);
                min_y = std::min(min_y, cy); max_y = std::max(max_y, cy);
                peak = std::max(peak, map.at(cx, cy));
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) continue;
                        const std::size_t nat = static_cast<std::size_t>(ny) * map.width + nx;
                        if (label[nat] >= 0 || map.at(nx, ny) <= threshold) continue;
                        label[nat] = static_cast<int>(regions.size());
                        stack.emplace_back(nx, ny);
                    }
                }
            }
            if (pixels >= min_pixels) {
                regions.push_back({{static_cast<double>(min_x), static_cast<double>(min_y),
                                    static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)},
                                   peak});
            }
        }
    }
    return regions;
}

FrameSeries frame_series(std::span<const ScoredRegion> regions, const VideoAnnotations& gt) {
    FrameSeries series;
    std::map<std::string, std::size_t> offsets;
    std::size_t total = 0;
    for (const auto& [video_id, file] : gt) {
        offsets[video_id] = total;
        total += static_cast<std::size_t>(file.total_frame);
    }
    series.scores.assign(total, -std::numeric_limits<double>::infinity());
    series.labels.assign(total, 0);
    for (const auto& [video_id, file] : gt) {
        for (const GroundTruthAnnotation& a : file.annotations) {
            if (a.frame_id >= 0 && a.frame_id < file.total_frame) {
                series.labels[offsets[video_id] + static_cast<std::size_t>(a.frame_id)] = 1;
            }
        }
    }
    for (const ScoredRegion& region : regions) {
        const auto it = offsets.find(region.video_id);
        if (it == offsets.end()) {
            throw std::invalid_argument("frame_series: video " + region.video_id +
                                        " missing from ground truth");
        }
        const std::int64_t frames = gt.at(region.video_id).total_frame;
        if (region.frame_id < 0 || region.frame_id >= frames) {
            throw std::invalid_argument("frame_series: frame " + std::to_string(region.frame_id) +
                                        " out of range for video " + region.video_id);
        }
        std::size_t at = it->second + static_cast<std::size_t>(region.frame_id);
        series.scores[at] = std::max(series.scores[at], region.score);
    }
    return series;
}

void write_results(std::ostream& out, std::span<const EvalResult> results) {
    json criteria = json::array();
    for (const EvalResult& r : results) {
        json curve = json::array();
        for (const Vec2& p : r.curve) curve.push_back(json::array({p.x, p.y}));
        criteria.push_back(json{{"criterion", r.criterion}, {"auc", r.auc}, {"curve", std::move(curve)}});
    }
    out << json{{"criteria", std::move(criteria)}}.dump(2) << '\n';
}

std::vector<EvalResult> read_results(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("results file: malformed document: ") + e.what());
    }
    std::vector<EvalResult> results;
    for (const json& entry : j.at("criteria")) {
        EvalResult r;
        r.criterion = entry.at("criterion").get<std::string>();
        r.auc = entry.at("auc").get<double>();
        for (const json& p : entry.at("curve")) {
            r.curve.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        results.push_back(std::move(r));
    }
    return results;
}

void write_curve_svg(std::ostream& out, const EvalResult& result) {
    constexpr double kSize = 480.0, kMargin = 48.0;
    const double span = kSize - 2 * kMargin;
    const auto px = [&](double x) { return kMargin + x * span; };
    const auto py = [&](double y) { return kSize - kMargin - y * span; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << span
        << "\" height=\"" << span << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "  <text x=\"" << kSize / 2 << "\" y=\"" << kMargin / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\">" << result.criterion
        << " AUC=" << result.auc << "</text>\n";
    out << "  <polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
    for (const Vec2& p : result.curve) {
        out << px(std::clamp(p.x, 0.0, 1.0)) << ',' << py(std::clamp(p.y, 0.0, 1.0)) << ' ';
    }
    out << "\"/>\n</svg>\n";
}

}  // namespace sgvad
