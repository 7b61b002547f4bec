#include "sgvad/metricspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgvad {

std::string attribute_name(Attribute a) {
    switch (a) {
        case Attribute::location: return "location";
        case Attribute::size: return "size";
        case Attribute::object_class: return "class";
        case Attribute::pose: return "pose";
        case Attribute::trajectory: return "trajectory";
    }
    return "unknown";
}

double location_distance(const Node& n1, const Node& n2) {
    return euclidean(n1.center, n2.center);
}

double size_distance(const Node& n1, const Node& n2) {
    const double w1 = n1.box_size.x, h1 = n1.box_size.y;
    const double w2 = n2.box_size.x, h2 = n2.box_size.y;
    if (w1 <= 0 || h1 <= 0 || w2 <= 0 || h2 <= 0) {
        throw std::invalid_argument("size_distance: box dimensions must be positive");
    }
    const double dw = w1 - w2, dh = h1 - h2;
    return std::sqrt(dw * dw / std::min(w1, w2) + dh * dh / std::min(h1, h2));
}

double class_distance(const Node& n1, const Node& n2) {
    return n1.class_id == n2.class_id ? 0.0 : 1.0;
}

namespace {

// |a - b| / max(min(a, b), 1); shared guard of the pose and trajectory sums.
double floored_ratio(double a, double b) {
    return std::abs(a - b) / std::max(std::min(a, b), 1.0);
}

}  // namespace

double pose_distance(const Node& n1, const Node& n2) {
    if (!n1.pose || !n2.pose) return 0.0;
    const auto& p1 = *n1.pose;
    const auto& p2 = *n2.pose;
    if (p1.size() != kPoseKeypoints || p2.size() != kPoseKeypoints) {
        throw std::invalid_argument("pose_distance: poses must hold exactly 17 keypoints");
    }
    double total = 0.0;
    for (std::size_t t = 1; t < kPoseKeypoints; ++t) {
        const double d1 = euclidean(p1[0], p1[t]);
        const double d2 = euclidean(p2[0], p2[t]);
        total += floored_ratio(d1, d2);
    }
    return total;
}

double trajectory_distance(const Node& n1, const Node& n2) {
    const auto& t1 = n1.trajectory;
    const auto& t2 = n2.trajectory;
    if (t1.size() != t2.size()) {
        throw std::invalid_argument("trajectory_distance: trajectory lengths differ");
    }
    if (t1.size() < 2) throw std::invalid_argument("trajectory_distance: need at least 2 points");
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < t1.size(); ++t) {
        const double dx1 = t1[t].x - t1[t + 1].x;
        const double dx2 = t2[t].x - t2[t + 1].x;
        const double dy1 = t1[t].y - t1[t + 1].y;
        const double dy2 = t2[t].y - t2[t + 1].y;
        total += floored_ratio(dx1, dx2) + floored_ratio(dy1, dy2);
    }
    return total;
}

std::array<double, kAttributeCount> attribute_distances(const Node& n1, const Node& n2) {
    return {location_distance(n1, n2), size_distance(n1, n2), class_distance(n1, n2),
            pose_distance(n1, n2), trajectory_distance(n1, n2)};
}

NormalizationConstants estimate_normalization(std::span<const std::pair<Node, Node>> sample) {
    if (sample.empty()) throw std::invalid_argument("estimate_normalization: empty sample");
    std::array<double, kAttributeCount> sum{};
    std::array<double, kAttributeCount> sum_sq{};
    for (const auto& [a, b] : sample) {
        const auto distances = attribute_distances(a, b);
        for (int i = 0; i < kAttributeCount; ++i) {
            sum[i] += distances[i];
            sum_sq[i] += distances[i] * distances[i];
        }
    }
    NormalizationConstants constants;
    const double n = static_cast<double>(sample.size());
    for (int i = 0; i < kAttributeCount; ++i) {
        const double mean = sum[i] / n;
        const double variance = std::max(0.0, sum_sq[i] / n - mean * mean);
        constants.per_attribute[i] = {mean, std::max(std::sqrt(variance), kSigmaFloor)};
    }
    return constants;
}

NodeDistanceDetail node_distance_detail(const Node& n1, const Node& n2,
                                        const NormalizationConstants& k) {
    const auto distances = attribute_distances(n1, n2);
    NodeDistanceDetail detail{-std::numeric_limits<double>::infinity(), Attribute::location};
    for (int i = 0; i < kAttributeCount; ++i) {
        const auto& [mean, stddev] = k.per_attribute[i];
        const double z = (distances[i] - mean) / stddev;
        if (z > detail.value) {
            detail.value = z;
            detail.dominant = static_cast<Attribute>(i);
        }
    }
    return detail;
}

double node_distance(const Node& n1, const Node& n2, const NormalizationConstants& k) {
    return node_distance_detail(n1, n2, k).value;
}

PairDistanceDetail pair_distance_detail(const NodePair& a, const NodePair& b,
                                        const NormalizationConstants& k) {
    // Either correspondence may hold between members; keep the better one,
    // scoring each by its worse member distance.
    const NodeDistanceDetail straight_1 = node_distance_detail(a.first, b.first, k);
    const NodeDistanceDetail straight_2 = node_distance_detail(a.second, b.second, k);
    const NodeDistanceDetail crossed_1 = node_distance_detail(a.first, b.second, k);
    const NodeDistanceDetail crossed_2 = node_distance_detail(a.second, b.first, k);

    const NodeDistanceDetail& straight = straight_1.value >= straight_2.value ? straight_1 : straight_2;
    const NodeDistanceDetail& crossed = crossed_1.value >= crossed_2.value ? crossed_1 : crossed_2;
    const NodeDistanceDetail& best = straight.value <= crossed.value ? straight : crossed;
    return {best.value, best.dominant};
}

double pair_distance(const NodePair& a, const NodePair& b, const NormalizationConstants& k) {
    return pair_distance_detail(a, b, k).value;
}

}  // namespace sgvad
