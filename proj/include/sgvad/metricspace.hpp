#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>

#include "sgvad/scenegraph.hpp"

namespace sgvad {

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr int kAttributeCount = 5;

enum class Attribute : int {
    location = 0,
    size = 1,
    object_class = 2,
    pose = 3,
    trajectory = 4,
};

std::string attribute_name(Attribute a);

/// Per-attribute z-scoring parameters that make the five raw distances
/// comparable. Every stddev is floored at kSigmaFloor.
struct NormalizationConstants {
    struct MeanStd {
        double mean = 0.0;
        double stddev = 1.0;

        friend bool operator==(const MeanStd&, const MeanStd&) = default;
    };

    std::array<MeanStd, kAttributeCount> per_attribute{};

    MeanStd& operator[](Attribute a) { return per_attribute[static_cast<int>(a)]; }
    const MeanStd& operator[](Attribute a) const { return per_attribute[static_cast<int>(a)]; }

    friend bool operator==(const NormalizationConstants&, const NormalizationConstants&) = default;
};

double location_distance(const Node& n1, const Node& n2);
double size_distance(const Node& n1, const Node& n2);
double class_distance(const Node& n1, const Node& n2);
/// Zero when either node lacks a pose.
double pose_distance(const Node& n1, const Node& n2);
double trajectory_distance(const Node& n1, const Node& n2);

/// All five raw attribute distances, indexed by Attribute.
std::array<double, kAttributeCount> attribute_distances(const Node& n1, const Node& n2);

/// Mean and population standard deviation of each attribute distance over
/// the sampled pairs. The sample must be non-empty.
NormalizationConstants estimate_normalization(std::span<const std::pair<Node, Node>> sample);

/// Max over the five z-scored attribute distances. May be negative for
/// similar nodes.
double node_distance(const Node& n1, const Node& n2, const NormalizationConstants& k);

struct NodeDistanceDetail {
    double value = 0.0;
    Attribute dominant = Attribute::location;
};
NodeDistanceDetail node_distance_detail(const Node& n1, const Node& n2,
                                        const NormalizationConstants& k);

using NodePair = std::pair<Node, Node>;

/// Distance between two node pairs: best of the two member correspondences,
/// each scored by its worse member distance.
double pair_distance(const NodePair& a, const NodePair& b, const NormalizationConstants& k);

struct PairDistanceDetail {
    double value = 0.0;
    Attribute dominant = Attribute::location;
};
PairDistanceDetail pair_distance_detail(const NodePair& a, const NodePair& b,
                                        const NormalizationConstants& k);

}  // namespace sgvad
