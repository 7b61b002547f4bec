#pragma once

#include <random>

#include "sgvad/metricspace.hpp"

namespace sgvad::testutil {

// Random but structurally valid node for property tests: positive box,
// a handful of classes, pose only on class 0, random-walk trajectory.
inline Node random_node(std::mt19937& rng, int trajectory_length = kDefaultTrajectoryLength) {
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    std::uniform_real_distribution<double> dim(1.0, 200.0);
    std::uniform_real_distribution<double> step(-6.0, 6.0);
    std::uniform_int_distribution<int> klass(0, 3);

    Node n;
    n.box_size = {dim(rng), dim(rng)};
    n.class_id = klass(rng);
    n.center = {coord(rng), coord(rng)};
    Vec2 at = n.center;
    n.trajectory.reserve(static_cast<std::size_t>(trajectory_length));
    for (int t = 0; t < trajectory_length; ++t) {
        n.trajectory.push_back(at);
        at = {at.x + step(rng), at.y + step(rng)};
    }
    if (n.class_id == 0) {
        std::vector<Vec2> pose;
        pose.reserve(kPoseKeypoints);
        for (int k = 0; k < kPoseKeypoints; ++k) {
            pose.push_back({n.center.x + step(rng), n.center.y + step(rng)});
        }
        n.pose = std::move(pose);
    }
    return n;
}

inline NormalizationConstants unit_constants() {
    NormalizationConstants k;
    for (auto& entry : k.per_attribute) entry = {0.0, 1.0};
    return k;
}

}  // namespace sgvad::testutil
