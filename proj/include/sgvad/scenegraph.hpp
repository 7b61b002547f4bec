#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgvad/geometry.hpp"
#include "sgvad/ingest.hpp"

namespace sgvad {

/// One object lifted into the graph: box size, class id, center location,
/// forward trajectory, and (for people) a 17-keypoint pose.
struct Node {
    Vec2 box_size;
    int class_id = 0;
    Vec2 center;
    std::vector<Vec2> trajectory;
    std::optional<std::vector<Vec2>> pose;

    BBox bbox() const {
        return {center.x - box_size.x / 2.0, center.y - box_size.y / 2.0,
                center.x + box_size.x / 2.0, center.y + box_size.y / 2.0};
    }

    friend bool operator==(const Node&, const Node&) = default;
};

/// Per-frame graph. `edges` and `isolated` partition node participation:
/// an index is isolated iff it appears in no edge.
struct SceneGraph {
    std::vector<Node> nodes;
    std::vector<std::pair<int, int>> edges;  // unordered pairs stored with first < second
    std::vector<int> isolated;
};

Node build_node(const RawObject& obj, std::vector<Vec2> trajectory);

/// Distance between (x1, y1, z) and (x2, y2, 0) with pseudo-depth z = |y1 - y2|.
double pseudo_depth_distance(const Vec2& l1, const Vec2& l2);

/// Connects every node pair with pseudo-depth distance strictly below
/// `edge_threshold`; the rest become isolated nodes.
SceneGraph build_graph(std::vector<Node> nodes, double edge_threshold);

struct FrameGraph {
    std::string video_id;
    std::int64_t frame_id = 0;
    SceneGraph graph;
};

/// Full frame-to-graph pipeline for one stream.
std::vector<FrameGraph> graphs_from_records(std::span<const FrameRecord> records,
                                            double edge_threshold,
                                            int trajectory_length);

}  // namespace sgvad
