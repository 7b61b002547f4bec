#include "sgvad/scenegraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgvad {

Node build_node(const RawObject& obj, std::vector<Vec2> trajectory) {
    if (!obj.bbox.well_formed()) throw std::invalid_argument("build_node: malformed bbox");
    if (trajectory.empty()) throw std::invalid_argument("build_node: empty trajectory");
    if (obj.pose && obj.pose->size() != kPoseKeypoints) {
        throw std::invalid_argument("build_node: pose must hold exactly 17 keypoints");
    }
    Node node;
    node.box_size = {obj.bbox.width(), obj.bbox.height()};
    node.class_id = obj.class_id;
    node.center = obj.bbox.center();
    node.trajectory = std::move(trajectory);
    node.pose = obj.pose;
    return node;
}

double pseudo_depth_distance(const Vec2& l1, const Vec2& l2) {
    const double dx = l1.x - l2.x;
    const double dy = l1.y - l2.y;
    const double z = std::abs(dy);
    return std::sqrt(dx * dx + dy * dy + z * z);
}

SceneGraph build_graph(std::vector<Node> nodes, double edge_threshold) {
    if (edge_threshold <= 0.0) throw std::invalid_argument("build_graph: edge threshold must be positive");
    SceneGraph graph;
    graph.nodes = std::move(nodes);
    const int n = static_cast<int>(graph.nodes.size());
    std::vector<bool> in_edge(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (pseudo_depth_distance(graph.nodes[i].center, graph.nodes[j].center) < edge_threshold) {
                graph.edges.emplace_back(i, j);
                in_edge[i] = in_edge[j] = true;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!in_edge[i]) graph.isolated.push_back(i);
    }
    return graph;
}

std::vector<FrameGraph> graphs_from_records(std::span<const FrameRecord> records,
                                            double edge_threshold, int trajectory_length) {
    const TrackIndex index(records);
    std::vector<FrameGraph> graphs;
    graphs.reserve(records.size());
    for (const FrameRecord& record : records) {
        std::vector<Node> nodes;
        nodes.reserve(record.objects.size());
        for (const RawObject& obj : record.objects) {
            nodes.push_back(
                build_node(obj, index.trajectory(obj.track_id, record.frame_id, trajectory_length)));
        }
        graphs.push_back({record.video_id, record.frame_id, build_graph(std::move(nodes), edge_threshold)});
    }
    return graphs;
}

}  // namespace sgvad
