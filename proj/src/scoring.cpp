#include "sgvad/scoring.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace sgvad {

using nlohmann::json;

namespace {

struct NearestIso {
    double score = std::numeric_limits<double>::infinity();
    int dominant = -1;
};

NearestIso nearest_isolated(const Node& n, const ExemplarModel& model) {
    NearestIso best;
    for (const Node& e : model.isolated_exemplars) {
        const NodeDistanceDetail d = node_distance_detail(n, e, model.constants);
        if (d.value < best.score) best = {d.value, static_cast<int>(d.dominant)};
    }
    return best;
}

struct NearestPair {
    double score = std::numeric_limits<double>::infinity();
    int dominant = -1;
};

NearestPair nearest_pair(const NodePair& pair, const ExemplarModel& model) {
    NearestPair best;
    for (const NodePair& e : model.pair_exemplars) {
        const PairDistanceDetail d = pair_distance_detail(pair, e, model.constants);
        if (d.value < best.score) best = {d.value, static_cast<int>(d.dominant)};
    }
    return best;
}

double clamp_finite(double score) {
    return std::min(score, std::numeric_limits<double>::max());
}

}  // namespace

double score_isolated(const Node& n, const ExemplarModel& model) {
    return nearest_isolated(n, model).score;
}

double score_pair(const NodePair& pair, const ExemplarModel& model) {
    return nearest_pair(pair, model).score;
}

std::vector<ScoredRegion> score_frame(const std::string& video_id, std::int64_t frame_id,
                                      const SceneGraph& graph, const ExemplarModel& model) {
    struct NodeScore {
        double score = -std::numeric_limits<double>::infinity();
        Provenance provenance;
        bool scored = false;
    };
    std::vector<NodeScore> per_node(graph.nodes.size());

    for (int idx : graph.isolated) {
        const NearestIso nearest = nearest_isolated(graph.nodes[idx], model);
        per_node[idx] = {nearest.score, {Provenance::Kind::isolated, -1, nearest.dominant}, true};
    }
    for (const auto& [i, j] : graph.edges) {
        const NearestPair nearest =
            nearest_pair({graph.nodes[i], graph.nodes[j]}, model);
        // A node in several edges keeps the worst (maximum) of its pair scores.
        for (const auto& [self, partner] : {std::pair{i, j}, std::pair{j, i}}) {
            NodeScore& entry = per_node[self];
            if (!entry.scored || nearest.score > entry.score) {
                entry = {nearest.score,
                         {Provenance::Kind::pair_member, partner, nearest.dominant},
                         true};
            }
        }
    }

    std::vector<ScoredRegion> regions;
    regions.reserve(graph.nodes.size());
    for (std::size_t idx = 0; idx < graph.nodes.size(); ++idx) {
        const NodeScore& entry = per_node[idx];
        regions.push_back({video_id, frame_id, graph.nodes[idx].bbox(),
                           clamp_finite(entry.score), entry.provenance});
    }
    return regions;
}

std::vector<ScoredRegion> detect(std::span<const ScoredRegion> regions, double threshold) {
    std::vector<ScoredRegion> detections;
    for (const ScoredRegion& region : regions) {
        if (region.score > threshold) detections.push_back(region);
    }
    return detections;
}

void write_scores(std::ostream& out, std::span<const ScoredRegion> regions) {
    for (const ScoredRegion& region : regions) {
        json provenance{{"kind", region.provenance.kind == Provenance::Kind::isolated
                                     ? "isolated"
                                     : "pair-member"}};
        if (region.provenance.kind == Provenance::Kind::pair_member) {
            provenance["partner"] = region.provenance.partner;
        }
        if (region.provenance.dominant_attribute >= 0) {
            provenance["dominant_attribute"] =
                attribute_name(static_cast<Attribute>(region.provenance.dominant_attribute));
        }
        json j{{"video_id", region.video_id},
               {"frame_id", region.frame_id},
               {"bbox", json::array({region.bbox.x1, region.bbox.y1, region.bbox.x2, region.bbox.y2})},
               {"score", region.score},
               {"provenance", std::move(provenance)}};
        out << j.dump() << '\n';
    }
}

std::vector<ScoredRegion> read_scores(std::istream& in) {
    std::vector<ScoredRegion> regions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("scores line " + std::to_string(line_no) +
                                     ": malformed record: " + e.what());
        }
        ScoredRegion region;
        region.video_id = j.at("video_id").get<std::string>();
        region.frame_id = j.at("frame_id").get<std::int64_t>();
        const json& bbox = j.at("bbox");
        region.bbox = {bbox.at(0).get<double>(), bbox.at(1).get<double>(), bbox.at(2).get<double>(),
                       bbox.at(3).get<double>()};
        region.score = j.at("score").get<double>();
        const json& provenance = j.at("provenance");
        const std::string kind = provenance.at("kind").get<std::string>();
        region.provenance.kind =
            kind == "isolated" ? Provenance::Kind::isolated : Provenance::Kind::pair_member;
        if (provenance.contains("partner")) {
            region.provenance.partner = provenance.at("partner").get<int>();
        }
        if (provenance.contains("dominant_attribute")) {
            const std::string name = provenance.at("dominant_attribute").get<std::string>();
            for (int i = 0; i < kAttributeCount; ++i) {
                if (attribute_name(static_cast<Attribute>(i)) == name) {
                    region.provenance.dominant_attribute = i;
                }
            }
        }
        regions.push_back(std::move(region));
    }
    return regions;
}

}  // namespace sgvad
