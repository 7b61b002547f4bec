#include "sgvad/exemplar.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace sgvad {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;
constexpr const char* kModelFormat = "sgvad-model";

// Stable content hash for the model payload; std::hash is not portable.
std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json node_to_json(const Node& n) {
    json j{{"b", vec2_to_json(n.box_size)},
           {"c", n.class_id},
           {"l", vec2_to_json(n.center)},
           {"theta", json::array()}};
    for (const Vec2& p : n.trajectory) j["theta"].push_back(vec2_to_json(p));
    if (n.pose) {
        json pose = json::array();
        for (const Vec2& p : *n.pose) pose.push_back(vec2_to_json(p));
        j["pose"] = std::move(pose);
    } else {
        j["pose"] = nullptr;
    }
    return j;
}

Node node_from_json(const json& j) {
    Node n;
    n.box_size = vec2_from_json(j.at("b"));
    n.class_id = j.at("c").get<int>();
    n.center = vec2_from_json(j.at("l"));
    for (const json& p : j.at("theta")) n.trajectory.push_back(vec2_from_json(p));
    if (j.contains("pose") && !j.at("pose").is_null()) {
        std::vector<Vec2> pose;
        for (const json& p : j.at("pose")) pose.push_back(vec2_from_json(p));
        n.pose = std::move(pose);
    }
    return n;
}

json constants_to_json(const NormalizationConstants& k) {
    json j = json::array();
    for (const auto& [mean, stddev] : k.per_attribute) {
        j.push_back(json{{"mean", mean}, {"stddev", stddev}});
    }
    return j;
}

NormalizationConstants constants_from_json(const json& j) {
    if (!j.is_array() || j.size() != kAttributeCount) {
        throw std::runtime_error("model load: constants must list 5 attribute entries");
    }
    NormalizationConstants k;
    for (int i = 0; i < kAttributeCount; ++i) {
        k.per_attribute[i] = {j[i].at("mean").get<double>(), j[i].at("stddev").get<double>()};
    }
    return k;
}

}  // namespace

std::vector<std::pair<Node, Node>> sample_cooccurring_pairs(
    std::span<const std::vector<FrameGraph>> videos, std::size_t limit, std::uint64_t seed) {
    if (limit == 0) throw std::invalid_argument("sample_cooccurring_pairs: limit must be positive");
    std::vector<std::pair<Node, Node>> reservoir;
    reservoir.reserve(limit);
    std::mt19937_64 rng(seed);
    std::size_t seen = 0;
    for (const auto& video : videos) {
        for (const FrameGraph& frame : video) {
            const auto& nodes = frame.graph.nodes;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                    ++seen;
                    if (reservoir.size() < limit) {
                        reservoir.emplace_back(nodes[i], nodes[j]);
                    } else {
                        std::uniform_int_distribution<std::size_t> pick(0, seen - 1);
                        const std::size_t slot = pick(rng);
                        if (slot < limit) reservoir[slot] = {nodes[i], nodes[j]};
                    }
                }
            }
        }
    }
    return reservoir;
}

VideoExemplars build_video_model(std::span<const FrameGraph> graphs, double threshold,
                                 const NormalizationConstants& constants) {
    std::vector<Node> isolated;
    std::vector<NodePair> pairs;
    for (const FrameGraph& frame : graphs) {
        for (int idx : frame.graph.isolated) isolated.push_back(frame.graph.nodes[idx]);
        for (const auto& [i, j] : frame.graph.edges) {
            pairs.emplace_back(frame.graph.nodes[i], frame.graph.nodes[j]);
        }
    }
    const auto node_dist = [&constants](const Node& a, const Node& b) {
        return node_distance(a, b, constants);
    };
    const auto pair_dist = [&constants](const NodePair& a, const NodePair& b) {
        return pair_distance(a, b, constants);
    };
    return {select_exemplars(std::span<const Node>(isolated), threshold, node_dist),
            select_exemplars(std::span<const NodePair>(pairs), threshold, pair_dist)};
}

ExemplarModel build_model(std::span<const std::vector<FrameRecord>> videos,
                          const ModelParams& params, ClassMap class_map) {
    if (videos.empty()) throw std::invalid_argument("build_model: need at least one video");

    std::vector<std::vector<FrameGraph>> per_video;
    per_video.reserve(videos.size());
    for (const auto& records : videos) {
        per_video.push_back(
            graphs_from_records(records, params.edge_threshold, params.trajectory_length));
    }
    // Merge order is ascending video id so repeated builds are reproducible.
    std::sort(per_video.begin(), per_video.end(),
              [](const std::vector<FrameGraph>& a, const std::vector<FrameGraph>& b) {
                  const std::string& ida = a.empty() ? std::string() : a.front().video_id;
                  const std::string& idb = b.empty() ? std::string() : b.front().video_id;
                  return ida < idb;
              });

    const auto sample = sample_cooccurring_pairs(per_video, params.normalization_sample_limit,
                                                 params.normalization_seed);
    if (sample.empty()) {
        throw std::runtime_error(
            "build_model: no co-occurring node pairs in the training videos; cannot estimate "
            "normalization constants");
    }

    ExemplarModel model;
    model.constants = estimate_normalization(sample);
    model.exemplar_threshold = params.exemplar_threshold;
    model.edge_threshold = params.edge_threshold;
    model.trajectory_length = params.trajectory_length;
    model.class_map = std::move(class_map);

    std::vector<std::vector<Node>> iso_sets;
    std::vector<std::vector<NodePair>> pair_sets;
    for (const auto& graphs : per_video) {
        VideoExemplars video = build_video_model(graphs, params.exemplar_threshold, model.constants);
        iso_sets.push_back(std::move(video.isolated));
        pair_sets.push_back(std::move(video.pairs));
    }

    const auto node_dist = [&model](const Node& a, const Node& b) {
        return node_distance(a, b, model.constants);
    };
    const auto pair_dist = [&model](const NodePair& a, const NodePair& b) {
        return pair_distance(a, b, model.constants);
    };
    model.isolated_exemplars =
        merge_exemplar_sets(std::span<const std::vector<Node>>(iso_sets), params.exemplar_threshold, node_dist);
    model.pair_exemplars = merge_exemplar_sets(std::span<const std::vector<NodePair>>(pair_sets),
                                               params.exemplar_threshold, pair_dist);
    return model;
}

void save_model(const ExemplarModel& model, std::ostream& out) {
    json payload;
    payload["th"] = model.exemplar_threshold;
    payload["h"] = model.edge_threshold;
    payload["T"] = model.trajectory_length;
    payload["constants"] = constants_to_json(model.constants);
    json class_map = json::object();
    for (const auto& [id, name] : model.class_map) class_map[std::to_string(id)] = name;
    payload["class_map"] = std::move(class_map);
    payload["iso"] = json::array();
    for (const Node& n : model.isolated_exemplars) payload["iso"].push_back(node_to_json(n));
    payload["pair"] = json::array();
    for (const NodePair& p : model.pair_exemplars) {
        payload["pair"].push_back(json::array({node_to_json(p.first), node_to_json(p.second)}));
    }

    json document;
    document["format"] = kModelFormat;
    document["version"] = kModelVersion;
    document["checksum"] = fnv1a64(payload.dump());
    document["payload"] = std::move(payload);
    out << document.dump(2) << '\n';
}

ExemplarModel load_model(std::istream& in) {
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("model load: corrupted document: ") + e.what());
    }
    if (!document.contains("format") || document.at("format") != kModelFormat) {
        throw std::runtime_error("model load: not a model file");
    }
    if (!document.contains("version") || document.at("version").get<int>() != kModelVersion) {
        throw std::runtime_error("model load: unsupported version");
    }
    if (!document.contains("checksum") || !document.contains("payload")) {
        throw std::runtime_error("model load: missing checksum or payload");
    }
    const json& payload = document.at("payload");
    if (document.at("checksum").get<std::uint64_t>() != fnv1a64(payload.dump())) {
        throw std::runtime_error("model load: checksum mismatch, payload corrupted");
    }

    ExemplarModel model;
    model.exemplar_threshold = payload.at("th").get<double>();
    model.edge_threshold = payload.at("h").get<double>();
    model.trajectory_length = payload.at("T").get<int>();
    model.constants = constants_from_json(payload.at("constants"));
    for (const auto& [key, name] : payload.at("class_map").items()) {
        model.class_map[std::stoi(key)] = name.get<std::string>();
    }
    for (const json& n : payload.at("iso")) model.isolated_exemplars.push_back(node_from_json(n));
    for (const json& p : payload.at("pair")) {
        model.pair_exemplars.emplace_back(node_from_json(p.at(0)), node_from_json(p.at(1)));
    }
    return model;
}

}  // namespace sgvad
