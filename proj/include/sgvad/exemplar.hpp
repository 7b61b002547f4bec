#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgvad/metricspace.hpp"

namespace sgvad {

struct ModelParams {
    double exemplar_threshold = 0.65;
    double edge_threshold = 250.0;
    int trajectory_length = kDefaultTrajectoryLength;
    std::size_t normalization_sample_limit = 100000;
    std::uint64_t normalization_seed = 17;
};

/// Greedy single pass in input order: keep the first element, then keep each
/// element whose distance to every kept exemplar exceeds `threshold`.
/// Deterministic given the input order.
template <typename T, typename Dist>
std::vector<T> select_exemplars(std::span<const T> sequence, double threshold, Dist&& dist) {
    std::vector<T> exemplars;
    for (const T& candidate : sequence) {
        bool redundant = false;
        for (const T& kept : exemplars) {
            if (dist(candidate, kept) <= threshold) {
                redundant = true;
                break;
            }
        }
        if (!redundant) exemplars.push_back(candidate);
    }
    return exemplars;
}

/// Union in input order followed by a second greedy pass.
template <typename T, typename Dist>
std::vector<T> merge_exemplar_sets(std::span<const std::vector<T>> sets, double threshold,
                                   Dist&& dist) {
    std::vector<T> pooled;
    for (const auto& set : sets) pooled.insert(pooled.end(), set.begin(), set.end());
    return select_exemplars(std::span<const T>(pooled), threshold, dist);
}

struct ExemplarModel {
    std::vector<Node> isolated_exemplars;
    std::vector<NodePair> pair_exemplars;
    NormalizationConstants constants;
    double exemplar_threshold = 0.65;
    double edge_threshold = 250.0;
    int trajectory_length = kDefaultTrajectoryLength;
    ClassMap class_map;
};

/// Uniform reservoir sample of node pairs co-occurring in a frame, walked in
/// video order. Deterministic for a fixed seed.
std::vector<std::pair<Node, Node>> sample_cooccurring_pairs(
    std::span<const std::vector<FrameGraph>> videos, std::size_t limit, std::uint64_t seed);

struct VideoExemplars {
    std::vector<Node> isolated;
    std::vector<NodePair> pairs;
};

/// Exemplar selection over one video's isolated nodes and edges, in frame order.
VideoExemplars build_video_model(std::span<const FrameGraph> graphs, double threshold,
                                 const NormalizationConstants& constants);

/// Whole pipeline over already-parsed streams, one per video: builds graphs,
/// estimates normalization constants, selects per-video exemplars, and merges
/// them in ascending video-id order.
ExemplarModel build_model(std::span<const std::vector<FrameRecord>> videos,
                          const ModelParams& params, ClassMap class_map = {});

void save_model(const ExemplarModel& model, std::ostream& out);
ExemplarModel load_model(std::istream& in);

}  // namespace sgvad
