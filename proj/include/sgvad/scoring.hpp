#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgvad/exemplar.hpp"

namespace sgvad {

struct Provenance {
    enum class Kind { isolated, pair_member };

    Kind kind = Kind::isolated;
    int partner = -1;            // node index of the highest-scoring partner (pair_member only)
    int dominant_attribute = -1; // Attribute index that set the score, -1 if sentinel

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ScoredRegion {
    std::string video_id;
    std::int64_t frame_id = 0;
    BBox bbox;
    double score = 0.0;
    Provenance provenance;

    friend bool operator==(const ScoredRegion&, const ScoredRegion&) = default;
};

/// Distance to the nearest isolated-node exemplar; +inf when the set is empty.
double score_isolated(const Node& n, const ExemplarModel& model);

/// Distance to the nearest pair exemplar; +inf when the set is empty.
double score_pair(const NodePair& pair, const ExemplarModel& model);

/// One region per node: isolated nodes carry their isolated score, edge
/// members carry the maximum pair score over their incident edges. Sentinel
/// scores are clamped to the largest finite double for output.
std::vector<ScoredRegion> score_frame(const std::string& video_id, std::int64_t frame_id,
                                      const SceneGraph& graph, const ExemplarModel& model);

/// Regions with score strictly above `threshold`, order preserved.
std::vector<ScoredRegion> detect(std::span<const ScoredRegion> regions, double threshold = 0.5);

void write_scores(std::ostream& out, std::span<const ScoredRegion> regions);
std::vector<ScoredRegion> read_scores(std::istream& in);

}  // namespace sgvad
