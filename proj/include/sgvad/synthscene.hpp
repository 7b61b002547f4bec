#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgvad/ingest.hpp"

namespace sgvad {

enum class PathType { straight_cross, paired_escort, parked };
enum class AnomalyType { left_behind_object, stationary_pair, lone_companion, trajectory_deviation };

std::string path_type_name(PathType t);
std::string anomaly_type_name(AnomalyType t);

struct ActorSpec {
    int class_id = 0;
    PathType path = PathType::straight_cross;
    double speed = 0.0;  // px per frame along the walking direction
    std::int64_t spawn_frame = 0;
    std::optional<double> lane;  // y of the box center; derived from the seed when absent
    std::optional<int> direction;  // +1 left-to-right, -1 right-to-left
};

struct AnomalySpec {
    AnomalyType type = AnomalyType::left_behind_object;
    std::vector<int> actors;  // indices into ScenarioSpec::actors
    std::int64_t onset = 0;
    std::int64_t duration = 0;
};

/// Deterministic scenario: the same spec always expands to identical stream
/// bytes, and stripping `anomalies` leaves every nominal actor untouched.
struct ScenarioSpec {
    std::uint64_t seed = 0;
    std::int64_t frame_count = 0;
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    std::string video_id = "synth";
    std::vector<ActorSpec> actors;
    std::vector<AnomalySpec> anomalies;
};

ScenarioSpec parse_scenario(std::istream& in);
void write_scenario(std::ostream& out, const ScenarioSpec& spec);

struct GeneratedScene {
    std::vector<FrameRecord> frames;
    std::optional<AnnotationFile> annotations;  // present iff the scenario injects anomalies
};

GeneratedScene generate(const ScenarioSpec& spec);

/// Box sizes the generator assigns per class id (person, bicycle, car, ...).
Vec2 builtin_class_size(int class_id);
ClassMap builtin_class_map();

}  // namespace sgvad
