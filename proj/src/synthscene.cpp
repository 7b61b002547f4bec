#include "sgvad/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace sgvad {

using nlohmann::json;

namespace {

constexpr int kPersonClass = 0;
constexpr double kEscortGap = 40.0;  // px between escort members

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stateless jitter in [-amplitude, amplitude]; immune to draw-order changes.
double hash_jitter(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                   double amplitude) {
    const std::uint64_t h = splitmix64(seed ^ splitmix64(a ^ splitmix64(b ^ splitmix64(c))));
    const double unit = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
    return (unit * 2.0 - 1.0) * amplitude;
}

// Relative stick-figure template, COCO keypoint order, in box fractions.
constexpr std::array<std::pair<double, double>, kPoseKeypoints> kPoseTemplate{{
    {0.50, 0.06},  // nose
    {0.46, 0.04}, {0.54, 0.04},   // eyes
    {0.42, 0.06}, {0.58, 0.06},   // ears
    {0.35, 0.20}, {0.65, 0.20},   // shoulders
    {0.30, 0.38}, {0.70, 0.38},   // elbows
    {0.28, 0.54}, {0.72, 0.54},   // wrists
    {0.40, 0.52}, {0.60, 0.52},   // hips
    {0.38, 0.74}, {0.62, 0.74},   // knees
    {0.40, 0.95}, {0.60, 0.95},   // ankles
}};

struct ObjectTrack {
    std::int64_t track_id = 0;
    int class_id = 0;
    // center per frame id; absent entries mean the object is not in the scene
    std::map<std::int64_t, Vec2> centers;
};

struct MotionPlan {
    std::int64_t spawn = 0;
    Vec2 start;
    double vx = 0.0;  // nominal x velocity, px per frame
    // [a, b) windows with zero velocity
    std::vector<std::pair<std::int64_t, std::int64_t>> halts;
    // [a, b) windows with reversed velocity
    std::vector<std::pair<std::int64_t, std::int64_t>> reversals;
    std::int64_t force_end = -1;  // presence ends at this frame when >= 0
};

bool inside(const ScenarioSpec& spec, const Vec2& center, const Vec2& size) {
    return center.x - size.x / 2.0 >= 0.0 && center.x + size.x / 2.0 <= spec.frame_width &&
           center.y - size.y / 2.0 >= 0.0 && center.y + size.y / 2.0 <= spec.frame_height;
}

ObjectTrack integrate(const ScenarioSpec& spec, std::int64_t track_id, int class_id,
                      const MotionPlan& plan) {
    ObjectTrack track{track_id, class_id, {}};
    const Vec2 size = builtin_class_size(class_id);
    Vec2 center = plan.start;
    for (std::int64_t t = plan.spawn; t < spec.frame_count; ++t) {
        if (plan.force_end >= 0 && t >= plan.force_end) break;
        if (t > plan.spawn) {
            double vx = plan.vx;
            for (const auto& [a, b] : plan.halts) {
                if (t - 1 >= a && t - 1 < b) vx = 0.0;
            }
            for (const auto& [a, b] : plan.reversals) {
                if (t - 1 >= a && t - 1 < b) vx = -vx;
            }
            center.x += vx;
        }
        if (!inside(spec, center, size)) break;
        track.centers[t] = center;
    }
    return track;
}

// Stick figure with a 16-step gait cycle: the limbs breathe radially around
// the head so pose distances vary across phases but match at equal phase.
// The phase counts steps since the track began, which ties it to path
// position for constant-speed actors.
std::vector<Vec2> synth_pose(const ScenarioSpec& spec, std::int64_t track_id, std::int64_t step,
                             const Vec2& center, const Vec2& size) {
    constexpr int kGaitPeriod = 16;
    const int phase = static_cast<int>(step % kGaitPeriod);
    const double stretch = 1.0 + 0.12 * std::sin(2.0 * std::numbers::pi * phase / kGaitPeriod);

    std::vector<Vec2> pose;
    pose.reserve(kPoseKeypoints);
    const double left = center.x - size.x / 2.0;
    const double top = center.y - size.y / 2.0;
    const Vec2 anchor{left + kPoseTemplate[0].first * size.x,
                      top + kPoseTemplate[0].second * size.y};
    for (int k = 0; k < kPoseKeypoints; ++k) {
        const auto& [fx, fy] = kPoseTemplate[k];
        const double rel_x = (fx - kPoseTemplate[0].first) * size.x;
        const double rel_y = (fy - kPoseTemplate[0].second) * size.y;
        pose.push_back({anchor.x + stretch * rel_x +
                            hash_jitter(spec.seed, track_id, step, k * 2 + 0, 0.1),
                        anchor.y + stretch * rel_y +
                            hash_jitter(spec.seed, track_id, step, k * 2 + 1, 0.1)});
    }
    return pose;
}

struct ExpandedActor {
    MotionPlan primary;
    int primary_class = 0;
    bool has_companion = false;
    MotionPlan companion;
    int companion_class = 0;
};

ExpandedActor expand_actor(const ScenarioSpec& spec, const ActorSpec& actor, int index) {
    ExpandedActor out;
    const int direction = actor.direction.value_or(
        (splitmix64(spec.seed ^ (index * 2 + 1)) & 1) ? -1 : 1);
    const double lane = actor.lane.value_or(
        spec.frame_height * (0.2 + 0.6 * (static_cast<double>(
                                              splitmix64(spec.seed ^ (index * 2)) % 1000) /
                                          1000.0)));

    switch (actor.path) {
        case PathType::straight_cross: {
            const Vec2 size = builtin_class_size(actor.class_id);
            out.primary_class = actor.class_id;
            out.primary.spawn = actor.spawn_frame;
            out.primary.vx = direction * actor.speed;
            out.primary.start = {direction > 0 ? size.x / 2.0 : spec.frame_width - size.x / 2.0,
                                 lane};
            break;
        }
        case PathType::paired_escort: {
            // Companion trails the person by the escort gap; spawn far enough
            // in from the edge that both boxes start inside the frame.
            const Vec2 person_size = builtin_class_size(kPersonClass);
            const Vec2 companion_size = builtin_class_size(actor.class_id);
            const double margin =
                std::max(person_size.x / 2.0, kEscortGap + companion_size.x / 2.0);
            out.primary_class = kPersonClass;
            out.primary.spawn = actor.spawn_frame;
            out.primary.vx = direction * actor.speed;
            out.primary.start = {direction > 0 ? margin : spec.frame_width - margin, lane};
            out.has_companion = true;
            out.companion_class = actor.class_id;
            out.companion = out.primary;
            out.companion.start.x -= direction * kEscortGap;
            break;
        }
        case PathType::parked: {
            const Vec2 size = builtin_class_size(actor.class_id);
            out.primary_class = actor.class_id;
            out.primary.spawn = actor.spawn_frame;
            out.primary.vx = 0.0;
            const double frac = static_cast<double>(splitmix64(spec.seed ^ (index * 7 + 3)) % 1000) / 1000.0;
            out.primary.start = {size.x / 2.0 + frac * (spec.frame_width - size.x), lane};
            break;
        }
    }
    return out;
}

}  // namespace

Vec2 builtin_class_size(int class_id) {
    switch (class_id) {
        case 0: return {40.0, 100.0};   // person
        case 1: return {80.0, 60.0};    // bicycle
        case 2: return {180.0, 90.0};   // car
        case 3: return {60.0, 20.0};    // skateboard
        case 4: return {30.0, 30.0};    // backpack
        case 5: return {50.0, 40.0};    // dog
        default: return {60.0, 60.0};
    }
}

ClassMap builtin_class_map() {
    return {{0, "person"}, {1, "bicycle"}, {2, "car"},
            {3, "skateboard"}, {4, "backpack"}, {5, "dog"}};
}

std::string path_type_name(PathType t) {
    switch (t) {
        case PathType::straight_cross: return "straight-cross";
        case PathType::paired_escort: return "paired-escort";
        case PathType::parked: return "parked";
    }
    return "unknown";
}

std::string anomaly_type_name(AnomalyType t) {
    switch (t) {
        case AnomalyType::left_behind_object: return "left-behind-object";
        case AnomalyType::stationary_pair: return "stationary-pair";
        case AnomalyType::lone_companion: return "lone-companion";
        case AnomalyType::trajectory_deviation: return "trajectory-deviation";
    }
    return "unknown";
}

namespace {

PathType path_type_from_name(const std::string& name) {
    for (PathType t : {PathType::straight_cross, PathType::paired_escort, PathType::parked}) {
        if (path_type_name(t) == name) return t;
    }
    throw std::runtime_error("scenario: unknown path type '" + name + "'");
}

AnomalyType anomaly_type_from_name(const std::string& name) {
    for (AnomalyType t : {AnomalyType::left_behind_object, AnomalyType::stationary_pair,
                          AnomalyType::lone_companion, AnomalyType::trajectory_deviation}) {
        if (anomaly_type_name(t) == name) return t;
    }
    throw std::runtime_error("scenario: unknown anomaly type '" + name + "'");
}

void validate(const ScenarioSpec& spec) {
    if (spec.frame_count <= 0) throw std::runtime_error("scenario: frame_count must be positive");
    if (spec.frame_width <= 0 || spec.frame_height <= 0) {
        throw std::runtime_error("scenario: frame size must be positive");
    }
    for (std::size_t i = 0; i < spec.actors.size(); ++i) {
        const ActorSpec& a = spec.actors[i];
        if (a.speed < 0) throw std::runtime_error("scenario: actor speed must be non-negative");
        if (a.spawn_frame < 0 || a.spawn_frame >= spec.frame_count) {
            throw std::runtime_error("scenario: actor spawn_frame out of range");
        }
    }
    for (const AnomalySpec& event : spec.anomalies) {
        if (event.actors.empty()) throw std::runtime_error("scenario: anomaly lists no actors");
        for (int idx : event.actors) {
            if (idx < 0 || idx >= static_cast<int>(spec.actors.size())) {
                throw std::runtime_error("scenario: anomaly references actor " +
                                         std::to_string(idx) + " which does not exist");
            }
            const PathType path = spec.actors[idx].path;
            const bool needs_escort = event.type != AnomalyType::trajectory_deviation;
            if (needs_escort && path != PathType::paired_escort) {
                throw std::runtime_error("scenario: " + anomaly_type_name(event.type) +
                                         " requires a paired-escort actor");
            }
            if (!needs_escort && path != PathType::straight_cross) {
                throw std::runtime_error("scenario: trajectory-deviation requires a straight-cross actor");
            }
        }
        if (event.onset < 0 || event.onset >= spec.frame_count || event.duration <= 0) {
            throw std::runtime_error("scenario: anomaly onset/duration out of range");
        }
    }
}

}  // namespace

GeneratedScene generate(const ScenarioSpec& spec) {
    validate(spec);

    std::vector<ExpandedActor> expanded;
    expanded.reserve(spec.actors.size());
    for (std::size_t i = 0; i < spec.actors.size(); ++i) {
        expanded.push_back(expand_actor(spec, spec.actors[i], static_cast<int>(i)));
        for (std::size_t j = 0; j < i; ++j) {
            const MotionPlan& a = expanded[i].primary;
            const MotionPlan& b = expanded[j].primary;
            if (expanded[i].primary_class == expanded[j].primary_class && a.spawn == b.spawn &&
                a.start == b.start && a.vx == b.vx) {
                throw std::runtime_error("scenario: actors " + std::to_string(j) + " and " +
                                         std::to_string(i) + " overlap identically");
            }
        }
    }

    // Anomalies edit the motion plans; annotated object lists are collected
    // after integration so ground truth follows the actual boxes.
    struct EventObjects {
        std::vector<std::size_t> actor_objects;  // indices into the flat track list
        std::int64_t begin = 0;
        std::int64_t end = 0;
        int klass = 0;
    };
    std::vector<EventObjects> events;

    const auto primary_slot = [](int actor) { return static_cast<std::size_t>(actor) * 2; };
    const auto companion_slot = [](int actor) { return static_cast<std::size_t>(actor) * 2 + 1; };

    for (const AnomalySpec& event : spec.anomalies) {
        const std::int64_t end = std::min(event.onset + event.duration, spec.frame_count);
        EventObjects objects;
        objects.begin = event.onset;
        objects.end = end;
        for (int idx : event.actors) {
            ExpandedActor& actor = expanded[static_cast<std::size_t>(idx)];
            switch (event.type) {
                case AnomalyType::left_behind_object:
                    actor.companion.halts.push_back({event.onset, spec.frame_count});
                    actor.companion.force_end = end;
                    objects.actor_objects.push_back(companion_slot(idx));
                    break;
                case AnomalyType::stationary_pair:
                    actor.primary.halts.push_back({event.onset, end});
                    actor.companion.halts.push_back({event.onset, end});
                    objects.actor_objects.push_back(primary_slot(idx));
                    objects.actor_objects.push_back(companion_slot(idx));
                    break;
                case AnomalyType::lone_companion:
                    actor.primary.force_end = event.onset;
                    actor.companion.force_end = end;
                    objects.actor_objects.push_back(companion_slot(idx));
                    break;
                case AnomalyType::trajectory_deviation:
                    actor.primary.reversals.push_back({event.onset, end});
                    objects.actor_objects.push_back(primary_slot(idx));
                    break;
            }
        }
        events.push_back(std::move(objects));
    }

    std::vector<ObjectTrack> tracks(spec.actors.size() * 2);
    for (std::size_t i = 0; i < expanded.size(); ++i) {
        const std::int64_t base = static_cast<std::int64_t>(i) * 10;
        tracks[i * 2] = integrate(spec, base + 1, expanded[i].primary_class, expanded[i].primary);
        if (expanded[i].has_companion) {
            tracks[i * 2 + 1] =
                integrate(spec, base + 2, expanded[i].companion_class, expanded[i].companion);
        }
    }

    GeneratedScene scene;
    scene.frames.reserve(static_cast<std::size_t>(spec.frame_count));
    for (std::int64_t t = 0; t < spec.frame_count; ++t) {
        FrameRecord record;
        record.video_id = spec.video_id;
        record.frame_id = t;
        for (const ObjectTrack& track : tracks) {
            const auto it = track.centers.find(t);
            if (it == track.centers.end()) continue;
            const Vec2 size = builtin_class_size(track.class_id);
            RawObject obj;
            obj.track_id = track.track_id;
            obj.class_id = track.class_id;
            obj.bbox = {it->second.x - size.x / 2.0, it->second.y - size.y / 2.0,
                        it->second.x + size.x / 2.0, it->second.y + size.y / 2.0};
            if (track.class_id == kPersonClass) {
                const std::int64_t step = t - track.centers.begin()->first;
                obj.pose = synth_pose(spec, track.track_id, step, it->second, size);
            }
            record.objects.push_back(std::move(obj));
        }
        scene.frames.push_back(std::move(record));
    }

    if (!spec.anomalies.empty()) {
        AnnotationFile annotations;
        annotations.total_frame = spec.frame_count;
        const ClassMap names = builtin_class_map();
        for (std::size_t e = 0; e < events.size(); ++e) {
            const std::int64_t gt_track_id = 9000 + static_cast<std::int64_t>(e);
            for (std::size_t slot : events[e].actor_objects) {
                const ObjectTrack& track = tracks[slot];
                const Vec2 size = builtin_class_size(track.class_id);
                const auto name_it = names.find(track.class_id);
                const std::string type_name =
                    name_it != names.end() ? name_it->second : "object";
                for (std::int64_t t = events[e].begin; t < events[e].end; ++t) {
                    const auto it = track.centers.find(t);
                    if (it == track.centers.end()) continue;
                    annotations.annotations.push_back(
                        {gt_track_id, t,
                         {it->second.x - size.x / 2.0, it->second.y - size.y / 2.0,
                          it->second.x + size.x / 2.0, it->second.y + size.y / 2.0},
                         type_name});
                }
            }
        }
        scene.annotations = std::move(annotations);
    }
    return scene;
}

ScenarioSpec parse_scenario(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: malformed document: ") + e.what());
    }
    ScenarioSpec spec;
    spec.seed = j.value("seed", 0ULL);
    spec.frame_count = j.at("frame_count").get<std::int64_t>();
    if (j.contains("frame_size")) {
        spec.frame_width = j.at("frame_size").at(0).get<double>();
        spec.frame_height = j.at("frame_size").at(1).get<double>();
    }
    spec.video_id = j.value("video_id", std::string("synth"));
    for (const json& actor : j.at("actors")) {
        ActorSpec a;
        a.class_id = actor.at("class_id").get<int>();
        a.path = path_type_from_name(actor.at("path").get<std::string>());
        a.speed = actor.at("speed").get<double>();
        a.spawn_frame = actor.value("spawn_frame", 0LL);
        if (actor.contains("lane")) a.lane = actor.at("lane").get<double>();
        if (actor.contains("direction")) a.direction = actor.at("direction").get<int>();
        spec.actors.push_back(a);
    }
    if (j.contains("anomalies")) {
        for (const json& event : j.at("anomalies")) {
            AnomalySpec a;
            a.type = anomaly_type_from_name(event.at("type").get<std::string>());
            a.actors = event.at("actors").get<std::vector<int>>();
            a.onset = event.at("onset").get<std::int64_t>();
            a.duration = event.at("duration").get<std::int64_t>();
            spec.anomalies.push_back(std::move(a));
        }
    }
    return spec;
}

void write_scenario(std::ostream& out, const ScenarioSpec& spec) {
    json actors = json::array();
    for (const ActorSpec& a : spec.actors) {
        json actor{{"class_id", a.class_id},
                   {"path", path_type_name(a.path)},
                   {"speed", a.speed},
                   {"spawn_frame", a.spawn_frame}};
        if (a.lane) actor["lane"] = *a.lane;
        if (a.direction) actor["direction"] = *a.direction;
        actors.push_back(std::move(actor));
    }
    json anomalies = json::array();
    for (const AnomalySpec& a : spec.anomalies) {
        anomalies.push_back(json{{"type", anomaly_type_name(a.type)},
                                 {"actors", a.actors},
                                 {"onset", a.onset},
                                 {"duration", a.duration}});
    }
    json j{{"seed", spec.seed},
           {"frame_count", spec.frame_count},
           {"frame_size", json::array({spec.frame_width, spec.frame_height})},
           {"video_id", spec.video_id},
           {"actors", std::move(actors)},
           {"anomalies", std::move(anomalies)}};
    out << j.dump(2) << '\n';
}

}  // namespace sgvad
