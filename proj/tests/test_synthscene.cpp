#include <doctest.h>

#include <sstream>

#include "sgvad/scenegraph.hpp"
#include "sgvad/synthscene.hpp"

using namespace sgvad;

namespace {

std::string stream_bytes(const GeneratedScene& scene) {
    std::ostringstream out;
    write_track_stream(out, scene.frames);
    return out.str();
}

ScenarioSpec walker_spec() {
    ScenarioSpec spec;
    spec.seed = 7;
    spec.frame_count = 100;
    spec.video_id = "walker";
    spec.actors.push_back({0, PathType::straight_cross, 2.0, 0, 500.0, 1});
    return spec;
}

ScenarioSpec escort_spec() {
    ScenarioSpec spec;
    spec.seed = 11;
    spec.frame_count = 100;
    spec.video_id = "escort";
    spec.actors.push_back({1, PathType::paired_escort, 2.0, 0, 500.0, 1});
    return spec;
}

}  // namespace

TEST_SUITE("synthscene") {

TEST_CASE("byte determinism under a fixed seed") {
    ScenarioSpec spec = escort_spec();
    spec.anomalies.push_back({AnomalyType::stationary_pair, {0}, 40, 20});
    const std::string first = stream_bytes(generate(spec));
    const std::string second = stream_bytes(generate(spec));
    CHECK(first == second);
    CHECK(!first.empty());
}

TEST_CASE("different seeds change the pose jitter") {
    ScenarioSpec spec = walker_spec();
    const std::string base = stream_bytes(generate(spec));
    spec.seed = 8;
    CHECK(stream_bytes(generate(spec)) != base);
}

TEST_CASE("single walker crosses linearly for 100 frames") {
    const GeneratedScene scene = generate(walker_spec());
    REQUIRE(scene.frames.size() == 100);
    CHECK_FALSE(scene.annotations.has_value());
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
        REQUIRE(scene.frames[t].objects.size() == 1);
        const RawObject& obj = scene.frames[t].objects[0];
        CHECK(obj.class_id == 0);
        CHECK(obj.bbox.center().x == doctest::Approx(20.0 + 2.0 * t).epsilon(1e-9));
        CHECK(obj.bbox.center().y == doctest::Approx(500.0));
        REQUIRE(obj.pose.has_value());
        CHECK(obj.pose->size() == kPoseKeypoints);
    }
}

TEST_CASE("paired escort forms exactly one edge per frame at h=250") {
    const GeneratedScene scene = generate(escort_spec());
    const auto graphs = graphs_from_records(scene.frames, 250.0, 30);
    REQUIRE(graphs.size() == 100);
    for (const FrameGraph& frame : graphs) {
        REQUIRE(frame.graph.nodes.size() == 2);
        CHECK(frame.graph.edges.size() == 1);
        CHECK(frame.graph.isolated.empty());
    }
    // members stay the escort gap apart
    const auto& objects = scene.frames[10].objects;
    CHECK(std::abs(objects[0].bbox.center().x - objects[1].bbox.center().x) ==
          doctest::Approx(40.0));
}

TEST_CASE("left-behind object is annotated from its onset onward") {
    ScenarioSpec spec = escort_spec();
    spec.actors[0].class_id = 4;  // backpack companion
    spec.anomalies.push_back({AnomalyType::left_behind_object, {0}, 50, 30});
    const GeneratedScene scene = generate(spec);
    REQUIRE(scene.annotations.has_value());
    const AnnotationFile& ann = *scene.annotations;
    CHECK(ann.total_frame == 100);
    REQUIRE(!ann.annotations.empty());
    std::int64_t first_frame = ann.annotations.front().frame_id;
    std::int64_t last_frame = ann.annotations.back().frame_id;
    for (const GroundTruthAnnotation& a : ann.annotations) {
        CHECK(a.frame_id >= 50);
        CHECK(a.frame_id < 80);
        CHECK(a.object_type == "backpack");
        first_frame = std::min(first_frame, a.frame_id);
        last_frame = std::max(last_frame, a.frame_id);
    }
    CHECK(first_frame == 50);
    CHECK(last_frame == 79);

    // the companion freezes at its drop position and vanishes at window end
    const auto find_companion = [&scene](std::int64_t frame) -> const RawObject* {
        for (const RawObject& obj : scene.frames[static_cast<std::size_t>(frame)].objects) {
            if (obj.class_id == 4) return &obj;
        }
        return nullptr;
    };
    REQUIRE(find_companion(49) != nullptr);
    REQUIRE(find_companion(50) != nullptr);
    REQUIRE(find_companion(60) != nullptr);
    CHECK(find_companion(50)->bbox == find_companion(60)->bbox);
    CHECK(find_companion(80) == nullptr);
}

TEST_CASE("stationary pair halts both members then resumes") {
    ScenarioSpec spec = escort_spec();
    spec.anomalies.push_back({AnomalyType::stationary_pair, {0}, 40, 20});
    const GeneratedScene scene = generate(spec);
    const auto center_x = [&scene](std::int64_t frame, std::size_t obj) {
        return scene.frames[static_cast<std::size_t>(frame)].objects.at(obj).bbox.center().x;
    };
    CHECK(center_x(41, 0) == center_x(40, 0));
    CHECK(center_x(59, 0) == center_x(40, 0));
    CHECK(center_x(61, 0) > center_x(59, 0));
    REQUIRE(scene.annotations.has_value());
    // both members annotated for the window under one event track id
    const auto tracks = scene.annotations->by_track();
    REQUIRE(tracks.size() == 1);
    CHECK(tracks.begin()->second.size() == 40);  // 2 boxes x 20 frames
}

TEST_CASE("lone companion removes the person and ends the companion at window end") {
    ScenarioSpec spec = escort_spec();
    spec.anomalies.push_back({AnomalyType::lone_companion, {0}, 40, 30});
    const GeneratedScene scene = generate(spec);
    for (std::int64_t t = 0; t < 100; ++t) {
        const auto& objects = scene.frames[static_cast<std::size_t>(t)].objects;
        std::size_t persons = 0, companions = 0;
        for (const RawObject& obj : objects) {
            (obj.class_id == 0 ? persons : companions) += 1;
        }
        if (t < 40) {
            CHECK(persons == 1);
            CHECK(companions == 1);
        } else if (t < 70) {
            CHECK(persons == 0);
            CHECK(companions == 1);
        } else {
            CHECK(persons == 0);
            CHECK(companions == 0);
        }
    }
}

TEST_CASE("trajectory deviation reverses the walker inside the window") {
    ScenarioSpec spec = walker_spec();
    spec.anomalies.push_back({AnomalyType::trajectory_deviation, {0}, 40, 20});
    const GeneratedScene scene = generate(spec);
    const auto x_at = [&scene](std::int64_t t) {
        return scene.frames[static_cast<std::size_t>(t)].objects.at(0).bbox.center().x;
    };
    CHECK(x_at(41) < x_at(40));
    CHECK(x_at(60) < x_at(40));
    CHECK(x_at(65) > x_at(60));
    REQUIRE(scene.annotations.has_value());
}

TEST_CASE("nominal and anomalous variants share every pre-onset byte") {
    ScenarioSpec anomalous = escort_spec();
    anomalous.actors.push_back({0, PathType::straight_cross, 3.0, 5, 800.0, 1});
    anomalous.actors.push_back({2, PathType::parked, 0.0, 0, 950.0, std::nullopt});
    anomalous.anomalies.push_back({AnomalyType::stationary_pair, {0}, 40, 20});

    ScenarioSpec nominal = anomalous;
    nominal.anomalies.clear();

    const GeneratedScene a = generate(anomalous);
    const GeneratedScene n = generate(nominal);
    REQUIRE(a.frames.size() == n.frames.size());
    for (std::int64_t t = 0; t < 40; ++t) {
        CHECK(a.frames[static_cast<std::size_t>(t)] == n.frames[static_cast<std::size_t>(t)]);
    }
    // uninvolved actors stay identical through the whole video
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        for (const RawObject& obj : a.frames[t].objects) {
            if (obj.track_id < 10) continue;  // actor 0 is the injected one
            bool found = false;
            for (const RawObject& other : n.frames[t].objects) {
                if (other.track_id == obj.track_id) {
                    CHECK(other == obj);
                    found = true;
                }
            }
            CHECK(found);
        }
    }
}

TEST_CASE("identically overlapping actors are rejected") {
    ScenarioSpec spec = walker_spec();
    spec.actors.push_back(spec.actors[0]);
    CHECK_THROWS_WITH_AS(generate(spec), doctest::Contains("overlap identically"),
                         std::runtime_error);
}

TEST_CASE("anomaly validation rejects wrong path types and bad indices") {
    ScenarioSpec spec = walker_spec();
    spec.anomalies.push_back({AnomalyType::left_behind_object, {0}, 10, 10});
    CHECK_THROWS_AS(generate(spec), std::runtime_error);

    ScenarioSpec bad_index = walker_spec();
    bad_index.anomalies.push_back({AnomalyType::trajectory_deviation, {5}, 10, 10});
    CHECK_THROWS_AS(generate(bad_index), std::runtime_error);
}

TEST_CASE("scenario json round trip") {
    ScenarioSpec spec = escort_spec();
    spec.anomalies.push_back({AnomalyType::lone_companion, {0}, 30, 20});
    std::stringstream buffer;
    write_scenario(buffer, spec);
    const ScenarioSpec parsed = parse_scenario(buffer);
    CHECK(parsed.seed == spec.seed);
    CHECK(parsed.frame_count == spec.frame_count);
    CHECK(parsed.video_id == spec.video_id);
    REQUIRE(parsed.actors.size() == 1);
    CHECK(parsed.actors[0].class_id == 1);
    CHECK(parsed.actors[0].lane == spec.actors[0].lane);
    REQUIRE(parsed.anomalies.size() == 1);
    CHECK(parsed.anomalies[0].type == AnomalyType::lone_companion);
    CHECK(stream_bytes(generate(parsed)) == stream_bytes(generate(spec)));
}

TEST_CASE("builtin class map names the generator classes") {
    const ClassMap map = builtin_class_map();
    CHECK(map.at(0) == "person");
    CHECK(builtin_class_size(0) == Vec2{40, 100});
    CHECK(builtin_class_size(2).x > builtin_class_size(4).x);
}

}  // TEST_SUITE
