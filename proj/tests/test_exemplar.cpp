#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "random_nodes.hpp"
#include "sgvad/exemplar.hpp"

using namespace sgvad;
using testutil::random_node;
using testutil::unit_constants;

namespace {

const auto abs_dist = [](double a, double b) { return std::abs(a - b); };

std::vector<double> select_scalars(const std::vector<double>& s, double th) {
    return select_exemplars(std::span<const double>(s), th, abs_dist);
}

bool models_equal(const ExemplarModel& a, const ExemplarModel& b) {
    return a.isolated_exemplars == b.isolated_exemplars && a.pair_exemplars == b.pair_exemplars &&
           a.constants == b.constants && a.exemplar_threshold == b.exemplar_threshold &&
           a.edge_threshold == b.edge_threshold && a.trajectory_length == b.trajectory_length &&
           a.class_map == b.class_map;
}

ExemplarModel small_model(std::mt19937& rng, std::size_t iso, std::size_t pairs) {
    ExemplarModel model;
    for (std::size_t i = 0; i < iso; ++i) model.isolated_exemplars.push_back(random_node(rng));
    for (std::size_t i = 0; i < pairs; ++i) {
        model.pair_exemplars.emplace_back(random_node(rng), random_node(rng));
    }
    model.constants = unit_constants();
    model.constants[Attribute::location] = {12.5, 3.75};
    model.class_map = {{0, "person"}, {1, "bicycle"}};
    return model;
}

}  // namespace

TEST_SUITE("exemplar") {

TEST_CASE("duplicates collapse to one exemplar") {
    CHECK(select_scalars({1.0, 1.0, 1.0}, 0.5) == std::vector<double>{1.0});
}

TEST_CASE("all-distant sequence is kept unchanged") {
    const std::vector<double> s{0.0, 1.0, 2.5, 4.0};
    CHECK(select_scalars(s, 0.5) == s);
}

TEST_CASE("greedy trace on a scalar sequence") {
    CHECK(select_scalars({0.0, 0.3, 1.0, 1.2}, 0.5) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("empty input gives an empty exemplar set") {
    CHECK(select_scalars({}, 0.5).empty());
}

TEST_CASE("boundary: distance exactly th is redundant") {
    CHECK(select_scalars({0.0, 0.5}, 0.5) == std::vector<double>{0.0});
    CHECK(select_scalars({0.0, 0.5 + 1e-9}, 0.5) == std::vector<double>{0.0, 0.5 + 1e-9});
}

TEST_CASE("packing and covering on randomized scalar sequences") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    std::uniform_real_distribution<double> thresholds(0.1, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double th = thresholds(rng);
        std::vector<double> s;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) s.push_back(value(rng));

        const auto exemplars = select_scalars(s, th);
        REQUIRE(!exemplars.empty());
        CHECK(exemplars.size() <= s.size());

        // packing: pairwise distances exceed th
        for (std::size_t i = 0; i < exemplars.size(); ++i) {
            for (std::size_t j = i + 1; j < exemplars.size(); ++j) {
                CHECK(std::abs(exemplars[i] - exemplars[j]) > th);
            }
        }
        // covering: every input lies within th of some exemplar
        for (double x : s) {
            double nearest = 1e300;
            for (double e : exemplars) nearest = std::min(nearest, std::abs(x - e));
            CHECK(nearest <= th);
        }
        // determinism
        CHECK(select_scalars(s, th) == exemplars);
    }
}

TEST_CASE("exemplar count equals input size iff all pairwise distances exceed th") {
    std::mt19937 rng(22);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s;
        const int n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) s.push_back(value(rng));
        const double th = 0.4;
        bool all_far = true;
        for (std::size_t i = 0; i < s.size() && all_far; ++i) {
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                if (std::abs(s[i] - s[j]) <= th) {
                    all_far = false;
                    break;
                }
            }
        }
        CHECK((select_scalars(s, th).size() == s.size()) == all_far);
    }
}

TEST_CASE("merge: identical sets collapse to one copy") {
    const std::vector<std::vector<double>> sets{{0.0, 1.0}, {0.0, 1.0}};
    CHECK(merge_exemplar_sets(std::span<const std::vector<double>>(sets), 0.5, abs_dist) ==
          std::vector<double>{0.0, 1.0});
}

TEST_CASE("merge: mutually distant sets concatenate") {
    const std::vector<std::vector<double>> sets{{0.0, 1.0}, {2.0, 3.0}};
    CHECK(merge_exemplar_sets(std::span<const std::vector<double>>(sets), 0.5, abs_dist) ==
          std::vector<double>{0.0, 1.0, 2.0, 3.0});
}

TEST_CASE("merge: greedy trace over the union in set order") {
    const std::vector<std::vector<double>> sets{{0.0, 1.0}, {0.2, 1.1}};
    CHECK(merge_exemplar_sets(std::span<const std::vector<double>>(sets), 0.5, abs_dist) ==
          std::vector<double>{0.0, 1.0});
}

TEST_CASE("merge preserves packing and covering over the union") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double th = 0.7;
        std::vector<std::vector<double>> sets;
        std::vector<double> all;
        for (int v = 0; v < 3; ++v) {
            std::vector<double> s;
            for (int i = 0; i < 10; ++i) s.push_back(value(rng));
            auto exemplars = select_scalars(s, th);
            all.insert(all.end(), exemplars.begin(), exemplars.end());
            sets.push_back(std::move(exemplars));
        }
        const auto merged =
            merge_exemplar_sets(std::span<const std::vector<double>>(sets), th, abs_dist);
        for (std::size_t i = 0; i < merged.size(); ++i) {
            for (std::size_t j = i + 1; j < merged.size(); ++j) {
                CHECK(std::abs(merged[i] - merged[j]) > th);
            }
        }
        for (double x : all) {
            double nearest = 1e300;
            for (double e : merged) nearest = std::min(nearest, std::abs(x - e));
            CHECK(nearest <= th);
        }
    }
}

TEST_CASE("build_video_model: no edges means no pair exemplars") {
    std::mt19937 rng(24);
    std::vector<FrameGraph> graphs;
    for (int t = 0; t < 10; ++t) {
        SceneGraph g;
        g.nodes = {random_node(rng)};
        g.isolated = {0};
        graphs.push_back({"v", t, std::move(g)});
    }
    const VideoExemplars result = build_video_model(graphs, 0.65, unit_constants());
    CHECK(result.pairs.empty());
    CHECK(!result.isolated.empty());
}

TEST_CASE("build_video_model: repeated frame adds nothing new") {
    std::mt19937 rng(25);
    SceneGraph g;
    g.nodes = {random_node(rng), random_node(rng), random_node(rng)};
    g.edges = {{0, 1}};
    g.isolated = {2};

    std::vector<FrameGraph> once{{"v", 0, g}};
    std::vector<FrameGraph> repeated;
    for (int t = 0; t < 20; ++t) repeated.push_back({"v", t, g});

    const VideoExemplars single = build_video_model(once, 0.65, unit_constants());
    const VideoExemplars many = build_video_model(repeated, 0.65, unit_constants());
    CHECK(single.isolated.size() == many.isolated.size());
    CHECK(single.pairs.size() == many.pairs.size());
}

TEST_CASE("build_video_model: distant configurations accumulate") {
    // Two frames whose isolated nodes differ in class; under unit constants
    // the node distance is 1 > th, so both survive selection.
    std::mt19937 rng(26);
    Node a = random_node(rng);
    Node b = a;
    b.class_id = a.class_id + 1;
    SceneGraph g1, g2;
    g1.nodes = {a};
    g1.isolated = {0};
    g2.nodes = {b};
    g2.isolated = {0};
    std::vector<FrameGraph> graphs{{"v", 0, std::move(g1)}, {"v", 1, std::move(g2)}};
    const VideoExemplars result = build_video_model(graphs, 0.65, unit_constants());
    CHECK(result.isolated.size() == 2);
}

TEST_CASE("model save/load round trip is field exact") {
    std::mt19937 rng(27);
    SUBCASE("empty model") {
        ExemplarModel model;
        model.constants = unit_constants();
        std::stringstream buffer;
        save_model(model, buffer);
        CHECK(models_equal(load_model(buffer), model));
    }
    SUBCASE("populated model") {
        const ExemplarModel model = small_model(rng, 100, 50);
        std::stringstream buffer;
        save_model(model, buffer);
        CHECK(models_equal(load_model(buffer), model));
    }
}

TEST_CASE("model files are byte stable across saves") {
    std::mt19937 rng(28);
    const ExemplarModel model = small_model(rng, 10, 5);
    std::ostringstream first, second;
    save_model(model, first);
    save_model(model, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("tampered payload fails the checksum") {
    std::mt19937 rng(29);
    const ExemplarModel model = small_model(rng, 3, 2);
    std::ostringstream out;
    save_model(model, out);
    std::string text = out.str();
    const auto at = text.find("\"th\": 0.65");
    REQUIRE(at != std::string::npos);
    text.replace(at, 10, "\"th\": 0.99");
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(load_model(in), doctest::Contains("checksum"), std::runtime_error);
}

TEST_CASE("wrong version is rejected") {
    std::mt19937 rng(30);
    const ExemplarModel model = small_model(rng, 1, 1);
    std::ostringstream out;
    save_model(model, out);
    std::string text = out.str();
    const auto at = text.find("\"version\": 1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 12, "\"version\": 9");
    std::istringstream in(text);
    CHECK_THROWS_WITH_AS(load_model(in), doctest::Contains("version"), std::runtime_error);
}

TEST_CASE("garbage input is a load error") {
    std::istringstream in("not json at all");
    CHECK_THROWS_AS(load_model(in), std::runtime_error);
}

}  // TEST_SUITE
