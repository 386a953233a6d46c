#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mvqa/json_io.hpp"
#include "mvqa/rng.hpp"
#include "mvqa/scene_synth.hpp"

using namespace mvqa;
using namespace mvqa::scene;

namespace {

std::string fixture(const char* name) { return std::string(MVQA_FIXTURE_DIR) + "/" + name; }

assets::AssetLibrary demo_lib() { return assets::AssetLibrary::load(fixture("manifest_scene.json")); }

ThemeConfig theme_from_text(const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / "mvqa_theme.json";
    write_text_file(path.string(), text);
    return ThemeConfig::load(path.string());
}

}  // namespace

TEST_CASE("theme with zero object specs yields an empty scene") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "empty",
      "floor": {"extent": [10, 10], "material_tag": "floor.concrete"},
      "object_specs": []
    })");
    auto scene = sample_scene(theme, lib, 7, "empty-000");
    CHECK(scene.objects.empty());
    CHECK(validate_scene(scene, lib, theme).empty());
}

TEST_CASE("deterministic 2x2 grid lands on the analytic poses") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "grid",
      "floor": {"extent": [10, 10], "material_tag": "floor.concrete"},
      "object_specs": [
        {"category": "crate", "count": 4,
         "placement": {"kind": "deterministic",
                       "grid": {"rows": 2, "cols": 2, "origin": [-2, -2], "spacing": [4, 4], "yaw": 0.5}}}
      ]
    })");
    auto scene = sample_scene(theme, lib, 1, "grid-000");
    REQUIRE(scene.objects.size() == 4);
    // Row-major from origin: (-2,-2), (2,-2), (-2,2), (2,2).
    const double want[4][2] = {{-2, -2}, {2, -2}, {-2, 2}, {2, 2}};
    for (int i = 0; i < 4; ++i) {
        CHECK(scene.objects[i].pose.position.x() == doctest::Approx(want[i][0]));
        CHECK(scene.objects[i].pose.position.y() == doctest::Approx(want[i][1]));
        CHECK(scene.objects[i].pose.yaw == doctest::Approx(0.5));
    }
    CHECK(validate_scene(scene, lib, theme).empty());
}

TEST_CASE("identical seeds give byte-identical scenes, neighbouring seeds differ") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "stoch",
      "floor": {"extent": [12, 12], "material_tag": "floor.grass"},
      "object_specs": [
        {"category": "crate", "count": [2, 5], "placement": {"kind": "stochastic", "clearance": 0.1}},
        {"category": "person", "count": 2, "placement": {"kind": "stochastic", "clearance": 0.2}}
      ]
    })");
    auto a = sample_scene(theme, lib, 42, "stoch-000");
    auto b = sample_scene(theme, lib, 42, "stoch-000");
    CHECK(a.to_json() == b.to_json());

    int differing = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto s1 = sample_scene(theme, lib, s, "x");
        auto s2 = sample_scene(theme, lib, s + 1, "x");
        if (s1.to_json() != s2.to_json()) ++differing;
    }
    CHECK(differing >= 99);
}

TEST_CASE("sampled scenes always validate clean") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "mixed",
      "floor": {"extent": [14, 10], "material_tag": "floor.concrete"},
      "scale_range": [0.8, 1.2],
      "object_specs": [
        {"category": "table", "count": [1, 2], "placement": {"kind": "stochastic", "clearance": 0.3}},
        {"category": "person", "count": [1, 3], "placement": {"kind": "stochastic", "clearance": 0.2}},
        {"category": "chair", "count": [1, 3], "placement": {"kind": "stochastic", "clearance": 0.0},
         "anchor_relations": [{"label": null, "target_category": "table", "distance_range": [0.6, 2.0]}]},
        {"category": "crate", "count": [0, 2], "placement": {"kind": "stochastic", "clearance": 0.0},
         "anchor_relations": [{"label": "on", "target_category": "table", "distance_range": [0.0, 1.0]}]},
        {"category": "crate", "count": 1, "placement": {"kind": "stochastic", "clearance": 0.0},
         "anchor_relations": [{"label": "front", "target_category": "person", "distance_range": [0.8, 2.5]}]}
      ]
    })");
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto scene = sample_scene(theme, lib, seed, "mixed-" + std::to_string(seed));
        auto violations = validate_scene(scene, lib, theme);
        for (const auto& v : violations) MESSAGE("seed ", seed, ": ", v.subject, " - ", v.detail);
        CHECK(violations.empty());
    }
}

TEST_CASE("validator flags coincident boxes and broken anchors") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "bad",
      "floor": {"extent": [10, 10], "material_tag": "floor.concrete"},
      "object_specs": [
        {"category": "table", "count": 1, "placement": {"kind": "stochastic", "clearance": 0.0}},
        {"category": "chair", "count": 1, "placement": {"kind": "stochastic", "clearance": 0.0},
         "anchor_relations": [{"label": null, "target_category": "table", "distance_range": [0.3, 1.5]}]}
      ]
    })");

    SceneInstance scene;
    scene.scene_id = "bad-000";
    scene.theme_id = "bad";
    scene.floor.extent = geom::Vec2(10, 10);

    PlacedObject table;
    table.instance_id = "obj_0";
    table.asset_id = "table_1";
    table.pose.position = geom::Vec3(0, 0, 0);
    table.spec_index = 0;

    PlacedObject chair;
    chair.instance_id = "obj_1";
    chair.asset_id = "chair_1";
    chair.pose.position = geom::Vec3(0, 7, 0);  // 7 m away from its anchored table
    chair.spec_index = 1;
    chair.anchors.push_back({"", "obj_0"});

    PlacedObject dup1;
    dup1.instance_id = "obj_2";
    dup1.asset_id = "crate_1";
    dup1.pose.position = geom::Vec3(-3, -3, 0);
    PlacedObject dup2 = dup1;
    dup2.instance_id = "obj_3";  // coincident footprint with obj_2

    scene.objects = {table, chair, dup1, dup2};
    auto violations = validate_scene(scene, lib, theme);
    int anchor = 0, collision = 0;
    for (const auto& v : violations) {
        if (v.kind == SceneViolation::Kind::AnchorViolation) ++anchor;
        if (v.kind == SceneViolation::Kind::Collision) ++collision;
    }
    CHECK(anchor == 1);
    CHECK(collision == 1);
}

TEST_CASE("anchor_relation_satisfied basic directions") {
    auto lib = demo_lib();
    SceneInstance s;
    s.floor.extent = geom::Vec2(20, 20);
    PlacedObject a;
    a.instance_id = "a";
    a.asset_id = "person_1";  // has_front
    a.pose.position = geom::Vec3(0, 0, 0);
    PlacedObject b;
    b.instance_id = "b";
    b.asset_id = "crate_1";
    b.pose.position = geom::Vec3(1.0, 0, 0);  // 1 m along a's forward axis
    s.objects = {a, b};
    auto geoms = resolve_geometry(s, lib);

    AnchorSpec front{std::optional<std::string>("front"), "person", 0.5, 2.0};
    AnchorSpec back{std::optional<std::string>("back"), "person", 0.5, 2.0};
    AnchorSpec band{std::nullopt, "person", 0.5, 2.0};
    AnchorSpec tight{std::nullopt, "person", 0.0, 0.5};
    CHECK(anchor_relation_satisfied(geoms[0], geoms[1], front));
    CHECK_FALSE(anchor_relation_satisfied(geoms[0], geoms[1], back));
    CHECK(anchor_relation_satisfied(geoms[0], geoms[1], band));
    CHECK_FALSE(anchor_relation_satisfied(geoms[0], geoms[1], tight));
}

TEST_CASE("anchor_relation_satisfied agrees with a 360-sample angle sweep") {
    auto lib = demo_lib();
    for (int deg = 0; deg < 360; ++deg) {
        double phi = deg * M_PI / 180.0;
        SceneInstance s;
        s.floor.extent = geom::Vec2(20, 20);
        PlacedObject ref;
        ref.instance_id = "ref";
        ref.asset_id = "person_1";
        ref.pose.position = geom::Vec3(0, 0, 0);
        ref.pose.yaw = 0.4;
        PlacedObject other;
        other.instance_id = "other";
        other.asset_id = "crate_1";
        double dist = 1.5;
        geom::Vec3 dir = std::cos(phi) * geom::forward_axis(0.4) + std::sin(phi) * geom::right_axis(0.4);
        other.pose.position = dist * dir;
        s.objects = {ref, other};
        auto geoms = resolve_geometry(s, lib);

        AnchorSpec spec{std::optional<std::string>("front-right"), "person", 1.0, 2.0};
        bool got = anchor_relation_satisfied(geoms[0], geoms[1], spec);
        // Sweep oracle: the relation holds iff the angle lies strictly
        // inside the diagonal bin (asin(0.1) off each cardinal).
        double a = std::asin(0.1);
        bool want = phi > a && phi < M_PI / 2 - a;
        CHECK(got == want);
    }
}

TEST_CASE("scale monotonicity: raising the scale floor never lowers expected counts") {
    auto lib = demo_lib();
    auto low = theme_from_text(R"({
      "theme_id": "scale_t",
      "floor": {"extent": [16, 16], "material_tag": "f"},
      "scale_range": [0.5, 1.0],
      "object_specs": [{"category": "crate", "count": [2, 6], "placement": {"kind": "stochastic", "clearance": 0.0}}]
    })");
    auto high = theme_from_text(R"({
      "theme_id": "scale_t",
      "floor": {"extent": [16, 16], "material_tag": "f"},
      "scale_range": [0.9, 1.0],
      "object_specs": [{"category": "crate", "count": [2, 6], "placement": {"kind": "stochastic", "clearance": 0.0}}]
    })");
    double sum_low = 0, sum_high = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        sum_low += sample_scene(low, lib, s, "x").objects.size();
        sum_high += sample_scene(high, lib, s, "x").objects.size();
    }
    CHECK(sum_high >= sum_low);
}

TEST_CASE("unsatisfiable spec errors with the failing spec name") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "toofull",
      "floor": {"extent": [1.0, 1.0], "material_tag": "f"},
      "object_specs": [{"category": "table", "count": 4, "placement": {"kind": "stochastic", "clearance": 0.0}}]
    })");
    CHECK_THROWS_WITH_AS(sample_scene(theme, lib, 3, "x"), doctest::Contains("table"), ConstraintUnsatisfiable);
}

TEST_CASE("scene serialization round-trips") {
    auto lib = demo_lib();
    auto theme = theme_from_text(R"({
      "theme_id": "rt",
      "floor": {"extent": [12, 12], "material_tag": "floor.wood"},
      "object_specs": [
        {"category": "crate", "count": 3, "placement": {"kind": "stochastic", "clearance": 0.1}}
      ]
    })");
    auto scene = sample_scene(theme, lib, 11, "rt-000");
    std::string text = scene.to_json();
    auto parsed = SceneInstance::from_json_text(text, "roundtrip");
    CHECK(parsed.to_json() == text);
    CHECK(parsed.scene_id == scene.scene_id);
    CHECK(parsed.objects.size() == scene.objects.size());
}
