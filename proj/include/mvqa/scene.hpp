#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mvqa/asset_library.hpp"
#include "mvqa/geometry.hpp"

namespace mvqa::scene {

struct FloorSpec {
    geom::Vec2 extent{10.0, 10.0};  // centered on the origin
    std::string material_tag = "floor.generic";
};

struct GridPlacement {
    int rows = 1;
    int cols = 1;
    geom::Vec2 origin{0.0, 0.0};   // center of cell (0,0)
    geom::Vec2 spacing{1.0, 1.0};  // column step (x), row step (y)
    double yaw = 0.0;
};

struct StochasticPlacement {
    double clearance = 0.0;  // extra meters demanded around the footprint
};

struct AnchorSpec {
    std::optional<std::string> label;  // relation label; absent = distance band only
    std::string target_category;
    double dist_lo = 0.0;
    double dist_hi = 1.0;
};

struct ObjectSpec {
    std::string category;
    int count_lo = 1;
    int count_hi = 1;
    std::variant<GridPlacement, StochasticPlacement> placement = StochasticPlacement{};
    std::vector<AnchorSpec> anchors;
};

struct Lighting {
    double intensity = 1.0;
    double azimuth = 0.0;  // radians; metadata only, never affects geometry
};

struct ThemeConfig {
    std::string theme_id;
    FloorSpec floor;
    double scale_lo = 1.0;  // multiplier on object counts
    double scale_hi = 1.0;
    std::vector<ObjectSpec> specs;
    Lighting lighting;

    static ThemeConfig load(const std::string& path);
    void validate(const assets::AssetLibrary& lib) const;
};

struct AnchorBinding {
    std::string label;  // empty when the anchor was distance-only
    std::string target_instance;
};

struct PlacedObject {
    std::string instance_id;
    std::string asset_id;
    geom::Pose3 pose;  // position is the bottom-center of the object
    double scale = 1.0;
    int spec_index = -1;
    std::vector<AnchorBinding> anchors;
};

struct SceneInstance {
    std::string scene_id;
    std::string theme_id;
    std::uint64_t seed = 0;
    FloorSpec floor;
    Lighting lighting;
    std::vector<PlacedObject> objects;

    std::string to_json() const;  // canonical key order, 9-significant-digit reals
    static SceneInstance from_json_text(const std::string& text, const std::string& context);
    static SceneInstance from_file(const std::string& path);
};

// Resolved world-frame geometry for one placed object. `box` is the exact
// shape for box assets and the oriented bounding box for mesh assets.
struct ObjectGeom {
    std::string instance_id;
    const assets::AssetRecord* asset = nullptr;
    geom::OrientedBox box;
    const geom::TriMesh* mesh = nullptr;  // null for box shapes
    geom::Pose3 pose;
    double scale = 1.0;
    bool has_front = false;

    double bottom_z() const { return box.center.z() - box.half_extents.z(); }
    double top_z() const { return box.center.z() + box.half_extents.z(); }
};

std::vector<ObjectGeom> resolve_geometry(const SceneInstance& scene, const assets::AssetLibrary& lib);

// First-hit query against one object's shape (exact mesh test for mesh
// assets). Returns distance along the ray.
std::optional<double> ray_intersect_object(const geom::Ray& ray, const ObjectGeom& obj);

}  // namespace mvqa::scene
