#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/image_io.hpp"
#include "mvqa/relations.hpp"
#include "mvqa/scene.hpp"

namespace mvqa::render {

enum class ViewpointClass { Drone, BirdsEye, Egocentric, Surveillance };
enum class Coverage { Center, Peripheral };
enum class FovPreset { Wide, Narrow };  // fov_x 90 / 50 degrees

const char* to_string(ViewpointClass c);
std::optional<ViewpointClass> viewpoint_from_string(const std::string& s);

struct ClassSpec {
    int count = 0;
    Coverage coverage = Coverage::Center;
    FovPreset fov = FovPreset::Wide;
};

struct ViewSpec {
    // Keyed by class to keep view ordering stable: Drone, BirdsEye,
    // Egocentric, Surveillance.
    std::map<ViewpointClass, ClassSpec> classes;
    int width = 1024;
    int height = 768;
    int n_rays = 1024;
    bool depth_maps = false;

    static ViewSpec load(const std::string& path);
};

struct ViewRecord {
    std::string view_id;
    ViewpointClass cls = ViewpointClass::Egocentric;
    geom::CameraModel camera;
};

struct ObjectViewMetadata {
    std::string instance_id;
    std::string view_id;
    std::optional<geom::Bbox2> bbox2;  // clipped to the image
    bool bbox_clipped = false;         // unclipped extent exceeded the image
    double occlusion_ratio = 1.0;      // 0 fully visible .. 1 fully hidden
    bool in_frustum = false;
    std::array<std::optional<std::pair<double, double>>, 8> projected_corners;
};

// Deterministic per seed. Placement ranges per class:
//   Egocentric   height 1.4-1.8 m, pitch -15..+5 deg
//   Drone        height 8-15 m,   pitch -35..-60 deg
//   BirdsEye     height 10-20 m,  pitch -80..-90 deg
//   Surveillance floor corners (within 0.5 m), height 2.5-3.5 m, pitch -20..-40 deg
// Wide fov_x = 90 deg, Narrow = 50 deg. Cameras yaw toward the floor center;
// the floor center must project inside the image.
std::vector<ViewRecord> place_cameras(const scene::SceneInstance& scene, const ViewSpec& spec, std::uint64_t seed);

// Fraction of stratified camera-facing surface sample points whose ray
// toward the camera is blocked by scene geometry. Points projecting outside
// the image are excluded from the denominator; if none project inside, the
// object counts as fully hidden (1.0).
double compute_occlusion(const std::vector<scene::ObjectGeom>& objects, const geom::CameraModel& camera,
                         const std::string& instance_id, int n_rays, std::uint64_t ray_seed);

std::vector<ObjectViewMetadata> extract_view_metadata(const std::vector<scene::ObjectGeom>& objects,
                                                      const ViewRecord& view, int n_rays,
                                                      std::uint64_t scene_seed);

// One primary ray per pixel center; nearest hit wins; 0 = background.
IdImage render_instance_map(const std::vector<scene::ObjectGeom>& objects, const ViewRecord& view);

// Depth in millimeters, clamped to 16 bits; background = 65535.
DepthImage render_depth_map(const std::vector<scene::ObjectGeom>& objects, const ViewRecord& view);

// Mean occlusion over (task object, view) pairs. Throws on an empty object
// set or missing metadata.
double key_object_visibility(const std::vector<std::string>& task_objects,
                             const std::vector<ObjectViewMetadata>& metadata,
                             const std::vector<std::string>& view_ids);

// Per-scene metadata document (canonical ordering, 9-digit reals).
std::string metadata_to_json(const std::vector<ViewRecord>& views,
                             const std::vector<ObjectViewMetadata>& metadata);

struct SceneViewData {
    std::vector<ViewRecord> views;
    std::vector<ObjectViewMetadata> metadata;  // ordered by (view_id, instance_id)

    const ObjectViewMetadata* find(const std::string& view_id, const std::string& instance_id) const;
    rel::FrustumIndex frustum_index() const;
    std::vector<rel::ViewCamera> view_cameras() const;
};

SceneViewData load_metadata(const std::string& path);
SceneViewData parse_metadata(const std::string& text, const std::string& context);

}  // namespace mvqa::render
