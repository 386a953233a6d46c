#include "mvqa/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mvqa/rng.hpp"

namespace mvqa::scene {

namespace {

double footprint_radius(const geom::OrientedBox& box) {
    return std::hypot(box.half_extents.x(), box.half_extents.y());
}

bool vertically_overlapping(const ObjectGeom& a, const ObjectGeom& b) {
    double lo = std::max(a.bottom_z(), b.bottom_z());
    double hi = std::min(a.top_z(), b.top_z());
    return hi - lo > 1e-9;
}

bool footprint_inside_floor(const geom::OrientedBox& box, const FloorSpec& floor) {
    for (const auto& c : geom::footprint_corners(box)) {
        if (std::abs(c.x()) > floor.extent.x() / 2.0 + 1e-9) return false;
        if (std::abs(c.y()) > floor.extent.y() / 2.0 + 1e-9) return false;
    }
    return true;
}

// Footprint collision between objects that share a height range.
bool collides(const ObjectGeom& a, const ObjectGeom& b, double tolerance, double clearance) {
    if (!vertically_overlapping(a, b)) return false;
    if (clearance > 0.0) {
        geom::OrientedBox inflated = a.box;
        inflated.half_extents.x() += clearance;
        inflated.half_extents.y() += clearance;
        return geom::footprint_overlap_area(inflated, b.box) > tolerance;
    }
    return geom::footprint_overlap_area(a.box, b.box) > tolerance;
}

ObjectGeom resolve_single(const PlacedObject& placed, const assets::AssetLibrary& lib) {
    SceneInstance tmp;
    tmp.objects.push_back(placed);
    return resolve_geometry(tmp, lib)[0];
}

// Angular half-width of the zeroed band around each cardinal direction.
double zero_band(double epsilon) { return std::asin(epsilon); }

// Uniform angle (from the reference forward axis toward its right) whose
// discretized label equals `label`. A small margin keeps samples away from
// bin boundaries.
double sample_angle_for_label(rel::Label label, double epsilon, Rng& rng) {
    double a = zero_band(epsilon);
    double margin = 2e-3;
    auto band = [&](double center) { return rng.uniform(center - a + margin, center + a - margin); };
    auto diag = [&](double lo_center, double hi_center) {
        return rng.uniform(lo_center + a + margin, hi_center - a - margin);
    };
    using rel::Label;
    switch (label) {
        case Label::Front: return band(0.0);
        case Label::Right: return band(M_PI / 2);
        case Label::Back: return band(M_PI);
        case Label::Left: return band(3 * M_PI / 2);
        case Label::FrontRight: return diag(0.0, M_PI / 2);
        case Label::BackRight: return diag(M_PI / 2, M_PI);
        case Label::BackLeft: return diag(M_PI, 3 * M_PI / 2);
        case Label::FrontLeft: return diag(3 * M_PI / 2, 2 * M_PI);
        default: throw std::invalid_argument("sample_angle_for_label: not a horizontal label");
    }
}

double wrap_pi(double x) {
    double y = std::fmod(x + M_PI, 2 * M_PI);
    if (y < 0) y += 2 * M_PI;
    return y - M_PI;
}

}  // namespace

bool anchor_relation_satisfied(const ObjectGeom& a, const ObjectGeom& b, const AnchorSpec& rel_spec,
                               const rel::RelationParams& params) {
    double dist = (b.box.center.head<2>() - a.box.center.head<2>()).norm();
    if (dist < rel_spec.dist_lo - 1e-9 || dist > rel_spec.dist_hi + 1e-9) return false;
    if (!rel_spec.label) return true;
    auto want = rel::label_from_string(*rel_spec.label);
    if (!want) throw std::runtime_error("unknown anchor relation label '" + *rel_spec.label + "'");
    if (*want == rel::Label::On) return rel::contact_relation(b, a, params) == rel::Label::On;
    if (*want == rel::Label::Under) return rel::contact_relation(b, a, params) == rel::Label::Under;
    if (!rel::is_horizontal(*want))
        throw std::runtime_error("anchor label '" + *rel_spec.label + "' is not a placement relation");
    return rel::object_centric_relation(a, b, params) == *want;
}

SceneInstance sample_scene(const ThemeConfig& theme, const assets::AssetLibrary& lib, std::uint64_t seed,
                           const std::string& scene_id, const SynthParams& params) {
    theme.validate(lib);
    SceneInstance scene;
    scene.scene_id = scene_id;
    scene.theme_id = theme.theme_id;
    scene.seed = seed;
    scene.floor = theme.floor;
    scene.lighting = theme.lighting;

    Rng scale_rng(derive_seed(seed, {theme.theme_id, "count-scale"}));
    double count_scale = scale_rng.uniform(theme.scale_lo, theme.scale_hi);

    std::vector<ObjectGeom> placed_geom;
    int instance_counter = 0;

    for (std::size_t spec_idx = 0; spec_idx < theme.specs.size(); ++spec_idx) {
        const ObjectSpec& spec = theme.specs[spec_idx];
        Rng count_rng(derive_seed(seed, {theme.theme_id, "spec", std::to_string(spec_idx), "count"}));
        int base = static_cast<int>(count_rng.uniform_int(spec.count_lo, spec.count_hi));
        int count = static_cast<int>(std::llround(base * count_scale));
        if (base > 0 && count < 1) count = 1;

        const auto* grid = std::get_if<GridPlacement>(&spec.placement);
        const auto* stochastic = std::get_if<StochasticPlacement>(&spec.placement);
        if (grid) count = std::min(count, grid->rows * grid->cols);

        auto ids = lib.assets_in_category(spec.category);
        std::uint64_t attempt = 0;

        for (int n = 0; n < count; ++n) {
            bool done = false;
            std::uint64_t attempt_start = attempt;
            while (!done) {
                if (attempt - attempt_start >= static_cast<std::uint64_t>(params.max_attempts_per_object))
                    throw ConstraintUnsatisfiable("theme '" + theme.theme_id + "': spec '" + spec.category +
                                                  "' (index " + std::to_string(spec_idx) +
                                                  ") unsatisfiable after " +
                                                  std::to_string(params.max_attempts_per_object) + " attempts");
                Rng rng(derive_seed(seed, {theme.theme_id, "spec", std::to_string(spec_idx), "attempt",
                                           std::to_string(attempt)}));
                ++attempt;

                PlacedObject obj;
                obj.asset_id = ids[rng.below(ids.size())];
                obj.scale = 1.0;
                obj.spec_index = static_cast<int>(spec_idx);

                if (grid) {
                    int cell = n;  // row-major
                    int row = cell / grid->cols;
                    int col = cell % grid->cols;
                    obj.pose.position = geom::Vec3(grid->origin.x() + col * grid->spacing.x(),
                                                   grid->origin.y() + row * grid->spacing.y(), 0.0);
                    obj.pose.yaw = grid->yaw;
                } else {
                    obj.pose.yaw = wrap_pi(rng.uniform(-M_PI, M_PI));
                }

                // Each anchor binds to a sampled target of its category; the
                // first anchor drives the position (unless the placement is a
                // grid), the rest are validated below and retried on failure.
                if (!spec.anchors.empty()) {
                    for (std::size_t ai = 0; ai < spec.anchors.size(); ++ai) {
                        const AnchorSpec& anchor = spec.anchors[ai];
                        std::vector<std::size_t> candidates;
                        for (std::size_t i = 0; i < placed_geom.size(); ++i)
                            if (placed_geom[i].asset->category == anchor.target_category) candidates.push_back(i);
                        if (candidates.empty())
                            throw ConstraintUnsatisfiable("theme '" + theme.theme_id + "': spec '" +
                                                          spec.category + "' anchors to category '" +
                                                          anchor.target_category + "' with no placed instances");
                        const ObjectGeom& target = placed_geom[candidates[rng.below(candidates.size())]];
                        obj.anchors.push_back({anchor.label.value_or(""), target.instance_id});
                        if (ai != 0 || grid) continue;

                        auto want = anchor.label ? rel::label_from_string(*anchor.label) : std::nullopt;
                        if (want && *want == rel::Label::On) {
                            const assets::AssetRecord& rec = lib.asset(obj.asset_id);
                            double child_rad = std::hypot(rec.dims.y() / 2.0, rec.dims.x() / 2.0) * obj.scale;
                            geom::Vec2 inset(std::max(0.0, target.box.half_extents.x() - child_rad),
                                             std::max(0.0, target.box.half_extents.y() - child_rad));
                            double u = rng.uniform(-inset.x(), inset.x());
                            double v = rng.uniform(-inset.y(), inset.y());
                            geom::Mat3 r = geom::yaw_rotation(target.box.yaw);
                            geom::Vec3 offset = r * geom::Vec3(u, v, 0.0);
                            obj.pose.position = geom::Vec3(target.box.center.x() + offset.x(),
                                                           target.box.center.y() + offset.y(), target.top_z());
                        } else {
                            double dist = rng.uniform(anchor.dist_lo, anchor.dist_hi);
                            double phi = want ? sample_angle_for_label(*want, params.relation_params.epsilon, rng)
                                              : rng.uniform(0.0, 2 * M_PI);
                            geom::Vec3 dir = std::cos(phi) * geom::forward_axis(target.pose.yaw) +
                                             std::sin(phi) * geom::right_axis(target.pose.yaw);
                            obj.pose.position = geom::Vec3(target.box.center.x() + dist * dir.x(),
                                                           target.box.center.y() + dist * dir.y(), 0.0);
                        }
                    }
                } else if (stochastic) {
                    const assets::AssetRecord& rec = lib.asset(obj.asset_id);
                    double rad = std::hypot(rec.dims.y() / 2.0, rec.dims.x() / 2.0) + stochastic->clearance;
                    double x_room = theme.floor.extent.x() / 2.0 - rad;
                    double y_room = theme.floor.extent.y() / 2.0 - rad;
                    if (x_room < 0 || y_room < 0) continue;  // object cannot fit; burn the attempt
                    obj.pose.position = geom::Vec3(rng.uniform(-x_room, x_room), rng.uniform(-y_room, y_room), 0.0);
                }

                // Zero-padded so lexicographic and placement order agree.
                char idbuf[16];
                std::snprintf(idbuf, sizeof(idbuf), "obj_%04d", instance_counter);
                obj.instance_id = idbuf;
                ObjectGeom geom_obj = resolve_single(obj, lib);

                if (!footprint_inside_floor(geom_obj.box, theme.floor)) continue;
                double clearance = stochastic && spec.anchors.empty() ? stochastic->clearance : 0.0;
                bool collision = false;
                for (const auto& other : placed_geom) {
                    bool stacked = !obj.anchors.empty() && other.instance_id == obj.anchors.front().target_instance;
                    if (collides(geom_obj, other, params.overlap_tolerance, stacked ? 0.0 : clearance)) {
                        // Contact with the stacking target is expected; the
                        // z-overlap gate already admits it.
                        collision = true;
                        break;
                    }
                }
                if (collision) continue;

                bool anchors_ok = true;
                for (std::size_t ai = 0; ai < spec.anchors.size(); ++ai) {
                    const ObjectGeom* target = nullptr;
                    for (const auto& g : placed_geom)
                        if (g.instance_id == obj.anchors[ai].target_instance) target = &g;
                    if (!target || !anchor_relation_satisfied(*target, geom_obj, spec.anchors[ai],
                                                              params.relation_params)) {
                        anchors_ok = false;
                        break;
                    }
                }
                if (!anchors_ok) continue;

                scene.objects.push_back(obj);
                placed_geom.push_back(std::move(geom_obj));
                ++instance_counter;
                done = true;
            }
        }
    }
    return scene;
}

std::vector<SceneViolation> validate_scene(const SceneInstance& scene, const assets::AssetLibrary& lib,
                                           const ThemeConfig& theme, const SynthParams& params) {
    std::vector<SceneViolation> out;
    std::vector<std::string> seen;
    for (const auto& o : scene.objects) {
        if (std::find(seen.begin(), seen.end(), o.instance_id) != seen.end())
            out.push_back({SceneViolation::Kind::DuplicateInstance, o.instance_id, "duplicate instance id"});
        seen.push_back(o.instance_id);
        if (!lib.find_asset(o.asset_id))
            out.push_back({SceneViolation::Kind::UnknownAsset, o.instance_id,
                           "asset '" + o.asset_id + "' not in library"});
    }
    if (!out.empty()) return out;  // geometry resolution needs valid assets

    auto geoms = resolve_geometry(scene, lib);
    for (const auto& g : geoms)
        if (!footprint_inside_floor(g.box, scene.floor))
            out.push_back({SceneViolation::Kind::OutOfFloor, g.instance_id, "footprint extends beyond the floor"});

    for (std::size_t i = 0; i < geoms.size(); ++i)
        for (std::size_t j = i + 1; j < geoms.size(); ++j)
            if (collides(geoms[i], geoms[j], params.overlap_tolerance, 0.0)) {
                double area = geom::footprint_overlap_area(geoms[i].box, geoms[j].box);
                out.push_back({SceneViolation::Kind::Collision, geoms[i].instance_id,
                               "overlaps '" + geoms[j].instance_id + "' by " + std::to_string(area) + " m^2"});
            }

    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const PlacedObject& o = scene.objects[i];
        if (o.spec_index < 0 || o.spec_index >= static_cast<int>(theme.specs.size())) continue;
        const ObjectSpec& spec = theme.specs[o.spec_index];
        for (std::size_t ai = 0; ai < o.anchors.size() && ai < spec.anchors.size(); ++ai) {
            const ObjectGeom* target = nullptr;
            for (const auto& g : geoms)
                if (g.instance_id == o.anchors[ai].target_instance) target = &g;
            if (!target) {
                out.push_back({SceneViolation::Kind::AnchorViolation, o.instance_id,
                               "anchor target '" + o.anchors[ai].target_instance + "' missing"});
                continue;
            }
            if (!anchor_relation_satisfied(*target, geoms[i], spec.anchors[ai], params.relation_params))
                out.push_back({SceneViolation::Kind::AnchorViolation, o.instance_id,
                               "anchor relation to '" + target->instance_id + "' violated"});
        }
    }
    return out;
}

}  // namespace mvqa::scene
