#include "mvqa/view_render.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mvqa/json_io.hpp"
#include "mvqa/rng.hpp"

namespace mvqa::render {

namespace {
constexpr double kDeg = M_PI / 180.0;
}

const char* to_string(ViewpointClass c) {
    switch (c) {
        case ViewpointClass::Drone: return "drone";
        case ViewpointClass::BirdsEye: return "birdseye";
        case ViewpointClass::Egocentric: return "egocentric";
        case ViewpointClass::Surveillance: return "surveillance";
    }
    return "?";
}

std::optional<ViewpointClass> viewpoint_from_string(const std::string& s) {
    if (s == "drone") return ViewpointClass::Drone;
    if (s == "birdseye") return ViewpointClass::BirdsEye;
    if (s == "egocentric") return ViewpointClass::Egocentric;
    if (s == "surveillance") return ViewpointClass::Surveillance;
    return std::nullopt;
}

ViewSpec ViewSpec::load(const std::string& path) {
    nlohmann::json j = parse_json_file(path);
    ViewSpec spec;
    if (j.contains("image")) {
        spec.width = j["image"][0].get<int>();
        spec.height = j["image"][1].get<int>();
        if (spec.width < 1 || spec.height < 1) throw ParseError(path + ": image size must be positive");
    }
    spec.n_rays = static_cast<int>(j.value("n_rays", 1024));
    if (spec.n_rays < 1) throw ParseError(path + ": n_rays must be >= 1");
    spec.depth_maps = j.value("depth_maps", false);
    for (const auto& [name, jc] : j.value("classes", nlohmann::json::object()).items()) {
        auto cls = viewpoint_from_string(name);
        if (!cls) throw ParseError(path + ": unknown viewpoint class '" + name + "'");
        ClassSpec cs;
        cs.count = static_cast<int>(require_int(jc, "count", path + " class " + name));
        if (cs.count < 0) throw ParseError(path + ": class '" + name + "' count must be >= 0");
        std::string cov = jc.value("coverage", std::string("center"));
        if (cov == "center") cs.coverage = Coverage::Center;
        else if (cov == "peripheral") cs.coverage = Coverage::Peripheral;
        else throw ParseError(path + ": unknown coverage '" + cov + "'");
        std::string fov = jc.value("fov", std::string("wide"));
        if (fov == "wide") cs.fov = FovPreset::Wide;
        else if (fov == "narrow") cs.fov = FovPreset::Narrow;
        else throw ParseError(path + ": unknown fov preset '" + fov + "'");
        spec.classes[*cls] = cs;
    }
    return spec;
}

namespace {

struct ClassRanges {
    double h_lo, h_hi;        // camera height, meters
    double pitch_lo, pitch_hi;  // degrees
};

ClassRanges ranges_for(ViewpointClass c) {
    switch (c) {
        case ViewpointClass::Drone: return {8.0, 15.0, -60.0, -35.0};
        case ViewpointClass::BirdsEye: return {10.0, 20.0, -90.0, -80.0};
        case ViewpointClass::Egocentric: return {1.4, 1.8, -15.0, 5.0};
        case ViewpointClass::Surveillance: return {2.5, 3.5, -40.0, -20.0};
    }
    return {1.4, 1.8, -15.0, 5.0};
}

geom::Vec2 sample_xy(ViewpointClass cls, Coverage cov, const scene::FloorSpec& floor, int index, Rng& rng) {
    double fx = floor.extent.x() / 2.0;
    double fy = floor.extent.y() / 2.0;
    if (cls == ViewpointClass::Surveillance) {
        static const double sx[4] = {1, -1, -1, 1};
        static const double sy[4] = {1, 1, -1, -1};
        int corner = index % 4;
        double jx = rng.uniform(-0.1, 0.1);
        double jy = rng.uniform(-0.1, 0.1);
        return {sx[corner] * (fx - 0.25) + jx, sy[corner] * (fy - 0.25) + jy};
    }
    double lo, hi;
    switch (cov) {
        case Coverage::Center:
            lo = 0.0;
            hi = cls == ViewpointClass::BirdsEye ? 0.1 : 0.4;
            break;
        case Coverage::Peripheral:
        default:
            lo = cls == ViewpointClass::BirdsEye ? 0.4 : 0.6;
            hi = 0.95;
            break;
    }
    double r = rng.uniform(lo, hi);
    double phi = rng.uniform(0.0, 2 * M_PI);
    return {r * fx * std::cos(phi), r * fy * std::sin(phi)};
}

bool center_visible(const geom::CameraModel& cam) {
    auto p = geom::project_point(cam, geom::Vec3(0, 0, 0));
    return p && p->u >= 0 && p->u <= cam.width && p->v >= 0 && p->v <= cam.height;
}

}  // namespace

std::vector<ViewRecord> place_cameras(const scene::SceneInstance& scene, const ViewSpec& spec, std::uint64_t seed) {
    if (!(scene.floor.extent.x() > 0 && scene.floor.extent.y() > 0))
        throw std::runtime_error("place_cameras: degenerate floor");
    std::vector<ViewRecord> views;
    for (const auto& [cls, cs] : spec.classes) {
        if (cs.count < 0) throw std::runtime_error("place_cameras: negative camera count");
        ClassRanges cr = ranges_for(cls);
        for (int i = 0; i < cs.count; ++i) {
            ViewRecord view;
            view.cls = cls;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_%02d", to_string(cls), i);
            view.view_id = buf;
            view.camera.width = spec.width;
            view.camera.height = spec.height;
            view.camera.fov_x = cs.fov == FovPreset::Wide ? 90.0 * kDeg : 50.0 * kDeg;

            bool placed = false;
            for (std::uint64_t attempt = 0; attempt < 64 && !placed; ++attempt) {
                Rng rng(derive_seed(seed, {scene.scene_id, "camera", to_string(cls), std::to_string(i),
                                           std::to_string(attempt)}));
                geom::Vec2 xy = sample_xy(cls, cs.coverage, scene.floor, i, rng);
                double h = rng.uniform(cr.h_lo, cr.h_hi);
                view.camera.position = geom::Vec3(xy.x(), xy.y(), h);
                double to_center = std::hypot(xy.x(), xy.y());
                view.camera.yaw = to_center > 1e-9 ? std::atan2(-xy.y(), -xy.x()) : rng.uniform(-M_PI, M_PI);
                view.camera.pitch = rng.uniform(cr.pitch_lo, cr.pitch_hi) * kDeg;
                placed = center_visible(view.camera);
            }
            if (!placed) {
                // Aim the optical axis at the floor center; keeps the
                // coverage invariant when the sampled pitch band cannot.
                double to_center = std::hypot(view.camera.position.x(), view.camera.position.y());
                view.camera.pitch = std::atan2(-view.camera.position.z(), to_center);
            }
            views.push_back(view);
        }
    }
    std::sort(views.begin(), views.end(), [](const auto& a, const auto& b) { return a.view_id < b.view_id; });
    return views;
}

namespace {

struct SurfaceSample {
    geom::Vec3 point;
    geom::Vec3 normal;
};

struct FacePatch {
    geom::Vec3 origin;  // corner of the face
    geom::Vec3 eu, ev;  // spanning edges
    geom::Vec3 normal;
    double area;
};

std::vector<FacePatch> box_faces(const geom::OrientedBox& box) {
    geom::Mat3 r = geom::yaw_rotation(box.yaw);
    const geom::Vec3& h = box.half_extents;
    std::vector<FacePatch> faces;
    for (int axis = 0; axis < 3; ++axis) {
        for (double side : {-1.0, 1.0}) {
            int u = (axis + 1) % 3, v = (axis + 2) % 3;
            geom::Vec3 n = geom::Vec3::Zero();
            n[axis] = side;
            geom::Vec3 local_origin = n.cwiseProduct(h);
            geom::Vec3 eu = geom::Vec3::Zero(), ev = geom::Vec3::Zero();
            eu[u] = 2 * h[u];
            ev[v] = 2 * h[v];
            local_origin -= (eu + ev) / 2.0;
            FacePatch f;
            f.origin = box.center + r * local_origin;
            f.eu = r * eu;
            f.ev = r * ev;
            f.normal = r * n;
            f.area = 4 * h[u] * h[v];
            faces.push_back(f);
        }
    }
    return faces;
}

// Largest-remainder allocation of n samples proportional to weights.
std::vector<int> allocate(int n, const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    std::vector<int> out(weights.size(), 0);
    if (total <= 0) return out;
    std::vector<std::pair<double, std::size_t>> rema;
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = n * weights[i] / total;
        out[i] = static_cast<int>(exact);
        assigned += out[i];
        rema.push_back({exact - out[i], i});
    }
    std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < n - assigned && k < static_cast<int>(rema.size()); ++k) ++out[rema[k].second];
    return out;
}

// Stratified jittered samples over the camera-facing surface.
std::vector<SurfaceSample> sample_facing_surface(const scene::ObjectGeom& obj, const geom::Vec3& cam_pos,
                                                 int n_rays, Rng& rng) {
    std::vector<SurfaceSample> samples;
    samples.reserve(n_rays);
    if (!obj.mesh) {
        auto faces = box_faces(obj.box);
        std::vector<FacePatch> facing;
        for (const auto& f : faces) {
            geom::Vec3 face_center = f.origin + (f.eu + f.ev) / 2.0;
            if (f.normal.dot(cam_pos - face_center) > 0) facing.push_back(f);
        }
        if (facing.empty()) return samples;
        std::vector<double> areas;
        for (const auto& f : facing) areas.push_back(f.area);
        auto counts = allocate(n_rays, areas);
        for (std::size_t fi = 0; fi < facing.size(); ++fi) {
            int n = counts[fi];
            if (n <= 0) continue;
            const FacePatch& f = facing[fi];
            double aspect = f.eu.norm() / f.ev.norm();
            int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(n * aspect))));
            int rows = (n + cols - 1) / cols;
            int emitted = 0;
            for (int r = 0; r < rows && emitted < n; ++r)
                for (int c = 0; c < cols && emitted < n; ++c) {
                    double u = (c + rng.uniform()) / cols;
                    double v = (r + rng.uniform()) / rows;
                    samples.push_back({f.origin + u * f.eu + v * f.ev, f.normal});
                    ++emitted;
                }
        }
        return samples;
    }

    // Mesh: area-weighted facing triangles, uniform points via the sqrt trick.
    geom::Mat3 rot = geom::yaw_rotation(obj.pose.yaw);
    std::vector<std::array<geom::Vec3, 3>> tris;
    std::vector<geom::Vec3> normals;
    std::vector<double> areas;
    for (const auto& t : obj.mesh->triangles) {
        std::array<geom::Vec3, 3> world;
        for (int k = 0; k < 3; ++k) world[k] = obj.pose.position + rot * (obj.scale * obj.mesh->vertices[t[k]]);
        geom::Vec3 n = (world[1] - world[0]).cross(world[2] - world[0]);
        double area2 = n.norm();
        if (area2 < 1e-14) continue;
        geom::Vec3 centroid = (world[0] + world[1] + world[2]) / 3.0;
        if (n.dot(cam_pos - centroid) <= 0) continue;
        tris.push_back(world);
        normals.push_back(n / area2);
        areas.push_back(area2 / 2.0);
    }
    if (tris.empty()) return samples;
    auto counts = allocate(n_rays, areas);
    for (std::size_t ti = 0; ti < tris.size(); ++ti) {
        for (int k = 0; k < counts[ti]; ++k) {
            double su = std::sqrt(rng.uniform());
            double sv = rng.uniform();
            geom::Vec3 p = (1 - su) * tris[ti][0] + su * (1 - sv) * tris[ti][1] + su * sv * tris[ti][2];
            samples.push_back({p, normals[ti]});
        }
    }
    return samples;
}

}  // namespace

double compute_occlusion(const std::vector<scene::ObjectGeom>& objects, const geom::CameraModel& camera,
                         const std::string& instance_id, int n_rays, std::uint64_t ray_seed) {
    if (n_rays < 1) throw std::invalid_argument("compute_occlusion: n_rays must be >= 1");
    const scene::ObjectGeom* target = nullptr;
    for (const auto& o : objects)
        if (o.instance_id == instance_id) target = &o;
    if (!target) throw std::runtime_error("compute_occlusion: unknown instance '" + instance_id + "'");

    Rng rng(ray_seed);
    auto samples = sample_facing_surface(*target, camera.position, n_rays, rng);

    constexpr double kSelfOffset = 1e-4;
    int kept = 0, blocked = 0;
    for (const auto& s : samples) {
        auto px = geom::project_point(camera, s.point);
        if (!px) continue;
        if (px->u < 0 || px->u > camera.width || px->v < 0 || px->v > camera.height) continue;
        ++kept;
        geom::Vec3 to_cam = camera.position - s.point;
        double dist = to_cam.norm();
        if (dist < 2 * kSelfOffset) continue;
        geom::Ray ray{s.point + (to_cam / dist) * kSelfOffset, to_cam / dist};
        double limit = dist - kSelfOffset - 1e-9;
        for (const auto& o : objects) {
            auto t = scene::ray_intersect_object(ray, o);
            if (t && *t > 0 && *t < limit) {
                ++blocked;
                break;
            }
        }
    }
    if (kept == 0) return 1.0;
    return static_cast<double>(blocked) / kept;
}

std::vector<ObjectViewMetadata> extract_view_metadata(const std::vector<scene::ObjectGeom>& objects,
                                                      const ViewRecord& view, int n_rays,
                                                      std::uint64_t scene_seed) {
    std::vector<ObjectViewMetadata> out;
    out.reserve(objects.size());
    for (const auto& obj : objects) {
        ObjectViewMetadata m;
        m.instance_id = obj.instance_id;
        m.view_id = view.view_id;

        std::optional<geom::ProjectedBox> pb;
        if (obj.mesh)
            pb = geom::project_mesh_to_bbox2(view.camera, *obj.mesh, obj.pose, obj.scale);
        else
            pb = geom::project_box_to_bbox2(view.camera, obj.box);

        auto corners = geom::box_corners(obj.box);
        for (int k = 0; k < 8; ++k) {
            auto px = geom::project_point(view.camera, corners[k]);
            if (px) m.projected_corners[k] = std::make_pair(px->u, px->v);
        }

        m.in_frustum = pb.has_value() && pb->bbox.area() > 0.0;
        if (m.in_frustum) {
            m.bbox2 = pb->bbox;
            m.bbox_clipped = pb->clipped;
            m.occlusion_ratio = compute_occlusion(objects, view.camera, obj.instance_id, n_rays,
                                                  derive_seed(scene_seed, {view.view_id, obj.instance_id}));
        } else {
            m.occlusion_ratio = 1.0;
        }
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
    return out;
}

IdImage render_instance_map(const std::vector<scene::ObjectGeom>& objects, const ViewRecord& view) {
    const geom::CameraModel& cam = view.camera;
    IdImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.px.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
    std::vector<double> depth(img.px.size(), std::numeric_limits<double>::infinity());

    geom::Mat3 w_from_c = cam.world_from_cam();
    double f = cam.focal();
    double cx = cam.width / 2.0, cy = cam.height / 2.0;

    for (std::size_t oi = 0; oi < objects.size(); ++oi) {
        const auto& obj = objects[oi];
        std::optional<geom::ProjectedBox> pb;
        if (obj.mesh)
            pb = geom::project_mesh_to_bbox2(cam, *obj.mesh, obj.pose, obj.scale);
        else
            pb = geom::project_box_to_bbox2(cam, obj.box);
        if (!pb || pb->bbox.area() <= 0) continue;
        int x0 = std::max(0, static_cast<int>(std::floor(pb->bbox.x_min)) - 1);
        int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(pb->bbox.x_max)) + 1);
        int y0 = std::max(0, static_cast<int>(std::floor(pb->bbox.y_min)) - 1);
        int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(pb->bbox.y_max)) + 1);
        auto id = static_cast<std::uint32_t>(oi + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                geom::Vec3 dir_cam((x + 0.5 - cx) / f, (y + 0.5 - cy) / f, 1.0);
                geom::Ray ray{cam.position, (w_from_c * dir_cam).normalized()};
                auto t = scene::ray_intersect_object(ray, obj);
                if (!t) continue;
                std::size_t idx = static_cast<std::size_t>(y) * cam.width + x;
                if (*t < depth[idx]) {
                    depth[idx] = *t;
                    img.px[idx] = id;
                }
            }
        }
    }
    return img;
}

DepthImage render_depth_map(const std::vector<scene::ObjectGeom>& objects, const ViewRecord& view) {
    const geom::CameraModel& cam = view.camera;
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.px.assign(static_cast<std::size_t>(cam.width) * cam.height, 65535);
    IdImage ids = render_instance_map(objects, view);

    // Re-cast only hit pixels for their exact depth along the optical axis.
    geom::Mat3 w_from_c = cam.world_from_cam();
    geom::Vec3 optical = w_from_c.col(2);
    double f = cam.focal();
    double cx = cam.width / 2.0, cy = cam.height / 2.0;
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * cam.width + x;
            if (ids.px[idx] == 0) continue;
            const auto& obj = objects[ids.px[idx] - 1];
            geom::Vec3 dir_cam((x + 0.5 - cx) / f, (y + 0.5 - cy) / f, 1.0);
            geom::Vec3 dir = (w_from_c * dir_cam).normalized();
            auto t = scene::ray_intersect_object({cam.position, dir}, obj);
            if (!t) continue;
            double depth_m = *t * dir.dot(optical);
            double mm = std::clamp(depth_m * 1000.0, 0.0, 65535.0);
            img.px[idx] = static_cast<std::uint16_t>(std::lround(mm));
        }
    return img;
}

double key_object_visibility(const std::vector<std::string>& task_objects,
                             const std::vector<ObjectViewMetadata>& metadata,
                             const std::vector<std::string>& view_ids) {
    if (task_objects.empty()) throw std::invalid_argument("key_object_visibility: no task objects");
    double sum = 0;
    int n = 0;
    for (const auto& view : view_ids) {
        for (const auto& obj : task_objects) {
            const ObjectViewMetadata* m = nullptr;
            for (const auto& rec : metadata)
                if (rec.view_id == view && rec.instance_id == obj) m = &rec;
            if (!m)
                throw std::runtime_error("key_object_visibility: missing metadata for (" + view + ", " + obj + ")");
            sum += m->occlusion_ratio;
            ++n;
        }
    }
    return sum / n;
}

std::string metadata_to_json(const std::vector<ViewRecord>& views,
                             const std::vector<ObjectViewMetadata>& metadata) {
    std::vector<const ViewRecord*> ordered_views;
    for (const auto& v : views) ordered_views.push_back(&v);
    std::sort(ordered_views.begin(), ordered_views.end(),
              [](const auto* a, const auto* b) { return a->view_id < b->view_id; });
    std::vector<const ObjectViewMetadata*> ordered_meta;
    for (const auto& m : metadata) ordered_meta.push_back(&m);
    std::sort(ordered_meta.begin(), ordered_meta.end(), [](const auto* a, const auto* b) {
        return std::tie(a->view_id, a->instance_id) < std::tie(b->view_id, b->instance_id);
    });

    JsonWriter w;
    w.begin_object();
    w.key("views");
    w.begin_array();
    for (const auto* v : ordered_views) {
        w.begin_object();
        w.kv("view_id", v->view_id);
        w.kv("class", to_string(v->cls));
        w.key("camera");
        w.begin_object();
        w.key("position");
        w.begin_array()
            .value(v->camera.position.x())
            .value(v->camera.position.y())
            .value(v->camera.position.z())
            .end_array();
        w.kv("yaw", v->camera.yaw);
        w.kv("pitch", v->camera.pitch);
        w.kv("fov_x", v->camera.fov_x);
        w.kv("width", v->camera.width);
        w.kv("height", v->camera.height);
        w.end_object();
        w.end_object();
    }
    w.end_array();
    w.key("objects");
    w.begin_array();
    for (const auto* m : ordered_meta) {
        w.begin_object();
        w.kv("instance_id", m->instance_id);
        w.kv("view_id", m->view_id);
        w.kv("in_frustum", m->in_frustum);
        w.kv("occlusion_ratio", m->occlusion_ratio);
        w.key("bbox2");
        if (m->bbox2)
            w.begin_array()
                .value(m->bbox2->x_min)
                .value(m->bbox2->y_min)
                .value(m->bbox2->x_max)
                .value(m->bbox2->y_max)
                .end_array();
        else
            w.null();
        w.kv("bbox_clipped", m->bbox_clipped);
        w.key("projected_corners");
        w.begin_array();
        for (const auto& c : m->projected_corners) {
            if (c)
                w.begin_array().value(c->first).value(c->second).end_array();
            else
                w.null();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

const ObjectViewMetadata* SceneViewData::find(const std::string& view_id, const std::string& instance_id) const {
    for (const auto& m : metadata)
        if (m.view_id == view_id && m.instance_id == instance_id) return &m;
    return nullptr;
}

rel::FrustumIndex SceneViewData::frustum_index() const {
    rel::FrustumIndex idx;
    for (const auto& m : metadata) idx[{m.view_id, m.instance_id}] = m.in_frustum;
    return idx;
}

std::vector<rel::ViewCamera> SceneViewData::view_cameras() const {
    std::vector<rel::ViewCamera> out;
    for (const auto& v : views) out.push_back({v.view_id, v.camera});
    return out;
}

SceneViewData parse_metadata(const std::string& text, const std::string& context) {
    nlohmann::json j = parse_json_text(text, context);
    SceneViewData data;
    for (const auto& jv : require_field(j, "views", context)) {
        ViewRecord v;
        v.view_id = require_string(jv, "view_id", context);
        auto cls = viewpoint_from_string(require_string(jv, "class", context));
        if (!cls) throw ParseError(context + ": unknown viewpoint class");
        v.cls = *cls;
        const auto& jc = require_field(jv, "camera", context);
        const auto& pos = require_field(jc, "position", context);
        v.camera.position = geom::Vec3(pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>());
        v.camera.yaw = require_number(jc, "yaw", context);
        v.camera.pitch = require_number(jc, "pitch", context);
        v.camera.fov_x = require_number(jc, "fov_x", context);
        v.camera.width = static_cast<int>(require_int(jc, "width", context));
        v.camera.height = static_cast<int>(require_int(jc, "height", context));
        data.views.push_back(std::move(v));
    }
    for (const auto& jm : require_field(j, "objects", context)) {
        ObjectViewMetadata m;
        m.instance_id = require_string(jm, "instance_id", context);
        m.view_id = require_string(jm, "view_id", context);
        m.in_frustum = require_bool(jm, "in_frustum", context);
        m.occlusion_ratio = require_number(jm, "occlusion_ratio", context);
        const auto& bb = require_field(jm, "bbox2", context);
        if (!bb.is_null())
            m.bbox2 = geom::Bbox2{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                                  bb[3].get<double>()};
        m.bbox_clipped = jm.value("bbox_clipped", false);
        if (jm.contains("projected_corners")) {
            const auto& pc = jm["projected_corners"];
            for (std::size_t k = 0; k < 8 && k < pc.size(); ++k)
                if (!pc[k].is_null())
                    m.projected_corners[k] = std::make_pair(pc[k][0].get<double>(), pc[k][1].get<double>());
        }
        data.metadata.push_back(std::move(m));
    }
    return data;
}

SceneViewData load_metadata(const std::string& path) { return parse_metadata(read_text_file(path), path); }

}  // namespace mvqa::render
