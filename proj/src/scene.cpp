#include "mvqa/scene.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "mvqa/json_io.hpp"

namespace mvqa::scene {

ThemeConfig ThemeConfig::load(const std::string& path) {
    nlohmann::json j = parse_json_file(path);
    ThemeConfig theme;
    theme.theme_id = require_string(j, "theme_id", path);
    std::string ctx = path + " theme '" + theme.theme_id + "'";

    const auto& jf = require_field(j, "floor", ctx);
    const auto& ext = require_field(jf, "extent", ctx + " floor");
    if (!ext.is_array() || ext.size() != 2) throw ParseError(ctx + ": floor.extent must be [x,y]");
    theme.floor.extent = geom::Vec2(ext[0].get<double>(), ext[1].get<double>());
    if (!(theme.floor.extent.x() > 0 && theme.floor.extent.y() > 0))
        throw ParseError(ctx + ": floor extent must be positive");
    theme.floor.material_tag = jf.value("material_tag", std::string("floor.generic"));

    if (j.contains("scale_range")) {
        const auto& sr = j["scale_range"];
        if (!sr.is_array() || sr.size() != 2) throw ParseError(ctx + ": scale_range must be [min,max]");
        theme.scale_lo = sr[0].get<double>();
        theme.scale_hi = sr[1].get<double>();
        if (!(theme.scale_lo > 0 && theme.scale_hi >= theme.scale_lo))
            throw ParseError(ctx + ": scale_range must satisfy 0 < min <= max");
    }

    if (j.contains("lighting")) {
        theme.lighting.intensity = j["lighting"].value("intensity", 1.0);
        theme.lighting.azimuth = j["lighting"].value("azimuth", 0.0);
    }

    for (const auto& js : j.value("object_specs", nlohmann::json::array())) {
        ObjectSpec spec;
        spec.category = require_string(js, "category", ctx + " object_spec");
        std::string sctx = ctx + " spec '" + spec.category + "'";
        const auto& count = require_field(js, "count", sctx);
        if (count.is_number_integer()) {
            spec.count_lo = spec.count_hi = count.get<int>();
        } else if (count.is_array() && count.size() == 2) {
            spec.count_lo = count[0].get<int>();
            spec.count_hi = count[1].get<int>();
        } else {
            throw ParseError(sctx + ": count must be an integer or [lo,hi]");
        }
        if (spec.count_lo < 0 || spec.count_hi < spec.count_lo)
            throw ParseError(sctx + ": count range is empty");

        const auto& jp = require_field(js, "placement", sctx);
        std::string kind = require_string(jp, "kind", sctx + " placement");
        if (kind == "deterministic") {
            GridPlacement grid;
            const auto& jg = require_field(jp, "grid", sctx + " placement");
            grid.rows = static_cast<int>(require_int(jg, "rows", sctx));
            grid.cols = static_cast<int>(require_int(jg, "cols", sctx));
            const auto& origin = require_field(jg, "origin", sctx);
            const auto& spacing = require_field(jg, "spacing", sctx);
            grid.origin = geom::Vec2(origin[0].get<double>(), origin[1].get<double>());
            grid.spacing = geom::Vec2(spacing[0].get<double>(), spacing[1].get<double>());
            grid.yaw = jg.value("yaw", 0.0);
            if (grid.rows < 1 || grid.cols < 1) throw ParseError(sctx + ": grid must be at least 1x1");
            spec.placement = grid;
        } else if (kind == "stochastic") {
            StochasticPlacement st;
            st.clearance = jp.value("clearance", 0.0);
            if (st.clearance < 0) throw ParseError(sctx + ": clearance must be >= 0");
            spec.placement = st;
        } else {
            throw ParseError(sctx + ": unknown placement kind '" + kind + "'");
        }

        for (const auto& ja : js.value("anchor_relations", nlohmann::json::array())) {
            AnchorSpec anchor;
            if (ja.contains("label") && !ja["label"].is_null()) anchor.label = ja["label"].get<std::string>();
            anchor.target_category = require_string(ja, "target_category", sctx + " anchor");
            const auto& dr = require_field(ja, "distance_range", sctx + " anchor");
            anchor.dist_lo = dr[0].get<double>();
            anchor.dist_hi = dr[1].get<double>();
            if (anchor.dist_lo < 0 || anchor.dist_hi < anchor.dist_lo)
                throw ParseError(sctx + ": anchor distance_range is empty");
            spec.anchors.push_back(std::move(anchor));
        }
        theme.specs.push_back(std::move(spec));
    }

    // Anchor targets must reference a category declared earlier in the spec
    // list, so placement can proceed in declaration order.
    for (std::size_t i = 0; i < theme.specs.size(); ++i) {
        for (const auto& anchor : theme.specs[i].anchors) {
            bool found = false;
            for (std::size_t k = 0; k < i; ++k)
                if (theme.specs[k].category == anchor.target_category) found = true;
            if (!found)
                throw ParseError(ctx + ": spec '" + theme.specs[i].category + "' anchors to '" +
                                 anchor.target_category + "' which is not declared before it");
        }
    }
    return theme;
}

void ThemeConfig::validate(const assets::AssetLibrary& lib) const {
    for (const auto& spec : specs) {
        if (!lib.find_category(spec.category))
            throw std::runtime_error("theme '" + theme_id + "': category '" + spec.category +
                                     "' not present in the asset library");
        if (lib.assets_in_category(spec.category).empty())
            throw std::runtime_error("theme '" + theme_id + "': category '" + spec.category +
                                     "' has no assets");
        for (const auto& anchor : spec.anchors) {
            if (!anchor.label || *anchor.label == "on" || *anchor.label == "under") continue;
            // Directional anchors need a fronted reference.
            for (const auto& id : lib.assets_in_category(anchor.target_category))
                if (!lib.asset(id).has_front)
                    throw std::runtime_error("theme '" + theme_id + "': spec '" + spec.category +
                                             "' uses directional anchor '" + *anchor.label +
                                             "' toward category '" + anchor.target_category +
                                             "' whose asset '" + id + "' has no front orientation");
        }
    }
}

namespace {

void write_placed_object(JsonWriter& w, const PlacedObject& o) {
    w.begin_object();
    w.kv("instance_id", o.instance_id);
    w.kv("asset_id", o.asset_id);
    w.key("position");
    w.begin_array().value(o.pose.position.x()).value(o.pose.position.y()).value(o.pose.position.z()).end_array();
    w.kv("yaw", o.pose.yaw);
    w.kv("scale", o.scale);
    w.kv("spec_index", o.spec_index);
    w.key("anchors");
    w.begin_array();
    for (const auto& a : o.anchors) {
        w.begin_object();
        w.kv("label", a.label);
        w.kv("target_instance", a.target_instance);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

}  // namespace

std::string SceneInstance::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.kv("scene_id", scene_id);
    w.kv("theme_id", theme_id);
    w.kv("seed", static_cast<std::uint64_t>(seed));
    w.key("floor");
    w.begin_object();
    w.key("extent");
    w.begin_array().value(floor.extent.x()).value(floor.extent.y()).end_array();
    w.kv("material_tag", floor.material_tag);
    w.end_object();
    w.key("lighting");
    w.begin_object();
    w.kv("intensity", lighting.intensity);
    w.kv("azimuth", lighting.azimuth);
    w.end_object();
    w.key("objects");
    w.begin_array();
    for (const auto& o : objects) write_placed_object(w, o);
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

SceneInstance SceneInstance::from_json_text(const std::string& text, const std::string& context) {
    nlohmann::json j = parse_json_text(text, context);
    SceneInstance s;
    s.scene_id = require_string(j, "scene_id", context);
    s.theme_id = require_string(j, "theme_id", context);
    s.seed = require_field(j, "seed", context).get<std::uint64_t>();
    const auto& jf = require_field(j, "floor", context);
    const auto& ext = require_field(jf, "extent", context);
    s.floor.extent = geom::Vec2(ext[0].get<double>(), ext[1].get<double>());
    s.floor.material_tag = jf.value("material_tag", std::string("floor.generic"));
    if (j.contains("lighting")) {
        s.lighting.intensity = j["lighting"].value("intensity", 1.0);
        s.lighting.azimuth = j["lighting"].value("azimuth", 0.0);
    }
    for (const auto& jo : j.value("objects", nlohmann::json::array())) {
        PlacedObject o;
        o.instance_id = require_string(jo, "instance_id", context);
        o.asset_id = require_string(jo, "asset_id", context);
        const auto& pos = require_field(jo, "position", context);
        o.pose.position = geom::Vec3(pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>());
        o.pose.yaw = require_number(jo, "yaw", context);
        o.scale = require_number(jo, "scale", context);
        o.spec_index = static_cast<int>(jo.value("spec_index", -1));
        for (const auto& ja : jo.value("anchors", nlohmann::json::array())) {
            AnchorBinding b;
            b.label = ja.value("label", std::string());
            b.target_instance = require_string(ja, "target_instance", context);
            o.anchors.push_back(std::move(b));
        }
        s.objects.push_back(std::move(o));
    }
    return s;
}

SceneInstance SceneInstance::from_file(const std::string& path) {
    return from_json_text(read_text_file(path), path);
}

std::vector<ObjectGeom> resolve_geometry(const SceneInstance& scene, const assets::AssetLibrary& lib) {
    std::vector<ObjectGeom> out;
    out.reserve(scene.objects.size());
    for (const auto& o : scene.objects) {
        const assets::AssetRecord& rec = lib.asset(o.asset_id);
        ObjectGeom g;
        g.instance_id = o.instance_id;
        g.asset = &rec;
        g.pose = o.pose;
        g.scale = o.scale;
        g.has_front = rec.has_front;
        // Local frame: +x forward with extent depth, +y with extent width,
        // +z up with extent height; bottom-center at the pose position.
        geom::Vec3 half(rec.dims.y() / 2.0, rec.dims.x() / 2.0, rec.dims.z() / 2.0);
        half *= o.scale;
        g.box.center = o.pose.position + geom::Vec3(0, 0, half.z());
        g.box.half_extents = half;
        g.box.yaw = o.pose.yaw;
        if (rec.shape.kind == assets::ShapeRef::Kind::Mesh) g.mesh = &lib.mesh(rec);
        out.push_back(std::move(g));
    }
    return out;
}

std::optional<double> ray_intersect_object(const geom::Ray& ray, const ObjectGeom& obj) {
    if (!obj.mesh) return geom::ray_intersect_box(ray, obj.box);
    // Bounding-box early out, then exact triangle test in the local frame.
    if (!geom::ray_intersect_box(ray, obj.box)) return std::nullopt;
    geom::Mat3 r = geom::yaw_rotation(obj.pose.yaw);
    geom::Ray local;
    local.origin = r.transpose() * (ray.origin - obj.pose.position) / obj.scale;
    local.direction = r.transpose() * ray.direction;
    std::optional<double> best;
    for (const auto& t : obj.mesh->triangles) {
        auto hit = geom::ray_intersect_triangle(local, obj.mesh->vertices[t[0]], obj.mesh->vertices[t[1]],
                                                obj.mesh->vertices[t[2]]);
        if (hit && (!best || *hit < *best)) best = hit;
    }
    if (!best) return std::nullopt;
    return *best * obj.scale;
}

}  // namespace mvqa::scene
