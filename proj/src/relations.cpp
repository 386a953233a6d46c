#include "mvqa/relations.hpp"

#include <algorithm>
#include <deque>

#include "mvqa/json_io.hpp"

namespace mvqa::rel {

const char* to_string(Label l) {
    switch (l) {
        case Label::Front: return "front";
        case Label::Back: return "back";
        case Label::Left: return "left";
        case Label::Right: return "right";
        case Label::FrontLeft: return "front-left";
        case Label::FrontRight: return "front-right";
        case Label::BackLeft: return "back-left";
        case Label::BackRight: return "back-right";
        case Label::On: return "on";
        case Label::Under: return "under";
        case Label::CamLeft: return "cam-left";
        case Label::CamRight: return "cam-right";
        case Label::CamCloser: return "cam-closer";
        case Label::CamFarther: return "cam-farther";
    }
    return "?";
}

std::optional<Label> label_from_string(const std::string& s) {
    static const std::map<std::string, Label> table = {
        {"front", Label::Front},
        {"back", Label::Back},
        {"left", Label::Left},
        {"right", Label::Right},
        {"front-left", Label::FrontLeft},
        {"front-right", Label::FrontRight},
        {"back-left", Label::BackLeft},
        {"back-right", Label::BackRight},
        {"on", Label::On},
        {"under", Label::Under},
        {"cam-left", Label::CamLeft},
        {"cam-right", Label::CamRight},
        {"cam-closer", Label::CamCloser},
        {"cam-farther", Label::CamFarther},
    };
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

bool is_horizontal(Label l) {
    switch (l) {
        case Label::Front:
        case Label::Back:
        case Label::Left:
        case Label::Right:
        case Label::FrontLeft:
        case Label::FrontRight:
        case Label::BackLeft:
        case Label::BackRight: return true;
        default: return false;
    }
}

bool is_camera(Label l) {
    return l == Label::CamLeft || l == Label::CamRight || l == Label::CamCloser || l == Label::CamFarther;
}

std::optional<Label> object_centric_relation(const scene::ObjectGeom& ref, const scene::ObjectGeom& other,
                                             const RelationParams& params) {
    if (!ref.has_front) throw std::invalid_argument("object_centric_relation: reference has no front");
    geom::Vec3 disp = other.box.center - ref.box.center;
    disp.z() = 0.0;
    double norm = disp.norm();
    if (norm < 1e-6) return std::nullopt;  // coincident in the horizontal plane
    geom::Vec3 d = disp / norm;

    double f = d.dot(geom::forward_axis(ref.pose.yaw));
    double r = d.dot(geom::right_axis(ref.pose.yaw));
    // Strict inequality: |cos| exactly at epsilon keeps the component.
    if (std::abs(f) < params.epsilon) f = 0.0;
    if (std::abs(r) < params.epsilon) r = 0.0;
    if (f == 0.0 && r == 0.0) return std::nullopt;

    if (f > 0.0 && r == 0.0) return Label::Front;
    if (f < 0.0 && r == 0.0) return Label::Back;
    if (f == 0.0 && r > 0.0) return Label::Right;
    if (f == 0.0 && r < 0.0) return Label::Left;
    if (f > 0.0 && r > 0.0) return Label::FrontRight;
    if (f > 0.0 && r < 0.0) return Label::FrontLeft;
    if (f < 0.0 && r > 0.0) return Label::BackRight;
    return Label::BackLeft;
}

std::optional<Label> contact_relation(const scene::ObjectGeom& a, const scene::ObjectGeom& b,
                                      const RelationParams& params) {
    auto resting = [&](const scene::ObjectGeom& top, const scene::ObjectGeom& bottom) {
        if (std::abs(top.bottom_z() - bottom.top_z()) > params.contact_gap) return false;
        double overlap = geom::footprint_overlap_area(top.box, bottom.box);
        double min_area = std::min(top.box.half_extents.x() * top.box.half_extents.y(),
                                   bottom.box.half_extents.x() * bottom.box.half_extents.y()) *
                          4.0;
        return overlap >= params.contact_overlap_frac * min_area;
    };
    if (resting(a, b)) return Label::On;
    if (resting(b, a)) return Label::Under;
    return std::nullopt;
}

std::vector<Edge> camera_centric_relations(const geom::CameraModel& cam, const scene::ObjectGeom& a,
                                           const scene::ObjectGeom& b) {
    auto pa = geom::project_point(cam, a.box.center);
    auto pb = geom::project_point(cam, b.box.center);
    if (!pa || !pb)
        throw std::runtime_error("camera_centric_relations: object center out of frustum (" +
                                 (pa ? b.instance_id : a.instance_id) + ")");
    constexpr double kPixelDeadZone = 1.0;
    constexpr double kDepthDeadZone = 0.01;
    std::vector<Edge> out;
    if (pa->u < pb->u - kPixelDeadZone) {
        out.push_back({a.instance_id, b.instance_id, Label::CamLeft});
        out.push_back({b.instance_id, a.instance_id, Label::CamRight});
    } else if (pb->u < pa->u - kPixelDeadZone) {
        out.push_back({b.instance_id, a.instance_id, Label::CamLeft});
        out.push_back({a.instance_id, b.instance_id, Label::CamRight});
    }
    if (pa->depth < pb->depth - kDepthDeadZone) {
        out.push_back({a.instance_id, b.instance_id, Label::CamCloser});
        out.push_back({b.instance_id, a.instance_id, Label::CamFarther});
    } else if (pb->depth < pa->depth - kDepthDeadZone) {
        out.push_back({b.instance_id, a.instance_id, Label::CamCloser});
        out.push_back({a.instance_id, b.instance_id, Label::CamFarther});
    }
    return out;
}

namespace {

bool edge_less(const Edge& x, const Edge& y) {
    if (x.subject != y.subject) return x.subject < y.subject;
    if (x.object != y.object) return x.object < y.object;
    return static_cast<int>(x.label) < static_cast<int>(y.label);
}

}  // namespace

std::map<std::string, std::vector<std::string>> RelationGraph::adjacency() const {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& n : nodes) adj[n];
    for (const auto& e : edges) {
        adj[e.subject].push_back(e.object);
        adj[e.object].push_back(e.subject);
    }
    for (auto& [_, nbrs] : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
}

std::optional<int> hop_distance(const RelationGraph& graph, const std::string& from, const std::string& to) {
    if (from == to) return 0;
    auto adj = graph.adjacency();
    if (!adj.count(from) || !adj.count(to)) return std::nullopt;
    std::map<std::string, int> dist;
    dist[from] = 0;
    std::deque<std::string> queue{from};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        for (const auto& nbr : adj[cur]) {
            if (dist.count(nbr)) continue;
            dist[nbr] = dist[cur] + 1;
            if (nbr == to) return dist[nbr];
            queue.push_back(nbr);
        }
    }
    return std::nullopt;
}

const RelationGraph* SceneGraphs::view_graph(const std::string& view_id) const {
    for (const auto& g : camera_centric)
        if (g.view_id == view_id) return &g;
    return nullptr;
}

SceneGraphs build_relation_graphs(const std::vector<scene::ObjectGeom>& objects,
                                  const std::vector<ViewCamera>& views, const FrustumIndex& in_frustum,
                                  const RelationParams& params) {
    SceneGraphs out;
    out.object_centric.frame = RelationGraph::Frame::ObjectCentric;
    for (const auto& o : objects) out.object_centric.nodes.push_back(o.instance_id);
    std::sort(out.object_centric.nodes.begin(), out.object_centric.nodes.end());

    for (const auto& ref : objects) {
        for (const auto& other : objects) {
            if (ref.instance_id == other.instance_id) continue;
            if (ref.has_front) {
                auto label = object_centric_relation(ref, other, params);
                if (label) out.object_centric.edges.push_back({other.instance_id, ref.instance_id, *label});
            }
        }
    }
    // Contact edges once per unordered pair, both directions materialized.
    for (std::size_t i = 0; i < objects.size(); ++i) {
        for (std::size_t j = i + 1; j < objects.size(); ++j) {
            auto c = contact_relation(objects[i], objects[j], params);
            if (!c) continue;
            if (*c == Label::On) {
                out.object_centric.edges.push_back({objects[i].instance_id, objects[j].instance_id, Label::On});
                out.object_centric.edges.push_back({objects[j].instance_id, objects[i].instance_id, Label::Under});
            } else {
                out.object_centric.edges.push_back({objects[j].instance_id, objects[i].instance_id, Label::On});
                out.object_centric.edges.push_back({objects[i].instance_id, objects[j].instance_id, Label::Under});
            }
        }
    }
    std::sort(out.object_centric.edges.begin(), out.object_centric.edges.end(), edge_less);

    for (const auto& view : views) {
        RelationGraph g;
        g.frame = RelationGraph::Frame::CameraCentric;
        g.view_id = view.view_id;
        std::vector<const scene::ObjectGeom*> visible;
        for (const auto& o : objects) {
            auto it = in_frustum.find({view.view_id, o.instance_id});
            if (it != in_frustum.end() && it->second) {
                g.nodes.push_back(o.instance_id);
                visible.push_back(&o);
            }
        }
        std::sort(g.nodes.begin(), g.nodes.end());
        for (std::size_t i = 0; i < visible.size(); ++i)
            for (std::size_t j = i + 1; j < visible.size(); ++j) {
                auto edges = camera_centric_relations(view.camera, *visible[i], *visible[j]);
                g.edges.insert(g.edges.end(), edges.begin(), edges.end());
            }
        std::sort(g.edges.begin(), g.edges.end(), edge_less);
        out.camera_centric.push_back(std::move(g));
    }
    return out;
}

std::string graph_to_json(const RelationGraph& g) {
    JsonWriter w;
    w.begin_object();
    w.kv("frame", g.frame == RelationGraph::Frame::ObjectCentric ? "object_centric" : "camera_centric");
    if (g.frame == RelationGraph::Frame::CameraCentric) w.kv("view_id", g.view_id);
    w.key("nodes");
    w.begin_array();
    for (const auto& n : g.nodes) w.value(n);
    w.end_array();
    w.key("edges");
    w.begin_array();
    for (const auto& e : g.edges) {
        w.begin_object();
        w.kv("subject", e.subject);
        w.kv("object", e.object);
        w.kv("label", to_string(e.label));
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

}  // namespace mvqa::rel
