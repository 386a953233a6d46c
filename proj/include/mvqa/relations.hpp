#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/scene.hpp"

namespace mvqa::rel {

struct RelationParams {
    double epsilon = 0.1;             // cosine threshold; components with |cos| < epsilon are zeroed
    double contact_gap = 0.01;        // meters between bottom and top for contact
    double contact_overlap_frac = 0.25;  // of the smaller footprint
};

enum class Label {
    Front,
    Back,
    Left,
    Right,
    FrontLeft,
    FrontRight,
    BackLeft,
    BackRight,
    On,
    Under,
    CamLeft,
    CamRight,
    CamCloser,
    CamFarther,
};

const char* to_string(Label l);
std::optional<Label> label_from_string(const std::string& s);
bool is_horizontal(Label l);
bool is_camera(Label l);

// Direction of `other` relative to `ref`, expressed in ref's forward/right
// frame and discretized into the eight canonical bins. Requires
// ref.has_front; absent for coincident horizontal positions.
std::optional<Label> object_centric_relation(const scene::ObjectGeom& ref, const scene::ObjectGeom& other,
                                             const RelationParams& params = {});

// On(a,b): a rests on b — bottom-of-a near top-of-b and footprints
// overlapping by at least contact_overlap_frac of the smaller one.
// Under(a,b) is the inverse. Absent when neither holds.
std::optional<Label> contact_relation(const scene::ObjectGeom& a, const scene::ObjectGeom& b,
                                      const RelationParams& params = {});

struct Edge {
    std::string subject;  // "subject is <label> of object"
    std::string object;
    Label label;
};

inline bool operator==(const Edge& a, const Edge& b) {
    return a.subject == b.subject && a.object == b.object && a.label == b.label;
}

// Viewer-relative labels for the ordered pair (a, b), plus the symmetric
// counterparts for (b, a). Left/right uses projected-center u with a 1 px
// dead zone; closer/farther uses camera depth with a 1 cm dead zone. Throws
// when either center fails to project.
std::vector<Edge> camera_centric_relations(const geom::CameraModel& cam, const scene::ObjectGeom& a,
                                           const scene::ObjectGeom& b);

struct RelationGraph {
    enum class Frame { ObjectCentric, CameraCentric };
    Frame frame = Frame::ObjectCentric;
    std::string view_id;  // empty for the object-centric graph
    std::vector<std::string> nodes;
    std::vector<Edge> edges;  // sorted by (subject, object, label)

    // Neighbors over the undirected skeleton.
    std::map<std::string, std::vector<std::string>> adjacency() const;
};

// Minimal hop count between two nodes over the undirected skeleton of the
// graph; breadth-first search. Absent when unreachable.
std::optional<int> hop_distance(const RelationGraph& graph, const std::string& from, const std::string& to);

struct SceneGraphs {
    RelationGraph object_centric;
    std::vector<RelationGraph> camera_centric;  // one per view, in view order

    const RelationGraph* view_graph(const std::string& view_id) const;
};

// in_frustum per (view_id, instance_id); camera-centric edges are restricted
// to pairs visible in that view.
using FrustumIndex = std::map<std::pair<std::string, std::string>, bool>;

struct ViewCamera {
    std::string view_id;
    geom::CameraModel camera;
};

SceneGraphs build_relation_graphs(const std::vector<scene::ObjectGeom>& objects,
                                  const std::vector<ViewCamera>& views, const FrustumIndex& in_frustum,
                                  const RelationParams& params = {});

std::string graph_to_json(const RelationGraph& g);

}  // namespace mvqa::rel
