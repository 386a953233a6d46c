#include <doctest.h>

#include <cmath>
#include <set>

#include "mvqa/relations.hpp"
#include "mvqa/rng.hpp"
#include "oracles.hpp"

using namespace mvqa;
using namespace mvqa::rel;
using scene::ObjectGeom;

namespace {

ObjectGeom make_obj(const std::string& id, double x, double y, double yaw = 0.0, bool has_front = false,
                    double hx = 0.25, double hy = 0.25, double hz = 0.5, double z_bottom = 0.0) {
    ObjectGeom o;
    o.instance_id = id;
    o.pose.position = geom::Vec3(x, y, z_bottom);
    o.pose.yaw = yaw;
    o.has_front = has_front;
    o.box.center = geom::Vec3(x, y, z_bottom + hz);
    o.box.half_extents = geom::Vec3(hx, hy, hz);
    o.box.yaw = yaw;
    return o;
}

// Independent label-from-angle classification. The angle is measured from
// the reference forward axis toward its right-hand side; bin boundaries sit
// at arcsin(eps) on either side of each cardinal direction.
std::optional<Label> label_for_angle(double phi_deg, double eps) {
    double a = std::asin(eps) * 180.0 / M_PI;
    double phi = std::fmod(phi_deg, 360.0);
    if (phi < 0) phi += 360.0;
    auto strictly_inside = [&](double center) {
        double d = std::abs(std::remainder(phi - center, 360.0));
        return d < a;
    };
    bool near_0 = strictly_inside(0), near_90 = strictly_inside(90);
    bool near_180 = strictly_inside(180), near_270 = strictly_inside(270);
    if (near_0) return Label::Front;
    if (near_90) return Label::Right;
    if (near_180) return Label::Back;
    if (near_270) return Label::Left;
    if (phi < 90) return Label::FrontRight;
    if (phi < 180) return Label::BackRight;
    if (phi < 270) return Label::BackLeft;
    return Label::FrontLeft;
}

// Angle of `other` in ref's frame via an explicit 2D rotation matrix.
double pair_angle_deg(const ObjectGeom& ref, const ObjectGeom& other) {
    double dx = other.box.center.x() - ref.box.center.x();
    double dy = other.box.center.y() - ref.box.center.y();
    double c = std::cos(-ref.pose.yaw), s = std::sin(-ref.pose.yaw);
    double fx = c * dx - s * dy;   // component along forward
    double fy = s * dx + c * dy;   // component along left (+y in local frame)
    double phi = std::atan2(-fy, fx) * 180.0 / M_PI;  // toward the right hand
    return phi < 0 ? phi + 360.0 : phi;
}

ObjectGeom at_angle(const ObjectGeom& ref, double phi_deg, double dist = 2.0) {
    double phi = phi_deg * M_PI / 180.0;
    geom::Vec3 dir = std::cos(phi) * geom::forward_axis(ref.pose.yaw) +
                     std::sin(phi) * geom::right_axis(ref.pose.yaw);
    geom::Vec3 p = ref.box.center + dist * dir;
    return make_obj("other", p.x(), p.y());
}

}  // namespace

TEST_CASE("object_centric_relation cardinal and paper threshold examples") {
    ObjectGeom ref = make_obj("ref", 0, 0, 0.0, true);
    CHECK(object_centric_relation(ref, make_obj("o", 2, 0)) == Label::Front);
    CHECK(object_centric_relation(ref, make_obj("o", -2, 0)) == Label::Back);
    CHECK(object_centric_relation(ref, make_obj("o", 0, -2)) == Label::Right);
    CHECK(object_centric_relation(ref, make_obj("o", 0, 2)) == Label::Left);

    // Lateral cosine 0.05 (< 0.1) is zeroed; the result stays Front.
    double r = 0.05, f = std::sqrt(1 - r * r);
    CHECK(object_centric_relation(ref, make_obj("o", 2 * f, -2 * r)) == Label::Front);

    // 45 degrees between forward and right.
    double c = std::sqrt(0.5);
    CHECK(object_centric_relation(ref, make_obj("o", 2 * c, -2 * c)) == Label::FrontRight);
}

TEST_CASE("object_centric_relation epsilon boundary is strict") {
    ObjectGeom ref = make_obj("ref", 0, 0, 0.0, true);
    auto with_forward_cos = [&](double fc) {
        double rc = std::sqrt(1 - fc * fc);
        return make_obj("o", 3 * fc, -3 * rc);
    };
    CHECK(object_centric_relation(ref, with_forward_cos(0.1 - 1e-6)) == Label::Right);
    CHECK(object_centric_relation(ref, with_forward_cos(0.1)) == Label::FrontRight);
    CHECK(object_centric_relation(ref, with_forward_cos(0.1 + 1e-6)) == Label::FrontRight);
}

TEST_CASE("object_centric_relation coincident positions yield no relation") {
    ObjectGeom ref = make_obj("ref", 1, 1, 0.3, true);
    ObjectGeom other = make_obj("o", 1, 1);
    other.box.center.z() = 3.0;  // stacked straight above
    CHECK_FALSE(object_centric_relation(ref, other).has_value());
}

TEST_CASE("object_centric_relation agrees with the angle-sweep oracle") {
    // Sweep [0, 360) in 0.1-degree steps for several reference yaws.
    for (double yaw : {0.0, 0.7, -2.1}) {
        ObjectGeom ref = make_obj("ref", 0.5, -0.25, yaw, true);
        for (int i = 0; i < 3600; ++i) {
            double phi = i * 0.1;
            auto got = object_centric_relation(ref, at_angle(ref, phi));
            auto want = label_for_angle(phi, 0.1);
            REQUIRE(got.has_value() == want.has_value());
            if (got) CHECK(*got == *want);
        }
    }
}

TEST_CASE("object_centric_relation matches the oracle on random pairs") {
    Rng rng(201);
    for (int i = 0; i < 10000; ++i) {
        ObjectGeom ref = make_obj("ref", rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI), true);
        ObjectGeom other = make_obj("o", rng.uniform(-5, 5), rng.uniform(-5, 5));
        double dist = std::hypot(other.box.center.x() - ref.box.center.x(),
                                 other.box.center.y() - ref.box.center.y());
        if (dist < 1e-5) continue;
        auto got = object_centric_relation(ref, other);
        auto want = label_for_angle(pair_angle_deg(ref, other), 0.1);
        REQUIRE(got.has_value() == want.has_value());
        if (got) CHECK(*got == *want);
    }
}

TEST_CASE("displacement antisymmetry maps labels to their opposites") {
    Rng rng(202);
    auto opposite = [](Label l) {
        switch (l) {
            case Label::Front: return Label::Back;
            case Label::Back: return Label::Front;
            case Label::Left: return Label::Right;
            case Label::Right: return Label::Left;
            case Label::FrontLeft: return Label::BackRight;
            case Label::FrontRight: return Label::BackLeft;
            case Label::BackLeft: return Label::FrontRight;
            default: return Label::FrontLeft;
        }
    };
    for (int i = 0; i < 2000; ++i) {
        ObjectGeom ref = make_obj("ref", 0, 0, rng.uniform(-M_PI, M_PI), true);
        double dx = rng.uniform(-4, 4), dy = rng.uniform(-4, 4);
        if (std::hypot(dx, dy) < 1e-3) continue;
        auto fwd = object_centric_relation(ref, make_obj("o", dx, dy));
        auto rev = object_centric_relation(ref, make_obj("o", -dx, -dy));
        REQUIRE(fwd.has_value() == rev.has_value());
        if (fwd) CHECK(*rev == opposite(*fwd));
    }
}

TEST_CASE("rotating the reference by +90 degrees quarter-turns the label") {
    // Yaw is counterclockwise, so a +90-degree turn moves a formerly-front
    // object to the reference's right-hand side.
    Rng rng(203);
    auto quarter = [](Label l) {
        switch (l) {
            case Label::Front: return Label::Right;
            case Label::Right: return Label::Back;
            case Label::Back: return Label::Left;
            case Label::Left: return Label::Front;
            case Label::FrontLeft: return Label::FrontRight;
            case Label::FrontRight: return Label::BackRight;
            case Label::BackRight: return Label::BackLeft;
            default: return Label::FrontLeft;  // BackLeft
        }
    };
    for (int i = 0; i < 2000; ++i) {
        double yaw = rng.uniform(-2.0, 2.0);
        ObjectGeom ref = make_obj("ref", 0, 0, yaw, true);
        ObjectGeom rot = make_obj("ref", 0, 0, yaw + M_PI / 2, true);
        ObjectGeom other = make_obj("o", rng.uniform(-4, 4), rng.uniform(-4, 4));
        if (other.box.center.head<2>().norm() < 1e-3) continue;
        auto base = object_centric_relation(ref, other);
        auto turned = object_centric_relation(rot, other);
        REQUIRE(base.has_value() == turned.has_value());
        if (base) CHECK(*turned == quarter(*base));
    }
}

TEST_CASE("translation invariance of object-centric labels") {
    Rng rng(204);
    for (int i = 0; i < 1000; ++i) {
        double yaw = rng.uniform(-M_PI, M_PI);
        double dx = rng.uniform(-4, 4), dy = rng.uniform(-4, 4);
        if (std::hypot(dx, dy) < 1e-3) continue;
        geom::Vec3 shift(rng.uniform(-50, 50), rng.uniform(-50, 50), 0);
        ObjectGeom ref = make_obj("ref", 0, 0, yaw, true);
        ObjectGeom other = make_obj("o", dx, dy);
        ObjectGeom ref2 = make_obj("ref", shift.x(), shift.y(), yaw, true);
        ObjectGeom other2 = make_obj("o", dx + shift.x(), dy + shift.y());
        CHECK(object_centric_relation(ref, other) == object_centric_relation(ref2, other2));
    }
}

TEST_CASE("contact_relation cup on table") {
    // Table top at z=0.75; cup base exactly there, footprint inside.
    ObjectGeom table = make_obj("table", 0, 0, 0, false, 0.6, 0.4, 0.375);
    ObjectGeom cup = make_obj("cup", 0.1, 0.05, 0, false, 0.04, 0.04, 0.06, 0.75);
    CHECK(contact_relation(cup, table) == Label::On);
    CHECK(contact_relation(table, cup) == Label::Under);
    // Floating half a meter above: no contact.
    ObjectGeom floating = make_obj("cup", 0.1, 0.05, 0, false, 0.04, 0.04, 0.06, 1.25);
    CHECK_FALSE(contact_relation(floating, table).has_value());
}

TEST_CASE("contact_relation footprint overlap threshold") {
    // Bottom box: 1x1 footprint, top at z=1. Top box: 2x2 footprint resting
    // at z=1, shifted so the intersection is 30% (then 20%) of the smaller
    // footprint.
    ObjectGeom bottom = make_obj("b", 0.5, 0.5, 0, false, 0.5, 0.5, 0.5);
    auto top_with_overlap = [&](double frac) {
        // Intersection width along x: frac (full y coverage of the 1x1), so
        // the 2x2 box spans x in [1-frac, 3-frac].
        double cx = 2.0 - frac;
        return make_obj("t", cx, 0.5, 0, false, 1.0, 1.0, 0.25, 1.0);
    };
    CHECK(contact_relation(top_with_overlap(0.30), bottom) == Label::On);
    CHECK_FALSE(contact_relation(top_with_overlap(0.20), bottom).has_value());
    // On/Under duality on random stacks.
    Rng rng(205);
    for (int i = 0; i < 500; ++i) {
        ObjectGeom a = make_obj("a", rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-M_PI, M_PI), false,
                                rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), 0.5, 1.0);
        auto ab = contact_relation(a, bottom);
        auto ba = contact_relation(bottom, a);
        if (ab == Label::On) CHECK(ba == Label::Under);
        if (!ab) CHECK_FALSE(ba.has_value());
    }
}

TEST_CASE("camera_centric_relations left/right and closer/farther") {
    geom::CameraModel cam;
    cam.position = geom::Vec3(0, 0, 1);
    cam.width = 1024;
    cam.height = 768;
    cam.fov_x = M_PI / 2;
    // At yaw 0, +x is forward and image-left is +y.
    ObjectGeom a = make_obj("a", 5, 2, 0, false);
    ObjectGeom b = make_obj("b", 5, -2, 0, false);
    auto edges = camera_centric_relations(cam, a, b);
    std::set<std::string> got;
    for (const auto& e : edges) got.insert(std::string(to_string(e.label)) + ":" + e.subject + ">" + e.object);
    CHECK(got.count("cam-left:a>b"));
    CHECK(got.count("cam-right:b>a"));
    CHECK_FALSE(got.count("cam-closer:a>b"));  // equal depth: dead zone

    ObjectGeom near = make_obj("n", 4, 0, 0, false);
    ObjectGeom far = make_obj("f", 9, 0, 0, false);
    auto edges2 = camera_centric_relations(cam, far, near);
    std::set<std::string> got2;
    for (const auto& e : edges2) got2.insert(std::string(to_string(e.label)) + ":" + e.subject + ">" + e.object);
    CHECK(got2.count("cam-closer:n>f"));
    CHECK(got2.count("cam-farther:f>n"));
}

TEST_CASE("camera_centric_relations equal depth within 1cm yields neither") {
    geom::CameraModel cam;
    cam.position = geom::Vec3(0, 0, 1);
    ObjectGeom a = make_obj("a", 5.0, 1, 0, false);
    ObjectGeom b = make_obj("b", 5.005, -1, 0, false);
    for (const auto& e : camera_centric_relations(cam, a, b)) {
        CHECK(e.label != Label::CamCloser);
        CHECK(e.label != Label::CamFarther);
    }
}

TEST_CASE("camera_centric_relations throws for out-of-frustum objects") {
    geom::CameraModel cam;
    cam.position = geom::Vec3(0, 0, 1);
    ObjectGeom behind = make_obj("x", -5, 0, 0, false);
    ObjectGeom front = make_obj("y", 5, 0, 0, false);
    CHECK_THROWS(camera_centric_relations(cam, behind, front));
}

TEST_CASE("camera_centric_relations agrees with a transform-and-compare oracle") {
    Rng rng(206);
    geom::CameraModel cam;
    cam.position = geom::Vec3(-3, 1, 2);
    cam.yaw = 0.4;
    cam.pitch = -0.2;
    for (int i = 0; i < 2000; ++i) {
        ObjectGeom a = make_obj("a", rng.uniform(0, 8), rng.uniform(-4, 4), 0, false);
        ObjectGeom b = make_obj("b", rng.uniform(0, 8), rng.uniform(-4, 4), 0, false);
        auto pa = oracle::project_homogeneous(cam, a.box.center);
        auto pb = oracle::project_homogeneous(cam, b.box.center);
        if (!pa || !pb) continue;
        auto edges = camera_centric_relations(cam, a, b);
        auto has = [&](const std::string& subj, Label l) {
            for (const auto& e : edges)
                if (e.subject == subj && e.label == l) return true;
            return false;
        };
        CHECK(has("a", Label::CamLeft) == (pa->u < pb->u - 1.0));
        CHECK(has("b", Label::CamLeft) == (pb->u < pa->u - 1.0));
        CHECK(has("a", Label::CamCloser) == (pa->depth < pb->depth - 0.01));
        CHECK(has("b", Label::CamFarther) == (pa->depth < pb->depth - 0.01));
    }
}

TEST_CASE("build_relation_graphs on degenerate scenes") {
    RelationParams params;
    std::vector<ObjectGeom> one = {make_obj("a", 0, 0, 0, true)};
    auto g1 = build_relation_graphs(one, {}, {}, params);
    CHECK(g1.object_centric.nodes.size() == 1);
    CHECK(g1.object_centric.edges.empty());

    // Two objects, neither with a front, no contact: edgeless.
    std::vector<ObjectGeom> two = {make_obj("a", 0, 0, 0, false), make_obj("b", 3, 0, 0, false)};
    auto g2 = build_relation_graphs(two, {}, {}, params);
    CHECK(g2.object_centric.nodes.size() == 2);
    CHECK(g2.object_centric.edges.empty());
}

TEST_CASE("build_relation_graphs equals brute-force pairwise recomputation") {
    Rng rng(207);
    RelationParams params;
    std::vector<ObjectGeom> objs;
    for (int i = 0; i < 8; ++i)
        objs.push_back(make_obj("obj_" + std::to_string(i), rng.uniform(-4, 4), rng.uniform(-4, 4),
                                rng.uniform(-M_PI, M_PI), i % 2 == 0));
    // Stack one object on another to get contact edges.
    objs.push_back(make_obj("obj_8", objs[0].box.center.x(), objs[0].box.center.y(), 0, false, 0.1, 0.1, 0.1,
                            objs[0].top_z()));

    geom::CameraModel cam;
    cam.position = geom::Vec3(-10, 0, 3);
    rel::FrustumIndex frustum;
    for (const auto& o : objs) frustum[{"v0", o.instance_id}] = geom::project_point(cam, o.box.center).has_value();

    auto graphs = build_relation_graphs(objs, {{"v0", cam}}, frustum, params);

    std::set<std::string> got;
    for (const auto& e : graphs.object_centric.edges)
        got.insert(e.subject + "|" + e.object + "|" + to_string(e.label));
    std::set<std::string> want;
    for (const auto& ref : objs)
        for (const auto& other : objs) {
            if (ref.instance_id == other.instance_id) continue;
            if (ref.has_front) {
                auto l = object_centric_relation(ref, other, params);
                if (l) want.insert(other.instance_id + "|" + ref.instance_id + "|" + to_string(*l));
            }
            auto c = contact_relation(other, ref, params);
            if (c == Label::On) {
                want.insert(other.instance_id + "|" + ref.instance_id + "|on");
                want.insert(ref.instance_id + "|" + other.instance_id + "|under");
            }
        }
    CHECK(got == want);

    // Camera graph restricted to in-frustum nodes and consistent pairwise.
    REQUIRE(graphs.camera_centric.size() == 1);
    const auto& cg = graphs.camera_centric[0];
    std::size_t visible = 0;
    for (const auto& [key, in] : frustum)
        if (in) ++visible;
    CHECK(cg.nodes.size() == visible);
}

TEST_CASE("hop_distance BFS basics") {
    RelationGraph g;
    g.nodes = {"a", "b", "c", "d"};
    g.edges = {{"a", "b", Label::Front}, {"b", "c", Label::Left}};
    CHECK(hop_distance(g, "a", "a") == 0);
    CHECK(hop_distance(g, "a", "b") == 1);
    CHECK(hop_distance(g, "a", "c") == 2);
    CHECK_FALSE(hop_distance(g, "a", "d").has_value());
}

TEST_CASE("graph dump is deterministic json") {
    RelationGraph g;
    g.nodes = {"a", "b"};
    g.edges = {{"a", "b", Label::Front}};
    CHECK(graph_to_json(g) == graph_to_json(g));
    CHECK(graph_to_json(g).find("\"frame\":\"object_centric\"") != std::string::npos);
}
