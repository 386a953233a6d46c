#include "mvqa/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mvqa::geom {

std::array<Vec3, 8> box_corners(const OrientedBox& box) {
    Mat3 r = yaw_rotation(box.yaw);
    std::array<Vec3, 8> out;
    int i = 0;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0})
                out[i++] = box.center + r * Vec3(sx * box.half_extents.x(), sy * box.half_extents.y(),
                                                 sz * box.half_extents.z());
    return out;
}

double TriMesh::surface_area() const {
    double area = 0.0;
    for (const auto& t : triangles) {
        Vec3 e1 = vertices[t[1]] - vertices[t[0]];
        Vec3 e2 = vertices[t[2]] - vertices[t[0]];
        area += 0.5 * e1.cross(e2).norm();
    }
    return area;
}

Mat3 CameraModel::world_from_cam() const {
    // Camera at yaw 0, pitch 0 looks along +x; image right is -y, image
    // down is -z. Pitch tilts about the camera's right axis.
    Mat3 base;
    base.col(0) = Vec3(0, -1, 0);
    base.col(1) = Vec3(0, 0, -1);
    base.col(2) = Vec3(1, 0, 0);
    return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3(0, -1, 0))).toRotationMatrix() *
           base;
}

std::optional<PixelPoint> project_point(const CameraModel& cam, const Vec3& p) {
    Mat3 w2c = cam.world_from_cam().transpose();
    Vec3 pc = w2c * (p - cam.position);
    if (pc.z() <= kNearPlane) return std::nullopt;
    double f = cam.focal();
    PixelPoint out;
    out.u = cam.width / 2.0 + f * pc.x() / pc.z();
    out.v = cam.height / 2.0 + f * pc.y() / pc.z();
    out.depth = pc.z();
    return out;
}

std::optional<double> ray_intersect_box(const Ray& ray, const OrientedBox& box) {
    // Slab test in the box local frame.
    Mat3 r = yaw_rotation(box.yaw);
    Vec3 o = r.transpose() * (ray.origin - box.center);
    Vec3 d = r.transpose() * ray.direction;

    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        double h = box.half_extents[axis];
        if (std::abs(d[axis]) < 1e-15) {
            if (o[axis] < -h || o[axis] > h) return std::nullopt;
            continue;
        }
        double inv = 1.0 / d[axis];
        double t0 = (-h - o[axis]) * inv;
        double t1 = (h - o[axis]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return std::nullopt;
    }
    if (t_far < 0.0) return std::nullopt;
    return t_near >= 0.0 ? t_near : t_far;
}

std::optional<double> ray_intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Moller-Trumbore with a relative epsilon for the determinant test.
    constexpr double kEps = 1e-12;
    Vec3 e1 = b - a;
    Vec3 e2 = c - a;
    Vec3 h = ray.direction.cross(e2);
    double det = e1.dot(h);
    double scale = e1.norm() * e2.norm();
    if (std::abs(det) < kEps * scale) return std::nullopt;  // parallel to triangle plane
    double f = 1.0 / det;
    Vec3 s = ray.origin - a;
    double u = f * s.dot(h);
    constexpr double kBary = 1e-9;
    if (u < -kBary || u > 1.0 + kBary) return std::nullopt;
    Vec3 q = s.cross(e1);
    double v = f * ray.direction.dot(q);
    if (v < -kBary || u + v > 1.0 + kBary) return std::nullopt;
    double t = f * e2.dot(q);
    if (t < 0.0) return std::nullopt;
    return t;
}

double iou(const Bbox2& a, const Bbox2& b) {
    double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return a == b ? 1.0 : 0.0;  // degenerate boxes are legal values
    return inter / uni;
}

namespace {

struct BoundsAccum {
    double u_min = std::numeric_limits<double>::infinity();
    double v_min = std::numeric_limits<double>::infinity();
    double u_max = -std::numeric_limits<double>::infinity();
    double v_max = -std::numeric_limits<double>::infinity();
    bool any = false;

    void add(const PixelPoint& p) {
        u_min = std::min(u_min, p.u);
        v_min = std::min(v_min, p.v);
        u_max = std::max(u_max, p.u);
        v_max = std::max(v_max, p.v);
        any = true;
    }
};

// Accumulates projected bounds over vertices and edges, splitting edges that
// cross the near plane at depth kNearPlane so partially-behind geometry still
// yields enclosing bounds.
std::optional<ProjectedBox> project_hull(const CameraModel& cam, const std::vector<Vec3>& vertices,
                                         const std::vector<std::pair<int, int>>& edges) {
    Mat3 w2c = cam.world_from_cam().transpose();
    std::vector<Vec3> pc(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) pc[i] = w2c * (vertices[i] - cam.position);

    auto pixel = [&](const Vec3& p) {
        PixelPoint out;
        double f = cam.focal();
        out.u = cam.width / 2.0 + f * p.x() / p.z();
        out.v = cam.height / 2.0 + f * p.y() / p.z();
        out.depth = p.z();
        return out;
    };

    BoundsAccum acc;
    for (const auto& p : pc)
        if (p.z() > kNearPlane) acc.add(pixel(p));
    for (const auto& [i, j] : edges) {
        const Vec3& a = pc[i];
        const Vec3& b = pc[j];
        bool fa = a.z() > kNearPlane;
        bool fb = b.z() > kNearPlane;
        if (fa == fb) continue;
        double s = (kNearPlane - a.z()) / (b.z() - a.z());
        Vec3 cut = a + s * (b - a);
        cut.z() = kNearPlane * (1.0 + 1e-12);
        acc.add(pixel(cut));
    }
    if (!acc.any) return std::nullopt;

    ProjectedBox out;
    out.unclipped = {acc.u_min, acc.v_min, acc.u_max, acc.v_max};
    out.bbox.x_min = std::clamp(acc.u_min, 0.0, static_cast<double>(cam.width));
    out.bbox.x_max = std::clamp(acc.u_max, 0.0, static_cast<double>(cam.width));
    out.bbox.y_min = std::clamp(acc.v_min, 0.0, static_cast<double>(cam.height));
    out.bbox.y_max = std::clamp(acc.v_max, 0.0, static_cast<double>(cam.height));
    out.clipped = acc.u_min < 0.0 || acc.v_min < 0.0 || acc.u_max > cam.width || acc.v_max > cam.height;
    return out;
}

}  // namespace

std::optional<ProjectedBox> project_box_to_bbox2(const CameraModel& cam, const OrientedBox& box) {
    auto corners = box_corners(box);
    std::vector<Vec3> verts(corners.begin(), corners.end());
    // Corner order is (sx,sy,sz) lexicographic; edges connect sign flips.
    static const std::vector<std::pair<int, int>> kEdges = {
        {0, 1}, {2, 3}, {4, 5}, {6, 7},  // z edges
        {0, 2}, {1, 3}, {4, 6}, {5, 7},  // y edges
        {0, 4}, {1, 5}, {2, 6}, {3, 7},  // x edges
    };
    return project_hull(cam, verts, kEdges);
}

std::optional<ProjectedBox> project_mesh_to_bbox2(const CameraModel& cam, const TriMesh& mesh,
                                                  const Pose3& pose, double scale) {
    Mat3 r = yaw_rotation(pose.yaw);
    std::vector<Vec3> verts(mesh.vertices.size());
    for (std::size_t i = 0; i < verts.size(); ++i) verts[i] = pose.position + r * (scale * mesh.vertices[i]);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const auto& t : mesh.triangles) {
        edges.emplace_back(t[0], t[1]);
        edges.emplace_back(t[1], t[2]);
        edges.emplace_back(t[2], t[0]);
    }
    return project_hull(cam, verts, edges);
}

std::array<Vec2, 4> footprint_corners(const OrientedBox& box) {
    double c = std::cos(box.yaw), s = std::sin(box.yaw);
    double hx = box.half_extents.x(), hy = box.half_extents.y();
    Vec2 center(box.center.x(), box.center.y());
    Vec2 ex(c * hx, s * hx);
    Vec2 ey(-s * hy, c * hy);
    return {center - ex - ey, center + ex - ey, center + ex + ey, center - ex + ey};
}

namespace {

double polygon_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return std::abs(a) / 2.0;
}

bool is_ccw(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return a >= 0.0;
}

}  // namespace

double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;
    std::vector<Vec2> clip = b;
    if (!is_ccw(clip)) std::reverse(clip.begin(), clip.end());
    std::vector<Vec2> poly = a;
    if (!is_ccw(poly)) std::reverse(poly.begin(), poly.end());

    for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i) {
        const Vec2& e0 = clip[i];
        const Vec2& e1 = clip[(i + 1) % clip.size()];
        Vec2 edge = e1 - e0;
        auto inside = [&](const Vec2& p) {
            return edge.x() * (p.y() - e0.y()) - edge.y() * (p.x() - e0.x()) >= -1e-12;
        };
        std::vector<Vec2> next;
        next.reserve(poly.size() + 1);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            const Vec2& cur = poly[j];
            const Vec2& prev = poly[(j + poly.size() - 1) % poly.size()];
            bool cin = inside(cur), pin = inside(prev);
            if (cin != pin) {
                Vec2 d = cur - prev;
                double denom = edge.x() * d.y() - edge.y() * d.x();
                double t = denom != 0.0
                               ? (edge.x() * (e0.y() - prev.y()) - edge.y() * (e0.x() - prev.x())) / denom
                               : 0.0;
                next.push_back(prev + t * d);
            }
            if (cin) next.push_back(cur);
        }
        poly = std::move(next);
    }
    return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

double footprint_overlap_area(const OrientedBox& a, const OrientedBox& b) {
    auto fa = footprint_corners(a);
    auto fb = footprint_corners(b);
    return convex_intersection_area({fa.begin(), fa.end()}, {fb.begin(), fb.end()});
}

TriMesh box_mesh(const Vec3& h) {
    TriMesh m;
    m.vertices = {
        {-h.x(), -h.y(), -h.z()}, {h.x(), -h.y(), -h.z()}, {h.x(), h.y(), -h.z()}, {-h.x(), h.y(), -h.z()},
        {-h.x(), -h.y(), h.z()},  {h.x(), -h.y(), h.z()},  {h.x(), h.y(), h.z()},  {-h.x(), h.y(), h.z()},
    };
    m.triangles = {
        {0, 2, 1}, {0, 3, 2},  // bottom (-z)
        {4, 5, 6}, {4, 6, 7},  // top (+z)
        {0, 1, 5}, {0, 5, 4},  // -y
        {2, 3, 7}, {2, 7, 6},  // +y
        {1, 2, 6}, {1, 6, 5},  // +x
        {3, 0, 4}, {3, 4, 7},  // -x
    };
    return m;
}

}  // namespace mvqa::geom
