#pragma once

// Test-side reference implementations, deliberately independent of the code
// paths they check.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mvqa/geometry.hpp"

namespace oracle {

using mvqa::geom::Bbox2;
using mvqa::geom::CameraModel;
using mvqa::geom::OrientedBox;
using mvqa::geom::Ray;
using mvqa::geom::TriMesh;
using mvqa::geom::Vec3;

// Projection via an explicit 3x4 homogeneous matrix, assembled from scratch.
inline std::optional<mvqa::geom::PixelPoint> project_homogeneous(const CameraModel& cam, const Vec3& p) {
    double f = (cam.width / 2.0) / std::tan(cam.fov_x / 2.0);
    Eigen::Matrix3d k;
    k << f, 0, cam.width / 2.0, 0, f, cam.height / 2.0, 0, 0, 1;

    Eigen::Matrix3d r_wc =
        (Eigen::AngleAxisd(cam.yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(cam.pitch, Vec3(0, -1, 0)))
            .toRotationMatrix();
    Eigen::Matrix3d base;
    base.col(0) = Vec3(0, -1, 0);
    base.col(1) = Vec3(0, 0, -1);
    base.col(2) = Vec3(1, 0, 0);
    Eigen::Matrix3d r = (r_wc * base).transpose();

    Eigen::Matrix<double, 3, 4> ext;
    ext.block<3, 3>(0, 0) = r;
    ext.col(3) = -r * cam.position;
    Eigen::Vector4d ph(p.x(), p.y(), p.z(), 1.0);
    Eigen::Vector3d uvw = k * (ext * ph);
    if (uvw.z() <= 1e-6) return std::nullopt;
    return mvqa::geom::PixelPoint{uvw.x() / uvw.z(), uvw.y() / uvw.z(), uvw.z()};
}

// Plane intersection followed by a barycentric inside test.
inline std::optional<double> triangle_plane_barycentric(const Ray& ray, const Vec3& a, const Vec3& b,
                                                        const Vec3& c) {
    Vec3 n = (b - a).cross(c - a);
    double denom = n.dot(ray.direction);
    if (std::abs(denom) < 1e-14 * n.norm()) return std::nullopt;
    double t = n.dot(a - ray.origin) / denom;
    if (t < 0.0) return std::nullopt;
    Vec3 p = ray.origin + t * ray.direction;

    Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
    double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    double d20 = v2.dot(v0), d21 = v2.dot(v1);
    double det = d00 * d11 - d01 * d01;
    double v = (d11 * d20 - d01 * d21) / det;
    double w = (d00 * d21 - d01 * d20) / det;
    double u = 1.0 - v - w;
    const double eps = 1e-9;
    if (u < -eps || v < -eps || w < -eps) return std::nullopt;
    return t;
}

// Box intersection by brute force over its 12-triangle mesh in world space.
inline std::optional<double> box_via_mesh(const Ray& ray, const OrientedBox& box) {
    TriMesh m = mvqa::geom::box_mesh(box.half_extents);
    Eigen::Matrix3d r = mvqa::geom::yaw_rotation(box.yaw);
    std::optional<double> best;
    for (const auto& tri : m.triangles) {
        Vec3 a = box.center + r * m.vertices[tri[0]];
        Vec3 b = box.center + r * m.vertices[tri[1]];
        Vec3 c = box.center + r * m.vertices[tri[2]];
        auto t = triangle_plane_barycentric(ray, a, b, c);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

// Bounds via plain 8-corner projection (no near-plane edge handling, valid
// for fully-in-front boxes).
inline std::optional<Bbox2> bbox_corner_enumeration(const CameraModel& cam, const OrientedBox& box) {
    auto corners = mvqa::geom::box_corners(box);
    bool any = false;
    Bbox2 bb{1e300, 1e300, -1e300, -1e300};
    for (const auto& c : corners) {
        auto p = project_homogeneous(cam, c);
        if (!p) continue;
        any = true;
        bb.x_min = std::min(bb.x_min, p->u);
        bb.y_min = std::min(bb.y_min, p->v);
        bb.x_max = std::max(bb.x_max, p->u);
        bb.y_max = std::max(bb.y_max, p->v);
    }
    if (!any) return std::nullopt;
    return bb;
}

// All-pairs shortest paths over an undirected unweighted graph, as a cross
// check for BFS hop counts. -1 encodes unreachable.
inline std::vector<std::vector<int>> floyd_warshall(int n, const std::vector<std::pair<int, int>>& edges) {
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (int i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& [a, b] : edges) {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    for (auto& row : d)
        for (auto& v : row)
            if (v >= inf) v = -1;
    return d;
}

}  // namespace oracle
