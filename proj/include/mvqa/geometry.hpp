#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace mvqa::geom {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

// World frame is right-handed, z up. Yaw is counterclockwise from +x.
inline Mat3 yaw_rotation(double yaw) {
    return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

// Local forward axis of an upright object.
inline Vec3 forward_axis(double yaw) { return {std::cos(yaw), std::sin(yaw), 0.0}; }

// Right-hand side of an upright object facing along forward_axis.
inline Vec3 right_axis(double yaw) { return {std::sin(yaw), -std::cos(yaw), 0.0}; }

struct Pose3 {
    Vec3 position{0.0, 0.0, 0.0};
    double yaw = 0.0;  // radians, in [-pi, pi)
};

struct OrientedBox {
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 half_extents{0.5, 0.5, 0.5};  // all strictly positive
    double yaw = 0.0;
};

std::array<Vec3, 8> box_corners(const OrientedBox& box);

struct TriMesh {
    std::vector<Vec3> vertices;                  // local frame
    std::vector<std::array<int, 3>> triangles;   // CCW winding, outward normals

    double surface_area() const;
};

struct Ray {
    Vec3 origin{0.0, 0.0, 0.0};
    Vec3 direction{1.0, 0.0, 0.0};  // unit length
};

struct CameraModel {
    Vec3 position{0.0, 0.0, 0.0};
    double yaw = 0.0;
    double pitch = 0.0;    // radians in [-pi/2, pi/2]; negative looks down
    double fov_x = 1.5707963267948966;  // horizontal field of view, (0, pi)
    int width = 1024;
    int height = 768;

    // Square pixels: fy == fx, so the vertical FOV follows from fov_x and
    // the aspect ratio.
    double focal() const { return (width / 2.0) / std::tan(fov_x / 2.0); }

    // Columns are the camera axes in world coordinates. Camera frame is
    // CV-style: x right, y down, z forward. Built by explicit rotation
    // composition so a straight-down camera keeps a well-defined yaw.
    Mat3 world_from_cam() const;
};

struct Bbox2 {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    bool ordered() const { return x_min <= x_max && y_min <= y_max; }
};

inline bool operator==(const Bbox2& a, const Bbox2& b) {
    return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
}

struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;  // meters along the optical axis
};

// Depth at or below this counts as behind the camera.
inline constexpr double kNearPlane = 1e-6;

// Pinhole projection. Absent when the point is at or behind the camera
// plane; coordinates may fall outside the image bounds.
std::optional<PixelPoint> project_point(const CameraModel& cam, const Vec3& p);

// Smallest t >= 0 with origin + t*direction on the box surface.
std::optional<double> ray_intersect_box(const Ray& ray, const OrientedBox& box);

// Moller-Trumbore, boundary-inclusive.
std::optional<double> ray_intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

double iou(const Bbox2& a, const Bbox2& b);

struct ProjectedBox {
    Bbox2 bbox;            // clipped to [0,width] x [0,height]
    Bbox2 unclipped;
    bool clipped = false;  // true when the unclipped extent exceeded the image
};

// Tight pixel bounds of the shape. Edges crossing the near plane are clipped
// at depth kNearPlane so the bounds enclose every projectable surface point.
std::optional<ProjectedBox> project_box_to_bbox2(const CameraModel& cam, const OrientedBox& box);
std::optional<ProjectedBox> project_mesh_to_bbox2(const CameraModel& cam, const TriMesh& mesh,
                                                  const Pose3& pose, double scale);

// 2D footprint of an upright oriented box (yaw-aware rectangle).
std::array<Vec2, 4> footprint_corners(const OrientedBox& box);

// Intersection area of two convex polygons (Sutherland-Hodgman + shoelace).
double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

double footprint_overlap_area(const OrientedBox& a, const OrientedBox& b);

// Twelve-triangle triangulation of a box, outward CCW winding. Local frame,
// centered at the origin; apply the box yaw/center externally when needed.
TriMesh box_mesh(const Vec3& half_extents);

}  // namespace mvqa::geom
