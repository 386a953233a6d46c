#include "mvqa/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvqa/json_io.hpp"

namespace mvqa::assets {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

geom::TriMesh load_obj_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");

    geom::TriMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) fail(path, lineno, "malformed vertex line");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tok == "f") {
            std::vector<int> idx;
            std::string ref;
            while (ss >> ref) {
                // Face elements may be v, v/vt, v//vn, v/vt/vn; only the
                // vertex index matters here.
                std::size_t slash = ref.find('/');
                std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
                int v = 0;
                try {
                    v = std::stoi(head);
                } catch (...) {
                    fail(path, lineno, "malformed face index '" + ref + "'");
                }
                if (v == 0) fail(path, lineno, "face index 0 is invalid");
                int resolved = v > 0 ? v - 1 : static_cast<int>(mesh.vertices.size()) + v;
                if (resolved < 0 || resolved >= static_cast<int>(mesh.vertices.size()))
                    fail(path, lineno, "face index " + std::to_string(v) + " out of range");
                idx.push_back(resolved);
            }
            if (idx.size() < 3) fail(path, lineno, "face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                std::array<int, 3> tri{idx[0], idx[k], idx[k + 1]};
                geom::Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
                geom::Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
                if (e1.cross(e2).norm() < 1e-12) fail(path, lineno, "degenerate (zero-area) face");
                mesh.triangles.push_back(tri);
            }
        }
        // All other directives (vn, vt, o, g, s, mtllib, usemtl, #, ...) ignored.
    }
    if (mesh.triangles.empty()) throw ParseError(path + ": mesh has no faces");
    for (const auto& v : mesh.vertices)
        if (!v.allFinite()) throw ParseError(path + ": non-finite vertex");
    return mesh;
}

void write_obj_mesh(const std::string& path, const geom::TriMesh& mesh) {
    std::string out;
    for (const auto& v : mesh.vertices) {
        out += "v " + format_real(v.x()) + " " + format_real(v.y()) + " " + format_real(v.z()) + "\n";
    }
    for (const auto& t : mesh.triangles) {
        out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " +
               std::to_string(t[2] + 1) + "\n";
    }
    write_text_file(path, out);
}

}  // namespace mvqa::assets
