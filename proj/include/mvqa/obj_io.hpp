#pragma once

#include <string>

#include "mvqa/geometry.hpp"

namespace mvqa::assets {

// Wavefront OBJ subset: 'v' and 'f' directives only. Faces may be polygons
// (fan-triangulated), indices are 1-based, negative indices count from the
// end. Everything else is ignored.
geom::TriMesh load_obj_mesh(const std::string& path);

void write_obj_mesh(const std::string& path, const geom::TriMesh& mesh);

}  // namespace mvqa::assets
