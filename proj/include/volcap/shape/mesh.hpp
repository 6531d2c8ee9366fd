#pragma once

#include <array>
#include <vector>

#include "volcap/core/types.hpp"

namespace volcap {

/// Triangle mesh with shared topology across registered instances.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

}  // namespace volcap
