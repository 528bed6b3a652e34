#pragma once

#include <array>
#include <vector>

namespace descent {

// Conforming triangulation of the L-shaped domain (-1,1)^2 \ [0,1]x[0,1].
// Immutable after construction; total area is 3 and all triangles are CCW.
struct Mesh {
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;  // vertex index triples, CCW
    std::vector<char> boundary_vertex;          // 1 iff the vertex lies on the boundary
    int level = 0;                              // refinement count

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    double signed_area(int t) const;
    double total_area() const;
};

// True iff (x,y) lies on one of the boundary segments of the L-shape
// (outer square sides plus the reentrant segments x=0, 0<=y<=1 and y=0, 0<=x<=1),
// within tolerance 1e-12.
bool on_lshape_boundary(double x, double y);

// Structured mesh: each of the three unit squares making up the domain is a
// 2^level x 2^level grid of cells, each cell split along its bottom-left ->
// top-right diagonal. 6*4^level triangles. Rejects level < 0 or level > 12.
Mesh build_lshape(int level);

// Red refinement: every triangle is split into 4 congruent children via edge
// midpoints; parent vertices keep their positions, boundary flags are
// recomputed, level is incremented.
Mesh refine_uniform(const Mesh& mesh);

// Bijection between interior (non-boundary) vertices and dof indices 0..count-1,
// in vertex order.
struct DofMap {
    std::vector<int> vertex_to_dof;  // -1 for boundary vertices
    std::vector<int> dof_to_vertex;
    int count = 0;
};

DofMap interior_dof_map(const Mesh& mesh);

}  // namespace descent
