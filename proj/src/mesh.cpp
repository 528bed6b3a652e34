#include "descent/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace descent {

double Mesh::signed_area(int t) const {
    const auto& tri = triangles[t];
    const auto& a = vertices[tri[0]];
    const auto& b = vertices[tri[1]];
    const auto& c = vertices[tri[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
    return sum;
}

bool on_lshape_boundary(double x, double y) {
    constexpr double tol = 1e-12;
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
    if (near(x, -1.0) || near(y, -1.0)) return true;
    if (near(x, 1.0) && y <= tol) return true;
    if (near(y, 1.0) && x <= tol) return true;
    if (near(x, 0.0) && y >= -tol) return true;
    if (near(y, 0.0) && x >= -tol) return true;
    return false;
}

Mesh build_lshape(int level) {
    if (level < 0) throw std::invalid_argument("build_lshape: level must be nonnegative");
    if (level > 12) throw std::invalid_argument("build_lshape: level > 12 exceeds capacity");

    const int n = 1 << level;
    const double h = 1.0 / n;

    Mesh mesh;
    mesh.level = level;

    // Lattice points (ix,iy)*h with ix,iy in [-n,n]; a point belongs to the
    // closed domain iff ix <= 0 or iy <= 0.
    std::map<std::pair<int, int>, int> index;
    for (int iy = -n; iy <= n; ++iy) {
        for (int ix = -n; ix <= n; ++ix) {
            if (ix <= 0 || iy <= 0) {
                index[{ix, iy}] = mesh.num_vertices();
                mesh.vertices.push_back({ix * h, iy * h});
            }
        }
    }

    // Cells with lower-left corner (ix,iy) lie inside the domain iff ix<0 or iy<0.
    for (int iy = -n; iy < n; ++iy) {
        for (int ix = -n; ix < n; ++ix) {
            if (ix < 0 || iy < 0) {
                const int bl = index.at({ix, iy});
                const int br = index.at({ix + 1, iy});
                const int tr = index.at({ix + 1, iy + 1});
                const int tl = index.at({ix, iy + 1});
                mesh.triangles.push_back({bl, br, tr});
                mesh.triangles.push_back({bl, tr, tl});
            }
        }
    }

    mesh.boundary_vertex.resize(mesh.vertices.size());
    for (int v = 0; v < mesh.num_vertices(); ++v)
        mesh.boundary_vertex[v] = on_lshape_boundary(mesh.vertices[v][0], mesh.vertices[v][1]);
    return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
    Mesh fine;
    fine.level = mesh.level + 1;
    fine.vertices = mesh.vertices;
    fine.triangles.reserve(4 * mesh.triangles.size());

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int idx = fine.num_vertices();
        fine.vertices.push_back({0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                                 0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])});
        midpoint.emplace(key, idx);
        return idx;
    };

    for (const auto& tri : mesh.triangles) {
        const int v0 = tri[0], v1 = tri[1], v2 = tri[2];
        const int m01 = mid(v0, v1), m12 = mid(v1, v2), m20 = mid(v2, v0);
        fine.triangles.push_back({v0, m01, m20});
        fine.triangles.push_back({m01, v1, m12});
        fine.triangles.push_back({m20, m12, v2});
        fine.triangles.push_back({m01, m12, m20});
    }

    fine.boundary_vertex.resize(fine.vertices.size());
    for (int v = 0; v < fine.num_vertices(); ++v)
        fine.boundary_vertex[v] = on_lshape_boundary(fine.vertices[v][0], fine.vertices[v][1]);
    return fine;
}

DofMap interior_dof_map(const Mesh& mesh) {
    DofMap map;
    map.vertex_to_dof.assign(mesh.vertices.size(), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.boundary_vertex[v]) {
            map.vertex_to_dof[v] = map.count++;
            map.dof_to_vertex.push_back(v);
        }
    }
    return map;
}

}  // namespace descent
