#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "descent/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

using namespace descent;

namespace {

// Independent boundary test: membership on the eight unit-length boundary
// segments of the L-shape, written out one by one.
bool boundary_oracle(double x, double y) {
    const double tol = 1e-12;
    auto on_seg = [&](double ax, double ay, double bx, double by) {
        if (ax == bx) return std::abs(x - ax) <= tol && y >= std::min(ay, by) - tol &&
                             y <= std::max(ay, by) + tol;
        return std::abs(y - ay) <= tol && x >= std::min(ax, bx) - tol &&
               x <= std::max(ax, bx) + tol;
    };
    return on_seg(-1, -1, 0, -1) || on_seg(0, -1, 1, -1)    // bottom
        || on_seg(1, -1, 1, 0)                              // right (lower half only)
        || on_seg(1, 0, 0, 0) || on_seg(0, 0, 0, 1)         // reentrant
        || on_seg(0, 1, -1, 1)                              // top (left half only)
        || on_seg(-1, 1, -1, 0) || on_seg(-1, 0, -1, -1);   // left
}

// Canonical form for comparing meshes up to ordering: sorted vertex set and
// sorted triangle set with each triangle rotated so its smallest vertex leads.
auto canonical(const Mesh& m) {
    std::multiset<std::pair<double, double>> verts;
    for (const auto& v : m.vertices) verts.insert({v[0], v[1]});
    std::multiset<std::array<double, 6>> tris;
    for (const auto& t : m.triangles) {
        std::array<std::array<double, 2>, 3> p = {m.vertices[t[0]], m.vertices[t[1]],
                                                  m.vertices[t[2]]};
        int lo = 0;
        for (int i = 1; i < 3; ++i)
            if (p[i] < p[lo]) lo = i;
        tris.insert({p[lo][0], p[lo][1], p[(lo + 1) % 3][0], p[(lo + 1) % 3][1],
                     p[(lo + 2) % 3][0], p[(lo + 2) % 3][1]});
    }
    return std::make_pair(verts, tris);
}

void check_edge_manifold(const Mesh& m) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e) ++count[std::minmax(t[e], t[(e + 1) % 3])];
    for (const auto& [edge, c] : count) {
        CHECK((c == 1 || c == 2));
        if (c == 1) {
            // boundary edge: both endpoints on the boundary
            CHECK(m.boundary_vertex[edge.first]);
            CHECK(m.boundary_vertex[edge.second]);
        }
    }
}

}  // namespace

TEST_CASE("level 0 mesh: 6 triangles, 8 vertices, all boundary") {
    const Mesh m = build_lshape(0);
    CHECK(m.num_triangles() == 6);
    CHECK(m.num_vertices() == 8);
    for (int v = 0; v < m.num_vertices(); ++v) {
        CHECK(m.boundary_vertex[v] == 1);
        CHECK(boundary_oracle(m.vertices[v][0], m.vertices[v][1]));
    }
    CHECK(interior_dof_map(m).count == 0);
}

TEST_CASE("triangle counts quadruple: 6*4^level") {
    CHECK(build_lshape(1).num_triangles() == 24);
    CHECK(build_lshape(2).num_triangles() == 96);
    CHECK(build_lshape(6).num_triangles() == 24576);
}

TEST_CASE("total area is 3 and orientation is positive at several levels") {
    for (int level : {0, 1, 2, 3, 4}) {
        const Mesh m = build_lshape(level);
        CHECK(m.total_area() == doctest::Approx(3.0).epsilon(1e-13));
        CHECK(std::abs(m.total_area() - 3.0) <= 1e-12);
        for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
    }
}

TEST_CASE("boundary flags agree with the segment oracle") {
    const Mesh m = build_lshape(3);
    for (int v = 0; v < m.num_vertices(); ++v)
        CHECK(static_cast<bool>(m.boundary_vertex[v]) ==
              boundary_oracle(m.vertices[v][0], m.vertices[v][1]));
}

TEST_CASE("edge manifold property") {
    for (int level : {0, 1, 2, 3}) check_edge_manifold(build_lshape(level));
}

TEST_CASE("refinement: counts, area, flags") {
    const Mesh coarse = build_lshape(0);
    const Mesh fine = refine_uniform(coarse);
    CHECK(fine.num_triangles() == 24);
    CHECK(fine.level == 1);
    CHECK(std::abs(fine.total_area() - 3.0) <= 1e-12);
    check_edge_manifold(fine);
    for (int v = 0; v < fine.num_vertices(); ++v)
        CHECK(static_cast<bool>(fine.boundary_vertex[v]) ==
              boundary_oracle(fine.vertices[v][0], fine.vertices[v][1]));
}

TEST_CASE("refinement commutes with construction") {
    for (int level : {0, 1, 2}) {
        const Mesh direct = build_lshape(level + 1);
        const Mesh refined = refine_uniform(build_lshape(level));
        CHECK(canonical(direct) == canonical(refined));
    }
}

TEST_CASE("interior dof map: level 1 has 5 dofs, indices gap-free") {
    const Mesh m = build_lshape(1);
    const DofMap dofs = interior_dof_map(m);
    CHECK(dofs.count == 5);

    // enumeration oracle: count lattice points off the boundary
    int interior = 0;
    for (const auto& v : m.vertices)
        if (!boundary_oracle(v[0], v[1])) ++interior;
    CHECK(interior == 5);

    std::set<int> seen;
    for (int v = 0; v < m.num_vertices(); ++v) {
        const int d = dofs.vertex_to_dof[v];
        if (m.boundary_vertex[v]) {
            CHECK(d == -1);
        } else {
            CHECK(d >= 0);
            CHECK(d < dofs.count);
            CHECK(dofs.dof_to_vertex[d] == v);
            seen.insert(d);
        }
    }
    CHECK(static_cast<int>(seen.size()) == dofs.count);
}

TEST_CASE("capacity guard") {
    CHECK_THROWS_AS(build_lshape(13), std::invalid_argument);
    CHECK_THROWS_AS(build_lshape(-1), std::invalid_argument);
}
