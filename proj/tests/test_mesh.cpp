#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "helfrich/mesh.hpp"
#include "helfrich/util.hpp"

using namespace helfrich;

namespace {

PrimitiveSpec icosphere(double r, int level) {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Icosphere;
    s.radius = r;
    s.level = level;
    return s;
}

PrimitiveSpec disk(double r, int level) {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Disk;
    s.radius = r;
    s.level = level;
    return s;
}

}  // namespace

TEST_CASE("icosphere level 0 is the icosahedron") {
    TriMesh m = generate_primitive(icosphere(1.0, 0));
    CHECK(m.n_vertices() == 12);
    CHECK(m.n_faces() == 20);
    CHECK(m.boundary_loops().empty());
    CHECK(validate(m).ok());
    for (const auto& v : m.vertices) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refine quadruples faces and preserves parents") {
    TriMesh m0 = generate_primitive(icosphere(1.0, 0));
    TriMesh m1 = refine(m0);
    CHECK(m1.n_faces() == 80);
    CHECK(m1.n_vertices() == 42);
    CHECK(m1.topo->euler_characteristic() == 2);
    for (int v = 0; v < m0.n_vertices(); ++v)
        CHECK((m1.vertices[v] - m0.vertices[v]).norm() == doctest::Approx(0.0));
    CHECK(validate(m1).ok());
}

TEST_CASE("disk has one boundary loop on the circle") {
    TriMesh m = generate_primitive(disk(1.0, 3));
    REQUIRE(m.boundary_loops().size() == 1);
    CHECK(validate(m).ok());
    for (int v : m.boundary_loops()[0]) {
        CHECK(m.vertices[v].head<2>().norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.vertices[v].z() == 0.0);
    }
}

TEST_CASE("disk refinement doubles the boundary count") {
    TriMesh m = generate_primitive(disk(1.0, 2));
    std::size_t before = m.boundary_loops()[0].size();
    TriMesh r = refine(m);
    CHECK(r.boundary_loops()[0].size() == 2 * before);
}

TEST_CASE("cylinder has two loops and Euler characteristic zero") {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Cylinder;
    s.radius = 1.0;
    s.height = 1.0;
    s.level = 2;
    TriMesh m = generate_primitive(s);
    CHECK(m.boundary_loops().size() == 2);
    CHECK(m.topo->euler_characteristic() == 0);
    CHECK(validate(m).ok());
}

TEST_CASE("torus is closed with Euler characteristic zero") {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Torus;
    s.radius = 1.0;
    s.minor_radius = 0.3;
    s.level = 1;
    TriMesh m = generate_primitive(s);
    CHECK(m.boundary_loops().empty());
    CHECK(m.topo->euler_characteristic() == 0);
    CHECK(validate(m).ok());
}

TEST_CASE("icosphere area converges to 4 pi r^2 at order >= 2") {
    std::vector<double> err, hmax;
    for (int level = 0; level <= 4; ++level) {
        TriMesh m = generate_primitive(icosphere(1.0, level));
        err.push_back(4.0 * std::numbers::pi - m.total_area());
        double h = 0;
        for (const auto& [a, b] : m.topo->edges)
            h = std::max(h, (m.vertices[a] - m.vertices[b]).norm());
        hmax.push_back(h);
    }
    // least-squares slope of log err against log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        double x = std::log(hmax[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(err.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= 2.0);
}

TEST_CASE("validation flags constructed defects") {
    // flipped face
    TriMesh ico = generate_primitive(icosphere(1.0, 1));
    auto faces = ico.faces();
    std::swap(faces[0][0], faces[0][1]);
    TriMesh flipped = make_mesh(ico.vertices, faces);
    ValidationReport rep = validate(flipped);
    bool found = false;
    for (const auto& issue : rep.issues)
        if (issue.kind == ValidationIssue::Kind::OrientationConflict) found = true;
    CHECK(found);

    // zero-area face
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 0.0, 0.0}};
    std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 3, 1}};
    ValidationReport rep2 = validate(make_mesh(v, f));
    bool degenerate = false;
    for (const auto& issue : rep2.issues)
        if (issue.kind == ValidationIssue::Kind::DegenerateFace) degenerate = true;
    CHECK(degenerate);

    CHECK(validate(generate_primitive(icosphere(1.0, 2))).ok());
}

TEST_CASE("mesh io round-trips") {
    TriMesh m = generate_primitive(icosphere(1.0, 1));
    auto dir = std::filesystem::temp_directory_path() / "helfrich_mesh_io";
    std::filesystem::create_directories(dir);

    SUBCASE("native json is bit-exact") {
        auto path = (dir / "m.json").string();
        save_mesh(m, path);
        TriMesh r = load_mesh(path);
        REQUIRE(r.n_vertices() == m.n_vertices());
        for (int v = 0; v < m.n_vertices(); ++v) {
            CHECK(r.vertices[v].x() == m.vertices[v].x());
            CHECK(r.vertices[v].y() == m.vertices[v].y());
            CHECK(r.vertices[v].z() == m.vertices[v].z());
        }
    }
    SUBCASE("obj and off round-trip to 1e-6 relative") {
        for (const char* name : {"m.obj", "m.off"}) {
            auto path = (dir / name).string();
            save_mesh(m, path);
            TriMesh r = load_mesh(path);
            REQUIRE(r.n_faces() == m.n_faces());
            for (int v = 0; v < m.n_vertices(); ++v)
                CHECK((r.vertices[v] - m.vertices[v]).norm() <= 1e-6 * m.vertices[v].norm());
        }
    }
}

TEST_CASE("invalid primitive parameters are rejected") {
    PrimitiveSpec s = icosphere(-1.0, 0);
    CHECK_THROWS_AS(generate_primitive(s), RejectedInput);
    s = icosphere(1.0, 9);
    CHECK_THROWS_AS(generate_primitive(s), RejectedInput);
}

TEST_CASE("refinement preserves orientability and Euler characteristic") {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::SphericalCap;
    s.radius = 1.0;
    s.cap_angle = 0.5 * std::numbers::pi;
    s.level = 1;
    TriMesh m = generate_primitive(s);
    int chi = m.topo->euler_characteristic();
    TriMesh r = refine(refine(m));
    CHECK(r.topo->euler_characteristic() == chi);
    CHECK(validate(r).ok());
}
