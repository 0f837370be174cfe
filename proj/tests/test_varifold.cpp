#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "helfrich/mesh.hpp"
#include "helfrich/util.hpp"
#include "helfrich/varifold.hpp"

using namespace helfrich;

namespace {

constexpr double kPi = std::numbers::pi;

TriMesh icosphere(double r, int level) {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Icosphere;
    s.radius = r;
    s.level = level;
    return generate_primitive(s);
}

TriMesh plane_patch(double extent, int level) {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::PlanePatch;
    s.extent = extent;
    s.level = level;
    return generate_primitive(s);
}

// two coincident copies of a sheet; reverse = flip the second one's winding
TriMesh doubled(const TriMesh& sheet, bool reverse_second) {
    std::vector<Vec3> v = sheet.vertices;
    std::vector<std::array<int, 3>> f = sheet.faces();
    int off = sheet.n_vertices();
    for (const auto& p : sheet.vertices) v.push_back(p);
    for (const auto& t : sheet.faces()) {
        if (reverse_second)
            f.push_back({t[0] + off, t[2] + off, t[1] + off});
        else
            f.push_back({t[0] + off, t[1] + off, t[2] + off});
    }
    return make_mesh(std::move(v), std::move(f));
}

}  // namespace

TEST_CASE("from_mesh on an embedded sphere") {
    TriMesh m = icosphere(1.0, 3);
    OrientedVarifold V = from_mesh(m);
    CHECK(V.atoms.size() == static_cast<std::size_t>(m.n_vertices()));
    for (const auto& at : V.atoms) {
        CHECK(at.theta_plus == 1);
        CHECK(at.theta_minus == 0);
        CHECK(at.xi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(V.mass() == doctest::Approx(4.0 * kPi).epsilon(0.01));
    CHECK(V.mass() == doctest::Approx(m.total_area()).epsilon(1e-12));
}

TEST_CASE("coincident sheets merge into densities") {
    TriMesh sheet = plane_patch(1.0, 3);
    SUBCASE("same orientation: theta+ = 2") {
        OrientedVarifold V = from_mesh(doubled(sheet, false));
        CHECK(V.atoms.size() == static_cast<std::size_t>(sheet.n_vertices()));
        for (const auto& at : V.atoms) {
            CHECK(at.theta_plus == 2);
            CHECK(at.theta_minus == 0);
        }
        CHECK(V.mass() == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("opposite orientation: theta+ = theta- = 1") {
        OrientedVarifold V = from_mesh(doubled(sheet, true));
        CHECK(V.atoms.size() == static_cast<std::size_t>(sheet.n_vertices()));
        for (const auto& at : V.atoms) {
            CHECK(at.theta_plus == 1);
            CHECK(at.theta_minus == 1);
        }
    }
}

TEST_CASE("test_integral pairings") {
    TriMesh m = icosphere(1.0, 3);
    OrientedVarifold V = from_mesh(m);
    SUBCASE("constant function integrates the mass") {
        double val = test_integral(V, [](const Vec3&, const Vec3&) { return 1.0; });
        CHECK(val == doctest::Approx(4.0 * kPi).epsilon(0.01));
    }
    SUBCASE("radial alignment on the outward sphere") {
        auto Phi = [](const Vec3& x, const Vec3& xi) { return xi.dot(x.normalized()); };
        CHECK(test_integral(V, Phi) == doctest::Approx(4.0 * kPi).epsilon(0.01));
    }
    SUBCASE("orientation flip changes the sign") {
        OrientedVarifold W = V;
        for (auto& at : W.atoms) std::swap(at.theta_plus, at.theta_minus);
        auto Phi = [](const Vec3& x, const Vec3& xi) { return xi.dot(x.normalized()); };
        CHECK(test_integral(W, Phi) == doctest::Approx(-4.0 * kPi).epsilon(0.01));
    }
}

TEST_CASE("test_integral is linear and additive over disjoint atoms") {
    TriMesh m = icosphere(1.0, 2);
    OrientedVarifold V = from_mesh(m);
    auto Phi1 = [](const Vec3& x, const Vec3&) { return x.x() * x.x(); };
    auto Phi2 = [](const Vec3& x, const Vec3& xi) { return xi.z() + 0.3 * x.y(); };
    double a = 0.7, b = -1.3;
    auto combo = [&](const Vec3& x, const Vec3& xi) { return a * Phi1(x, xi) + b * Phi2(x, xi); };
    CHECK(test_integral(V, combo) ==
          doctest::Approx(a * test_integral(V, Phi1) + b * test_integral(V, Phi2))
              .epsilon(1e-12));

    OrientedVarifold front, back;
    for (const auto& at : V.atoms) (at.x.z() > 0 ? front : back).atoms.push_back(at);
    CHECK(test_integral(front, Phi1) + test_integral(back, Phi1) ==
          doctest::Approx(test_integral(V, Phi1)).epsilon(1e-12));
}

TEST_CASE("varifold distance") {
    TriMesh m2 = icosphere(1.0, 2);
    TriMesh m4 = icosphere(1.0, 4);
    OrientedVarifold V2 = from_mesh(m2), V4 = from_mesh(m4);
    Vec3 lo, hi;
    shared_bbox(V2, V4, lo, hi);
    auto dict = default_probe_dictionary(lo, hi);
    CHECK(dict.size() == 32);

    SUBCASE("identity gives zero") { CHECK(varifold_distance(V2, V2, dict) == 0.0); }
    SUBCASE("refinement sweep decreases, below 0.15") {
        OrientedVarifold V3 = from_mesh(icosphere(1.0, 3));
        double d24 = varifold_distance(V2, V4, dict);
        double d34 = varifold_distance(V3, V4, dict);
        CHECK(d24 < 0.15);
        CHECK(d34 < d24);
    }
    SUBCASE("symmetry and triangle inequality") {
        OrientedVarifold V3 = from_mesh(icosphere(1.0, 3));
        double d23 = varifold_distance(V2, V3, dict);
        double d34 = varifold_distance(V3, V4, dict);
        double d24 = varifold_distance(V2, V4, dict);
        CHECK(varifold_distance(V4, V2, dict) == doctest::Approx(d24));
        CHECK(d24 <= d23 + d34 + 1e-12);
    }
    SUBCASE("empty dictionary is rejected") {
        CHECK_THROWS_AS(varifold_distance(V2, V4, {}), RejectedInput);
    }
}

TEST_CASE("density ratio") {
    SUBCASE("flat plane through the center gives 1") {
        TriMesh sheet = plane_patch(4.0, 4);
        Vec3 center(2.0, 2.0, 0.0);
        CHECK(density_ratio(sheet, center, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("double plane gives 2") {
        TriMesh dbl = doubled(plane_patch(4.0, 4), false);
        CHECK(density_ratio(dbl, Vec3(2, 2, 0), 0.5) == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("ball missing the mesh gives 0") {
        TriMesh sheet = plane_patch(1.0, 2);
        CHECK(density_ratio(sheet, Vec3(0.5, 0.5, 5.0), 0.5) == 0.0);
    }
    SUBCASE("sphere centered on the surface gives exactly 1 in the limit") {
        // ambient ball of radius sigma cuts a cap of area pi sigma^2
        TriMesh m = icosphere(1.0, 5);
        Vec3 center = m.vertices[0];
        CHECK(density_ratio(m, center, 0.5) == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("interior point ratio approaches 1 from discretization") {
        TriMesh m = icosphere(1.0, 4);
        Vec3 center = m.vertices[7];
        double prev_err = 1e9;
        for (double sigma : {0.2, 0.1, 0.05}) {
            double err = std::abs(density_ratio(m, center, sigma) - 1.0);
            CHECK(err < std::max(prev_err + 0.05, 0.05));
            prev_err = err;
        }
        CHECK(prev_err < 0.05);
    }
}

TEST_CASE("bad points") {
    SUBCASE("smooth sphere has none at epsilon0 = 1") {
        TriMesh m = icosphere(1.0, 3);
        ConcentrationReport rep = bad_points(m, 1.0, 0.2);
        CHECK(rep.bad_points.empty());
        CHECK(rep.cluster_count == 0);
        // c ~ |A|^2 * cap area = 2 * pi rho^2 ~ 0.25
        for (int v = 0; v < m.n_vertices(); ++v) {
            CHECK(rep.concentration[v] > 0.1);
            CHECK(rep.concentration[v] < 0.5);
        }
    }
    SUBCASE("cone apex concentrates curvature") {
        // cone of slope 1: apex angle defect pi (fan of 8 faces at 45 degrees)
        std::vector<Vec3> v = {{0, 0, 0.5}};
        const int n = 16;
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * kPi * k / n;
            v.emplace_back(0.5 * std::cos(th), 0.5 * std::sin(th), 0.0);
        }
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * kPi * k / n;
            v.emplace_back(std::cos(th), std::sin(th), -0.5);
        }
        std::vector<std::array<int, 3>> f;
        for (int k = 0; k < n; ++k) f.push_back({0, 1 + k, 1 + (k + 1) % n});
        for (int k = 0; k < n; ++k) {
            int a = 1 + k, b = 1 + (k + 1) % n;
            int c = 1 + n + k, d = 1 + n + (k + 1) % n;
            f.push_back({a, d, c});
            f.push_back({a, b, d});
        }
        TriMesh cone = make_mesh(v, f);
        ConcentrationReport rep = bad_points(cone, 0.3, 0.3);
        REQUIRE(!rep.bad_points.empty());
        CHECK(rep.bad_points[0] == 0);  // the apex
        CHECK(rep.cluster_count >= 1);
    }
    SUBCASE("flat disk has no bad points at any epsilon") {
        PrimitiveSpec s;
        s.kind = PrimitiveKind::Disk;
        s.radius = 1.0;
        s.level = 3;
        ConcentrationReport rep = bad_points(generate_primitive(s), 1e-6, 0.3);
        CHECK(rep.bad_points.empty());
    }
}

TEST_CASE("diameter check") {
    SUBCASE("unit sphere: lower = 1, diam = 2") {
        DiameterCheck dc = diameter_check(icosphere(1.0, 3));
        CHECK(dc.lower == doctest::Approx(1.0).epsilon(0.01));
        CHECK(dc.diam == doctest::Approx(2.0).epsilon(0.01));
        CHECK(dc.lower <= dc.diam);
    }
    SUBCASE("scaling equivariance at radius 3") {
        DiameterCheck dc = diameter_check(icosphere(3.0, 3));
        CHECK(dc.lower == doctest::Approx(3.0).epsilon(0.01));
        CHECK(dc.diam == doctest::Approx(6.0).epsilon(0.01));
    }
    SUBCASE("3:1 ellipsoid holds the bound") {
        TriMesh m = icosphere(1.0, 3);
        std::vector<Vec3> pos = m.vertices;
        for (auto& p : pos) p.z() *= 3.0;
        DiameterCheck dc = diameter_check(m.with_positions(pos));
        CHECK(dc.lower <= dc.diam);
        CHECK(dc.upper_ratio > 0);
    }
    SUBCASE("open meshes are rejected") {
        PrimitiveSpec s;
        s.kind = PrimitiveKind::Disk;
        s.radius = 1.0;
        s.level = 2;
        CHECK_THROWS_AS(diameter_check(generate_primitive(s)), RejectedInput);
    }
    SUBCASE("100 random radial perturbations keep the bound") {
        TriMesh base = icosphere(1.0, 2);
        Rng rng(4242);
        std::uniform_real_distribution<double> uni(-0.2, 0.2);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<Vec3> pos = base.vertices;
            for (auto& p : pos) p *= 1.0 + uni(rng);
            TriMesh m = base.with_positions(pos);
            if (!validate(m).ok()) continue;
            DiameterCheck dc = diameter_check(m);
            CHECK(dc.lower <= dc.diam * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("hausdorff distance between scaled spheres") {
    TriMesh a = icosphere(1.0, 2);
    TriMesh b = icosphere(1.3, 2);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(0.3).epsilon(0.01));
    CHECK(hausdorff_distance(a, a) == 0.0);
}

TEST_CASE("varifold csv round-trip") {
    OrientedVarifold V = from_mesh(icosphere(1.0, 1));
    auto dir = std::filesystem::temp_directory_path() / "helfrich_varifold";
    std::filesystem::create_directories(dir);
    auto path = (dir / "v.csv").string();
    save_varifold_csv(V, path);
    OrientedVarifold W = load_varifold_csv(path);
    REQUIRE(W.atoms.size() == V.atoms.size());
    for (std::size_t i = 0; i < V.atoms.size(); ++i) {
        CHECK((W.atoms[i].x - V.atoms[i].x).norm() == 0.0);
        CHECK((W.atoms[i].xi - V.atoms[i].xi).norm() == 0.0);
        CHECK(W.atoms[i].weight == V.atoms[i].weight);
        CHECK(W.atoms[i].theta_plus == V.atoms[i].theta_plus);
    }
}
