#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helfrich/boundary.hpp"
#include "helfrich/mesh.hpp"
#include "helfrich/util.hpp"

using namespace helfrich;

namespace {

constexpr double kPi = std::numbers::pi;

CurveSpec unit_circle() {
    CurveSpec s;
    s.kind = CurveKind::Circle;
    s.radius = 1.0;
    return s;
}

TriMesh disk_mesh(int level) {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Disk;
    s.radius = 1.0;
    s.level = level;
    return generate_primitive(s);
}

}  // namespace

TEST_CASE("circle sampling with the three normal rules") {
    SUBCASE("in-plane points to the center") {
        BoundaryData bd = sample_curve(unit_circle(), 16, {NormalRuleKind::InPlane, 0});
        REQUIRE(bd.curves.size() == 1);
        const auto& c = bd.curves[0];
        for (std::size_t i = 0; i < c.position.size(); ++i) {
            double th = 2.0 * kPi * i / c.position.size();
            CHECK((c.normal[i] - Vec3(-std::cos(th), -std::sin(th), 0)).norm() < 1e-12);
            CHECK(std::abs(c.tangent[i].dot(c.normal[i])) < 1e-12);
        }
    }
    SUBCASE("constant angle tilts out of plane") {
        double alpha = kPi / 4;
        BoundaryData bd = sample_curve(unit_circle(), 16, {NormalRuleKind::ConstantAngle, alpha});
        const auto& c = bd.curves[0];
        for (std::size_t i = 0; i < c.position.size(); ++i) {
            double th = 2.0 * kPi * i / c.position.size();
            Vec3 expected(-std::cos(th) * std::cos(alpha), -std::sin(th) * std::cos(alpha),
                          std::sin(alpha));
            CHECK((c.normal[i] - expected).norm() < 1e-12);
        }
    }
    SUBCASE("vertical is e3 for planar curves") {
        BoundaryData bd = sample_curve(unit_circle(), 16, {NormalRuleKind::Vertical, 0});
        for (const auto& n : bd.curves[0].normal) CHECK((n - Vec3(0, 0, 1)).norm() < 1e-12);
    }
}

TEST_CASE("two-circle pair gives two curves") {
    CurveSpec s;
    s.kind = CurveKind::TwoCircles;
    s.radius = 1.0;
    s.separation = 1.0;
    BoundaryData bd = sample_curve(s, 24, {NormalRuleKind::InPlane, 0});
    REQUIRE(bd.curves.size() == 2);
    CHECK(bd.curves[0].position.size() + bd.curves[1].position.size() == 48);
    CHECK(bd.curves[0].position[0].z() == doctest::Approx(0.5));
    CHECK(bd.curves[1].position[0].z() == doctest::Approx(-0.5));
}

TEST_CASE("ellipse sampling is arc-length uniform") {
    CurveSpec s;
    s.kind = CurveKind::Ellipse;
    s.semi_a = 1.0;
    s.semi_b = 0.5;
    BoundaryData bd = sample_curve(s, 64, {NormalRuleKind::InPlane, 0});
    const auto& c = bd.curves[0];
    double first = (c.position[1] - c.position[0]).norm();
    for (std::size_t i = 1; i < c.position.size(); ++i) {
        double seg = (c.position[(i + 1) % c.position.size()] - c.position[i]).norm();
        CHECK(seg == doctest::Approx(first).epsilon(0.01));
    }
}

TEST_CASE("degenerate specs are rejected") {
    CurveSpec bad = unit_circle();
    bad.radius = -1;
    CHECK_THROWS_AS(sample_curve(bad, 16, {}), RejectedInput);
    CHECK_THROWS_AS(sample_curve(unit_circle(), 4, {}), RejectedInput);
}

TEST_CASE("bind assigns every boundary vertex to the circle") {
    TriMesh disk = disk_mesh(3);
    BoundaryData bd = sample_curve(unit_circle(), 48, {NormalRuleKind::InPlane, 0});
    ClampSet clamp = bind(disk, bd);
    CHECK(clamp.vertices.size() == disk.boundary_loops()[0].size());
    double worst = 0;
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        worst = std::max(worst,
                         (disk.vertices[clamp.vertices[i]] - clamp.target_position[i]).norm());
        CHECK(clamp.target_position[i].head<2>().norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(worst < 2.0 * kPi / 48);
}

TEST_CASE("bind matches both cylinder loops without crossing") {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::Cylinder;
    s.radius = 1.0;
    s.height = 1.0;
    s.level = 2;
    TriMesh cyl = generate_primitive(s);
    CurveSpec tc;
    tc.kind = CurveKind::TwoCircles;
    tc.radius = 1.0;
    tc.separation = 1.0;
    tc.center = Vec3(0, 0, 0.5);  // circles at z = 0 and z = 1
    BoundaryData bd = sample_curve(tc, 32, {NormalRuleKind::InPlane, 0});
    ClampSet clamp = bind(cyl, bd);
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        double vz = cyl.vertices[clamp.vertices[i]].z();
        CHECK(clamp.target_position[i].z() == doctest::Approx(vz).epsilon(1e-9));
    }
}

TEST_CASE("bind rejects loop/curve count mismatch") {
    TriMesh disk = disk_mesh(2);
    CurveSpec tc;
    tc.kind = CurveKind::TwoCircles;
    tc.radius = 1.0;
    tc.separation = 1.0;
    BoundaryData bd = sample_curve(tc, 16, {NormalRuleKind::InPlane, 0});
    CHECK_THROWS_AS(bind(disk, bd), RejectedInput);
}

TEST_CASE("clamping is idempotent and lands on the curve") {
    TriMesh disk = disk_mesh(2);
    BoundaryData bd = sample_curve(unit_circle(), 24, {NormalRuleKind::InPlane, 0});
    ClampSet clamp = bind(disk, bd);
    TriMesh once = apply_clamp(disk, clamp);
    TriMesh twice = apply_clamp(once, clamp);
    for (int v = 0; v < once.n_vertices(); ++v)
        CHECK((once.vertices[v] - twice.vertices[v]).norm() == 0.0);
}

TEST_CASE("flat disk conormal residuals") {
    TriMesh disk = disk_mesh(3);
    SUBCASE("in-plane rule is met exactly") {
        BoundaryData bd = sample_curve(unit_circle(), 48, {NormalRuleKind::InPlane, 0});
        ClampSet clamp = bind(disk, bd);
        ConormalResidual res = conormal_residual(apply_clamp(disk, clamp), clamp);
        CHECK(res.max_angle < 1e-6);
    }
    SUBCASE("vertical rule is orthogonal everywhere") {
        BoundaryData bd = sample_curve(unit_circle(), 48, {NormalRuleKind::Vertical, 0});
        ClampSet clamp = bind(disk, bd);
        ConormalResidual res = conormal_residual(apply_clamp(disk, clamp), clamp);
        for (double a : res.angle) CHECK(a == doctest::Approx(kPi / 2).epsilon(1e-6));
    }
}

TEST_CASE("hemisphere equator conormal is vertical in the limit") {
    double prev = 1e9;
    for (int level : {2, 3, 4}) {
        PrimitiveSpec s;
        s.kind = PrimitiveKind::SphericalCap;
        s.radius = 1.0;
        s.cap_angle = kPi / 2;
        s.level = level;
        TriMesh hemi = generate_primitive(s);
        BoundaryData bd =
            sample_curve(unit_circle(), static_cast<int>(hemi.boundary_loops()[0].size()),
                         {NormalRuleKind::Vertical, 0});
        ClampSet clamp = bind(hemi, bd);
        ConormalResidual res = conormal_residual(apply_clamp(hemi, clamp), clamp);
        CHECK(res.mean_angle < prev);
        prev = res.mean_angle;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("conormal residual is rigid-motion invariant") {
    TriMesh disk = disk_mesh(2);
    BoundaryData bd = sample_curve(unit_circle(), 24, {NormalRuleKind::ConstantAngle, 0.5});
    ClampSet clamp = bind(disk, bd);
    TriMesh bound = apply_clamp(disk, clamp);
    ConormalResidual before = conormal_residual(bound, clamp);

    Eigen::AngleAxisd rot(1.1, Vec3(0.3, -1.0, 0.8).normalized());
    Vec3 shift(0.4, 2.0, -1.3);
    std::vector<Vec3> pos = bound.vertices;
    for (auto& p : pos) p = rot * p + shift;
    TriMesh moved = bound.with_positions(pos);
    ClampSet moved_clamp = clamp;
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        moved_clamp.target_position[i] = rot * clamp.target_position[i] + shift;
        moved_clamp.target_conormal[i] = rot * clamp.target_conormal[i];
    }
    ConormalResidual after = conormal_residual(moved, moved_clamp);
    for (std::size_t i = 0; i < before.angle.size(); ++i)
        CHECK(std::abs(before.angle[i] - after.angle[i]) < 1e-9);
}

TEST_CASE("conormal penalty: nonnegative, zero iff aligned") {
    TriMesh disk = disk_mesh(2);
    SUBCASE("aligned data gives zero") {
        BoundaryData bd = sample_curve(unit_circle(), 24, {NormalRuleKind::InPlane, 0});
        ClampSet clamp = bind(disk, bd);
        TriMesh bound = apply_clamp(disk, clamp);
        CHECK(conormal_penalty(bound, clamp, 10.0) == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("misaligned data gives positive penalty") {
        BoundaryData bd = sample_curve(unit_circle(), 24, {NormalRuleKind::Vertical, 0});
        ClampSet clamp = bind(disk, bd);
        TriMesh bound = apply_clamp(disk, clamp);
        CHECK(conormal_penalty(bound, clamp, 10.0) > 1.0);
    }
}

TEST_CASE("conormal penalty gradient matches finite differences") {
    PrimitiveSpec s;
    s.kind = PrimitiveKind::SphericalCap;
    s.radius = 1.0;
    s.cap_angle = 1.0;
    s.level = 2;
    TriMesh cap = generate_primitive(s);
    CurveSpec rim;
    rim.kind = CurveKind::Circle;
    rim.radius = std::sin(1.0);
    rim.center = Vec3(0, 0, std::cos(1.0));
    BoundaryData bd = sample_curve(rim, static_cast<int>(cap.boundary_loops()[0].size()),
                                   {NormalRuleKind::ConstantAngle, 0.7});
    ClampSet clamp = bind(cap, bd);
    TriMesh bound = apply_clamp(cap, clamp);

    const double w = 7.5;
    std::vector<Vec3> grad = conormal_penalty_gradient(bound, clamp, w);
    Rng rng(13);
    std::uniform_int_distribution<int> pick(0, bound.n_vertices() - 1);
    const double step = 1e-7;
    for (int trial = 0; trial < 30; ++trial) {
        int v = pick(rng);
        Vec3 fd;
        for (int k = 0; k < 3; ++k) {
            std::vector<Vec3> pos = bound.vertices;
            pos[v][k] += step;
            double ep = conormal_penalty(bound.with_positions(pos), clamp, w);
            pos[v][k] -= 2 * step;
            double em = conormal_penalty(bound.with_positions(pos), clamp, w);
            fd[k] = (ep - em) / (2 * step);
        }
        CHECK((grad[v] - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
    }
}
