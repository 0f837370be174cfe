#include "helfrich/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "helfrich/dual.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 rotate_about(const Vec3& v, const Vec3& axis_unit, double alpha) {
    return std::cos(alpha) * v + std::sin(alpha) * axis_unit.cross(v) +
           (1 - std::cos(alpha)) * axis_unit.dot(v) * axis_unit;
}

Vec3 apply_rule(const NormalRule& rule, const Vec3& t, const Vec3& in_plane) {
    switch (rule.kind) {
        case NormalRuleKind::InPlane: return in_plane;
        case NormalRuleKind::ConstantAngle: return rotate_about(in_plane, t, rule.alpha);
        case NormalRuleKind::Vertical: {
            Vec3 n = Vec3::UnitZ() - Vec3::UnitZ().dot(t) * t;
            double len = n.norm();
            require(len > 1e-9, "vertical normal rule degenerate: tangent parallel to z");
            return n / len;
        }
    }
    return in_plane;
}

SampledCurve sample_circle(const Vec3& center, double radius, int count, const NormalRule& rule) {
    SampledCurve c;
    c.length = kTwoPi * radius;
    Vec3 ctr = center;
    c.position_at = [ctr, radius](double u) {
        double th = kTwoPi * u;
        return Vec3(ctr.x() + radius * std::cos(th), ctr.y() + radius * std::sin(th), ctr.z());
    };
    c.tangent_at = [](double u) {
        double th = kTwoPi * u;
        return Vec3(-std::sin(th), std::cos(th), 0);
    };
    NormalRule r = rule;
    c.normal_at = [r](double u) {
        double th = kTwoPi * u;
        Vec3 t(-std::sin(th), std::cos(th), 0);
        Vec3 in_plane(-std::cos(th), -std::sin(th), 0);  // toward the center
        return apply_rule(r, t, in_plane);
    };
    for (int k = 0; k < count; ++k) {
        double u = static_cast<double>(k) / count;
        c.position.push_back(c.position_at(u));
        c.tangent.push_back(c.tangent_at(u));
        c.normal.push_back(c.normal_at(u));
    }
    return c;
}

SampledCurve sample_ellipse(const Vec3& center, double a, double b, int count,
                            const NormalRule& rule) {
    require(a > 0 && b > 0, "ellipse semi-axes must be positive");
    // arc-length table for uniform sampling
    const int M = 8192;
    std::vector<double> cum(M + 1, 0.0);
    auto speed = [&](double th) {
        return std::hypot(a * std::sin(th), b * std::cos(th));
    };
    for (int i = 0; i < M; ++i) {
        double t0 = kTwoPi * i / M, t1 = kTwoPi * (i + 1) / M;
        cum[i + 1] = cum[i] + 0.5 * (speed(t0) + speed(t1)) * (t1 - t0);
    }
    double L = cum[M];
    auto theta_at = [cum, L, M](double u) {
        double s = u * L;
        auto it = std::upper_bound(cum.begin(), cum.end(), s);
        int i = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, M - 1);
        double f = (s - cum[i]) / (cum[i + 1] - cum[i]);
        return kTwoPi * (i + f) / M;
    };
    SampledCurve c;
    c.length = L;
    Vec3 ctr = center;
    c.position_at = [ctr, a, b, theta_at](double u) {
        double th = theta_at(u);
        return Vec3(ctr.x() + a * std::cos(th), ctr.y() + b * std::sin(th), ctr.z());
    };
    c.tangent_at = [a, b, theta_at](double u) {
        double th = theta_at(u);
        return Vec3(-a * std::sin(th), b * std::cos(th), 0).normalized();
    };
    NormalRule r = rule;
    auto tang = c.tangent_at;
    c.normal_at = [r, tang](double u) {
        Vec3 t = tang(u);
        Vec3 in_plane(t.y(), -t.x(), 0);  // inward for counterclockwise traversal
        return apply_rule(r, t, in_plane);
    };
    for (int k = 0; k < count; ++k) {
        double u = static_cast<double>(k) / count;
        c.position.push_back(c.position_at(u));
        c.tangent.push_back(c.tangent_at(u));
        c.normal.push_back(c.normal_at(u));
    }
    return c;
}

SampledCurve sample_polyline(const std::vector<Vec3>& pts, int count, const NormalRule& rule) {
    require(pts.size() >= 3, "polyline needs at least 3 points");
    const int n = static_cast<int>(pts.size());
    std::vector<double> cum(n + 1, 0.0);
    for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + (pts[(i + 1) % n] - pts[i]).norm();
    double L = cum[n];
    require(L > 0, "degenerate polyline");
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= n;

    auto pos_at = [pts, cum, L, n](double u) {
        double s = std::fmod(u, 1.0) * L;
        auto it = std::upper_bound(cum.begin(), cum.end(), s);
        int i = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, n - 1);
        double f = (s - cum[i]) / (cum[i + 1] - cum[i]);
        return Vec3(pts[i] + f * (pts[(i + 1) % n] - pts[i]));
    };
    SampledCurve c;
    c.length = L;
    c.position_at = pos_at;
    c.tangent_at = [pos_at](double u) {
        const double h = 1e-5;
        return Vec3(pos_at(std::fmod(u + h, 1.0)) - pos_at(std::fmod(u + 1.0 - h, 1.0)))
            .normalized();
    };
    NormalRule r = rule;
    auto tang = c.tangent_at;
    c.normal_at = [r, tang, pos_at, centroid](double u) {
        Vec3 t = tang(u);
        Vec3 inward = centroid - pos_at(u);
        inward -= inward.dot(t) * t;
        double len = inward.norm();
        require(len > 1e-12, "polyline in-plane normal degenerate");
        return apply_rule(r, t, Vec3(inward / len));
    };
    for (int k = 0; k < count; ++k) {
        double u = static_cast<double>(k) / count;
        c.position.push_back(c.position_at(u));
        c.tangent.push_back(c.tangent_at(u));
        c.normal.push_back(c.normal_at(u));
    }
    return c;
}

double segment_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
    // closest distance between two segments
    Vec3 u = a1 - a0, v = b1 - b0, w = a0 - b0;
    double A = u.dot(u), B = u.dot(v), C = v.dot(v), D = u.dot(w), E = v.dot(w);
    double den = A * C - B * B;
    double s = 0, t = 0;
    if (den > 1e-14) s = std::clamp((B * E - C * D) / den, 0.0, 1.0);
    t = C > 0 ? std::clamp((B * s + E) / C, 0.0, 1.0) : 0.0;
    s = A > 0 ? std::clamp((B * t - D) / A, 0.0, 1.0) : 0.0;
    return (a0 + s * u - (b0 + t * v)).norm();
}

void check_curve(const SampledCurve& c) {
    const int n = static_cast<int>(c.position.size());
    for (int i = 0; i < n; ++i) {
        require(std::abs(c.tangent[i].norm() - 1.0) < 1e-9, "tangent not unit");
        require(std::abs(c.normal[i].norm() - 1.0) < 1e-9, "normal not unit");
        require(std::abs(c.tangent[i].dot(c.normal[i])) < 1e-9, "normal not orthogonal to tangent");
    }
    // simple curve: non-adjacent sample segments stay apart
    const double tol = 1e-9 * c.length;
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // closing segment adjacency
            double dist = segment_distance(c.position[i], c.position[(i + 1) % n], c.position[j],
                                           c.position[(j + 1) % n]);
            require(dist > tol, "curve self-intersects");
        }
}

}  // namespace

BoundaryData sample_curve(const CurveSpec& spec, int count, const NormalRule& rule) {
    require(count >= 8, "need at least 8 samples per curve");
    BoundaryData bd;
    switch (spec.kind) {
        case CurveKind::Circle:
            require(spec.radius > 0, "circle radius must be positive");
            bd.curves.push_back(sample_circle(spec.center, spec.radius, count, rule));
            break;
        case CurveKind::Ellipse:
            bd.curves.push_back(sample_ellipse(spec.center, spec.semi_a, spec.semi_b, count, rule));
            break;
        case CurveKind::TwoCircles: {
            require(spec.radius > 0, "circle radius must be positive");
            require(spec.separation > 0, "separation must be positive");
            Vec3 top = spec.center + Vec3(0, 0, spec.separation / 2);
            Vec3 bot = spec.center - Vec3(0, 0, spec.separation / 2);
            bd.curves.push_back(sample_circle(top, spec.radius, count, rule));
            bd.curves.push_back(sample_circle(bot, spec.radius, count, rule));
            break;
        }
        case CurveKind::Polyline:
            bd.curves.push_back(sample_polyline(spec.points, count, rule));
            break;
    }
    for (const auto& c : bd.curves) check_curve(c);
    return bd;
}

// ---------------------------------------------------------------------------
// binding

namespace {

std::vector<double> loop_arc_params(const TriMesh& mesh, const std::vector<int>& loop) {
    std::vector<double> t(loop.size(), 0.0);
    double total = 0;
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
        total += (mesh.vertices[loop[i + 1]] - mesh.vertices[loop[i]]).norm();
        t[i + 1] = total;
    }
    total += (mesh.vertices[loop[0]] - mesh.vertices[loop.back()]).norm();
    for (auto& v : t) v /= total;
    return t;
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

ClampSet bind(const TriMesh& mesh, const BoundaryData& bd) {
    const auto& loops = mesh.boundary_loops();
    if (loops.size() != bd.curves.size()) {
        throw RejectedInput("boundary loop/curve count mismatch (" + std::to_string(loops.size()) +
                            " loops, " + std::to_string(bd.curves.size()) + " curves)");
    }
    require(!loops.empty(), "mesh has no boundary to bind");

    // assign loops to curves by centroid proximity
    std::vector<int> curve_of(loops.size(), -1);
    std::vector<bool> used(bd.curves.size(), false);
    for (std::size_t li = 0; li < loops.size(); ++li) {
        Vec3 lc = Vec3::Zero();
        for (int v : loops[li]) lc += mesh.vertices[v];
        lc /= static_cast<double>(loops[li].size());
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t ci = 0; ci < bd.curves.size(); ++ci) {
            if (used[ci]) continue;
            Vec3 cc = Vec3::Zero();
            for (const auto& p : bd.curves[ci].position) cc += p;
            cc /= static_cast<double>(bd.curves[ci].position.size());
            double dist = (lc - cc).norm();
            if (dist < best) {
                best = dist;
                curve_of[li] = static_cast<int>(ci);
            }
        }
        used[curve_of[li]] = true;
    }

    ClampSet clamp;
    for (std::size_t li = 0; li < loops.size(); ++li) {
        const auto& loop = loops[li];
        const auto& curve = bd.curves[curve_of[li]];
        std::vector<double> t = loop_arc_params(mesh, loop);

        // free cyclic offset, forward and reversed traversal
        const int K = 8 * std::max<int>(static_cast<int>(loop.size()),
                                        static_cast<int>(curve.position.size()));
        double best_cost = std::numeric_limits<double>::infinity();
        double best_delta = 0;
        bool best_rev = false;
        for (int rev = 0; rev < 2; ++rev) {
            for (int k = 0; k < K; ++k) {
                double delta = static_cast<double>(k) / K;
                double cost = 0;
                for (std::size_t i = 0; i < loop.size(); ++i) {
                    double u = rev ? frac(delta - t[i]) : frac(t[i] + delta);
                    cost += (mesh.vertices[loop[i]] - curve.position_at(u)).squaredNorm();
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best_delta = delta;
                    best_rev = rev;
                }
            }
        }
        for (std::size_t i = 0; i < loop.size(); ++i) {
            double u = best_rev ? frac(best_delta - t[i]) : frac(t[i] + best_delta);
            clamp.vertices.push_back(loop[i]);
            clamp.target_position.push_back(curve.position_at(u));
            clamp.target_conormal.push_back(curve.normal_at(u));
        }
    }
    return clamp;
}

TriMesh apply_clamp(const TriMesh& mesh, const ClampSet& clamp) {
    std::vector<Vec3> pos = mesh.vertices;
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i)
        pos[clamp.vertices[i]] = clamp.target_position[i];
    return mesh.with_positions(std::move(pos));
}

// ---------------------------------------------------------------------------
// conormal

namespace {

// loop neighbours (prev, next) of each boundary vertex
std::vector<std::array<int, 2>> boundary_neighbors(const TriMesh& mesh) {
    std::vector<std::array<int, 2>> nb(mesh.n_vertices(), {-1, -1});
    for (const auto& loop : mesh.boundary_loops()) {
        const int n = static_cast<int>(loop.size());
        for (int i = 0; i < n; ++i) {
            nb[loop[i]][0] = loop[(i + n - 1) % n];
            nb[loop[i]][1] = loop[(i + 1) % n];
        }
    }
    return nb;
}

// conormal kernel shared by evaluation and differentiation
template <typename VecT, typename ScalarT>
VecT conormal_kernel(const VecT& p, const VecT& prev, const VecT& next,
                     const std::vector<std::array<VecT, 2>>& wings) {
    VecT t_raw = next - prev;
    VecT t = t_raw / norm(t_raw);
    VecT nu_raw = VecT::Zero();
    VecT sum = VecT::Zero();
    for (const auto& w : wings) {
        nu_raw = nu_raw + cross(w[0] - p, w[1] - p);
        sum = sum + (w[0] - p) + (w[1] - p);
    }
    VecT nu = nu_raw / norm(nu_raw);
    VecT proj = sum - dot(sum, t) * t;
    proj = proj - dot(proj, nu) * nu;
    return proj / norm(proj);
}

template <typename VecT, typename ScalarT>
ScalarT penalty_kernel(const VecT& p, const VecT& prev, const VecT& next,
                       const std::vector<std::array<VecT, 2>>& wings, const Vec3& n_target) {
    VecT co = conormal_kernel<VecT, ScalarT>(p, prev, next, wings);
    ScalarT cos_angle = co.x * ScalarT(n_target.x()) + co.y * ScalarT(n_target.y()) +
                        co.z * ScalarT(n_target.z());
    ScalarT weight = ScalarT(0.5) * (norm(p - prev) + norm(next - p));
    return (ScalarT(1.0) - cos_angle) * weight;
}

// plain-double specialization of the cosine (Vec3 has .x() accessors)
double penalty_value(const Vec3& p, const Vec3& prev, const Vec3& next,
                     const std::vector<std::array<Vec3, 2>>& wings, const Vec3& n_target) {
    Vec3 co = conormal_kernel<Vec3, double>(p, prev, next, wings);
    double weight = 0.5 * ((p - prev).norm() + (next - p).norm());
    return (1.0 - co.dot(n_target)) * weight;
}

}  // namespace

Vec3 inner_conormal(const TriMesh& mesh, int boundary_vertex) {
    require(mesh.topo->vertex_on_boundary[boundary_vertex], "vertex is not on the boundary");
    auto nb = boundary_neighbors(mesh);
    require(nb[boundary_vertex][0] >= 0, "boundary vertex not on a closed loop");
    std::vector<std::array<Vec3, 2>> wings;
    for (const auto& w : mesh.topo->vertex_corner_wings[boundary_vertex])
        wings.push_back({mesh.vertices[w[0]], mesh.vertices[w[1]]});
    return conormal_kernel<Vec3, double>(mesh.vertices[boundary_vertex],
                                         mesh.vertices[nb[boundary_vertex][0]],
                                         mesh.vertices[nb[boundary_vertex][1]], wings);
}

ConormalResidual conormal_residual(const TriMesh& mesh, const ClampSet& clamp) {
    require(!clamp.vertices.empty(), "mesh is not bound to boundary data");
    ConormalResidual out;
    double sum = 0;
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        Vec3 co = inner_conormal(mesh, clamp.vertices[i]);
        const Vec3& n = clamp.target_conormal[i];
        double angle = std::atan2(co.cross(n).norm(), co.dot(n));
        out.vertices.push_back(clamp.vertices[i]);
        out.angle.push_back(angle);
        out.max_angle = std::max(out.max_angle, angle);
        sum += angle;
    }
    out.mean_angle = sum / static_cast<double>(out.angle.size());
    return out;
}

double conormal_penalty(const TriMesh& mesh, const ClampSet& clamp, double weight) {
    auto nb = boundary_neighbors(mesh);
    double total = 0;
    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        int v = clamp.vertices[i];
        std::vector<std::array<Vec3, 2>> wings;
        for (const auto& w : mesh.topo->vertex_corner_wings[v])
            wings.push_back({mesh.vertices[w[0]], mesh.vertices[w[1]]});
        total += penalty_value(mesh.vertices[v], mesh.vertices[nb[v][0]], mesh.vertices[nb[v][1]],
                               wings, clamp.target_conormal[i]);
    }
    return weight * total;
}

std::vector<Vec3> conormal_penalty_gradient(const TriMesh& mesh, const ClampSet& clamp,
                                            double weight) {
    auto nb = boundary_neighbors(mesh);
    std::vector<Vec3> grad(mesh.n_vertices(), Vec3::Zero());

    for (std::size_t i = 0; i < clamp.vertices.size(); ++i) {
        int v = clamp.vertices[i];
        const auto& wings_idx = mesh.topo->vertex_corner_wings[v];
        // the penalty term at v depends on v, its loop neighbours and its ring
        std::vector<int> deps = {v, nb[v][0], nb[v][1]};
        for (const auto& w : wings_idx) {
            deps.push_back(w[0]);
            deps.push_back(w[1]);
        }
        std::sort(deps.begin(), deps.end());
        deps.erase(std::unique(deps.begin(), deps.end()), deps.end());

        for (int u : deps) {
            auto lift = [&](int id) {
                return id == u ? DVec3::variable(mesh.vertices[id]) : DVec3(mesh.vertices[id]);
            };
            std::vector<std::array<DVec3, 2>> wings;
            for (const auto& w : wings_idx) wings.push_back({lift(w[0]), lift(w[1])});
            Dual e = penalty_kernel<DVec3, Dual>(lift(v), lift(nb[v][0]), lift(nb[v][1]), wings,
                                                 clamp.target_conormal[i]);
            grad[u] += weight * e.g;
        }
    }
    return grad;
}

}  // namespace helfrich
