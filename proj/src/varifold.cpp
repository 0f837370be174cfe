#include "helfrich/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>

#include "helfrich/diffgeo.hpp"
#include "helfrich/energy.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

double OrientedVarifold::mass() const {
    double m = 0;
    for (const auto& at : atoms) m += at.weight * (at.theta_plus + at.theta_minus);
    return m;
}

OrientedVarifold from_mesh(const TriMesh& mesh, const FromMeshOptions& opts) {
    VertexEnergyData d = energy_vertex_data(mesh);
    const double pos_tol = opts.position_tol_rel * std::sqrt(mesh.bbox_diag2());
    const double cos_tol = std::cos(opts.normal_tol_rad);

    OrientedVarifold V;
    // spatial hash on a pos_tol grid; neighbouring cells are probed so ties
    // across cell borders still merge
    std::map<std::array<long long, 3>, std::vector<int>> grid;
    const double cell = std::max(pos_tol, 1e-300);
    auto cell_of = [&](const Vec3& p) {
        return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / cell)),
                                        static_cast<long long>(std::floor(p.y() / cell)),
                                        static_cast<long long>(std::floor(p.z() / cell))};
    };

    for (int v = 0; v < mesh.n_vertices(); ++v) {
        Vec3 x = mesh.vertices[v];
        Vec3 n = d.normal[v];
        double w = d.area[v];

        int target = -1;
        bool flipped = false;
        auto base = cell_of(x);
        for (long long dx = -1; dx <= 1 && target < 0; ++dx)
            for (long long dy = -1; dy <= 1 && target < 0; ++dy)
                for (long long dz = -1; dz <= 1 && target < 0; ++dz) {
                    auto it = grid.find({base[0] + dx, base[1] + dy, base[2] + dz});
                    if (it == grid.end()) continue;
                    for (int idx : it->second) {
                        const auto& at = V.atoms[idx];
                        if ((at.x - x).norm() > pos_tol) continue;
                        double c = at.xi.dot(n);
                        if (c >= cos_tol) {
                            target = idx;
                            flipped = false;
                            break;
                        }
                        if (c <= -cos_tol) {
                            target = idx;
                            flipped = true;
                            break;
                        }
                    }
                }

        if (target < 0) {
            VarifoldAtom at;
            at.x = x;
            at.xi = n;
            if (opts.rule == OrientationRule::FixedDirection && n.dot(opts.fixed_direction) < 0) {
                at.xi = -n;
                at.theta_plus = 0;
                at.theta_minus = 1;
            }
            at.weight = w;
            V.atoms.push_back(at);
            grid[base].push_back(static_cast<int>(V.atoms.size()) - 1);
        } else {
            auto& at = V.atoms[target];
            int old_count = at.theta_plus + at.theta_minus;
            // mass-preserving weight for the merged atom
            at.weight = (at.weight * old_count + w) / (old_count + 1);
            (flipped ? at.theta_minus : at.theta_plus) += 1;
        }
    }
    return V;
}

double test_integral(const OrientedVarifold& V, const TestFunction& Phi) {
    double s = 0;
    for (const auto& at : V.atoms) {
        double val = 0;
        if (at.theta_plus) val += at.theta_plus * Phi(at.x, at.xi);
        if (at.theta_minus) val += at.theta_minus * Phi(at.x, Vec3(-at.xi));
        s += at.weight * val;
    }
    return s;
}

std::vector<TestFunction> default_probe_dictionary(const Vec3& box_lo, const Vec3& box_hi) {
    Vec3 lo = box_lo, hi = box_hi;
    auto normalize = [lo, hi](const Vec3& p) {
        Vec3 u;
        for (int k = 0; k < 3; ++k) {
            double span = hi[k] - lo[k];
            u[k] = span > 0 ? std::clamp(2.0 * (p[k] - lo[k]) / span - 1.0, -1.0, 1.0) : 0.0;
        }
        return u;
    };
    // first eight non-constant monomials of degree <= 2 in graded lex order
    std::vector<std::function<double(const Vec3&)>> monomials = {
        [](const Vec3& u) { return u.x(); },
        [](const Vec3& u) { return u.y(); },
        [](const Vec3& u) { return u.z(); },
        [](const Vec3& u) { return u.x() * u.x(); },
        [](const Vec3& u) { return u.x() * u.y(); },
        [](const Vec3& u) { return u.x() * u.z(); },
        [](const Vec3& u) { return u.y() * u.y(); },
        [](const Vec3& u) { return u.y() * u.z(); },
    };
    std::vector<TestFunction> dict;
    for (const auto& m : monomials) {
        dict.push_back([normalize, m](const Vec3& x, const Vec3&) { return m(normalize(x)); });
        for (int k = 0; k < 3; ++k)
            dict.push_back([normalize, m, k](const Vec3& x, const Vec3& xi) {
                return m(normalize(x)) * xi[k];
            });
    }
    return dict;
}

void shared_bbox(const OrientedVarifold& V1, const OrientedVarifold& V2, Vec3& lo, Vec3& hi) {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const auto* V : {&V1, &V2})
        for (const auto& at : V->atoms) {
            lo = lo.cwiseMin(at.x);
            hi = hi.cwiseMax(at.x);
        }
}

double varifold_distance(const OrientedVarifold& V1, const OrientedVarifold& V2,
                         const std::vector<TestFunction>& dictionary) {
    require(!dictionary.empty(), "probe dictionary is empty");
    double best = 0;
    for (const auto& Phi : dictionary)
        best = std::max(best, std::abs(test_integral(V1, Phi) - test_integral(V2, Phi)));
    return best;
}

// ---------------------------------------------------------------------------
// density ratio: triangles clipped exactly against the ambient ball

namespace {

using Vec2 = Eigen::Vector2d;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Green's-theorem contribution of one polygon edge clipped against the circle
// |p| = R: straight pieces inside contribute triangle areas, outside pieces
// contribute circular sectors. Outside sub-arcs span less than pi because the
// center is never on the segment.
double edge_term(const Vec2& a, const Vec2& b, double R) {
    Vec2 d = b - a;
    double A = d.squaredNorm();
    if (A == 0) return 0;
    double B = 2.0 * a.dot(d);
    double C = a.squaredNorm() - R * R;
    std::vector<double> ts = {0.0, 1.0};
    double disc = B * B - 4 * A * C;
    if (disc > 0) {
        double sq = std::sqrt(disc);
        for (double t : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
            if (t > 0 && t < 1) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    double total = 0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        Vec2 pa = a + ts[i] * d;
        Vec2 pb = a + ts[i + 1] * d;
        Vec2 mid = a + 0.5 * (ts[i] + ts[i + 1]) * d;
        if (mid.squaredNorm() <= R * R)
            total += 0.5 * cross2(pa, pb);
        else
            total += 0.5 * R * R * std::atan2(cross2(pa, pb), pa.dot(pb));
    }
    return total;
}

double polygon_circle_area(const std::vector<Vec2>& poly, double R) {
    double total = 0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        total += edge_term(poly[i], poly[(i + 1) % poly.size()], R);
    return std::abs(total);
}

}  // namespace

double density_ratio(const TriMesh& mesh, const Vec3& center, double sigma) {
    require(sigma > 0, "ball radius must be positive");
    double area = 0;
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const Vec3& p0 = mesh.vertices[t[0]];
        const Vec3& p1 = mesh.vertices[t[1]];
        const Vec3& p2 = mesh.vertices[t[2]];
        Vec3 n = (p1 - p0).cross(p2 - p0);
        double twice_area = n.norm();
        if (twice_area <= 0) continue;
        Vec3 nu = n / twice_area;
        double dist = (p0 - center).dot(nu);  // signed distance plane -> center
        if (std::abs(dist) >= sigma) continue;
        double rd = std::sqrt(sigma * sigma - dist * dist);  // in-plane disk radius
        Vec3 foot = center + dist * nu;                      // disk center in the plane
        Vec3 tau1 = (p1 - p0).normalized();
        Vec3 tau2 = nu.cross(tau1);
        auto to2d = [&](const Vec3& p) {
            Vec3 q = p - foot;
            return Vec2(q.dot(tau1), q.dot(tau2));
        };
        area += polygon_circle_area({to2d(p0), to2d(p1), to2d(p2)}, rd);
    }
    return area / (std::numbers::pi * sigma * sigma);
}

ConcentrationReport bad_points(const TriMesh& mesh, double epsilon0, double rho) {
    require(epsilon0 > 0, "epsilon0 must be positive");
    require(rho > 0, "rho must be positive");
    CurvatureField cf = curvature(mesh);
    const int nv = mesh.n_vertices();

    ConcentrationReport rep;
    rep.epsilon0 = epsilon0;
    rep.rho = rho;
    rep.concentration.assign(nv, 0.0);
    for (int v = 0; v < nv; ++v) {
        double c = 0;
        for (int w = 0; w < nv; ++w)
            if ((mesh.vertices[w] - mesh.vertices[v]).norm() <= rho) c += cf.A2[w] * cf.area[w];
        rep.concentration[v] = c;
        if (c >= epsilon0 * epsilon0) rep.bad_points.push_back(v);
    }

    // flagged clusters = connected components in the mesh graph
    std::vector<uint8_t> flagged(nv, 0), seen(nv, 0);
    for (int v : rep.bad_points) flagged[v] = 1;
    for (int v : rep.bad_points) {
        if (seen[v]) continue;
        ++rep.cluster_count;
        std::queue<int> q;
        q.push(v);
        seen[v] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int w : mesh.topo->vertex_neighbors[u])
                if (flagged[w] && !seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
        }
    }
    return rep;
}

DiameterCheck diameter_check(const TriMesh& mesh) {
    require(mesh.boundary_loops().empty(), "diameter estimate needs a closed mesh");
    // connectivity
    const int nv = mesh.n_vertices();
    require(nv > 0, "empty mesh");
    std::vector<uint8_t> seen(nv, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : mesh.topo->vertex_neighbors[u])
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                q.push(w);
            }
    }
    require(count == nv, "diameter estimate needs a connected mesh");

    VertexEnergyData d = energy_vertex_data(mesh);
    DiameterCheck out;
    for (int v = 0; v < nv; ++v) {
        out.area += d.area[v];
        out.willmore += d.Hbar[v] * d.Hbar[v] * d.area[v];
    }
    require(out.willmore > 0, "Willmore energy vanishes");
    out.lower = 2.0 * std::sqrt(out.area / out.willmore);
    for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j)
            out.diam = std::max(out.diam, (mesh.vertices[i] - mesh.vertices[j]).norm());
    out.upper_ratio = out.diam / std::sqrt(out.area * out.willmore);
    return out;
}

double hausdorff_distance(const TriMesh& a, const TriMesh& b) {
    auto one_sided = [](const TriMesh& from, const TriMesh& to) {
        double worst = 0;
        for (const auto& p : from.vertices) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to.vertices) best = std::min(best, (p - q).norm());
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

void save_varifold_csv(const OrientedVarifold& V, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    os << "x,y,z,nx,ny,nz,theta_plus,theta_minus,weight\n";
    for (const auto& at : V.atoms)
        os << format_double(at.x.x()) << ',' << format_double(at.x.y()) << ','
           << format_double(at.x.z()) << ',' << format_double(at.xi.x()) << ','
           << format_double(at.xi.y()) << ',' << format_double(at.xi.z()) << ','
           << at.theta_plus << ',' << at.theta_minus << ',' << format_double(at.weight) << '\n';
}

OrientedVarifold load_varifold_csv(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open varifold file: " + path);
    std::string line;
    std::getline(is, line);  // header
    OrientedVarifold V;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        VarifoldAtom at;
        char comma;
        ls >> at.x.x() >> comma >> at.x.y() >> comma >> at.x.z() >> comma >> at.xi.x() >> comma >>
            at.xi.y() >> comma >> at.xi.z() >> comma >> at.theta_plus >> comma >> at.theta_minus >>
            comma >> at.weight;
        require(!ls.fail(), "malformed varifold CSV line: " + line);
        V.atoms.push_back(at);
    }
    return V;
}

}  // namespace helfrich
