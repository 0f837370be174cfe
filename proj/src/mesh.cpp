#include "helfrich/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "helfrich/util.hpp"

namespace helfrich {

namespace {

constexpr double kDegenerateAreaFactor = 1e-12;  // times squared bbox diagonal

std::shared_ptr<const MeshTopology> build_topology(int n_vertices,
                                                   std::vector<std::array<int, 3>> faces) {
    auto topo = std::make_shared<MeshTopology>();
    topo->n_vertices = n_vertices;
    topo->faces = std::move(faces);

    for (const auto& f : topo->faces)
        for (int k = 0; k < 3; ++k)
            require(f[k] >= 0 && f[k] < n_vertices, "face references vertex out of range");

    topo->vertex_faces.assign(n_vertices, {});
    topo->vertex_corner_wings.assign(n_vertices, {});
    topo->vertex_neighbors.assign(n_vertices, {});
    std::map<std::pair<int, int>, int> edge_index;
    topo->face_edges.resize(topo->faces.size());
    for (int fi = 0; fi < static_cast<int>(topo->faces.size()); ++fi) {
        const auto& f = topo->faces[fi];
        for (int k = 0; k < 3; ++k) {
            topo->vertex_faces[f[k]].push_back(fi);
            topo->vertex_corner_wings[f[k]].push_back({f[(k + 1) % 3], f[(k + 2) % 3]});
        }
        for (int k = 0; k < 3; ++k) {
            int a = f[(k + 1) % 3], b = f[(k + 2) % 3];  // edge opposite corner k
            auto key = std::minmax(a, b);
            auto it = edge_index.find(key);
            int e;
            if (it == edge_index.end()) {
                e = static_cast<int>(topo->edges.size());
                edge_index.emplace(key, e);
                topo->edges.push_back(key);
                topo->edge_faces.emplace_back();
            } else {
                e = it->second;
            }
            topo->face_edges[fi][k] = e;
            topo->edge_faces[e].push_back(fi);
        }
    }

    for (const auto& [a, b] : topo->edges) {
        topo->vertex_neighbors[a].push_back(b);
        topo->vertex_neighbors[b].push_back(a);
    }
    for (auto& nbrs : topo->vertex_neighbors) std::sort(nbrs.begin(), nbrs.end());

    // orientation check: the two faces of an interior edge must traverse it
    // in opposite directions
    auto traverses_forward = [&](int fi, int a, int b) {
        const auto& f = topo->faces[fi];
        for (int k = 0; k < 3; ++k)
            if (f[k] == a && f[(k + 1) % 3] == b) return true;
        return false;
    };
    topo->edge_is_boundary.assign(topo->edges.size(), 0);
    for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
        const auto& ef = topo->edge_faces[e];
        if (ef.size() == 1) {
            topo->edge_is_boundary[e] = 1;
        } else if (ef.size() == 2) {
            auto [a, b] = topo->edges[e];
            if (traverses_forward(ef[0], a, b) == traverses_forward(ef[1], a, b)) {
                topo->orientation_conflicts.push_back(ef[0]);
                topo->orientation_conflicts.push_back(ef[1]);
            }
        }
    }

    // boundary loops follow face winding: a boundary edge appears in its
    // single face as a->b, and the loop records a->b
    topo->vertex_on_boundary.assign(n_vertices, 0);
    std::map<int, int> next_on_boundary;  // directed boundary edge chain
    for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
        if (!topo->edge_is_boundary[e]) continue;
        auto [a, b] = topo->edges[e];
        int fi = topo->edge_faces[e][0];
        if (!traverses_forward(fi, a, b)) std::swap(a, b);
        topo->vertex_on_boundary[a] = 1;
        topo->vertex_on_boundary[b] = 1;
        next_on_boundary[a] = b;
    }
    std::map<int, bool> visited;
    for (const auto& [start, _] : next_on_boundary) {
        if (visited.count(start)) continue;
        std::vector<int> loop;
        int v = start;
        while (!visited.count(v)) {
            visited[v] = true;
            loop.push_back(v);
            auto it = next_on_boundary.find(v);
            if (it == next_on_boundary.end()) break;  // open chain, reported by validate()
            v = it->second;
        }
        topo->boundary_loops.push_back(std::move(loop));
    }
    return topo;
}

}  // namespace

TriMesh make_mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces,
                  std::shared_ptr<const SurfaceProjector> projector) {
    TriMesh m;
    m.topo = build_topology(static_cast<int>(vertices.size()), std::move(faces));
    m.vertices = std::move(vertices);
    m.projector = std::move(projector);
    return m;
}

TriMesh TriMesh::with_positions(std::vector<Vec3> positions) const {
    require(positions.size() == vertices.size(), "position count does not match mesh");
    TriMesh m;
    m.vertices = std::move(positions);
    m.topo = topo;
    m.projector = projector;
    return m;
}

double TriMesh::face_area(int f) const {
    const auto& t = topo->faces[f];
    return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vec3 TriMesh::face_normal(int f) const {
    const auto& t = topo->faces[f];
    Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3(0, 0, 0);
}

Vec3 TriMesh::face_barycenter(int f) const {
    const auto& t = topo->faces[f];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

double TriMesh::total_area() const {
    double a = 0;
    for (int f = 0; f < n_faces(); ++f) a += face_area(f);
    return a;
}

double TriMesh::bbox_diag2() const {
    if (vertices.empty()) return 0;
    Vec3 lo = vertices[0], hi = vertices[0];
    for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).squaredNorm();
}

Vec3 TriMesh::centroid() const {
    Vec3 c(0, 0, 0);
    for (const auto& v : vertices) c += v;
    return vertices.empty() ? c : Vec3(c / static_cast<double>(vertices.size()));
}

// ---------------------------------------------------------------------------
// primitives

namespace {

struct SphereProjector : SurfaceProjector {
    double r;
    explicit SphereProjector(double radius) : r(radius) {}
    Vec3 project(const Vec3& p) const override {
        double len = p.norm();
        return len > 0 ? Vec3(p * (r / len)) : Vec3(r, 0, 0);
    }
    std::string name() const override { return "sphere"; }
};

struct DiskProjector : SurfaceProjector {
    double r;
    explicit DiskProjector(double radius) : r(radius) {}
    Vec3 project(const Vec3& p) const override { return Vec3(p.x(), p.y(), 0); }
    Vec3 project_boundary(const Vec3& p) const override {
        Vec3 q(p.x(), p.y(), 0);
        double len = q.norm();
        return len > 0 ? Vec3(q * (r / len)) : Vec3(r, 0, 0);
    }
    std::string name() const override { return "disk"; }
};

struct CylinderProjector : SurfaceProjector {
    double r, h;
    CylinderProjector(double radius, double height) : r(radius), h(height) {}
    Vec3 project(const Vec3& p) const override {
        double len = std::hypot(p.x(), p.y());
        if (len == 0) return Vec3(r, 0, p.z());
        return Vec3(p.x() * r / len, p.y() * r / len, p.z());
    }
    Vec3 project_boundary(const Vec3& p) const override {
        Vec3 q = project(p);
        q.z() = std::abs(q.z() - 0.0) < std::abs(q.z() - h) ? 0.0 : h;
        return q;
    }
    std::string name() const override { return "cylinder"; }
};

struct TorusProjector : SurfaceProjector {
    double R, r;
    TorusProjector(double major, double minor) : R(major), r(minor) {}
    Vec3 project(const Vec3& p) const override {
        double phi = std::atan2(p.y(), p.x());
        Vec3 c(R * std::cos(phi), R * std::sin(phi), 0);
        Vec3 d = p - c;
        double len = d.norm();
        if (len == 0) return c + Vec3(0, 0, r);
        return c + d * (r / len);
    }
    std::string name() const override { return "torus"; }
};

struct CapProjector : SurfaceProjector {
    double r, alpha;
    CapProjector(double radius, double cap_angle) : r(radius), alpha(cap_angle) {}
    Vec3 project(const Vec3& p) const override {
        double len = p.norm();
        return len > 0 ? Vec3(p * (r / len)) : Vec3(0, 0, r);
    }
    Vec3 project_boundary(const Vec3& p) const override {
        double rho = std::hypot(p.x(), p.y());
        double br = r * std::sin(alpha);
        Vec3 q = rho > 0 ? Vec3(p.x() * br / rho, p.y() * br / rho, r * std::cos(alpha))
                         : Vec3(br, 0, r * std::cos(alpha));
        return q;
    }
    std::string name() const override { return "spherical-cap"; }
};

TriMesh base_icosahedron(double r) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {
        {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& p : v) p *= r / p.norm();
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return make_mesh(std::move(v), std::move(f), std::make_shared<SphereProjector>(r));
}

// hexagon fan; faces wound counterclockwise seen from +z
TriMesh base_disk(double r) {
    std::vector<Vec3> v = {{0, 0, 0}};
    std::vector<std::array<int, 3>> f;
    for (int k = 0; k < 6; ++k) {
        double th = 2.0 * std::numbers::pi * k / 6.0;
        v.emplace_back(r * std::cos(th), r * std::sin(th), 0);
    }
    for (int k = 0; k < 6; ++k) f.push_back({0, 1 + k, 1 + (k + 1) % 6});
    return make_mesh(std::move(v), std::move(f), std::make_shared<DiskProjector>(r));
}

TriMesh base_cylinder(double r, double h) {
    const int n = 8;
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    for (int ring = 0; ring < 2; ++ring)
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * std::numbers::pi * k / n;
            v.emplace_back(r * std::cos(th), r * std::sin(th), ring * h);
        }
    for (int k = 0; k < n; ++k) {
        int a = k, b = (k + 1) % n, c = n + k, d = n + (k + 1) % n;
        f.push_back({a, b, d});  // outward normals
        f.push_back({a, d, c});
    }
    return make_mesh(std::move(v), std::move(f), std::make_shared<CylinderProjector>(r, h));
}

TriMesh base_torus(double R, double r) {
    const int nu = 8, nv = 6;
    std::vector<Vec3> v;
    std::vector<std::array<int, 3>> f;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            double u = 2.0 * std::numbers::pi * i / nu;
            double w = 2.0 * std::numbers::pi * j / nv;
            double rho = R + r * std::cos(w);
            v.emplace_back(rho * std::cos(u), rho * std::sin(u), r * std::sin(w));
        }
    auto id = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return make_mesh(std::move(v), std::move(f), std::make_shared<TorusProjector>(R, r));
}

TriMesh base_plane_patch(double extent) {
    std::vector<Vec3> v = {{0, 0, 0}, {extent, 0, 0}, {extent, extent, 0}, {0, extent, 0}};
    std::vector<std::array<int, 3>> f = {{0, 1, 2}, {0, 2, 3}};
    return make_mesh(std::move(v), std::move(f), nullptr);
}

TriMesh base_cap(double r, double alpha) {
    // apex plus one ring at the cap rim
    std::vector<Vec3> v = {{0, 0, r}};
    std::vector<std::array<int, 3>> f;
    double br = r * std::sin(alpha), z = r * std::cos(alpha);
    for (int k = 0; k < 6; ++k) {
        double th = 2.0 * std::numbers::pi * k / 6.0;
        v.emplace_back(br * std::cos(th), br * std::sin(th), z);
    }
    for (int k = 0; k < 6; ++k) f.push_back({0, 1 + k, 1 + (k + 1) % 6});
    return make_mesh(std::move(v), std::move(f), std::make_shared<CapProjector>(r, alpha));
}

}  // namespace

TriMesh generate_primitive(const PrimitiveSpec& spec) {
    require(spec.radius > 0, "primitive radius must be positive");
    require(spec.level >= 0 && spec.level <= 8, "refinement level must be in [0, 8]");
    TriMesh m;
    switch (spec.kind) {
        case PrimitiveKind::Icosphere: m = base_icosahedron(spec.radius); break;
        case PrimitiveKind::Disk: m = base_disk(spec.radius); break;
        case PrimitiveKind::Cylinder:
            require(spec.height > 0, "cylinder height must be positive");
            m = base_cylinder(spec.radius, spec.height);
            break;
        case PrimitiveKind::Torus:
            require(spec.minor_radius > 0 && spec.minor_radius < spec.radius,
                    "torus needs 0 < minor radius < major radius");
            m = base_torus(spec.radius, spec.minor_radius);
            break;
        case PrimitiveKind::PlanePatch:
            require(spec.extent > 0, "patch extent must be positive");
            m = base_plane_patch(spec.extent);
            break;
        case PrimitiveKind::SphericalCap:
            require(spec.cap_angle > 0 && spec.cap_angle < std::numbers::pi,
                    "cap angle must be in (0, pi)");
            m = base_cap(spec.radius, spec.cap_angle);
            break;
    }
    for (int l = 0; l < spec.level; ++l) m = refine(m);
    return m;
}

TriMesh refine(const TriMesh& mesh) {
    const auto& topo = *mesh.topo;
    std::vector<Vec3> v = mesh.vertices;
    std::vector<int> edge_mid(topo.edges.size());
    for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
        auto [a, b] = topo.edges[e];
        Vec3 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        if (mesh.projector)
            mid = topo.edge_is_boundary[e] ? mesh.projector->project_boundary(mid)
                                           : mesh.projector->project(mid);
        edge_mid[e] = static_cast<int>(v.size());
        v.push_back(mid);
    }
    std::vector<std::array<int, 3>> f;
    f.reserve(topo.faces.size() * 4);
    for (int fi = 0; fi < static_cast<int>(topo.faces.size()); ++fi) {
        const auto& t = topo.faces[fi];
        int m0 = edge_mid[topo.face_edges[fi][0]];  // opposite t[0], between t[1] t[2]
        int m1 = edge_mid[topo.face_edges[fi][1]];
        int m2 = edge_mid[topo.face_edges[fi][2]];
        f.push_back({t[0], m2, m1});
        f.push_back({t[1], m0, m2});
        f.push_back({t[2], m1, m0});
        f.push_back({m0, m1, m2});
    }
    return make_mesh(std::move(v), std::move(f), mesh.projector);
}

// ---------------------------------------------------------------------------
// validation

std::string ValidationReport::summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (const auto& issue : issues) os << issue.detail << "; ";
    return os.str();
}

ValidationReport validate(const TriMesh& mesh) {
    ValidationReport rep;
    const auto& topo = *mesh.topo;

    for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
        if (topo.edge_faces[e].size() > 2) {
            ValidationIssue issue{ValidationIssue::Kind::NonManifoldEdge, topo.edge_faces[e], ""};
            std::ostringstream os;
            os << "edge (" << topo.edges[e].first << "," << topo.edges[e].second << ") has "
               << topo.edge_faces[e].size() << " incident faces";
            issue.detail = os.str();
            rep.issues.push_back(std::move(issue));
        }
    }

    if (!topo.orientation_conflicts.empty()) {
        ValidationIssue issue{ValidationIssue::Kind::OrientationConflict,
                              topo.orientation_conflicts, "interior edge traversed twice in the same direction"};
        rep.issues.push_back(std::move(issue));
    }

    const double min_area = kDegenerateAreaFactor * mesh.bbox_diag2();
    for (int f = 0; f < mesh.n_faces(); ++f) {
        if (!(mesh.face_area(f) > min_area)) {
            ValidationIssue issue{ValidationIssue::Kind::DegenerateFace, {f}, ""};
            std::ostringstream os;
            os << "face " << f << " is degenerate (area " << mesh.face_area(f) << ")";
            issue.detail = os.str();
            rep.issues.push_back(std::move(issue));
        }
    }

    for (int vtx = 0; vtx < mesh.n_vertices(); ++vtx) {
        if (topo.vertex_faces[vtx].empty()) {
            ValidationIssue issue{ValidationIssue::Kind::IsolatedVertex, {vtx}, ""};
            std::ostringstream os;
            os << "vertex " << vtx << " has no incident face";
            issue.detail = os.str();
            rep.issues.push_back(std::move(issue));
        }
    }

    // boundary loops must cover the boundary-edge set exactly
    std::size_t loop_edges = 0;
    for (const auto& loop : topo.boundary_loops) loop_edges += loop.size();
    std::size_t boundary_edges = 0;
    for (auto b : topo.edge_is_boundary) boundary_edges += b;
    if (loop_edges != boundary_edges) {
        ValidationIssue issue{ValidationIssue::Kind::BoundaryLoopMismatch, {}, ""};
        std::ostringstream os;
        os << "boundary loops cover " << loop_edges << " edges, boundary has " << boundary_edges;
        issue.detail = os.str();
        rep.issues.push_back(std::move(issue));
    }
    return rep;
}

}  // namespace helfrich
