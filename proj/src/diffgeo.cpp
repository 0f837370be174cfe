#include "helfrich/diffgeo.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "helfrich/util.hpp"

namespace helfrich {

namespace {

double corner_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
    Vec3 u = p - at, v = q - at;
    double c = u.dot(v), s = u.cross(v).norm();
    return std::atan2(s, c);
}

// Voronoi-safe mixed area pieces of one triangle: circumcentric weights for
// non-obtuse triangles, a flat third per corner otherwise.
void accumulate_mixed_area(const Vec3& p0, const Vec3& p1, const Vec3& p2, double& a0, double& a1,
                           double& a2) {
    double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    auto cot = [](const Vec3& at, const Vec3& p, const Vec3& q) {
        Vec3 u = p - at, v = q - at;
        double s = u.cross(v).norm();
        return s > 0 ? u.dot(v) / s : 0.0;
    };
    double c0 = cot(p0, p1, p2), c1 = cot(p1, p2, p0), c2 = cot(p2, p0, p1);
    if (c0 >= 0 && c1 >= 0 && c2 >= 0) {
        // corner piece: (|opposite-adjacent edges|^2 weighted by cotangents)/8
        a0 += ((p1 - p0).squaredNorm() * c2 + (p2 - p0).squaredNorm() * c1) / 8.0;
        a1 += ((p2 - p1).squaredNorm() * c0 + (p0 - p1).squaredNorm() * c2) / 8.0;
        a2 += ((p0 - p2).squaredNorm() * c1 + (p1 - p2).squaredNorm() * c0) / 8.0;
    } else {
        a0 += area / 3.0;
        a1 += area / 3.0;
        a2 += area / 3.0;
    }
}

}  // namespace

std::vector<double> barycentric_vertex_areas(const TriMesh& mesh) {
    std::vector<double> a(mesh.n_vertices(), 0.0);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        double third = mesh.face_area(f) / 3.0;
        for (int k = 0; k < 3; ++k) a[mesh.faces()[f][k]] += third;
    }
    return a;
}

CurvatureField curvature(const TriMesh& mesh) {
    const auto& topo = *mesh.topo;
    const int nv = mesh.n_vertices();
    for (int v = 0; v < nv; ++v)
        require(!topo.vertex_faces[v].empty(), "isolated vertex " + std::to_string(v));

    CurvatureField out;
    out.H.assign(nv, Vec3::Zero());
    out.area.assign(nv, 0.0);
    out.normal.assign(nv, Vec3::Zero());
    std::vector<double> angle_sum(nv, 0.0);
    std::vector<Vec3> area_grad(nv, Vec3::Zero());

    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& t = topo.faces[f];
        const Vec3& p0 = mesh.vertices[t[0]];
        const Vec3& p1 = mesh.vertices[t[1]];
        const Vec3& p2 = mesh.vertices[t[2]];
        Vec3 n = (p1 - p0).cross(p2 - p0);  // 2*area*normal
        double twice_area = n.norm();
        if (twice_area > 0) {
            Vec3 nu = n / twice_area;
            // d(area)/d(p_k) = 0.5 * nu x (opposite edge)
            area_grad[t[0]] += 0.5 * nu.cross(p2 - p1);
            area_grad[t[1]] += 0.5 * nu.cross(p0 - p2);
            area_grad[t[2]] += 0.5 * nu.cross(p1 - p0);
        }
        for (int k = 0; k < 3; ++k) out.normal[t[k]] += n;  // area weighting
        angle_sum[t[0]] += corner_angle(p0, p1, p2);
        angle_sum[t[1]] += corner_angle(p1, p2, p0);
        angle_sum[t[2]] += corner_angle(p2, p0, p1);
        accumulate_mixed_area(p0, p1, p2, out.area[t[0]], out.area[t[1]], out.area[t[2]]);
    }

    out.Hbar.resize(nv);
    out.K.resize(nv);
    out.A2.resize(nv);
    out.A2_raw.resize(nv);
    for (int v = 0; v < nv; ++v) {
        double len = out.normal[v].norm();
        out.normal[v] = len > 0 ? Vec3(out.normal[v] / len) : Vec3(0, 0, 1);
        out.H[v] = area_grad[v] / out.area[v];
        out.Hbar[v] = out.H[v].dot(out.normal[v]);
        double defect = (topo.vertex_on_boundary[v] ? std::numbers::pi : 2.0 * std::numbers::pi) -
                        angle_sum[v];
        out.K[v] = defect / out.area[v];
        out.A2_raw[v] = out.Hbar[v] * out.Hbar[v] - 2.0 * out.K[v];
        out.A2[v] = std::max(0.0, out.A2_raw[v]);
        out.total_area += out.area[v];
    }
    return out;
}

GaussBonnet gauss_bonnet(const TriMesh& mesh) {
    const auto& topo = *mesh.topo;
    std::vector<double> angle_sum(mesh.n_vertices(), 0.0);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& t = topo.faces[f];
        angle_sum[t[0]] += corner_angle(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        angle_sum[t[1]] += corner_angle(mesh.vertices[t[1]], mesh.vertices[t[2]], mesh.vertices[t[0]]);
        angle_sum[t[2]] += corner_angle(mesh.vertices[t[2]], mesh.vertices[t[0]], mesh.vertices[t[1]]);
    }
    GaussBonnet gb;
    gb.euler_char = topo.euler_characteristic();
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (topo.vertex_on_boundary[v])
            gb.boundary_geodesic += std::numbers::pi - angle_sum[v];
        else
            gb.total_K += 2.0 * std::numbers::pi - angle_sum[v];
    }
    return gb;
}

double first_variation_residual(const TriMesh& mesh, const std::vector<Vec3>& X) {
    require(static_cast<int>(X.size()) == mesh.n_vertices(), "field size mismatch");
    for (const auto& x : X) require(x.allFinite(), "vector field must be finite");

    // int div_T X dmu with X piecewise linear: per face, div = sum_k X_k . grad(lambda_k)
    double div_integral = 0;
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const Vec3& p0 = mesh.vertices[t[0]];
        const Vec3& p1 = mesh.vertices[t[1]];
        const Vec3& p2 = mesh.vertices[t[2]];
        Vec3 n = (p1 - p0).cross(p2 - p0);
        double twice_area = n.norm();
        if (twice_area <= 0) continue;
        Vec3 nu = n / twice_area;
        // grad lambda_k = (nu x opposite edge) / (2 area), edges oriented by winding
        Vec3 g0 = nu.cross(p2 - p1) / twice_area;
        Vec3 g1 = nu.cross(p0 - p2) / twice_area;
        Vec3 g2 = nu.cross(p1 - p0) / twice_area;
        double div = X[t[0]].dot(g0) + X[t[1]].dot(g1) + X[t[2]].dot(g2);
        div_integral += div * 0.5 * twice_area;
    }

    // int H.X dmu with H the first-variation mean curvature vector. Its
    // normal-parallel form -Hbar nu is used (the raw area gradient would make
    // the identity an algebraic tautology of the discretization).
    CurvatureField cf = curvature(mesh);
    double hx_integral = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        hx_integral += -cf.Hbar[v] * cf.normal[v].dot(X[v]) * cf.area[v];

    return std::abs(div_integral + hx_integral) / (1.0 + std::abs(hx_integral));
}

TangentFrame tangent_frame(const TriMesh& mesh, int face) {
    const auto& t = mesh.faces()[face];
    Vec3 e = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    Vec3 n = mesh.face_normal(face);
    TangentFrame fr;
    fr.tau1 = e.normalized();
    fr.tau2 = n.cross(fr.tau1);
    return fr;
}

Vec3 hodge_orientation(const TangentFrame& frame) { return frame.tau1.cross(frame.tau2); }

void save_curvature_csv(const TriMesh& mesh, const CurvatureField& field, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    os << "vertex_id,x,y,z,Hx,Hy,Hz,Hbar,K,A2,area\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const Vec3& p = mesh.vertices[v];
        os << v << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
           << format_double(p.z()) << ',' << format_double(field.H[v].x()) << ','
           << format_double(field.H[v].y()) << ',' << format_double(field.H[v].z()) << ','
           << format_double(field.Hbar[v]) << ',' << format_double(field.K[v]) << ','
           << format_double(field.A2[v]) << ',' << format_double(field.area[v]) << '\n';
    }
}

}  // namespace helfrich
