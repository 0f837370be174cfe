#include "helfrich/energy.hpp"

#include <algorithm>
#include <cmath>

#include "helfrich/diffgeo.hpp"
#include "helfrich/dual.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

void EnergyParams::check() const {
    require(lambda >= 0, "area weight lambda must be non-negative");
    require(std::isfinite(H0) && std::isfinite(lambda), "energy parameters must be finite");
}

namespace {

void check_mesh_not_degenerate(const TriMesh& mesh) {
    const double min_area = 1e-12 * mesh.bbox_diag2();
    for (int f = 0; f < mesh.n_faces(); ++f)
        if (!(mesh.face_area(f) > min_area))
            throw RejectedInput("mesh has a degenerate face, energy undefined");
}

// Energy density attached to one vertex: a (Hbar - H0)^2 + lambda a with
// a the barycentric vertex area, Hbar = (area gradient . vertex normal) / a.
// Templated so the same expression yields values and forward-mode gradients.
template <typename VecT, typename ScalarT>
ScalarT vertex_energy_kernel(const VecT& p, const std::vector<std::array<VecT, 2>>& wings,
                             double H0, double lambda) {
    ScalarT a{};                    // barycentric vertex area
    VecT grad_a = VecT::Zero();     // gradient of total area wrt this vertex
    VecT normal_sum = VecT::Zero(); // area-weighted normal accumulator
    for (const auto& w : wings) {
        VecT n = cross(w[0] - p, w[1] - p);
        ScalarT twice_area = norm(n);
        a += ScalarT(1.0 / 6.0) * twice_area;
        grad_a = grad_a + ScalarT(0.5) * cross(n / twice_area, w[1] - w[0]);
        normal_sum = normal_sum + n;
    }
    VecT nu = normal_sum / norm(normal_sum);
    ScalarT b = dot(grad_a, nu);  // = a * Hbar
    ScalarT dev = b - ScalarT(H0) * a;
    return dev * dev / a + ScalarT(lambda) * a;
}

// d e_v / d x_u for u in the closed star of v
Vec3 vertex_energy_grad_wrt(const TriMesh& mesh, int v, int u, double H0, double lambda) {
    const auto& wings_idx = mesh.topo->vertex_corner_wings[v];
    std::vector<std::array<DVec3, 2>> wings;
    wings.reserve(wings_idx.size());
    for (const auto& w : wings_idx) {
        std::array<DVec3, 2> lifted;
        for (int k = 0; k < 2; ++k)
            lifted[k] = (w[k] == u) ? DVec3::variable(mesh.vertices[w[k]])
                                    : DVec3(mesh.vertices[w[k]]);
        wings.push_back(lifted);
    }
    DVec3 p = (v == u) ? DVec3::variable(mesh.vertices[v]) : DVec3(mesh.vertices[v]);
    return vertex_energy_kernel<DVec3, Dual>(p, wings, H0, lambda).g;
}

}  // namespace

VertexEnergyData energy_vertex_data(const TriMesh& mesh) {
    const int nv = mesh.n_vertices();
    VertexEnergyData d;
    d.area.assign(nv, 0.0);
    d.normal.assign(nv, Vec3::Zero());
    d.Hbar.assign(nv, 0.0);
    std::vector<Vec3> grad_a(nv, Vec3::Zero());
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const Vec3& p0 = mesh.vertices[t[0]];
        const Vec3& p1 = mesh.vertices[t[1]];
        const Vec3& p2 = mesh.vertices[t[2]];
        Vec3 n = (p1 - p0).cross(p2 - p0);
        double twice_area = n.norm();
        if (twice_area <= 0) continue;
        for (int k = 0; k < 3; ++k) {
            d.area[t[k]] += twice_area / 6.0;
            d.normal[t[k]] += n;
        }
        Vec3 nu = n / twice_area;
        grad_a[t[0]] += 0.5 * nu.cross(p2 - p1);
        grad_a[t[1]] += 0.5 * nu.cross(p0 - p2);
        grad_a[t[2]] += 0.5 * nu.cross(p1 - p0);
    }
    for (int v = 0; v < nv; ++v) {
        double len = d.normal[v].norm();
        d.normal[v] = len > 0 ? Vec3(d.normal[v] / len) : Vec3(0, 0, 1);
        d.Hbar[v] = d.area[v] > 0 ? grad_a[v].dot(d.normal[v]) / d.area[v] : 0.0;
    }
    return d;
}

EnergyBreakdown helfrich_energy(const TriMesh& mesh, const EnergyParams& params, int n_threads) {
    params.check();
    check_mesh_not_degenerate(mesh);
    const int nv = mesh.n_vertices();
    EnergyBreakdown out;
    out.per_vertex.assign(nv, 0.0);

    VertexEnergyData d = energy_vertex_data(mesh);
    parallel_for(static_cast<std::size_t>(nv), n_threads, [&](std::size_t v) {
        double dev = d.Hbar[v] - params.H0;
        out.per_vertex[v] = (dev * dev + params.lambda) * d.area[v];
    });
    out.bending = chunked_sum<double>(static_cast<std::size_t>(nv), n_threads,
                                      [&](std::size_t lo, std::size_t hi) {
                                          double s = 0;
                                          for (std::size_t v = lo; v < hi; ++v) {
                                              double dev = d.Hbar[v] - params.H0;
                                              s += dev * dev * d.area[v];
                                          }
                                          return s;
                                      });
    out.area_term = params.lambda *
                    chunked_sum<double>(static_cast<std::size_t>(nv), n_threads,
                                        [&](std::size_t lo, std::size_t hi) {
                                            double s = 0;
                                            for (std::size_t v = lo; v < hi; ++v) s += d.area[v];
                                            return s;
                                        });
    out.total = out.bending + out.area_term;
    return out;
}

double helfrich_energy_varifold(const OrientedVarifold& V, const EnergyParams& params,
                                const std::vector<Vec3>& H_field) {
    params.check();
    require(H_field.size() == V.atoms.size(), "curvature field length does not match atom count");
    double total = 0;
    for (std::size_t i = 0; i < V.atoms.size(); ++i) {
        const auto& at = V.atoms[i];
        Vec3 plus = H_field[i] - params.H0 * at.xi;
        Vec3 minus = H_field[i] + params.H0 * at.xi;
        total += at.weight * (plus.squaredNorm() * at.theta_plus +
                              minus.squaredNorm() * at.theta_minus +
                              params.lambda * (at.theta_plus + at.theta_minus));
    }
    return total;
}

std::vector<Vec3> energy_gradient(const TriMesh& mesh, const EnergyParams& params, int n_threads) {
    params.check();
    check_mesh_not_degenerate(mesh);
    const auto& topo = *mesh.topo;
    std::vector<Vec3> grad(mesh.n_vertices(), Vec3::Zero());
    parallel_for(static_cast<std::size_t>(mesh.n_vertices()), n_threads, [&](std::size_t ui) {
        int u = static_cast<int>(ui);
        Vec3 g = vertex_energy_grad_wrt(mesh, u, u, params.H0, params.lambda);
        for (int v : topo.vertex_neighbors[u])
            g += vertex_energy_grad_wrt(mesh, v, u, params.H0, params.lambda);
        grad[u] = g;
    });
    return grad;
}

ElResidual el_residual(const TriMesh& mesh, const EnergyParams& params) {
    const auto& topo = *mesh.topo;
    int interior = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (!topo.vertex_on_boundary[v]) ++interior;
    require(interior > 0, "no interior vertices");

    ElResidual out;
    out.primary.assign(mesh.n_vertices(), 0.0);
    CurvatureField cf = curvature(mesh);
    std::vector<Vec3> grad = energy_gradient(mesh, params);
    double sum = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (topo.vertex_on_boundary[v]) continue;
        out.primary[v] = grad[v].norm() / cf.area[v];
        sum += cf.area[v] * out.primary[v] * out.primary[v];
    }
    out.primary_l2 = std::sqrt(sum);

    // cotangent Laplace-Beltrami of a scalar field
    auto laplacian = [&](const std::vector<double>& u) {
        std::vector<double> lap(mesh.n_vertices(), 0.0);
        for (int f = 0; f < mesh.n_faces(); ++f) {
            const auto& t = mesh.faces()[f];
            for (int k = 0; k < 3; ++k) {
                int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
                const Vec3& pa = mesh.vertices[t[k]];
                Vec3 e1 = mesh.vertices[a] - pa, e2 = mesh.vertices[b] - pa;
                double s = e1.cross(e2).norm();
                double cot = s > 0 ? e1.dot(e2) / s : 0.0;
                lap[a] += 0.5 * cot * (u[b] - u[a]);
                lap[b] += 0.5 * cot * (u[a] - u[b]);
            }
        }
        for (int v = 0; v < mesh.n_vertices(); ++v) lap[v] /= cf.area[v];
        return lap;
    };

    auto printed_norm = [&](double scale) {
        std::vector<double> h(mesh.n_vertices());
        for (int v = 0; v < mesh.n_vertices(); ++v) h[v] = scale * cf.Hbar[v];
        std::vector<double> lap = laplacian(h);
        double acc = 0;
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (topo.vertex_on_boundary[v]) continue;
            double r = 2.0 * lap[v] + 4.0 * h[v] * (0.25 * h[v] * h[v] - cf.K[v]) -
                       2.0 * params.H0 * cf.K[v] - params.H0 * params.H0 * h[v] -
                       params.lambda * h[v];
            acc += cf.area[v] * r * r;
        }
        return std::sqrt(acc);
    };
    out.printed_sum_convention_l2 = printed_norm(1.0);
    out.printed_half_convention_l2 = printed_norm(0.5);
    return out;
}

LowerBoundConstant lower_bound_constant(const EnergyParams& params) {
    require(params.lambda > 0, "coercivity bound requires lambda > 0");
    LowerBoundConstant out;
    if (params.H0 == 0) {
        out.epsilon = 0;
        out.C = std::min(1.0, params.lambda / 2.0);
    } else {
        out.epsilon = 2.0 * params.H0 * params.H0 / (2.0 * params.H0 * params.H0 + params.lambda);
        out.C = std::min(1.0 - out.epsilon, params.lambda / 2.0);
    }
    return out;
}

double dual_energy(const TriMesh& patch, const EnergyParams& params,
                   const std::vector<std::vector<Vec3>>& probe_fields) {
    params.check();
    check_mesh_not_degenerate(patch);

    // graph precondition: all face normals on one side of the best-fit plane
    Vec3 c = patch.centroid();
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : patch.vertices) cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Vec3 plane_normal = eig.eigenvectors().col(0);
    int pos = 0, neg = 0;
    for (int f = 0; f < patch.n_faces(); ++f) {
        double s = patch.face_normal(f).dot(plane_normal);
        (s > 0 ? pos : neg)++;
    }
    require(pos == 0 || neg == 0, "patch is not a single-valued graph over a plane");

    VertexEnergyData d = energy_vertex_data(patch);
    double best = 0;
    for (const auto& phi : probe_fields) {
        require(phi.size() == patch.vertices.size(), "probe field length mismatch");
        double norm2 = 0;
        for (std::size_t v = 0; v < phi.size(); ++v) norm2 += d.area[v] * phi[v].squaredNorm();
        if (norm2 <= 0) continue;
        double inv = 1.0 / std::sqrt(norm2);
        double pairing = 0;
        for (std::size_t v = 0; v < phi.size(); ++v)
            pairing += d.area[v] * (d.Hbar[v] - params.H0) * d.normal[v].dot(phi[v]) * inv;
        best = std::max(best, pairing);
    }
    return best;
}

}  // namespace helfrich
