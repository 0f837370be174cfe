#pragma once

#include <vector>

#include "helfrich/mesh.hpp"
#include "helfrich/varifold.hpp"

namespace helfrich {

/// Spontaneous curvature H0 and area weight lambda. lambda = 0 is permitted
/// only as diagnostic Willmore mode; the coercivity bound needs lambda > 0.
struct EnergyParams {
    double H0 = 0;
    double lambda = 0;

    bool diagnostic_mode() const { return lambda == 0; }
    void check() const;
};

struct EnergyBreakdown {
    double bending = 0;    // int (Hbar - H0)^2 dmu
    double area_term = 0;  // lambda * area
    double total = 0;
    std::vector<double> per_vertex;
};

/// Smooth per-vertex quadrature data behind the energy: barycentric vertex
/// areas, winding vertex normals, and the scalar mean curvature Hbar with
/// the +2-on-the-unit-sphere convention.
struct VertexEnergyData {
    std::vector<double> area;
    std::vector<Vec3> normal;
    std::vector<double> Hbar;
};

VertexEnergyData energy_vertex_data(const TriMesh& mesh);

EnergyBreakdown helfrich_energy(const TriMesh& mesh, const EnergyParams& params,
                                int n_threads = 1);

/// Energy of an oriented varifold with a supplied per-atom mean curvature
/// field: sum w [ (H - xi H0)^2 theta+ + (H + xi H0)^2 theta- + lambda (theta+ + theta-) ].
double helfrich_energy_varifold(const OrientedVarifold& V, const EnergyParams& params,
                                const std::vector<Vec3>& H_field);

/// Exact gradient of helfrich_energy in the vertex positions, computed by
/// forward-mode differentiation of the per-vertex kernels.
std::vector<Vec3> energy_gradient(const TriMesh& mesh, const EnergyParams& params,
                                  int n_threads = 1);

struct ElResidual {
    std::vector<double> primary;          // |grad E|_v / a_v at interior vertices, 0 on boundary
    double primary_l2 = 0;                // sqrt(sum_int a_v primary_v^2)
    // The printed strong-form operator evaluated with Hbar as the sum of the
    // principal curvatures, and with the half-sum convention.
    double printed_sum_convention_l2 = 0;
    double printed_half_convention_l2 = 0;
};

ElResidual el_residual(const TriMesh& mesh, const EnergyParams& params);

struct LowerBoundConstant {
    double C = 0;
    double epsilon = 0;
};

/// Coercivity constant of the bound W >= C int (Hbar^2 + 1) dmu obtained from
/// the epsilon-Young split with lambda + (1 - 1/epsilon) H0^2 = lambda / 2.
LowerBoundConstant lower_bound_constant(const EnergyParams& params);

/// Dual (sup) form of the bending term over a graph patch: max over the probe
/// fields of int (Hbar - H0) nu . phi dmu with the probes L2-normalized
/// against the patch measure. Always <= sqrt(bending).
double dual_energy(const TriMesh& patch, const EnergyParams& params,
                   const std::vector<std::vector<Vec3>>& probe_fields);

}  // namespace helfrich
