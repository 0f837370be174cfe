#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "helfrich/mesh.hpp"

namespace helfrich {

// Clamped-plate solver on a disk. The solution is represented in the global
// Almansi basis { r^k cos(k t), r^k sin(k t) } x { 1, r^2 }, which is exactly
// biharmonic and C^inf-conforming; the rim samples fix the coefficients mode
// by mode through a 2x2 system (value and radial derivative). Nodal values
// are evaluated onto a structured polar grid whose rim nodes sit exactly on
// the circle.
struct BiharmonicPatch {
    double rho = 1;                 // disk radius
    int n = 0;                      // radial rings
    int m = 0;                      // azimuthal samples (= rim trace count)
    TriMesh grid;                   // polar triangulation of the disk
    std::vector<double> w;          // solution at grid nodes
    std::vector<double> rim_u;      // prescribed trace
    std::vector<double> rim_dudn;   // prescribed radial derivative
    std::string method;             // discretization recorded for reports

    // spectral coefficients, scaled to zeta = (x + i y) / rho
    std::vector<std::complex<double>> A, B;

    double value(double x, double y) const;
    Eigen::Vector2d gradient(double x, double y) const;
    Eigen::Matrix2d hessian(double x, double y) const;

    /// Max rim defect of trace and radial derivative against the prescription.
    double rim_residual() const;
};

/// Solves the clamped-plate problem with trace u and radial derivative dudn
/// sampled at m >= 16 uniformly spaced rim angles.
BiharmonicPatch biharmonic_extension(const std::vector<double>& u,
                                     const std::vector<double>& dudn, double rho, int n);

struct BendingComparison {
    double l1 = 0;        // int |D^2 w|
    double l2 = 0;        // int |D^2 w|^2
    double ratio_l1 = 0;  // l1 / (rho * rim_curvature_integral)
    double ratio_l2 = 0;  // l2 / (rho * rim_curvature_integral)
    bool vacuous = false; // zero rim integral with nonzero energy
};

BendingComparison bending_comparison(const BiharmonicPatch& patch, double rim_curvature_integral);

struct AgmonScaling {
    std::vector<double> rho;
    std::vector<double> sup_grad;   // s(rho) = sup |grad w_rho|
    std::vector<double> ratios;     // s(rho_{i+1}) / s(rho_i)
    bool law_holds = false;         // every ratio <= 2 * 1.1
};

/// Trace data for the scaling family, evaluated per radius.
struct TraceFamily {
    std::function<double(double theta, double rho)> u;
    std::function<double(double theta, double rho)> dudn;
};

/// Solves the family on a halving radius list and checks the 1/rho law.
AgmonScaling agmon_scaling(const std::vector<double>& rhos, const TraceFamily& family, int m,
                           int n);

/// Family sampled from an ambient function F with gradient Fg.
TraceFamily ambient_trace_family(const std::function<double(double, double)>& F,
                                 const std::function<Eigen::Vector2d(double, double)>& Fg);

/// Lumped cotangent bilaplacian energy sum_v a_v (L w)_v^2 of a nodal field;
/// used to compare the solved patch against clamped perturbations.
double discrete_laplacian_energy(const TriMesh& grid, const std::vector<double>& w);

void save_patch_csv(const BiharmonicPatch& patch, const std::string& path);

}  // namespace helfrich
