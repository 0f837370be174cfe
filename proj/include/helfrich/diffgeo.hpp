#pragma once

#include <vector>

#include "helfrich/mesh.hpp"

namespace helfrich {

/// Per-vertex curvature data.
///
/// H is the gradient of total mesh area per unit vertex area, so the unit
/// sphere with outward normals has Hbar = H.nu = +2 (sum of principal
/// curvatures). The first-variation mean curvature vector of Eq-style
/// varifold pairings is -H.
struct CurvatureField {
    std::vector<Vec3> H;          // area gradient / vertex area, 1/length
    std::vector<double> Hbar;     // H . nu
    std::vector<double> K;        // angle defect / vertex area
    std::vector<double> A2;       // Hbar^2 - 2K, clamped at 0
    std::vector<double> A2_raw;   // unclamped value
    std::vector<double> area;     // mixed Voronoi vertex area (barycentric fallback)
    std::vector<Vec3> normal;     // unit vertex normal from face winding
    double total_area = 0;
};

CurvatureField curvature(const TriMesh& mesh);

struct GaussBonnet {
    double total_K = 0;             // sum of interior angle defects
    double boundary_geodesic = 0;   // sum of boundary turning angles
    int euler_char = 0;
    double closure() const { return total_K + boundary_geodesic; }  // = 2*pi*chi
};

GaussBonnet gauss_bonnet(const TriMesh& mesh);

/// Relative defect of the first-variation identity
/// |int div_T X dmu + int H.X dmu| / (1 + |int H.X dmu|),
/// with H the first-variation mean curvature vector (inward on a sphere).
double first_variation_residual(const TriMesh& mesh, const std::vector<Vec3>& X);

struct TangentFrame {
    Vec3 tau1, tau2;  // orthonormal tangent pair
    Vec3 normal() const { return tau1.cross(tau2); }
};

TangentFrame tangent_frame(const TriMesh& mesh, int face);

/// Hodge star of the oriented plane tau1 ^ tau2, i.e. the cross product.
Vec3 hodge_orientation(const TangentFrame& frame);

/// Barycentric vertex areas (one third of each incident face); the smooth
/// quadrature weights used by the energy module.
std::vector<double> barycentric_vertex_areas(const TriMesh& mesh);

void save_curvature_csv(const TriMesh& mesh, const CurvatureField& field, const std::string& path);

}  // namespace helfrich
