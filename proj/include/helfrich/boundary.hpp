#pragma once

#include <functional>
#include <vector>

#include "helfrich/mesh.hpp"

namespace helfrich {

/// One closed sampled curve with unit tangent t and prescribed unit normal n,
/// n orthogonal to t, sampled at equal arc length. position_at evaluates the
/// underlying analytic curve at a normalized arc-length parameter.
struct SampledCurve {
    std::vector<Vec3> position;
    std::vector<Vec3> tangent;
    std::vector<Vec3> normal;
    double length = 0;
    std::function<Vec3(double)> position_at;  // u in [0,1), exact curve point
    std::function<Vec3(double)> tangent_at;
    std::function<Vec3(double)> normal_at;
};

struct BoundaryData {
    std::vector<SampledCurve> curves;
};

enum class CurveKind { Circle, Ellipse, TwoCircles, Polyline };
enum class NormalRuleKind { InPlane, ConstantAngle, Vertical };

struct NormalRule {
    NormalRuleKind kind = NormalRuleKind::InPlane;
    double alpha = 0;  // radians, for ConstantAngle
};

struct CurveSpec {
    CurveKind kind = CurveKind::Circle;
    double radius = 1.0;
    Vec3 center = Vec3::Zero();
    double semi_a = 1.0, semi_b = 0.5;  // ellipse
    double separation = 1.0;            // two-circle pair, distance between planes
    std::vector<Vec3> points;           // polyline
};

BoundaryData sample_curve(const CurveSpec& spec, int count, const NormalRule& rule);

/// Dirichlet data for the mesh boundary: every boundary vertex gets a target
/// position on the curve and a target conormal direction.
struct ClampSet {
    std::vector<int> vertices;           // all boundary vertices, each exactly once
    std::vector<Vec3> target_position;   // on the analytic curve
    std::vector<Vec3> target_conormal;
    double w_co = 0;                     // conormal penalty weight
};

/// Monotone arc-length assignment of boundary loops to curves; the free
/// cyclic offset per loop minimizes the squared distance to the targets.
ClampSet bind(const TriMesh& mesh, const BoundaryData& bd);

/// Moves boundary vertices onto their clamp targets (idempotent).
TriMesh apply_clamp(const TriMesh& mesh, const ClampSet& clamp);

/// Discrete inner conormal: incident edge vectors summed, projected into the
/// vertex tangent plane orthogonal to the boundary direction, normalized.
Vec3 inner_conormal(const TriMesh& mesh, int boundary_vertex);

struct ConormalResidual {
    std::vector<int> vertices;
    std::vector<double> angle;  // radians between conormal and target
    double max_angle = 0;
    double mean_angle = 0;
};

ConormalResidual conormal_residual(const TriMesh& mesh, const ClampSet& clamp);

/// Penalty w * sum_v (1 - cos(angle_v)) * l_v with l_v the boundary vertex
/// weight (half the length of the adjacent boundary edges).
double conormal_penalty(const TriMesh& mesh, const ClampSet& clamp, double weight);

/// Gradient of the penalty with respect to free (interior) vertex positions;
/// clamped vertices receive zero.
std::vector<Vec3> conormal_penalty_gradient(const TriMesh& mesh, const ClampSet& clamp,
                                            double weight);

}  // namespace helfrich
