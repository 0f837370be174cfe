#pragma once

#include <string>
#include <vector>

#include "helfrich/energy.hpp"
#include "helfrich/mesh.hpp"

namespace helfrich {

/// Meridian profile (r(s), z(s)) of a surface of revolution, sampled
/// uniformly in arc length. r stays positive except possibly at axis
/// endpoints (caps).
struct Profile {
    std::vector<double> r, z;
    double ds = 0;  // arc-length spacing

    int size() const { return static_cast<int>(r.size()); }
    double length() const { return ds * (size() - 1); }
    bool touches_axis_start() const { return !r.empty() && r.front() < 1e-12; }
    bool touches_axis_end() const { return !r.empty() && r.back() < 1e-12; }
};

Profile profile_cylinder(double radius, double height, int n);
Profile profile_sphere(double radius, int n);
/// Catenoid r = c cosh(z/c) for z in [z0, z1], arc-length sampled exactly.
Profile profile_catenoid(double c, double z0, double z1, int n);
/// Spherical cap of opening angle alpha (apex on the axis).
Profile profile_cap(double radius, double alpha, int n);
/// Straight disk profile from the axis to radius r at height z.
Profile profile_disk(double radius, double z_height, int n);

/// Checks r >= 0, no interior axis crossing, |(r',z')| = 1 within 1e-8.
void check_profile(const Profile& p);

/// 2 pi int [ (k_meridian + k_parallel - H0)^2 + lambda ] r ds by composite
/// Simpson quadrature with 4th-order finite-difference derivatives.
/// k_meridian = r'z'' - z'r'' (outward normal), k_parallel = z'/r with the
/// axis limit k_parallel -> k_meridian at cap endpoints.
double axisym_energy(const Profile& profile, const EnergyParams& params);

/// Revolve the profile into a triangle mesh with the given azimuthal count.
TriMesh revolve(const Profile& profile, int azimuthal_segments);

/// End condition for the 1-D minimizer: ring radius and height, plus the
/// conormal angle alpha measured as in the boundary module (the prescribed
/// normal is cos(alpha) inward + sin(alpha) vertical). radius = 0 marks an
/// axis endpoint and requires alpha = 0.
struct AxisymEnd {
    double radius = 1.0;
    double height = 0.0;
    double alpha = 0.0;
};

struct AxisymResult {
    Profile profile;
    double energy = 0;
    bool converged = false;
    int iterations = 0;
    std::string message;
};

/// Descent over interior samples with arc-length reprojection after every
/// accepted step; end positions are hard-clamped, end tangents enforced by a
/// stiff penalty.
AxisymResult axisym_minimize(const AxisymEnd& start, const AxisymEnd& end,
                             const EnergyParams& params, int n, int max_iters = 2000,
                             double grad_tol = 1e-6);

void save_profile_csv(const Profile& p, const std::string& path);

}  // namespace helfrich
