#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "helfrich/boundary.hpp"
#include "helfrich/energy.hpp"
#include "helfrich/mesh.hpp"
#include "helfrich/varifold.hpp"

namespace helfrich {

struct OptOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;               // sup-norm of the free gradient times bbox diagonal
    double ls_shrink = 0.5;
    double ls_sufficient_decrease = 1e-4;
    int tangential_relax_every = 0;       // 0 disables the relaxation
    std::vector<double> conormal_schedule = {10, 100, 1000};  // times lambda, one phase each
    std::uint64_t seed = 0;
    int n_threads = 1;
    int history = 10;
    double slab_halfwidth = 0;            // confine |z| <= halfwidth when positive
    double slab_barrier_weight = 0;
};

enum class Termination { Converged, MaxIters, LineSearchFailed };

struct TraceRow {
    int iter = 0;
    double bending = 0, area_term = 0, total = 0;
    double objective = 0;  // total + penalties, the line-searched quantity
    double grad_norm = 0;  // sup-norm of the free gradient times bbox diagonal
    double conormal_max = 0;
};

struct OptResult {
    TriMesh mesh;
    std::vector<TraceRow> trace;
    EnergyBreakdown final_energy;
    ConormalResidual final_conormal;  // empty when no clamp
    Termination termination = Termination::MaxIters;
    double el_residual_norm = 0;
    double gauss_bonnet_drift = 0;    // max |closure - 2 pi chi| over accepted iterations
};

/// Descends the Helfrich energy over free vertex positions. Clamped boundary
/// vertices are hard constraints (moved onto their targets first and removed
/// from the unknowns); the conormal condition enters through the scheduled
/// penalty. Passing clamp = nullptr optimizes a closed mesh.
OptResult minimize(const TriMesh& mesh, const EnergyParams& params, const ClampSet* clamp,
                   const OptOptions& opts);

std::string termination_name(Termination t);

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// ---------------------------------------------------------------------------
// slab confinement experiment

struct SlabSpec {
    std::vector<double> h_list = {0.5, 0.25, 0.125};  // strictly decreasing
    double extent = 1.0;
    int level = 5;                                    // sheet grid refinement
    EnergyParams params{1.0, 0.01};
    double barrier_weight_factor = 1e4;               // times lambda
};

struct SlabRun {
    double h = 0;
    double energy = 0;
    OrientedVarifold snapshot;
    double distance_to_double_plane = 0;
    double hausdorff_to_plane = 0;
    TriMesh mesh;
};

struct SlabResult {
    std::vector<SlabRun> runs;
    double limit_energy = 0;        // doubly covered flat patch
    bool lsc_failure_flag = false;  // min energy < 0.9 * limit_energy
};

/// Minimizes two pinned-rim sheets inside |z| <= h/2 for every h. The sheets
/// are seeded with a full-depth spherical dimple whose curvature approaches
/// H0 as the slab thins, the discrete cousin of the constant-mean-curvature
/// slab fillings behind the lower-semicontinuity counterexample.
SlabResult slab_experiment(const SlabSpec& spec, const OptOptions& opts);

// ---------------------------------------------------------------------------
// graph lower-semicontinuity experiment

/// Analytic graph over the unit square with closed-form derivatives.
struct GraphSpec {
    std::function<double(double, double)> u, ux, uy, uxx, uxy, uyy;
};

GraphSpec graph_flat();
GraphSpec graph_paraboloid(double c);
GraphSpec graph_saddle(double c);
GraphSpec with_oscillation(const GraphSpec& base, int m);  // u + sin(m x) / m^2

/// Helfrich energy of the graph by tensor Simpson quadrature.
double graph_energy(const GraphSpec& g, const EnergyParams& params, int quad_n = 256);

struct GraphLscResult {
    std::vector<int> m_list;
    std::vector<double> W_m;
    double W_limit = 0;
    double tolerance = 0.02;
    bool lsc_holds = false;  // W(u) <= (1 + tol) min_m W(u_m) over m >= 8
};

GraphLscResult graph_lsc_experiment(const GraphSpec& base, const std::vector<int>& m_list,
                                    const EnergyParams& params, int quad_n = 256);

}  // namespace helfrich
