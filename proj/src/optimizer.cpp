#include "helfrich/optimizer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "helfrich/diffgeo.hpp"
#include "helfrich/lbfgs.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

namespace {

struct Objective {
    const TriMesh* base = nullptr;
    EnergyParams params;
    const ClampSet* clamp = nullptr;
    double w_co = 0;
    double slab_halfwidth = 0;
    double slab_barrier_weight = 0;
    int n_threads = 1;
    std::vector<int> free_vertices;
    double min_face_area = 0;

    TriMesh mesh_at(const Eigen::VectorXd& x) const {
        std::vector<Vec3> pos = base->vertices;
        for (std::size_t i = 0; i < free_vertices.size(); ++i)
            pos[free_vertices[i]] = Vec3(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        return base->with_positions(std::move(pos));
    }

    Eigen::VectorXd pack(const TriMesh& mesh) const {
        Eigen::VectorXd x(3 * free_vertices.size());
        for (std::size_t i = 0; i < free_vertices.size(); ++i) {
            x[3 * i] = mesh.vertices[free_vertices[i]].x();
            x[3 * i + 1] = mesh.vertices[free_vertices[i]].y();
            x[3 * i + 2] = mesh.vertices[free_vertices[i]].z();
        }
        return x;
    }

    bool valid(const TriMesh& mesh) const {
        for (int f = 0; f < mesh.n_faces(); ++f)
            if (!(mesh.face_area(f) > min_face_area)) return false;
        return true;
    }

    double barrier(const TriMesh& mesh) const {
        if (slab_halfwidth <= 0) return 0;
        double total = 0;
        for (std::size_t i = 0; i < free_vertices.size(); ++i) {
            double over = std::abs(mesh.vertices[free_vertices[i]].z()) - slab_halfwidth;
            if (over > 0) total += over * over;
        }
        return slab_barrier_weight * total;
    }

    double value(const TriMesh& mesh) const {
        VertexEnergyData d = energy_vertex_data(mesh);
        double e = chunked_sum<double>(d.area.size(), n_threads, [&](std::size_t lo, std::size_t hi) {
            double s = 0;
            for (std::size_t v = lo; v < hi; ++v) {
                double dev = d.Hbar[v] - params.H0;
                s += (dev * dev + params.lambda) * d.area[v];
            }
            return s;
        });
        if (clamp && w_co > 0) e += conormal_penalty(mesh, *clamp, w_co);
        return e + barrier(mesh);
    }

    Eigen::VectorXd grad(const TriMesh& mesh) const {
        std::vector<Vec3> g = energy_gradient(mesh, params, n_threads);
        if (clamp && w_co > 0) {
            std::vector<Vec3> gp = conormal_penalty_gradient(mesh, *clamp, w_co);
            for (std::size_t v = 0; v < g.size(); ++v) g[v] += gp[v];
        }
        Eigen::VectorXd out(3 * free_vertices.size());
        for (std::size_t i = 0; i < free_vertices.size(); ++i) {
            Vec3 gv = g[free_vertices[i]];
            if (slab_halfwidth > 0) {
                double z = mesh.vertices[free_vertices[i]].z();
                double over = std::abs(z) - slab_halfwidth;
                if (over > 0)
                    gv.z() += slab_barrier_weight * 2.0 * over * (z > 0 ? 1.0 : -1.0);
            }
            out[3 * i] = gv.x();
            out[3 * i + 1] = gv.y();
            out[3 * i + 2] = gv.z();
        }
        return out;
    }
};

// area-weighted Laplacian smoothing step projected to the tangent plane
TriMesh tangential_relax(const TriMesh& mesh, const std::vector<int>& free_vertices) {
    VertexEnergyData d = energy_vertex_data(mesh);
    std::vector<Vec3> pos = mesh.vertices;
    for (int v : free_vertices) {
        double wsum = 0;
        Vec3 target = Vec3::Zero();
        for (int f : mesh.topo->vertex_faces[v]) {
            double a = mesh.face_area(f);
            target += a * mesh.face_barycenter(f);
            wsum += a;
        }
        if (wsum <= 0) continue;
        Vec3 dvec = target / wsum - mesh.vertices[v];
        dvec -= dvec.dot(d.normal[v]) * d.normal[v];
        pos[v] += 0.5 * dvec;
    }
    return mesh.with_positions(std::move(pos));
}

}  // namespace

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIters: return "max_iters";
        case Termination::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

OptResult minimize(const TriMesh& mesh0, const EnergyParams& params, const ClampSet* clamp,
                   const OptOptions& opts) {
    params.check();
    require(opts.max_iters >= 1, "max_iters must be at least 1");
    require(opts.grad_tol > 0, "gradient tolerance must be positive");

    TriMesh start = clamp ? apply_clamp(mesh0, *clamp) : mesh0;

    Objective obj;
    obj.base = &start;
    obj.params = params;
    obj.clamp = clamp;
    obj.slab_halfwidth = opts.slab_halfwidth;
    obj.slab_barrier_weight = opts.slab_barrier_weight;
    obj.n_threads = opts.n_threads;
    obj.min_face_area = 1e-12 * start.bbox_diag2();

    std::vector<uint8_t> clamped(start.n_vertices(), 0);
    if (clamp)
        for (int v : clamp->vertices) clamped[v] = 1;
    for (int v = 0; v < start.n_vertices(); ++v)
        if (!clamped[v]) obj.free_vertices.push_back(v);
    require(!obj.free_vertices.empty(), "no free vertices to optimize");

    const double bbox = std::sqrt(start.bbox_diag2());
    const int chi = start.topo->euler_characteristic();
    const double gb_target = 2.0 * std::numbers::pi * chi;

    std::vector<double> phases;
    if (clamp && !opts.conormal_schedule.empty())
        for (double s : opts.conormal_schedule) phases.push_back(s * params.lambda);
    else
        phases.push_back(0.0);
    const int iters_per_phase =
        std::max(1, opts.max_iters / static_cast<int>(phases.size()));

    OptResult res;
    res.termination = Termination::MaxIters;
    Eigen::VectorXd x = obj.pack(start);
    TriMesh current = obj.mesh_at(x);
    int iter_count = 0;

    auto record = [&](const TriMesh& m, double objective_value, double grad_norm) {
        TraceRow row;
        row.iter = iter_count;
        EnergyBreakdown eb = helfrich_energy(m, params, opts.n_threads);
        row.bending = eb.bending;
        row.area_term = eb.area_term;
        row.total = eb.total;
        row.objective = objective_value;
        row.grad_norm = grad_norm;
        if (clamp) row.conormal_max = conormal_residual(m, *clamp).max_angle;
        res.trace.push_back(row);
        GaussBonnet gb = gauss_bonnet(m);
        res.gauss_bonnet_drift =
            std::max(res.gauss_bonnet_drift, std::abs(gb.closure() - gb_target));
    };

    for (std::size_t phase = 0; phase < phases.size(); ++phase) {
        obj.w_co = phases[phase];
        LbfgsMemory mem(opts.history);
        double fx = obj.value(current);
        Eigen::VectorXd g = obj.grad(current);
        if (res.trace.empty()) record(current, fx, g.lpNorm<Eigen::Infinity>() * bbox);

        bool phase_done = false;
        for (int it = 0; it < iters_per_phase && !phase_done; ++it) {
            double gnorm = g.lpNorm<Eigen::Infinity>() * bbox;
            if (gnorm < opts.grad_tol) {
                res.termination = Termination::Converged;
                break;
            }
            Eigen::VectorXd d = mem.direction(g);
            double slope = g.dot(d);
            if (slope >= 0) {
                mem.clear();
                d = -g;
                slope = g.dot(d);
            }
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 48; ++ls) {
                Eigen::VectorXd xn = x + alpha * d;
                TriMesh mn = obj.mesh_at(xn);
                if (obj.valid(mn)) {
                    double fn = obj.value(mn);
                    if (std::isfinite(fn) &&
                        fn <= fx + opts.ls_sufficient_decrease * alpha * slope) {
                        Eigen::VectorXd gn = obj.grad(mn);
                        mem.push(xn - x, gn - g);
                        x = xn;
                        fx = fn;
                        g = gn;
                        current = mn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= opts.ls_shrink;
                if (alpha < 1e-14) break;
            }
            if (!accepted) {
                res.termination = Termination::LineSearchFailed;
                phase_done = true;
                break;
            }
            ++iter_count;
            record(current, fx, g.lpNorm<Eigen::Infinity>() * bbox);

            if (opts.tangential_relax_every > 0 &&
                iter_count % opts.tangential_relax_every == 0) {
                TriMesh relaxed = tangential_relax(current, obj.free_vertices);
                if (obj.valid(relaxed)) {
                    double fr = obj.value(relaxed);
                    if (fr <= fx * (1.0 + 1e-3) + 1e-15) {  // reject > 0.1% increase
                        current = relaxed;
                        x = obj.pack(current);
                        fx = fr;
                        g = obj.grad(current);
                        mem.clear();
                    }
                }
            }
        }
        if (res.termination == Termination::LineSearchFailed && phase + 1 < phases.size())
            res.termination = Termination::MaxIters;  // next phase may still move
    }

    res.mesh = current;
    res.final_energy = helfrich_energy(current, params, opts.n_threads);
    if (clamp) res.final_conormal = conormal_residual(current, *clamp);
    bool has_interior = false;
    for (int v = 0; v < current.n_vertices(); ++v)
        if (!current.topo->vertex_on_boundary[v]) has_interior = true;
    if (has_interior) res.el_residual_norm = el_residual(current, params).primary_l2;
    return res;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    os << "iter,bending,area_term,total,objective,grad_norm,conormal_max\n";
    for (const auto& r : trace)
        os << r.iter << ',' << format_double(r.bending) << ',' << format_double(r.area_term)
           << ',' << format_double(r.total) << ',' << format_double(r.objective) << ','
           << format_double(r.grad_norm) << ',' << format_double(r.conormal_max) << '\n';
}

// ---------------------------------------------------------------------------
// slab experiment

namespace {

// two stacked copies of a plane-patch grid, both wound upward
TriMesh double_sheet(double extent, int level) {
    PrimitiveSpec ps;
    ps.kind = PrimitiveKind::PlanePatch;
    ps.extent = extent;
    ps.level = level;
    TriMesh sheet = generate_primitive(ps);
    std::vector<Vec3> v = sheet.vertices;
    std::vector<std::array<int, 3>> f = sheet.faces();
    const int off = sheet.n_vertices();
    for (const auto& p : sheet.vertices) v.push_back(p);
    for (const auto& t : sheet.faces()) f.push_back({t[0] + off, t[1] + off, t[2] + off});
    return make_mesh(std::move(v), std::move(f));
}

// full-depth spherical dimple: sag h/2, fixed footprint, curvature -> H0 as
// the slab thins
double dimple_height(double x, double y, double extent, double h, double H0) {
    const double a = 0.48 * extent;
    const double s = 0.5 * h;
    const double R = (a * a + s * s) / (2.0 * s);
    (void)H0;
    double dx = x - 0.5 * extent, dy = y - 0.5 * extent;
    double r2 = dx * dx + dy * dy;
    if (r2 >= a * a) return 0.0;
    return std::sqrt(R * R - r2) - (R - s);
}

}  // namespace

SlabResult slab_experiment(const SlabSpec& spec, const OptOptions& opts) {
    spec.params.check();
    require(spec.h_list.size() >= 3, "need at least 3 slab thicknesses");
    for (std::size_t i = 0; i + 1 < spec.h_list.size(); ++i)
        require(spec.h_list[i + 1] < spec.h_list[i], "slab thickness list must decrease");
    for (double h : spec.h_list) require(h > 0, "slab thickness must be positive");

    SlabResult out;

    // the doubly covered flat patch and its energy: theta+ = 2, H = 0
    TriMesh flat_double = double_sheet(spec.extent, spec.level);
    OrientedVarifold limit = from_mesh(flat_double);
    std::vector<Vec3> zero_H(limit.atoms.size(), Vec3::Zero());
    out.limit_energy = helfrich_energy_varifold(limit, spec.params, zero_H);

    PrimitiveSpec flat_spec;
    flat_spec.kind = PrimitiveKind::PlanePatch;
    flat_spec.extent = spec.extent;
    flat_spec.level = spec.level;
    TriMesh plane = generate_primitive(flat_spec);

    for (double h : spec.h_list) {
        TriMesh sheets = double_sheet(spec.extent, spec.level);
        std::vector<Vec3> pos = sheets.vertices;
        for (auto& p : pos)
            p.z() = dimple_height(p.x(), p.y(), spec.extent, h, spec.params.H0);
        // pinned rims stay at z = 0
        for (const auto& loop : sheets.boundary_loops())
            for (int v : loop) pos[v].z() = 0.0;
        sheets = sheets.with_positions(std::move(pos));

        // rims are hard-pinned at their current positions
        ClampSet pin;
        for (const auto& loop : sheets.boundary_loops())
            for (int v : loop) {
                pin.vertices.push_back(v);
                pin.target_position.push_back(sheets.vertices[v]);
                pin.target_conormal.push_back(Vec3(0, 0, 1));
            }

        OptOptions run_opts = opts;
        run_opts.slab_halfwidth = 0.5 * h;
        run_opts.slab_barrier_weight = spec.barrier_weight_factor * spec.params.lambda;
        run_opts.conormal_schedule.clear();  // positions only, no conormal condition
        OptResult r = minimize(sheets, spec.params, &pin, run_opts);

        SlabRun run;
        run.h = h;
        run.mesh = r.mesh;
        run.energy = r.final_energy.total;
        run.snapshot = from_mesh(r.mesh);
        Vec3 lo, hi;
        shared_bbox(run.snapshot, limit, lo, hi);
        run.distance_to_double_plane =
            varifold_distance(run.snapshot, limit, default_probe_dictionary(lo, hi));
        run.hausdorff_to_plane = hausdorff_distance(r.mesh, plane);
        out.runs.push_back(std::move(run));
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : out.runs) best = std::min(best, r.energy);
    out.lsc_failure_flag = best < 0.9 * out.limit_energy;
    return out;
}

// ---------------------------------------------------------------------------
// graph lower-semicontinuity experiment

GraphSpec graph_flat() {
    GraphSpec g;
    auto zero = [](double, double) { return 0.0; };
    g.u = zero;
    g.ux = zero;
    g.uy = zero;
    g.uxx = zero;
    g.uxy = zero;
    g.uyy = zero;
    return g;
}

GraphSpec graph_paraboloid(double c) {
    GraphSpec g;
    g.u = [c](double x, double y) {
        double dx = x - 0.5, dy = y - 0.5;
        return c * (dx * dx + dy * dy);
    };
    g.ux = [c](double x, double) { return 2 * c * (x - 0.5); };
    g.uy = [c](double, double y) { return 2 * c * (y - 0.5); };
    g.uxx = [c](double, double) { return 2 * c; };
    g.uxy = [](double, double) { return 0.0; };
    g.uyy = [c](double, double) { return 2 * c; };
    return g;
}

GraphSpec graph_saddle(double c) {
    GraphSpec g;
    g.u = [c](double x, double y) {
        double dx = x - 0.5, dy = y - 0.5;
        return c * (dx * dx - dy * dy);
    };
    g.ux = [c](double x, double) { return 2 * c * (x - 0.5); };
    g.uy = [c](double, double y) { return -2 * c * (y - 0.5); };
    g.uxx = [c](double, double) { return 2 * c; };
    g.uxy = [](double, double) { return 0.0; };
    g.uyy = [c](double, double) { return -2 * c; };
    return g;
}

GraphSpec with_oscillation(const GraphSpec& base, int m) {
    require(m >= 1, "oscillation number must be positive");
    GraphSpec g;
    double mm = m;
    g.u = [base, mm](double x, double y) {
        return base.u(x, y) + std::sin(mm * x) / (mm * mm);
    };
    g.ux = [base, mm](double x, double y) { return base.ux(x, y) + std::cos(mm * x) / mm; };
    g.uy = base.uy;
    g.uxx = [base, mm](double x, double y) { return base.uxx(x, y) - std::sin(mm * x); };
    g.uxy = base.uxy;
    g.uyy = base.uyy;
    return g;
}

double graph_energy(const GraphSpec& g, const EnergyParams& params, int quad_n) {
    params.check();
    require(quad_n >= 8 && quad_n % 2 == 0, "quadrature count must be even and >= 8");
    const int n = quad_n;
    const double h = 1.0 / n;
    double total = 0;
    for (int i = 0; i <= n; ++i) {
        double wi = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        for (int j = 0; j <= n; ++j) {
            double wj = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            double x = i * h, y = j * h;
            double ux = g.ux(x, y), uy = g.uy(x, y);
            double uxx = g.uxx(x, y), uxy = g.uxy(x, y), uyy = g.uyy(x, y);
            double grad2 = ux * ux + uy * uy;
            require(grad2 < 1.0, "oscillation breaks the gradient bound");
            double W = std::sqrt(1.0 + grad2);
            double Hbar =
                -((1 + uy * uy) * uxx - 2 * ux * uy * uxy + (1 + ux * ux) * uyy) / (W * W * W);
            double dev = Hbar - params.H0;
            total += wi * wj * (dev * dev + params.lambda) * W;
        }
    }
    return total * h * h / 9.0;
}

GraphLscResult graph_lsc_experiment(const GraphSpec& base, const std::vector<int>& m_list,
                                    const EnergyParams& params, int quad_n) {
    require(!m_list.empty(), "oscillation list is empty");
    GraphLscResult out;
    out.m_list = m_list;
    out.W_limit = graph_energy(base, params, quad_n);
    double best = std::numeric_limits<double>::infinity();
    for (int m : m_list) {
        double W = graph_energy(with_oscillation(base, m), params, quad_n);
        out.W_m.push_back(W);
        if (m >= 8) best = std::min(best, W);
    }
    out.lsc_holds = out.W_limit <= best * (1.0 + out.tolerance) + 1e-12;
    return out;
}

}  // namespace helfrich
