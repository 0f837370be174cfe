#include "helfrich/run.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>
#include <openssl/evp.h>

#include "helfrich/analysis.hpp"
#include "helfrich/axisym.hpp"
#include "helfrich/boundary.hpp"
#include "helfrich/diffgeo.hpp"
#include "helfrich/energy.hpp"
#include "helfrich/mesh.hpp"
#include "helfrich/optimizer.hpp"
#include "helfrich/util.hpp"
#include "helfrich/varifold.hpp"

namespace helfrich {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string sha256_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot hash missing file: " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (is.good()) {
        is.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    require(j.is_object(), where + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        require(allowed.count(key) > 0, "unknown key '" + key + "' in " + where);
}

EnergyParams parse_params(const json& j) {
    check_keys(j, {"H0", "lambda"}, "params");
    EnergyParams p;
    p.H0 = j.value("H0", 0.0);
    p.lambda = j.value("lambda", 0.0);
    p.check();
    return p;
}

PrimitiveKind parse_kind(const std::string& s) {
    if (s == "icosphere") return PrimitiveKind::Icosphere;
    if (s == "disk") return PrimitiveKind::Disk;
    if (s == "cylinder") return PrimitiveKind::Cylinder;
    if (s == "torus") return PrimitiveKind::Torus;
    if (s == "plane-patch") return PrimitiveKind::PlanePatch;
    if (s == "spherical-cap") return PrimitiveKind::SphericalCap;
    throw RejectedInput("unknown primitive kind: " + s);
}

PrimitiveSpec parse_primitive(const json& j) {
    check_keys(j, {"kind", "radius", "minor_radius", "height", "cap_angle_deg", "extent", "level"},
               "primitive");
    PrimitiveSpec spec;
    spec.kind = parse_kind(j.at("kind").get<std::string>());
    spec.radius = j.value("radius", 1.0);
    spec.minor_radius = j.value("minor_radius", 0.3);
    spec.height = j.value("height", 1.0);
    spec.cap_angle = j.value("cap_angle_deg", 60.0) * std::numbers::pi / 180.0;
    spec.extent = j.value("extent", 1.0);
    spec.level = j.value("level", 0);
    return spec;
}

TriMesh parse_mesh_source(const json& j, std::uint64_t seed) {
    check_keys(j, {"primitive", "file", "perturb"}, "mesh");
    TriMesh mesh;
    if (j.contains("primitive")) {
        mesh = generate_primitive(parse_primitive(j.at("primitive")));
    } else if (j.contains("file")) {
        mesh = load_mesh(j.at("file").get<std::string>());
    } else {
        throw RejectedInput("mesh needs either 'primitive' or 'file'");
    }
    if (j.contains("perturb")) {
        check_keys(j.at("perturb"), {"amplitude"}, "mesh.perturb");
        double amp = j.at("perturb").value("amplitude", 0.0);
        Rng rng(seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        std::vector<Vec3> pos = mesh.vertices;
        Vec3 c = mesh.centroid();
        for (auto& p : pos) {
            Vec3 dir = p - c;
            double len = dir.norm();
            if (len > 0) p += dir * (amp * uni(rng));
        }
        mesh = mesh.with_positions(std::move(pos));
    }
    return mesh;
}

NormalRule parse_normal_rule(const json& j) {
    check_keys(j, {"kind", "alpha_deg"}, "normal_rule");
    NormalRule rule;
    std::string kind = j.value("kind", "in-plane");
    if (kind == "in-plane") {
        rule.kind = NormalRuleKind::InPlane;
    } else if (kind == "constant-angle") {
        rule.kind = NormalRuleKind::ConstantAngle;
        rule.alpha = j.value("alpha_deg", 0.0) * std::numbers::pi / 180.0;
    } else if (kind == "vertical") {
        rule.kind = NormalRuleKind::Vertical;
    } else {
        throw RejectedInput("unknown normal rule: " + kind);
    }
    return rule;
}

BoundaryData parse_boundary(const json& j, int default_count) {
    check_keys(j, {"curve", "radius", "center", "semi_a", "semi_b", "separation", "count",
                   "normal_rule"},
               "boundary");
    CurveSpec spec;
    std::string curve = j.at("curve").get<std::string>();
    if (curve == "circle")
        spec.kind = CurveKind::Circle;
    else if (curve == "ellipse")
        spec.kind = CurveKind::Ellipse;
    else if (curve == "two-circles")
        spec.kind = CurveKind::TwoCircles;
    else
        throw RejectedInput("unknown boundary curve: " + curve);
    spec.radius = j.value("radius", 1.0);
    spec.semi_a = j.value("semi_a", 1.0);
    spec.semi_b = j.value("semi_b", 0.5);
    spec.separation = j.value("separation", 1.0);
    if (j.contains("center")) {
        auto c = j.at("center");
        spec.center = Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
    }
    NormalRule rule =
        j.contains("normal_rule") ? parse_normal_rule(j.at("normal_rule")) : NormalRule{};
    int count = j.value("count", default_count);
    return sample_curve(spec, count, rule);
}

OptOptions parse_options(const json& j, std::uint64_t seed) {
    check_keys(j, {"max_iters", "grad_tol", "tangential_relax_every", "threads",
                   "conormal_schedule"},
               "options");
    OptOptions o;
    o.max_iters = j.value("max_iters", 500);
    o.grad_tol = j.value("grad_tol", 1e-6);
    o.tangential_relax_every = j.value("tangential_relax_every", 0);
    o.n_threads = j.value("threads", 1);
    if (j.contains("conormal_schedule"))
        o.conormal_schedule = j.at("conormal_schedule").get<std::vector<double>>();
    o.seed = seed;
    return o;
}

struct Emitter {
    fs::path dir;
    std::vector<fs::path> files;

    fs::path path(const std::string& name) {
        files.push_back(dir / name);
        return dir / name;
    }
    void write_json(const std::string& name, const json& j) {
        std::ofstream os(path(name));
        os << j.dump(2) << "\n";
    }
};

json energy_json(const EnergyBreakdown& eb, const EnergyParams& params) {
    return json{{"bending", eb.bending},
                {"area_term", eb.area_term},
                {"total", eb.total},
                {"params", {{"H0", params.H0}, {"lambda", params.lambda}}}};
}

// ---------------------------------------------------------------------------
// commands

void cmd_primitive(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"mesh", "seed"}, "config");
    TriMesh mesh = parse_mesh_source(cfg.at("mesh"), seed);
    save_mesh(mesh, em.path("mesh.obj").string());
    save_mesh(mesh, em.path("mesh.off").string());
    save_mesh(mesh, em.path("mesh.json").string());
    ValidationReport rep = validate(mesh);
    GaussBonnet gb = gauss_bonnet(mesh);
    em.write_json("report.json",
                  json{{"vertices", mesh.n_vertices()},
                       {"faces", mesh.n_faces()},
                       {"boundary_loops", mesh.boundary_loops().size()},
                       {"euler_characteristic", gb.euler_char},
                       {"area", mesh.total_area()},
                       {"valid", rep.ok()},
                       {"validation", rep.summary()}});
}

void cmd_energy(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"mesh", "params", "threads", "seed"}, "config");
    TriMesh mesh = parse_mesh_source(cfg.at("mesh"), seed);
    EnergyParams params = parse_params(cfg.at("params"));
    int threads = cfg.value("threads", 1);
    EnergyBreakdown eb = helfrich_energy(mesh, params, threads);
    em.write_json("energy.json", energy_json(eb, params));
    save_curvature_csv(mesh, curvature(mesh), em.path("curvature.csv").string());
}

void cmd_minimize(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"mesh", "params", "boundary", "options", "seed"}, "config");
    TriMesh mesh = parse_mesh_source(cfg.at("mesh"), seed);
    EnergyParams params = parse_params(cfg.at("params"));
    OptOptions opts = parse_options(cfg.value("options", json::object()), seed);

    ClampSet clamp;
    bool clamped = false;
    if (!mesh.boundary_loops().empty()) {
        if (!cfg.contains("boundary")) throw RejectedInput("unbound boundary loop");
        BoundaryData bd = parse_boundary(cfg.at("boundary"),
                                         static_cast<int>(mesh.boundary_loops()[0].size()));
        clamp = bind(mesh, bd);
        clamped = true;
    }
    OptResult res = minimize(mesh, params, clamped ? &clamp : nullptr, opts);

    save_trace_csv(res.trace, em.path("trace.csv").string());
    save_mesh(res.mesh, em.path("final.obj").string());
    json rj{{"termination", termination_name(res.termination)},
            {"energy", energy_json(res.final_energy, params)},
            {"el_residual_norm", res.el_residual_norm},
            {"gauss_bonnet_drift", res.gauss_bonnet_drift},
            {"iterations", res.trace.empty() ? 0 : res.trace.back().iter}};
    if (clamped) {
        rj["conormal_max"] = res.final_conormal.max_angle;
        rj["conormal_mean"] = res.final_conormal.mean_angle;
    }
    em.write_json("result.json", rj);
}

void cmd_varifold(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"mesh", "compare_file", "seed"}, "config");
    TriMesh mesh = parse_mesh_source(cfg.at("mesh"), seed);
    OrientedVarifold V = from_mesh(mesh);
    save_varifold_csv(V, em.path("varifold.csv").string());
    json rj{{"atoms", V.atoms.size()}, {"mass", V.mass()}};
    if (cfg.contains("compare_file")) {
        OrientedVarifold W = load_varifold_csv(cfg.at("compare_file").get<std::string>());
        Vec3 lo, hi;
        shared_bbox(V, W, lo, hi);
        rj["distance"] = varifold_distance(V, W, default_probe_dictionary(lo, hi));
    }
    em.write_json("report.json", rj);
}

void cmd_diagnose(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"mesh", "epsilon0", "rho", "density_center", "density_sigmas", "seed"},
               "config");
    TriMesh mesh = parse_mesh_source(cfg.at("mesh"), seed);
    double eps0 = cfg.value("epsilon0", 1.0);
    double rho = cfg.value("rho", 0.2);

    GaussBonnet gb = gauss_bonnet(mesh);
    ConcentrationReport conc = bad_points(mesh, eps0, rho);
    json rj{{"gauss_bonnet",
             {{"total_K", gb.total_K},
              {"boundary_geodesic", gb.boundary_geodesic},
              {"closure", gb.closure()},
              {"euler_characteristic", gb.euler_char}}},
            {"bad_points",
             {{"epsilon0", eps0},
              {"rho", rho},
              {"count", conc.bad_points.size()},
              {"clusters", conc.cluster_count},
              {"vertices", conc.bad_points}}}};
    if (mesh.boundary_loops().empty()) {
        DiameterCheck dc = diameter_check(mesh);
        rj["diameter"] = json{{"lower", dc.lower},
                              {"diam", dc.diam},
                              {"upper_ratio", dc.upper_ratio},
                              {"area", dc.area},
                              {"willmore", dc.willmore}};
    }
    if (cfg.contains("density_center") && cfg.contains("density_sigmas")) {
        auto c = cfg.at("density_center");
        Vec3 center(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
        json ratios = json::array();
        for (double sigma : cfg.at("density_sigmas").get<std::vector<double>>())
            ratios.push_back(
                json{{"sigma", sigma}, {"ratio", density_ratio(mesh, center, sigma)}});
        rj["density_ratios"] = ratios;
    }
    em.write_json("report.json", rj);
    save_curvature_csv(mesh, curvature(mesh), em.path("curvature.csv").string());
}

void cmd_slab(const json& cfg, std::uint64_t seed, Emitter& em) {
    check_keys(cfg, {"h_list", "extent", "level", "params", "options", "seed"}, "config");
    SlabSpec spec;
    if (cfg.contains("h_list")) spec.h_list = cfg.at("h_list").get<std::vector<double>>();
    spec.extent = cfg.value("extent", 1.0);
    spec.level = cfg.value("level", 5);
    if (cfg.contains("params")) spec.params = parse_params(cfg.at("params"));
    OptOptions opts = parse_options(cfg.value("options", json::object()), seed);
    SlabResult res = slab_experiment(spec, opts);

    json runs = json::array();
    for (std::size_t i = 0; i < res.runs.size(); ++i) {
        const auto& r = res.runs[i];
        std::string tag = "h" + std::to_string(i);
        save_varifold_csv(r.snapshot, em.path("snapshot_" + tag + ".csv").string());
        save_mesh(r.mesh, em.path("mesh_" + tag + ".obj").string());
        runs.push_back(json{{"h", r.h},
                            {"energy", r.energy},
                            {"varifold_distance", r.distance_to_double_plane},
                            {"hausdorff", r.hausdorff_to_plane}});
    }
    em.write_json("slab.json", json{{"runs", runs},
                                    {"limit_energy", res.limit_energy},
                                    {"lsc_failure_flag", res.lsc_failure_flag}});
}

void cmd_lsc_graph(const json& cfg, std::uint64_t seed, Emitter& em) {
    (void)seed;
    check_keys(cfg, {"base", "m_list", "params", "quad_n", "seed"}, "config");
    std::string base = cfg.value("base", "flat");
    GraphSpec g;
    if (base == "flat")
        g = graph_flat();
    else if (base == "paraboloid")
        g = graph_paraboloid(0.3);
    else if (base == "saddle")
        g = graph_saddle(0.25);
    else
        throw RejectedInput("unknown base graph: " + base);
    std::vector<int> m_list = {8, 16, 32};
    if (cfg.contains("m_list")) m_list = cfg.at("m_list").get<std::vector<int>>();
    EnergyParams params = cfg.contains("params") ? parse_params(cfg.at("params")) : EnergyParams{};
    int quad_n = cfg.value("quad_n", 256);
    GraphLscResult res = graph_lsc_experiment(g, m_list, params, quad_n);
    em.write_json("lsc.json", json{{"base", base},
                                   {"m_list", res.m_list},
                                   {"W_m", res.W_m},
                                   {"W_limit", res.W_limit},
                                   {"lsc_holds", res.lsc_holds}});
}

void cmd_biharmonic(const json& cfg, std::uint64_t seed, Emitter& em) {
    (void)seed;
    check_keys(cfg, {"family", "rho", "n", "m", "agmon_rhos", "seed"}, "config");
    std::string family = cfg.value("family", "saddle");
    std::function<double(double, double)> F;
    std::function<Eigen::Vector2d(double, double)> Fg;
    if (family == "affine") {
        F = [](double x, double y) { return 0.3 + 0.7 * x - 0.2 * y; };
        Fg = [](double, double) { return Eigen::Vector2d(0.7, -0.2); };
    } else if (family == "saddle") {
        F = [](double x, double y) { return x * x - y * y; };
        Fg = [](double x, double y) { return Eigen::Vector2d(2 * x, -2 * y); };
    } else if (family == "trig") {
        F = [](double x, double y) { return std::sin(2 * x) * std::cos(y) + 0.5 * x * y; };
        Fg = [](double x, double y) {
            return Eigen::Vector2d(2 * std::cos(2 * x) * std::cos(y) + 0.5 * y,
                                   -std::sin(2 * x) * std::sin(y) + 0.5 * x);
        };
    } else {
        throw RejectedInput("unknown trace family: " + family);
    }
    double rho = cfg.value("rho", 1.0);
    int n = cfg.value("n", 64);
    int m = cfg.value("m", 64);

    TraceFamily fam = ambient_trace_family(F, Fg);
    std::vector<double> u(m), dudn(m);
    for (int j = 0; j < m; ++j) {
        double th = 2.0 * std::numbers::pi * j / m;
        u[j] = fam.u(th, rho);
        dudn[j] = fam.dudn(th, rho);
    }
    BiharmonicPatch patch = biharmonic_extension(u, dudn, rho, n);
    save_patch_csv(patch, em.path("patch.csv").string());

    std::vector<double> rhos = {rho, rho / 2, rho / 4};
    if (cfg.contains("agmon_rhos")) rhos = cfg.at("agmon_rhos").get<std::vector<double>>();
    AgmonScaling ag = agmon_scaling(rhos, fam, m, n);
    json scaling = json::array();
    for (std::size_t i = 0; i < ag.rho.size(); ++i)
        scaling.push_back(json{{"rho", ag.rho[i]}, {"sup_grad", ag.sup_grad[i]}});
    em.write_json("biharmonic.json", json{{"family", family},
                                          {"method", patch.method},
                                          {"rim_residual", patch.rim_residual()},
                                          {"scaling", scaling},
                                          {"ratios", ag.ratios},
                                          {"law_holds", ag.law_holds}});
}

void cmd_axisym(const json& cfg, std::uint64_t seed, Emitter& em) {
    (void)seed;
    check_keys(cfg, {"start", "end", "params", "n", "max_iters", "revolve_segments", "seed"},
               "config");
    auto parse_end = [](const json& j) {
        check_keys(j, {"radius", "height", "alpha_deg"}, "axisym end");
        AxisymEnd e;
        e.radius = j.value("radius", 1.0);
        e.height = j.value("height", 0.0);
        e.alpha = j.value("alpha_deg", 0.0) * std::numbers::pi / 180.0;
        return e;
    };
    AxisymEnd start = parse_end(cfg.at("start"));
    AxisymEnd end = parse_end(cfg.at("end"));
    EnergyParams params = parse_params(cfg.at("params"));
    int n = cfg.value("n", 129);
    int max_iters = cfg.value("max_iters", 2000);

    AxisymResult res = axisym_minimize(start, end, params, n, max_iters);
    save_profile_csv(res.profile, em.path("profile.csv").string());
    if (cfg.contains("revolve_segments")) {
        TriMesh mesh = revolve(res.profile, cfg.at("revolve_segments").get<int>());
        save_mesh(mesh, em.path("revolved.obj").string());
    }
    em.write_json("axisym.json", json{{"energy", res.energy},
                                      {"converged", res.converged},
                                      {"iterations", res.iterations},
                                      {"message", res.message}});
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, std::uint64_t seed) {
    json manifest;
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["versions"] = json{{"helfrich", kVersion}};

    Emitter em;
    em.dir = out_dir;
    int code = 0;
    try {
        fs::create_directories(em.dir);
        std::ifstream is(config_path);
        require(is.good(), "cannot open config: " + config_path);
        json cfg = json::parse(is);
        if (cfg.contains("seed") && seed == 0) {
            seed = cfg.at("seed").get<std::uint64_t>();
            manifest["seed"] = seed;
        }
        manifest["config_echo"] = cfg;

        if (command == "primitive")
            cmd_primitive(cfg, seed, em);
        else if (command == "energy")
            cmd_energy(cfg, seed, em);
        else if (command == "minimize")
            cmd_minimize(cfg, seed, em);
        else if (command == "varifold")
            cmd_varifold(cfg, seed, em);
        else if (command == "diagnose")
            cmd_diagnose(cfg, seed, em);
        else if (command == "slab")
            cmd_slab(cfg, seed, em);
        else if (command == "lsc-graph")
            cmd_lsc_graph(cfg, seed, em);
        else if (command == "biharmonic")
            cmd_biharmonic(cfg, seed, em);
        else if (command == "axisym")
            cmd_axisym(cfg, seed, em);
        else
            throw RejectedInput("unknown command: " + command);
        manifest["status"] = "ok";
    } catch (const RejectedInput& e) {
        manifest["status"] = "rejected";
        manifest["reason"] = e.what();
        code = 1;
    } catch (const std::exception& e) {
        manifest["status"] = "failed";
        manifest["reason"] = e.what();
        code = 2;
    }

    json files = json::array();
    for (const auto& f : em.files)
        if (fs::exists(f))
            files.push_back(json{{"path", f.filename().string()}, {"sha256", sha256_file(f)}});
    manifest["files"] = files;
    std::ofstream os(fs::path(out_dir) / "manifest.json");
    if (os.good()) os << manifest.dump(2) << "\n";
    return code;
}

}  // namespace helfrich
