#include "helfrich/axisym.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>

#include "helfrich/lbfgs.hpp"
#include "helfrich/util.hpp"

namespace helfrich {

namespace {

// 4th-order finite differences on a uniform grid, shifted stencils at the ends
void derivatives(const std::vector<double>& f, double h, std::vector<double>& d1,
                 std::vector<double>& d2) {
    const int n = static_cast<int>(f.size());
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
    auto at = [&](int i) { return f[std::clamp(i, 0, n - 1)]; };
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i < n - 2) {
            d1[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
            d2[i] = (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) /
                    (12 * h * h);
        } else if (i < 2) {
            int o = 0;  // stencil anchored at the left end
            d1[i] = i == 0 ? (-25 * at(o) + 48 * at(o + 1) - 36 * at(o + 2) + 16 * at(o + 3) -
                              3 * at(o + 4)) /
                                 (12 * h)
                           : (-3 * at(o) - 10 * at(o + 1) + 18 * at(o + 2) - 6 * at(o + 3) +
                              at(o + 4)) /
                                 (12 * h);
            d2[i] = i == 0 ? (35 * at(o) - 104 * at(o + 1) + 114 * at(o + 2) - 56 * at(o + 3) +
                              11 * at(o + 4)) /
                                 (12 * h * h)
                           : (11 * at(o) - 20 * at(o + 1) + 6 * at(o + 2) + 4 * at(o + 3) -
                              at(o + 4)) /
                                 (12 * h * h);
        } else {
            int o = n - 1;  // mirrored stencils at the right end
            d1[i] = i == n - 1 ? (25 * at(o) - 48 * at(o - 1) + 36 * at(o - 2) - 16 * at(o - 3) +
                                  3 * at(o - 4)) /
                                     (12 * h)
                               : (3 * at(o) + 10 * at(o - 1) - 18 * at(o - 2) + 6 * at(o - 3) -
                                  at(o - 4)) /
                                     (12 * h);
            d2[i] = i == n - 1 ? (35 * at(o) - 104 * at(o - 1) + 114 * at(o - 2) - 56 * at(o - 3) +
                                  11 * at(o - 4)) /
                                     (12 * h * h)
                               : (11 * at(o) - 20 * at(o - 1) + 6 * at(o - 2) + 4 * at(o - 3) -
                                  at(o - 4)) /
                                     (12 * h * h);
        }
    }
}

double simpson(const std::vector<double>& g, double h) {
    const int n = static_cast<int>(g.size());
    if (n < 2) return 0;
    double total = 0;
    // composite Simpson over pairs of intervals, 3/8 rule for a leftover tail
    bool tail = ((n - 1) % 2) != 0;
    int limit = tail ? n - 4 : n - 3;
    for (int i = 0; i <= limit; i += 2) total += h / 3.0 * (g[i] + 4 * g[i + 1] + g[i + 2]);
    if (tail) {
        if (n >= 4) {
            total += 3.0 * h / 8.0 * (g[n - 4] + 3 * g[n - 3] + 3 * g[n - 2] + g[n - 1]);
        } else {
            total += h / 2.0 * (g[n - 2] + g[n - 1]);
        }
    }
    return total;
}

Profile sampled(int n, const std::function<double(double)>& rf,
                const std::function<double(double)>& zf, double s0, double s1) {
    Profile p;
    p.ds = (s1 - s0) / (n - 1);
    p.r.resize(n);
    p.z.resize(n);
    for (int i = 0; i < n; ++i) {
        double s = s0 + p.ds * i;
        p.r[i] = rf(s);
        p.z[i] = zf(s);
    }
    return p;
}

}  // namespace

Profile profile_cylinder(double radius, double height, int n) {
    require(radius > 0 && height > 0 && n >= 2, "bad cylinder profile parameters");
    return sampled(n, [radius](double) { return radius; }, [](double s) { return s; }, 0, height);
}

Profile profile_sphere(double radius, int n) {
    require(radius > 0 && n >= 2, "bad sphere profile parameters");
    return sampled(
        n, [radius](double s) { return radius * std::sin(s / radius); },
        [radius](double s) { return -radius * std::cos(s / radius); }, 0,
        std::numbers::pi * radius);
}

Profile profile_catenoid(double c, double z0, double z1, int n) {
    require(c > 0 && z1 > z0 && n >= 2, "bad catenoid profile parameters");
    double s0 = c * std::sinh(z0 / c), s1 = c * std::sinh(z1 / c);
    return sampled(
        n, [c](double s) { return std::sqrt(c * c + s * s); },
        [c](double s) { return c * std::asinh(s / c); }, s0, s1);
}

Profile profile_cap(double radius, double alpha, int n) {
    require(radius > 0 && alpha > 0 && alpha < std::numbers::pi && n >= 2, "bad cap parameters");
    double L = radius * alpha;
    return sampled(
        n, [radius, alpha, L](double s) { return radius * std::sin(alpha - s / radius); },
        [radius, alpha](double s) { return radius * std::cos(alpha - s / radius); }, 0, L);
}

Profile profile_disk(double radius, double z_height, int n) {
    require(radius > 0 && n >= 2, "bad disk parameters");
    return sampled(
        n, [radius](double s) { return radius - s; }, [z_height](double) { return z_height; }, 0,
        radius);
}

void check_profile(const Profile& p) {
    const int n = p.size();
    require(n >= 8, "profile needs at least 8 samples");
    require(p.ds > 0, "profile spacing must be positive");
    for (int i = 1; i + 1 < n; ++i)
        require(p.r[i] > 0, "profile crosses the axis at an interior sample");
    require(p.r.front() >= 0 && p.r.back() >= 0, "negative radius");
    std::vector<double> rp, rpp, zp, zpp;
    derivatives(p.r, p.ds, rp, rpp);
    derivatives(p.z, p.ds, zp, zpp);
    // arc-length normalization: uniform chords plus near-unit speed (the
    // looser speed tolerance admits the mild end kinks of minimizer output)
    for (int i = 0; i + 1 < n; ++i) {
        double chord = std::hypot(p.r[i + 1] - p.r[i], p.z[i + 1] - p.z[i]);
        require(std::abs(chord - p.ds) < 1e-3 * p.ds, "profile chords are not uniform");
    }
    for (int i = 0; i < n; ++i) {
        double speed = std::hypot(rp[i], zp[i]);
        require(std::abs(speed - 1.0) < 5e-3,
                "profile is not arc-length parametrized (|(r',z')| = " + format_double(speed) + ")");
    }
}

double axisym_energy(const Profile& p, const EnergyParams& params) {
    params.check();
    check_profile(p);
    const int n = p.size();
    std::vector<double> rp, rpp, zp, zpp;
    derivatives(p.r, p.ds, rp, rpp);
    derivatives(p.z, p.ds, zp, zpp);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        double km = rp[i] * zpp[i] - zp[i] * rpp[i];
        double kp;
        if (p.r[i] < 1e-12) {
            kp = km;  // axis limit of z'/r on a smooth cap
        } else {
            kp = zp[i] / p.r[i];
        }
        double dev = km + kp - params.H0;
        g[i] = (dev * dev + params.lambda) * p.r[i];
    }
    return 2.0 * std::numbers::pi * simpson(g, p.ds);
}

TriMesh revolve(const Profile& p, int azimuthal_segments) {
    check_profile(p);
    const int m = azimuthal_segments;
    require(m >= 3, "need at least 3 azimuthal segments");
    const int n = p.size();
    const bool apex0 = p.touches_axis_start();
    const bool apex1 = p.touches_axis_end();

    std::vector<Vec3> verts;
    std::vector<int> ring_start(n, -1);
    for (int i = 0; i < n; ++i) {
        if ((i == 0 && apex0) || (i == n - 1 && apex1)) continue;
        ring_start[i] = static_cast<int>(verts.size());
        for (int j = 0; j < m; ++j) {
            double th = 2.0 * std::numbers::pi * j / m;
            verts.emplace_back(p.r[i] * std::cos(th), p.r[i] * std::sin(th), p.z[i]);
        }
    }
    int apex0_id = -1, apex1_id = -1;
    if (apex0) {
        apex0_id = static_cast<int>(verts.size());
        verts.emplace_back(0, 0, p.z.front());
    }
    if (apex1) {
        apex1_id = static_cast<int>(verts.size());
        verts.emplace_back(0, 0, p.z.back());
    }

    std::vector<std::array<int, 3>> faces;
    auto ring_vertex = [&](int i, int j) { return ring_start[i] + (j % m); };
    for (int i = 0; i + 1 < n; ++i) {
        if (ring_start[i] < 0 || ring_start[i + 1] < 0) continue;
        for (int j = 0; j < m; ++j) {
            int a = ring_vertex(i, j), b = ring_vertex(i, j + 1);
            int c = ring_vertex(i + 1, j), d = ring_vertex(i + 1, j + 1);
            faces.push_back({a, b, d});
            faces.push_back({a, d, c});
        }
    }
    if (apex0) {
        for (int j = 0; j < m; ++j)
            faces.push_back({apex0_id, ring_vertex(1, j + 1), ring_vertex(1, j)});
    }
    if (apex1) {
        for (int j = 0; j < m; ++j)
            faces.push_back({apex1_id, ring_vertex(n - 2, j), ring_vertex(n - 2, j + 1)});
    }
    return make_mesh(std::move(verts), std::move(faces));
}

// ---------------------------------------------------------------------------
// 1-D minimizer

namespace {

Profile resample_arclength(const Profile& p) {
    const int n = p.size();
    std::vector<double> cum(n, 0.0);
    for (int i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + std::hypot(p.r[i] - p.r[i - 1], p.z[i] - p.z[i - 1]);
    double L = cum[n - 1];
    Profile q;
    q.ds = L / (n - 1);
    q.r.resize(n);
    q.z.resize(n);
    int seg = 0;
    for (int i = 0; i < n; ++i) {
        double s = q.ds * i;
        while (seg + 2 < n && cum[seg + 1] < s) ++seg;
        double f = (s - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
        f = std::clamp(f, 0.0, 1.0);
        q.r[i] = p.r[seg] + f * (p.r[seg + 1] - p.r[seg]);
        q.z[i] = p.z[seg] + f * (p.z[seg + 1] - p.z[seg]);
    }
    q.r.front() = p.r.front();
    q.z.front() = p.z.front();
    q.r.back() = p.r.back();
    q.z.back() = p.z.back();
    return q;
}

struct AxisymObjective {
    EnergyParams params;
    int n;
    double r0, z0, r1, z1;
    double t0x, t0y;  // prescribed tangent at s=0
    double t1x, t1y;  // prescribed tangent at s=L

    // samples 1 and n-2 are derived from the end tangents (hard clamp of the
    // meridian angle); unknowns are the samples 2 .. n-3
    int n_free() const { return n - 4; }

    Profile build(const Eigen::VectorXd& x) const {
        Profile p;
        p.r.resize(n);
        p.z.resize(n);
        p.r[0] = r0;
        p.z[0] = z0;
        p.r[n - 1] = r1;
        p.z[n - 1] = z1;
        for (int i = 2; i + 2 < n; ++i) {
            p.r[i] = x[2 * (i - 2)];
            p.z[i] = x[2 * (i - 2) + 1];
        }
        // clamped samples sit on the prescribed end rays at the local spacing
        double step0 = std::hypot(p.r[2] - r0, p.z[2] - z0) / 2.0;
        double step1 = std::hypot(p.r[n - 3] - r1, p.z[n - 3] - z1) / 2.0;
        p.r[1] = r0 + step0 * t0x;
        p.z[1] = z0 + step0 * t0y;
        p.r[n - 2] = r1 - step1 * t1x;
        p.z[n - 2] = z1 - step1 * t1y;
        double L = 0;
        for (int i = 1; i < n; ++i) L += std::hypot(p.r[i] - p.r[i - 1], p.z[i] - p.z[i - 1]);
        p.ds = L / (n - 1);
        return p;
    }

    double energy_of(const Profile& p) const {
        Profile q = resample_arclength(p);
        // interior axis contact makes the integrand singular; forbid it here
        for (int i = 1; i + 1 < q.size(); ++i)
            if (q.r[i] <= 1e-9) return std::numeric_limits<double>::infinity();
        std::vector<double> rp, rpp, zp, zpp;
        derivatives(q.r, q.ds, rp, rpp);
        derivatives(q.z, q.ds, zp, zpp);
        const int nn = q.size();
        std::vector<double> g(nn);
        for (int i = 0; i < nn; ++i) {
            double km = rp[i] * zpp[i] - zp[i] * rpp[i];
            double kp = q.r[i] < 1e-12 ? km : zp[i] / q.r[i];
            double dev = km + kp - params.H0;
            g[i] = (dev * dev + params.lambda) * q.r[i];
        }
        return 2.0 * std::numbers::pi * simpson(g, q.ds);
    }

    double operator()(const Eigen::VectorXd& x) const { return energy_of(build(x)); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g(x.size());
        Eigen::VectorXd xs = x;
        const double step = 1e-6;
        for (int i = 0; i < x.size(); ++i) {
            double keep = xs[i];
            xs[i] = keep + step;
            double ep = energy_of(build(xs));
            xs[i] = keep - step;
            double em = energy_of(build(xs));
            xs[i] = keep;
            g[i] = (ep - em) / (2 * step);
        }
        return g;
    }
};

}  // namespace

AxisymResult axisym_minimize(const AxisymEnd& start, const AxisymEnd& end,
                             const EnergyParams& params, int n, int max_iters, double grad_tol) {
    params.check();
    require(n >= 64, "need at least 64 profile samples");
    require(start.radius > 0, "start ring must be off the axis");
    require(end.radius >= 0, "negative end radius");
    if (end.radius == 0)
        require(std::abs(std::sin(end.alpha)) < 1e-9,
                "axis endpoint requires a horizontal meridian (alpha = 0)");

    AxisymObjective obj;
    obj.params = params;
    obj.n = n;
    obj.r0 = start.radius;
    obj.z0 = start.height;
    obj.r1 = end.radius;
    obj.z1 = end.height;
    // inner conormal at s=0 equals the forward tangent; at s=L it is the
    // backward tangent (see the boundary module's constant-angle rule)
    obj.t0x = -std::cos(start.alpha);
    obj.t0y = std::sin(start.alpha);
    obj.t1x = std::cos(end.alpha);
    obj.t1y = -std::sin(end.alpha);
    if (end.radius == 0) {
        obj.t1x = -1.0;  // meet the axis perpendicular
        obj.t1y = 0.0;
    }

    // cubic Hermite initial profile honoring the clamped end tangents,
    // resampled to uniform arc length
    Eigen::VectorXd x(2 * obj.n_free());
    {
        double chord = std::hypot(end.radius - start.radius, end.height - start.height);
        double scale = std::max(chord, 1e-6);
        Profile init;
        init.r.resize(n);
        init.z.resize(n);
        for (int i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / (n - 1);
            double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
            double h10 = t * (1 - t) * (1 - t);
            double h01 = t * t * (3 - 2 * t);
            double h11 = t * t * (t - 1);
            init.r[i] = h00 * obj.r0 + h10 * scale * obj.t0x + h01 * obj.r1 +
                        h11 * scale * obj.t1x;
            init.z[i] = h00 * obj.z0 + h10 * scale * obj.t0y + h01 * obj.z1 +
                        h11 * scale * obj.t1y;
        }
        init.ds = 1.0;  // placeholder, resampling recomputes it
        Profile q = resample_arclength(init);
        for (int i = 2; i + 2 < n; ++i) {
            x[2 * (i - 2)] = std::max(q.r[i], 1e-6);
            x[2 * (i - 2) + 1] = q.z[i];
        }
    }

    LbfgsMemory mem(10);
    double fx = obj(x);
    Eigen::VectorXd g = obj.gradient(x);
    AxisymResult res;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd d = mem.direction(g);
        if (d.dot(g) >= 0) {
            mem.clear();
            d = -g;
        }
        double alpha = 1.0;
        bool accepted = false;
        const double slope = g.dot(d);
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd xn = x + alpha * d;
            double fn = obj(xn);
            if (std::isfinite(fn) && fn <= fx + 1e-4 * alpha * slope) {
                // accept, then reproject to uniform arc length
                Profile q = resample_arclength(obj.build(xn));
                Eigen::VectorXd xr(x.size());
                for (int i = 2; i + 2 < n; ++i) {
                    xr[2 * (i - 2)] = q.r[i];
                    xr[2 * (i - 2) + 1] = q.z[i];
                }
                double fr = obj(xr);
                Eigen::VectorXd gn = obj.gradient(xr);
                mem.push(xr - x, gn - g);
                x = xr;
                fx = fr;
                g = gn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            res.message = "line search failed";
            break;
        }
    }
    res.iterations = iter;
    res.profile = resample_arclength(obj.build(x));
    res.energy = axisym_energy(res.profile, params);
    if (res.converged) res.message = "converged";
    if (!res.converged && res.message.empty()) res.message = "max iterations reached";
    return res;
}

void save_profile_csv(const Profile& p, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    os << "s,r,z\n";
    for (int i = 0; i < p.size(); ++i)
        os << format_double(p.ds * i) << ',' << format_double(p.r[i]) << ','
           << format_double(p.z[i]) << '\n';
}

}  // namespace helfrich
