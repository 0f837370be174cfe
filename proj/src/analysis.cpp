#include "helfrich/analysis.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "helfrich/util.hpp"

namespace helfrich {

namespace {

using Cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// powers zeta^0 .. zeta^K
std::vector<Cplx> powers(const Cplx& zeta, int K) {
    std::vector<Cplx> p(K + 1);
    p[0] = Cplx(1, 0);
    for (int k = 1; k <= K; ++k) p[k] = p[k - 1] * zeta;
    return p;
}

TriMesh polar_grid(double rho, int n, int m) {
    std::vector<Vec3> v;
    v.emplace_back(0, 0, 0);
    for (int i = 1; i <= n; ++i)
        for (int j = 0; j < m; ++j) {
            double r = rho * i / n, th = kTwoPi * j / m;
            v.emplace_back(r * std::cos(th), r * std::sin(th), 0);
        }
    auto id = [m](int ring, int j) { return ring == 0 ? 0 : 1 + (ring - 1) * m + (j % m); };
    std::vector<std::array<int, 3>> f;
    for (int j = 0; j < m; ++j) f.push_back({0, id(1, j), id(1, j + 1)});
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return make_mesh(std::move(v), std::move(f));
}

}  // namespace

double BiharmonicPatch::value(double x, double y) const {
    Cplx zeta(x / rho, y / rho);
    double r2 = std::norm(zeta);
    auto zp = powers(zeta, static_cast<int>(A.size()) - 1);
    double out = 0;
    for (std::size_t k = 0; k < A.size(); ++k)
        out += ((A[k] + B[k] * r2) * zp[k]).real();
    return out;
}

Eigen::Vector2d BiharmonicPatch::gradient(double x, double y) const {
    Cplx zeta(x / rho, y / rho);
    const double c = 1.0 / rho;
    auto zp = powers(zeta, static_cast<int>(A.size()));
    Cplx zbar = std::conj(zeta);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < A.size(); ++k) {
        double kk = static_cast<double>(k);
        Cplx dx(0, 0), dy(0, 0);
        if (k >= 1) {
            Cplx t = A[k] * kk * zp[k - 1] * c;
            dx += t;
            dy += Cplx(0, 1) * t;
        }
        Cplx tb = B[k] * c * ((kk + 1.0) * zp[k] * zbar + zp[k + 1]);
        Cplx tby = B[k] * c * Cplx(0, 1) * ((kk + 1.0) * zp[k] * zbar - zp[k + 1]);
        dx += tb;
        dy += tby;
        g[0] += dx.real();
        g[1] += dy.real();
    }
    return g;
}

Eigen::Matrix2d BiharmonicPatch::hessian(double x, double y) const {
    Cplx zeta(x / rho, y / rho);
    const double c2 = 1.0 / (rho * rho);
    auto zp = powers(zeta, static_cast<int>(A.size()));
    Cplx zbar = std::conj(zeta);
    double wxx = 0, wxy = 0, wyy = 0;
    for (std::size_t k = 0; k < A.size(); ++k) {
        double kk = static_cast<double>(k);
        if (k >= 2) {
            Cplx t = A[k] * kk * (kk - 1.0) * zp[k - 2] * c2;
            wxx += t.real();
            wxy += -t.imag();
            wyy += -t.real();
        }
        Cplx zk = zp[k];
        Cplx zkm1 = k >= 1 ? zp[k - 1] : Cplx(0, 0);
        Cplx txx = B[k] * c2 * (kk * (kk + 1.0) * zkm1 * zbar + 2.0 * (kk + 1.0) * zk);
        Cplx txy = B[k] * c2 * Cplx(0, 1) * (kk * (kk + 1.0) * zkm1 * zbar);
        Cplx tyy = -B[k] * c2 * (kk * (kk + 1.0) * zkm1 * zbar - 2.0 * (kk + 1.0) * zk);
        wxx += txx.real();
        wxy += txy.real();
        wyy += tyy.real();
    }
    Eigen::Matrix2d H;
    H << wxx, wxy, wxy, wyy;
    return H;
}

double BiharmonicPatch::rim_residual() const {
    double worst = 0;
    double scale = 1e-30;
    for (int j = 0; j < m; ++j) {
        scale = std::max({scale, std::abs(rim_u[j]), rho * std::abs(rim_dudn[j])});
    }
    for (int j = 0; j < m; ++j) {
        double th = kTwoPi * j / m;
        double x = rho * std::cos(th), y = rho * std::sin(th);
        worst = std::max(worst, std::abs(value(x, y) - rim_u[j]));
        Eigen::Vector2d g = gradient(x, y);
        double dn = g[0] * std::cos(th) + g[1] * std::sin(th);
        worst = std::max(worst, rho * std::abs(dn - rim_dudn[j]));
    }
    return worst / scale;
}

BiharmonicPatch biharmonic_extension(const std::vector<double>& u, const std::vector<double>& dudn,
                                     double rho, int n) {
    const int m = static_cast<int>(u.size());
    require(m >= 16, "need at least 16 rim samples");
    require(m % 2 == 0, "rim sample count must be even");
    require(dudn.size() == u.size(), "trace and derivative sample counts differ");
    require(rho > 0, "disk radius must be positive");
    require(n >= 2, "grid resolution too small");
    for (double v : u) require(std::isfinite(v), "trace must be finite");
    for (double v : dudn) require(std::isfinite(v), "trace derivative must be finite");

    BiharmonicPatch patch;
    patch.rho = rho;
    patch.n = n;
    patch.m = m;
    patch.rim_u = u;
    patch.rim_dudn = dudn;
    patch.method = "almansi-fourier spectral collocation (conforming C1 basis)";

    // DFT of the rim samples: u(theta) = sum_k Re(U_k e^{i k theta})
    const int K = m / 2;
    patch.A.assign(K + 1, Cplx(0, 0));
    patch.B.assign(K + 1, Cplx(0, 0));
    for (int k = 0; k <= K; ++k) {
        Cplx Uk(0, 0), Gk(0, 0);
        for (int j = 0; j < m; ++j) {
            Cplx e = std::polar(1.0, -kTwoPi * k * j / m);
            Uk += u[j] * e;
            Gk += dudn[j] * e;
        }
        double scale = (k == 0 || k == K) ? 1.0 / m : 2.0 / m;
        Uk *= scale;
        Gk *= scale;
        // A z^k + B z^k |z|^2 in zeta = z/rho coordinates:
        // A + B = U, k A + (k+2) B = rho G
        patch.B[k] = 0.5 * (rho * Gk - static_cast<double>(k) * Uk);
        patch.A[k] = Uk - patch.B[k];
    }

    patch.grid = polar_grid(rho, n, m);
    patch.w.resize(patch.grid.n_vertices());
    for (int v = 0; v < patch.grid.n_vertices(); ++v)
        patch.w[v] = patch.value(patch.grid.vertices[v].x(), patch.grid.vertices[v].y());

    double defect = patch.rim_residual();
    if (defect > 1e-8)
        throw NumericalFailure("clamped-plate solve lost the rim data (defect " +
                               format_double(defect) + ")");
    return patch;
}

BendingComparison bending_comparison(const BiharmonicPatch& patch, double rim_curvature_integral) {
    require(rim_curvature_integral >= 0, "rim curvature integral must be non-negative");
    BendingComparison out;
    // edge-midpoint quadrature (exact for quadratics) of the closed-form Hessian
    for (int f = 0; f < patch.grid.n_faces(); ++f) {
        const auto& t = patch.grid.faces()[f];
        double area = patch.grid.face_area(f);
        for (int k = 0; k < 3; ++k) {
            Vec3 mid = 0.5 * (patch.grid.vertices[t[k]] + patch.grid.vertices[t[(k + 1) % 3]]);
            Eigen::Matrix2d H = patch.hessian(mid.x(), mid.y());
            double frob2 = H(0, 0) * H(0, 0) + 2 * H(0, 1) * H(0, 1) + H(1, 1) * H(1, 1);
            out.l1 += area / 3.0 * std::sqrt(frob2);
            out.l2 += area / 3.0 * frob2;
        }
    }
    if (rim_curvature_integral > 0) {
        out.ratio_l1 = out.l1 / (patch.rho * rim_curvature_integral);
        out.ratio_l2 = out.l2 / (patch.rho * rim_curvature_integral);
    } else if (out.l2 > 1e-12) {
        out.vacuous = true;
    }
    return out;
}

TraceFamily ambient_trace_family(const std::function<double(double, double)>& F,
                                 const std::function<Eigen::Vector2d(double, double)>& Fg) {
    TraceFamily fam;
    fam.u = [F](double theta, double rho) {
        return F(rho * std::cos(theta), rho * std::sin(theta));
    };
    fam.dudn = [Fg](double theta, double rho) {
        Eigen::Vector2d g = Fg(rho * std::cos(theta), rho * std::sin(theta));
        return g[0] * std::cos(theta) + g[1] * std::sin(theta);
    };
    return fam;
}

AgmonScaling agmon_scaling(const std::vector<double>& rhos, const TraceFamily& family, int m,
                           int n) {
    require(rhos.size() >= 2, "need at least two radii");
    for (std::size_t i = 0; i + 1 < rhos.size(); ++i)
        require(std::abs(rhos[i + 1] - 0.5 * rhos[i]) < 1e-9 * rhos[i],
                "radius list must halve at every step");

    AgmonScaling out;
    out.rho = rhos;
    for (double rho : rhos) {
        std::vector<double> u(m), g(m);
        for (int j = 0; j < m; ++j) {
            double th = kTwoPi * j / m;
            u[j] = family.u(th, rho);
            g[j] = family.dudn(th, rho);
        }
        BiharmonicPatch patch = biharmonic_extension(u, g, rho, n);
        double sup = 0;
        for (const auto& p : patch.grid.vertices)
            sup = std::max(sup, patch.gradient(p.x(), p.y()).norm());
        out.sup_grad.push_back(sup);
    }
    out.law_holds = true;
    for (std::size_t i = 0; i + 1 < out.sup_grad.size(); ++i) {
        double ratio = out.sup_grad[i + 1] / std::max(out.sup_grad[i], 1e-300);
        out.ratios.push_back(ratio);
        if (ratio > 2.0 * 1.1) out.law_holds = false;
    }
    return out;
}

double discrete_laplacian_energy(const TriMesh& grid, const std::vector<double>& w) {
    require(w.size() == grid.vertices.size(), "field size mismatch");
    const int nv = grid.n_vertices();
    std::vector<double> lap(nv, 0.0), area(nv, 0.0);
    for (int f = 0; f < grid.n_faces(); ++f) {
        const auto& t = grid.faces()[f];
        double third = grid.face_area(f) / 3.0;
        for (int k = 0; k < 3; ++k) {
            area[t[k]] += third;
            int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
            const Vec3& pa = grid.vertices[t[k]];
            Vec3 e1 = grid.vertices[a] - pa, e2 = grid.vertices[b] - pa;
            double s = e1.cross(e2).norm();
            double cot = s > 0 ? e1.dot(e2) / s : 0.0;
            lap[a] += 0.5 * cot * (w[b] - w[a]);
            lap[b] += 0.5 * cot * (w[a] - w[b]);
        }
    }
    double total = 0;
    for (int v = 0; v < nv; ++v) {
        if (area[v] <= 0) continue;
        double l = lap[v] / area[v];
        total += area[v] * l * l;
    }
    return total;
}

void save_patch_csv(const BiharmonicPatch& patch, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    os << "x,y,w\n";
    for (int v = 0; v < patch.grid.n_vertices(); ++v)
        os << format_double(patch.grid.vertices[v].x()) << ','
           << format_double(patch.grid.vertices[v].y()) << ',' << format_double(patch.w[v])
           << '\n';
}

}  // namespace helfrich
