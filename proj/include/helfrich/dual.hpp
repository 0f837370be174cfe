#pragma once

#include <cmath>

#include "helfrich/mesh.hpp"

namespace helfrich {

// Forward-mode scalar carrying the gradient with respect to one vertex
// position (three seed directions at once). Energy kernels are templated on
// the scalar type, so the same code produces values and exact derivatives.
struct Dual {
    double v = 0;
    Vec3 g = Vec3::Zero();

    Dual() = default;
    Dual(double value) : v(value) {}
    Dual(double value, const Vec3& grad) : v(value), g(grad) {}
};

inline Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.g + b.g}; }
inline Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.g - b.g}; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.g}; }
inline Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, a.v * b.g + b.v * a.g};
}
inline Dual operator/(const Dual& a, const Dual& b) {
    double inv = 1.0 / b.v;
    return {a.v * inv, (a.g - (a.v * inv) * b.g) * inv};
}
inline Dual sqrt(const Dual& a) {
    double s = std::sqrt(a.v);
    return {s, a.g / (2.0 * s)};
}
inline Dual& operator+=(Dual& a, const Dual& b) { a = a + b; return a; }

struct DVec3 {
    Dual x, y, z;

    DVec3() = default;
    DVec3(const Dual& a, const Dual& b, const Dual& c) : x(a), y(b), z(c) {}
    static DVec3 Zero() { return {}; }
    /// Constant (no derivative) lift of a plain vector.
    explicit DVec3(const Vec3& p) : x(p.x()), y(p.y()), z(p.z()) {}
    /// Lift with identity seed: derivative of component k is e_k.
    static DVec3 variable(const Vec3& p) {
        return {{p.x(), Vec3::UnitX()}, {p.y(), Vec3::UnitY()}, {p.z(), Vec3::UnitZ()}};
    }
};

inline DVec3 operator+(const DVec3& a, const DVec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline DVec3 operator-(const DVec3& a, const DVec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline DVec3 operator*(const Dual& s, const DVec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline DVec3 operator/(const DVec3& a, const Dual& s) { return {a.x / s, a.y / s, a.z / s}; }
inline Dual dot(const DVec3& a, const DVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline DVec3 cross(const DVec3& a, const DVec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Dual squared_norm(const DVec3& a) { return dot(a, a); }
inline Dual norm(const DVec3& a) { return sqrt(squared_norm(a)); }

// double counterparts so kernels compile for plain evaluation
inline double dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
inline Vec3 cross(const Vec3& a, const Vec3& b) { return a.cross(b); }
inline double squared_norm(const Vec3& a) { return a.squaredNorm(); }
inline double norm(const Vec3& a) { return a.norm(); }
inline double value_of(double s) { return s; }
inline double value_of(const Dual& s) { return s.v; }

}  // namespace helfrich
