#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace dynamo {

using Real = double;
using Cplx = std::complex<double>;

// Real and complex 3-vectors, and an integer wave index on the truncation cube.
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<Cplx, 3>;
using WaveIndex = std::array<int, 3>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline CVec3 operator+(const CVec3& a, const CVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline CVec3 operator-(const CVec3& a, const CVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline CVec3 operator*(const Cplx& s, const CVec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline CVec3 cross(const CVec3& a, const CVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Bilinear product a.b (no conjugation); the sesquilinear one is inner().
inline Cplx bdot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Cplx inner(const CVec3& a, const CVec3& b) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

inline double norm(const CVec3& a) { return std::sqrt(std::real(inner(a, a))); }

inline CVec3 to_cplx(const Vec3& a) { return {Cplx(a[0]), Cplx(a[1]), Cplx(a[2])}; }

inline WaveIndex operator-(const WaveIndex& k) { return {-k[0], -k[1], -k[2]}; }
inline WaveIndex operator-(const WaveIndex& a, const WaveIndex& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline double norm2(const WaveIndex& k) {
    return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

// Fourier-side periodic box: T[i] counts unit cells along axis i.
struct BoxSpec {
    std::array<std::int64_t, 3> cells{1, 1, 1};

    bool operator==(const BoxSpec& o) const { return cells == o.cells; }
};

}  // namespace dynamo
