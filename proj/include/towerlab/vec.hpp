#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace tl {

constexpr int kMaxDim = 5;

// Point or vector in R^n, n <= kMaxDim. Unused trailing slots stay zero.
struct Vec {
    std::array<double, kMaxDim> c{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Vec: dimension out of range");
    }
    Vec(int dim, std::initializer_list<double> vals) : Vec(dim) {
        int i = 0;
        for (double v : vals) {
            if (i >= dim) break;
            c[i++] = v;
        }
    }

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) c[i] *= s;
        return *this;
    }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }
inline Vec operator*(Vec a, double s) { return a *= s; }
inline Vec operator-(Vec a) { return a *= -1.0; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a.c[i] * b.c[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline Vec unit(int n, int axis) {
    Vec e(n);
    e[axis] = 1.0;
    return e;
}

// Kelvin inversion x -> x / |x|^2.
inline Vec invert(const Vec& x) { return (1.0 / norm2(x)) * x; }

}  // namespace tl
