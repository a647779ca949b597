#pragma once
// Forward-mode second-order jets with complex coefficients over real variables.
#include <array>
#include <cmath>
#include <complex>

namespace gkpot::ad {

using cplx = std::complex<double>;
constexpr int kMaxVars = 8;
constexpr int kPacked = kMaxVars * (kMaxVars + 1) / 2;

inline constexpr int hidx(int i, int j) { return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i; }

struct T2 {
    cplx v{};
    std::array<cplx, kMaxVars> g{};
    std::array<cplx, kPacked> h{};
    int m = 0;        // number of active variables
    bool second = false;

    T2() = default;
    T2(double x) : v(x) {}
    T2(cplx x) : v(x) {}

    cplx grad(int i) const { return g[i]; }
    cplx hess(int i, int j) const { return h[hidx(i, j)]; }
};

// seed a real variable
inline T2 real_var(int idx, double x, int m, bool second) {
    T2 r(x);
    r.m = m;
    r.second = second;
    r.g[idx] = 1.0;
    return r;
}

// q = x + i y with x, y the real variables 2k, 2k+1
inline T2 complex_var(int k, cplx q, int m, bool second) {
    T2 r(q);
    r.m = m;
    r.second = second;
    r.g[2 * k] = 1.0;
    r.g[2 * k + 1] = cplx(0.0, 1.0);
    return r;
}

namespace detail {
inline void shape(T2& r, const T2& a, const T2& b) {
    r.m = a.m > b.m ? a.m : b.m;
    r.second = a.second || b.second;
}
inline int packed(const T2& r) { return r.m * (r.m + 1) / 2; }
}  // namespace detail

// chain rule for f(a) given f, f', f''
inline T2 apply(const T2& a, cplx f0, cplx f1, cplx f2) {
    T2 r(f0);
    r.m = a.m;
    r.second = a.second;
    for (int i = 0; i < a.m; ++i) r.g[i] = f1 * a.g[i];
    if (a.second) {
        for (int i = 0; i < a.m; ++i)
            for (int j = 0; j <= i; ++j) {
                int k = hidx(i, j);
                r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
            }
    }
    return r;
}

inline T2 operator+(const T2& a, const T2& b) {
    T2 r(a.v + b.v);
    detail::shape(r, a, b);
    for (int i = 0; i < r.m; ++i) r.g[i] = a.g[i] + b.g[i];
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = a.h[k] + b.h[k];
    return r;
}

inline T2 operator-(const T2& a) {
    T2 r(-a.v);
    r.m = a.m;
    r.second = a.second;
    for (int i = 0; i < r.m; ++i) r.g[i] = -a.g[i];
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = -a.h[k];
    return r;
}

inline T2 operator-(const T2& a, const T2& b) {
    T2 r(a.v - b.v);
    detail::shape(r, a, b);
    for (int i = 0; i < r.m; ++i) r.g[i] = a.g[i] - b.g[i];
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = a.h[k] - b.h[k];
    return r;
}

inline T2 operator*(const T2& a, const T2& b) {
    T2 r(a.v * b.v);
    detail::shape(r, a, b);
    for (int i = 0; i < r.m; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    if (r.second)
        for (int i = 0; i < r.m; ++i)
            for (int j = 0; j <= i; ++j) {
                int k = hidx(i, j);
                r.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
            }
    return r;
}

inline T2 recip(const T2& a) {
    cplx inv = 1.0 / a.v;
    return apply(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline T2 operator/(const T2& a, const T2& b) { return a * recip(b); }

inline T2& operator+=(T2& a, const T2& b) { return a = a + b; }
inline T2& operator-=(T2& a, const T2& b) { return a = a - b; }
inline T2& operator*=(T2& a, const T2& b) { return a = a * b; }

inline T2 conj(const T2& a) {
    T2 r(std::conj(a.v));
    r.m = a.m;
    r.second = a.second;
    for (int i = 0; i < r.m; ++i) r.g[i] = std::conj(a.g[i]);
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = std::conj(a.h[k]);
    return r;
}

inline T2 real(const T2& a) {
    T2 r(a.v.real());
    r.m = a.m;
    r.second = a.second;
    for (int i = 0; i < r.m; ++i) r.g[i] = a.g[i].real();
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = a.h[k].real();
    return r;
}

inline T2 imag(const T2& a) {
    T2 r(a.v.imag());
    r.m = a.m;
    r.second = a.second;
    for (int i = 0; i < r.m; ++i) r.g[i] = a.g[i].imag();
    if (r.second)
        for (int k = 0; k < detail::packed(r); ++k) r.h[k] = a.h[k].imag();
    return r;
}

inline T2 exp(const T2& a) {
    cplx e = std::exp(a.v);
    return apply(a, e, e, e);
}

inline T2 log(const T2& a) {
    cplx inv = 1.0 / a.v;
    return apply(a, std::log(a.v), inv, -inv * inv);
}

inline T2 pow(const T2& a, int k) {
    if (k < 0) return recip(pow(a, -k));
    T2 r(1.0);
    T2 base = a;
    while (k) {
        if (k & 1) r = r * base;
        k >>= 1;
        if (k) base = base * base;
    }
    return r;
}

inline T2 pow(const T2& a, double p) {
    if (p == std::floor(p) && std::abs(p) < 64) return pow(a, static_cast<int>(p));
    cplx f0 = std::pow(a.v, p);
    return apply(a, f0, p * f0 / a.v, p * (p - 1.0) * f0 / (a.v * a.v));
}

}  // namespace gkpot::ad
