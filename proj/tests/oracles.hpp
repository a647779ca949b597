#pragma once
// Reference values computed without the library's jets or chart helpers.
#include <Eigen/Dense>
#include <complex>
#include <random>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using cplx = std::complex<double>;

// metric of the affine model with K = |q1|^2 + |q2|^2, expanded by hand in (x1, y1, x2, y2)
inline Mat affine_quadratic_metric(double a, double b) {
    // q2 = a + ib
    Mat g = 2.0 * Mat::Identity(4, 4);
    g(0, 2) = g(2, 0) = 2 * b;
    g(1, 3) = g(3, 1) = -2 * b;
    g(0, 3) = g(3, 0) = -2 * a;
    g(1, 2) = g(2, 1) = -2 * a;
    return g;
}

inline Mat jstd(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        j(2 * k + 1, 2 * k) = 1;
        j(2 * k, 2 * k + 1) = -1;
    }
    return j;
}

inline Mat oneone(const Mat& F, const Mat& I) { return 0.5 * (F + I.transpose() * F * I); }

// second-order derivative of -Li2(-r) in Wirtinger form: d/dr (r d/dr(-Li2(-r))) = 1/(1+r)
inline double dilog_beta(double r) { return 1.0 / (1.0 + r); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// quaternionic structures on R^4 with g = Id
struct Quaternions {
    Mat I, J, K;
    Quaternions() {
        I = jstd(2);
        J = Mat::Zero(4, 4);
        J(2, 0) = 1;
        J(3, 1) = -1;
        J(0, 2) = -1;
        J(1, 3) = 1;
        K = I * J;
    }
};

// affine groupoid: Darboux coordinates z(a, b, x, y) = (a, -b, y + x b, x) and their holomorphic Jacobian
struct AffineDarboux {
    Eigen::Vector4cd z;
    Eigen::Matrix4cd jac;  // d z / d(a, b, x, y)
};

inline AffineDarboux affine_darboux(cplx a, cplx b, cplx x, cplx y) {
    AffineDarboux r;
    r.z << a, -b, y + x * b, x;
    r.jac.setZero();
    r.jac(0, 0) = 1;
    r.jac(1, 1) = -1;
    r.jac(2, 1) = x;
    r.jac(2, 2) = b;
    r.jac(2, 3) = 1;
    r.jac(3, 2) = 1;
    return r;
}

// real Jacobian of a holomorphic chart given complex partials dw_k/dx_j, dw_k/dy_j per column
inline Mat real_jacobian(const Eigen::MatrixXcd& dw) {
    Mat D(2 * dw.rows(), dw.cols());
    for (int k = 0; k < dw.rows(); ++k) {
        D.row(2 * k) = dw.row(k).real();
        D.row(2 * k + 1) = dw.row(k).imag();
    }
    return D;
}

// quadratic potential on the affine model: I- has holomorphic coordinates (q2, q1 - i|q2|^2),
// I+ has (exp(-i conj(q1)) q2, q1)
inline Mat affine_quadratic_iminus(double x1, double y1, double x2, double y2) {
    (void)x1;
    (void)y1;
    const cplx i(0, 1);
    Eigen::MatrixXcd dw(2, 4);
    dw << 0, 0, 1, i, 1, i, -2.0 * i * x2, -2.0 * i * y2;
    Mat D = real_jacobian(dw);
    return D.inverse() * jstd(2) * D;
}

inline Mat affine_quadratic_iplus(double x1, double y1, double x2, double y2) {
    const cplx i(0, 1);
    cplx E = std::exp(cplx(-y1, -x1)), w1 = E * cplx(x2, y2);
    Eigen::MatrixXcd dw(2, 4);
    dw << -i * w1, -w1, E, i * E, 1, i, 0, 0;
    Mat D = real_jacobian(dw);
    return D.inverse() * jstd(2) * D;
}

// F = i(dq1 ^ dq1bar + dq2 ^ dq2bar) = 2(dx1 ^ dy1 + dx2 ^ dy2), stored as F(u, v) = v^T F u
inline Mat affine_quadratic_F() { return 2.0 * jstd(2); }

}  // namespace oracle
