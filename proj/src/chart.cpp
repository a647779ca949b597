#include "chart.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

namespace gkpot {

Vec ChartPoint::real() const {
    Vec u(2 * n());
    for (int k = 0; k < n(); ++k) {
        u(2 * k) = q(k).real();
        u(2 * k + 1) = q(k).imag();
    }
    return u;
}

ChartPoint ChartPoint::from_real(const Vec& u) {
    ChartPoint z;
    z.q.resize(u.size() / 2);
    for (int k = 0; k < z.n(); ++k) z.q(k) = cplx(u(2 * k), u(2 * k + 1));
    return z;
}

RealJet eval_real_jet(const PotentialFn& K, const Vec& u, double t, bool second) {
    const int n = K.n;
    if (u.size() != 2 * n) throw Error(ErrorCode::invalid_argument, "potential " + K.name + ": dimension mismatch");
    if (2 * n > ad::kMaxVars) throw Error(ErrorCode::invalid_argument, "potential dimension exceeds jet capacity");
    std::vector<ad::T2> q(n);
    for (int k = 0; k < n; ++k) q[k] = ad::complex_var(k, cplx(u(2 * k), u(2 * k + 1)), 2 * n, second);
    ad::T2 r = K.eval(q, t);
    RealJet out;
    out.value = r.v.real();
    out.grad.resize(2 * n);
    out.hess.setZero(2 * n, 2 * n);
    bool finite = std::isfinite(r.v.real());
    for (int i = 0; i < 2 * n; ++i) {
        out.grad(i) = r.g[i].real();
        finite = finite && std::isfinite(out.grad(i));
        if (second)
            for (int j = 0; j < 2 * n; ++j) {
                out.hess(i, j) = r.hess(i, j).real();
                finite = finite && std::isfinite(out.hess(i, j));
            }
    }
    if (!finite) {
        std::ostringstream os;
        os << "potential " << K.name << " not finite at (";
        for (int i = 0; i < u.size(); ++i) os << (i ? "," : "") << u(i);
        os << ")";
        throw Error(ErrorCode::domain, os.str());
    }
    return out;
}

Jet2 jet_from_real(const RealJet& r) {
    const int n = static_cast<int>(r.grad.size()) / 2;
    const cplx I(0, 1);
    Jet2 j;
    j.value = r.value;
    j.d.resize(n);
    j.dbar.resize(n);
    j.ddbar.resize(n, n);
    j.dd.resize(n, n);
    for (int a = 0; a < n; ++a) {
        double kx = r.grad(2 * a), ky = r.grad(2 * a + 1);
        j.d(a) = 0.5 * cplx(kx, -ky);
        j.dbar(a) = 0.5 * cplx(kx, ky);
        for (int b = 0; b < n; ++b) {
            const Mat& H = r.hess;
            double xx = H(2 * a, 2 * b), yy = H(2 * a + 1, 2 * b + 1);
            double xy = H(2 * a, 2 * b + 1), yx = H(2 * a + 1, 2 * b);
            j.ddbar(a, b) = 0.25 * ((xx + yy) + I * (xy - yx));
            j.dd(a, b) = 0.25 * ((xx - yy) - I * (xy + yx));
        }
    }
    CMat herm = 0.5 * (j.ddbar + j.ddbar.adjoint());
    j.asymmetry = (j.ddbar - herm).cwiseAbs().maxCoeff();
    j.ddbar = herm;
    return j;
}

Jet2 eval_jet2(const PotentialFn& K, const ChartPoint& z, double t) {
    return jet_from_real(eval_real_jet(K, z.real(), t, true));
}

ThirdDerivs third_derivs_fd(const PotentialFn& K, const ChartPoint& z, double t) {
    const int n = z.n();
    const double h = 1e-5 * std::max(1.0, z.q.cwiseAbs().maxCoeff());
    if (!(h > 0) || h < 1e-300) throw Error(ErrorCode::domain, "finite-difference step underflow");
    Vec u = z.real();
    std::vector<CMat> dddbar(2 * n), ddd(2 * n);
    for (int r = 0; r < 2 * n; ++r) {
        Vec up = u, um = u;
        up(r) += h;
        um(r) -= h;
        Jet2 jp = eval_jet2(K, ChartPoint::from_real(up), t);
        Jet2 jm = eval_jet2(K, ChartPoint::from_real(um), t);
        dddbar[r] = (jp.ddbar - jm.ddbar) / (2 * h);
        ddd[r] = (jp.dd - jm.dd) / (2 * h);
    }
    ThirdDerivs out;
    out.n = n;
    out.d_ddbar.assign(n * n * n, 0.0);
    out.d_dd.assign(n * n * n, 0.0);
    const cplx I(0, 1);
    auto wirt = [&](const std::vector<CMat>& D, int c, int a, int b) {
        return 0.5 * (D[2 * c](a, b) - I * D[2 * c + 1](a, b));
    };
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                // d_c d_a dbar_b is symmetric in (c, a)
                out.d_ddbar[(c * n + a) * n + b] = 0.5 * (wirt(dddbar, c, a, b) + wirt(dddbar, a, c, b));
                cplx s = (wirt(ddd, c, a, b) + wirt(ddd, a, c, b) + wirt(ddd, b, a, c)) / 3.0;
                out.d_dd[(c * n + a) * n + b] = s;
            }
    return out;
}

CVec dq(int n, int k) {
    CVec v = CVec::Zero(2 * n);
    v(2 * k) = 1.0;
    v(2 * k + 1) = cplx(0, 1);
    return v;
}

CVec dqbar(int n, int k) { return dq(n, k).conjugate(); }
CVec dvec(int n, int k) { return 0.5 * dqbar(n, k); }
CVec dbarvec(int n, int k) { return 0.5 * dq(n, k); }

CMat wedge(const CVec& a, const CVec& b) { return b * a.transpose() - a * b.transpose(); }

CMat symprod(const CVec& a, const CVec& b) { return 0.5 * (a * b.transpose() + b * a.transpose()); }

Mat jstd(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        j(2 * k, 2 * k + 1) = -1.0;
        j(2 * k + 1, 2 * k) = 1.0;
    }
    return j;
}

Mat mixed_form(const CMat& c, cplx scale) {
    const int n = static_cast<int>(c.rows());
    CMat acc = CMat::Zero(2 * n, 2 * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += c(a, b) * wedge(dq(n, a), dqbar(n, b));
    return (scale * acc).real();
}

Mat ddbar_form(const CMat& ddbar) { return mixed_form(ddbar, cplx(0, 1)); }
Mat ddc_form(const CMat& ddbar) { return mixed_form(ddbar, cplx(0, -2)); }

Mat oneone_part(const Mat& F, const Mat& I) {
    const double dev = (I * I + Mat::Identity(I.rows(), I.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e3 * tol::alg) throw Error(ErrorCode::invalid_argument, "oneone_part: I is not almost complex");
    return 0.5 * (F + I.transpose() * F * I);
}

double wedge_top4(const Mat& A, const Mat& B) {
    if (A.rows() != 4 || B.rows() != 4) throw Error(ErrorCode::invalid_argument, "wedge_top4 needs real dimension 4");
    // component F(e_i, e_j) is M(j, i)
    auto c = [](const Mat& M, int i, int j) { return M(j, i); };
    double top = c(A, 0, 1) * c(B, 2, 3) + c(A, 2, 3) * c(B, 0, 1) - c(A, 0, 2) * c(B, 1, 3) -
                 c(A, 1, 3) * c(B, 0, 2) + c(A, 0, 3) * c(B, 1, 2) + c(A, 1, 2) * c(B, 0, 3);
    // dq1^dqb1^dq2^dqb2 = -4 dx1^dy1^dx2^dy2
    return top / -4.0;
}

double condition_number(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) == 0.0) return INFINITY;
    return s(0) / s(s.size() - 1);
}

Mat pushforward_cx(const Mat& jtarget, const Mat& jac) {
    double c = condition_number(jac);
    if (!(c < tol::cond_max)) {
        std::ostringstream os;
        os << "pushforward_cx: Jacobian condition estimate " << c;
        throw Error(ErrorCode::conditioning, os.str());
    }
    return jac.partialPivLu().solve(jtarget * jac);
}

Mat pushforward_cx(const Mat& jac) { return pushforward_cx(jstd(static_cast<int>(jac.rows()) / 2), jac); }

double dilog_quadrature(double x) {
    if (x == 0.0) return 0.0;
    auto f = [](double u) { return u == 0.0 ? -1.0 : std::log1p(-u) / u; };
    // Li2(x) = -int_0^x log(1-u)/u du
    double lo = std::min(x, 0.0), hi = std::max(x, 0.0);
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, 1e-14);
    return x < 0 ? v : -v;
}

double dilog(double x) {
    if (x > 0) throw Error(ErrorCode::domain, "dilog: only the branch x <= 0 is supported");
    if (std::abs(x) < 0.5) {
        double term = x, sum = 0.0;
        for (int k = 1; k < 200; ++k) {
            sum += term / (static_cast<double>(k) * k);
            term *= x;
            if (std::abs(term) < 1e-18) break;
        }
        return sum;
    }
    return dilog_quadrature(x);
}

ad::T2 dilog(const ad::T2& a) {
    if (std::abs(a.v.imag()) > 1e-10 * std::max(1.0, std::abs(a.v)))
        throw Error(ErrorCode::domain, "dilog: complex argument");
    double x = a.v.real();
    double f0 = dilog(x), f1, f2;
    if (std::abs(x) < 1e-3) {
        // -log(1-x)/x and its derivative as series
        f1 = 0.0;
        f2 = 0.0;
        double p = 1.0;
        for (int k = 0; k < 8; ++k) {
            f1 += p / (k + 1);
            f2 += (k + 1) * p / (k + 2);
            p *= x;
        }
    } else {
        double l = std::log1p(-x);
        f1 = -l / x;
        f2 = (x / (1.0 - x) + l) / (x * x);
    }
    return ad::apply(a, f0, f1, f2);
}

double antisym_defect(const Mat& a) { return (a + a.transpose()).cwiseAbs().maxCoeff(); }
double sym_defect(const Mat& a) { return (a - a.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace gkpot
