#pragma once
#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ad.hpp"

namespace gkpot {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

enum class ErrorCode {
    ok = 0,
    invalid_argument = 1,
    domain = 2,
    conditioning = 3,
    transversality = 4,
    not_closed = 5,
    flow_escape = 6,
    tolerance = 7,
    config = 8,
    io = 9,
};

struct Error : std::runtime_error {
    ErrorCode code;
    Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

namespace tol {
constexpr double alg = 1e-9;
constexpr double cond_max = 1e8;
}  // namespace tol

// n complex coordinates; real layout (x1,y1,...,xn,yn)
struct ChartPoint {
    CVec q;
    int n() const { return static_cast<int>(q.size()); }
    Vec real() const;
    static ChartPoint from_real(const Vec& u);
};

struct Jet2 {
    double value = 0;
    CVec d;
    CVec dbar;
    CMat ddbar;
    CMat dd;
    double asymmetry = 0;  // hermiticity defect of ddbar before symmetrization
};

struct RealJet {
    double value = 0;
    Vec grad;
    Mat hess;
};

using PotentialEval = std::function<ad::T2(std::span<const ad::T2> q, double t)>;

struct PotentialFn {
    std::string name;
    int n = 0;
    PotentialEval eval;
};

RealJet eval_real_jet(const PotentialFn& K, const Vec& u, double t = 0.0, bool second = true);
Jet2 jet_from_real(const RealJet& r);
Jet2 eval_jet2(const PotentialFn& K, const ChartPoint& z, double t = 0.0);

struct ThirdDerivs {
    int n = 0;
    std::vector<cplx> d_ddbar;  // [c][a][b] = d_c d_a dbar_b K
    std::vector<cplx> d_dd;     // [c][a][b] = d_c d_a d_b K
    cplx ddbar3(int c, int a, int b) const { return d_ddbar[(c * n + a) * n + b]; }
    cplx dd3(int c, int a, int b) const { return d_dd[(c * n + a) * n + b]; }
};
ThirdDerivs third_derivs_fd(const PotentialFn& K, const ChartPoint& z, double t = 0.0);

// complex covectors and vectors in the real basis
CVec dq(int n, int k);
CVec dqbar(int n, int k);
CVec dvec(int n, int k);     // d/dq_k = (e_x - i e_y)/2
CVec dbarvec(int n, int k);  // d/dqbar_k

// contraction matrix of a ^ b, works for forms and bivectors alike
CMat wedge(const CVec& a, const CVec& b);
// symmetric product ab = (a (x) b + b (x) a)/2
CMat symprod(const CVec& a, const CVec& b);

Mat jstd(int n);

// sum_ab c_ab dq_a ^ dqbar_b as a real form (c must make it real)
Mat mixed_form(const CMat& c, cplx scale);
// i ddbar K
Mat ddbar_form(const CMat& ddbar);
// d^c d f = -2i ddbar f
Mat ddc_form(const CMat& ddbar);

Mat oneone_part(const Mat& F, const Mat& I);
double wedge_top4(const Mat& F1, const Mat& F2);

Mat pushforward_cx(const Mat& jtarget, const Mat& jac);
Mat pushforward_cx(const Mat& jac);
double condition_number(const Mat& a);

double dilog(double x);
double dilog_quadrature(double x);
ad::T2 dilog(const ad::T2& a);

double antisym_defect(const Mat& a);
double sym_defect(const Mat& a);

}  // namespace gkpot
