#include "dirac.hpp"

#include <algorithm>
#include <cmath>

namespace gkpot {

namespace {

Eigen::JacobiSVD<CMat> svd_full(const CMat& a) { return Eigen::JacobiSVD<CMat>(a, Eigen::ComputeFullU | Eigen::ComputeFullV); }

int rank_of(const Eigen::VectorXd& s, double rel) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++r;
    return r;
}

CMat tangent_block(int d) {
    CMat t = CMat::Zero(2 * d, d);
    t.topRows(d).setIdentity();
    return t;
}

}  // namespace

Mat pairing_matrix(int d) {
    Mat p = Mat::Zero(2 * d, 2 * d);
    p.topRightCorner(d, d).setIdentity();
    p.bottomLeftCorner(d, d).setIdentity();
    return 0.5 * p;
}

cplx pairing(const GenTangentVector& u, const GenTangentVector& v) {
    if (u.x.size() != v.x.size() || u.xi.size() != v.xi.size() || u.x.size() != u.xi.size())
        throw Error(ErrorCode::invalid_argument, "pairing: dimension mismatch");
    return 0.5 * (u.xi.transpose() * v.x + v.xi.transpose() * u.x)(0, 0);
}

double isotropy_defect(const DiracSubspace& L) {
    CMat Q = orthonormal_basis(L.basis);
    return (Q.transpose() * pairing_matrix(L.dim()) * Q).cwiseAbs().maxCoeff();
}

CMat orthonormal_basis(const CMat& a, double rel) {
    if (a.cols() == 0) return a;
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU);
    int r = rank_of(svd.singularValues(), rel);
    return svd.matrixU().leftCols(r);
}

CMat null_space(const CMat& a, double rel) {
    auto svd = svd_full(a);
    int r = rank_of(svd.singularValues(), rel);
    return svd.matrixV().rightCols(a.cols() - r);
}

int numerical_rank(const CMat& a, double rel) {
    if (a.cols() == 0 || a.rows() == 0) return 0;
    Eigen::JacobiSVD<CMat> svd(a);
    return rank_of(svd.singularValues(), rel);
}

DiracSubspace graph_two_form(const CMat& B) {
    const int d = static_cast<int>(B.rows());
    if ((B + B.transpose()).cwiseAbs().maxCoeff() > tol::alg * std::max(1.0, B.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::invalid_argument, "graph_two_form: B is not antisymmetric");
    DiracSubspace L;
    L.basis.resize(2 * d, d);
    L.basis.topRows(d).setIdentity();
    L.basis.bottomRows(d) = B;
    return L;
}

DiracSubspace tangent_space(int d) { return graph_two_form(CMat::Zero(d, d)); }

DiracSubspace scale_dirac(cplx lambda, const DiracSubspace& L) {
    if (lambda == cplx(0.0)) throw Error(ErrorCode::invalid_argument, "scale_dirac: lambda = 0");
    DiracSubspace r = L;
    const int d = L.dim();
    r.basis.bottomRows(d) *= lambda;
    return r;
}

DiracSubspace sum_dirac(const DiracSubspace& L1, const DiracSubspace& L2) {
    const int d = L1.dim();
    if (L2.dim() != d) throw Error(ErrorCode::invalid_argument, "sum_dirac: dimension mismatch");
    const CMat& A = L1.basis;
    const CMat& B = L2.basis;
    CMat M(d, A.cols() + B.cols());
    M << A.topRows(d), -B.topRows(d);
    if (numerical_rank(M) < d) throw Error(ErrorCode::transversality, "sum_dirac: tangent projections are not transverse");
    CMat N = null_space(M);
    CMat a = N.topRows(A.cols());
    CMat b = N.bottomRows(B.cols());
    DiracSubspace r;
    r.basis.resize(2 * d, N.cols());
    r.basis.topRows(d) = A.topRows(d) * a;
    r.basis.bottomRows(d) = A.bottomRows(d) * a + B.bottomRows(d) * b;
    r.basis = orthonormal_basis(r.basis);
    return r;
}

DiracSubspace gauge(const CMat& B, const DiracSubspace& L) {
    const int d = L.dim();
    DiracSubspace r = L;
    r.basis.bottomRows(d) += B * L.basis.topRows(d);
    return r;
}

DiracSubspace conjugate(const DiracSubspace& L) { return DiracSubspace{L.basis.conjugate()}; }

DiracSubspace intersect(const DiracSubspace& L1, const DiracSubspace& L2) {
    CMat M(L1.basis.rows(), L1.basis.cols() + L2.basis.cols());
    M << L1.basis, -L2.basis;
    CMat N = null_space(M, 1e-9);
    DiracSubspace r;
    r.basis = orthonormal_basis(L1.basis * N.topRows(L1.basis.cols()));
    return r;
}

int intersection_dim(const CMat& a, const CMat& b) {
    return numerical_rank(a) + numerical_rank(b) - numerical_rank((CMat(a.rows(), a.cols() + b.cols()) << a, b).finished(), 1e-9);
}

double type20_defect(const Mat& I, const CMat& sigma) {
    const cplx i(0, 1);
    double a = (I.cast<cplx>() * sigma - i * sigma).cwiseAbs().maxCoeff();
    double b = (sigma * I.transpose().cast<cplx>() - i * sigma).cwiseAbs().maxCoeff();
    return std::max(a, b);
}

DiracSubspace build_L_sigma(const Mat& I, const CMat& sigma) {
    const int d = static_cast<int>(I.rows());
    const cplx i(0, 1);
    double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if (type20_defect(I, sigma) > 1e3 * tol::alg * scale)
        throw Error(ErrorCode::invalid_argument, "build_L_sigma: sigma is not of type (2,0)");
    CMat Ic = I.cast<cplx>();
    CMat T01 = null_space(Ic + i * CMat::Identity(d, d), 1e-8);       // I X = -i X
    CMat T10s = null_space(Ic.transpose() - i * CMat::Identity(d, d), 1e-8);  // zeta o I = i zeta
    if (T01.cols() != d / 2 || T10s.cols() != d / 2)
        throw Error(ErrorCode::invalid_argument, "build_L_sigma: I is not a complex structure");
    DiracSubspace L;
    L.basis = CMat::Zero(2 * d, d);
    L.basis.block(0, 0, d, d / 2) = T01;
    L.basis.block(0, d / 2, d, d / 2) = sigma * T10s;
    L.basis.block(d, d / 2, d, d / 2) = T10s;
    return L;
}

DiracSubspace build_LA(const Mat& F) { return graph_two_form(cplx(0, -1) * F.cast<cplx>()); }

DiracSubspace build_LB(const Mat& F, const Mat& Iminus, const CMat& sigma_minus) {
    DiracSubspace Lm = build_L_sigma(Iminus, sigma_minus);
    return gauge(cplx(0, 1) * F.cast<cplx>(), scale_dirac(cplx(0, 2), conjugate(Lm)));
}

GCPair build_gc_pair(const Mat& g, const Mat& Ip, const Mat& Im, const Mat& b) {
    const int d = static_cast<int>(g.rows());
    double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if (sym_defect(g) > tol::alg * scale) throw Error(ErrorCode::invalid_argument, "build_gc_pair: g not symmetric");
    Mat wp = g * Ip, wm = g * Im;
    if (antisym_defect(wp) > 1e3 * tol::alg * scale || antisym_defect(wm) > 1e3 * tol::alg * scale)
        throw Error(ErrorCode::invalid_argument, "build_gc_pair: g is not Hermitian for both complex structures");
    if (condition_number(g) > tol::cond_max) throw Error(ErrorCode::conditioning, "build_gc_pair: g is degenerate");
    Mat wpi = wp.inverse(), wmi = wm.inverse();
    Mat eb = Mat::Identity(2 * d, 2 * d), emb = Mat::Identity(2 * d, 2 * d);
    eb.bottomLeftCorner(d, d) = b;
    emb.bottomLeftCorner(d, d) = -b;
    Mat JB(2 * d, 2 * d), JA(2 * d, 2 * d);
    JB << Ip + Im, -(wpi - wmi), wp - wm, -(Ip.transpose() + Im.transpose());
    JA << Ip - Im, -(wpi + wmi), wp + wm, -(Ip.transpose() - Im.transpose());
    GCPair r;
    r.JB.j = 0.5 * eb * JB * emb;
    r.JA.j = 0.5 * eb * JA * emb;
    return r;
}

Mat gk_metric_operator(const GCPair& p) { return -p.JA.j * p.JB.j; }

double gc_defect(const GCStructure& J) {
    const int n2 = static_cast<int>(J.j.rows());
    Mat P = pairing_matrix(n2 / 2);
    double a = (J.j * J.j + Mat::Identity(n2, n2)).cwiseAbs().maxCoeff();
    double b = (J.j.transpose() * P * J.j - P).cwiseAbs().maxCoeff();
    return std::max(a, b);
}

Bihermitian extract_bihermitian(const GCStructure& JA, const GCStructure& JB) {
    const int n2 = static_cast<int>(JA.j.rows());
    const int d = n2 / 2;
    Mat G = -JA.j * JB.j;
    if ((G * G - Mat::Identity(n2, n2)).cwiseAbs().maxCoeff() > 1e3 * tol::alg)
        throw Error(ErrorCode::invalid_argument, "extract_bihermitian: G does not square to the identity");
    auto graph_of = [&](double sign) {
        Mat E = G - sign * Mat::Identity(n2, n2);
        Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullV);
        Mat V = svd.matrixV().rightCols(d);
        Mat U = V.topRows(d), W = V.bottomRows(d);
        if (condition_number(U) > tol::cond_max)
            throw Error(ErrorCode::transversality, "extract_bihermitian: eigenbundle does not project onto T");
        return Mat(W * U.inverse());
    };
    Mat bp = graph_of(+1.0);  // b + g
    Mat bm = graph_of(-1.0);  // b - g
    Bihermitian r;
    r.b = 0.5 * (bp + bm);
    r.g = 0.5 * (bp - bm);
    Mat J11 = JB.j.topLeftCorner(d, d), J12 = JB.j.topRightCorner(d, d);
    r.Iplus = J11 + J12 * bp;
    r.Iminus = J11 + J12 * bm;
    return r;
}

GKConditionsReport check_gk_conditions(const DiracSubspace& LA, const DiracSubspace& LB) {
    const int d = LA.dim();
    GKConditionsReport r;
    r.dim_LA_cap_conj = intersection_dim(LA.basis, LA.basis.conjugate());
    r.dim_LB_cap_conj = intersection_dim(LB.basis, LB.basis.conjugate());
    r.cond1 = r.dim_LA_cap_conj == 0 && r.dim_LB_cap_conj == 0;

    const cplx half_i(0, 0.5);
    auto splits = [&](const DiracSubspace& L) {
        CMat T = tangent_block(d);
        CMat a = intersect(L, DiracSubspace{T}).basis;
        CMat b = intersect(conjugate(L), DiracSubspace{T}).basis;
        if (a.cols() + b.cols() != d) return false;
        return numerical_rank((CMat(2 * d, d) << a, b).finished(), 1e-8) == d;
    };
    try {
        r.L_sigma_plus = scale_dirac(half_i, sum_dirac(conjugate(LB), scale_dirac(-1.0, conjugate(LA))));
        r.plus_transverse = true;
        r.plus_splits = splits(r.L_sigma_plus);
    } catch (const Error& e) {
        if (e.code != ErrorCode::transversality) throw;
    }
    try {
        r.L_sigma_minus = scale_dirac(half_i, sum_dirac(conjugate(LB), scale_dirac(-1.0, LA)));
        r.minus_transverse = true;
        r.minus_splits = splits(r.L_sigma_minus);
    } catch (const Error& e) {
        if (e.code != ErrorCode::transversality) throw;
    }
    r.cond2 = r.plus_transverse && r.minus_transverse && r.plus_splits && r.minus_splits;

    CMat X = intersect(LA, LB).basis;
    r.dim_intersection = static_cast<int>(X.cols());
    if (X.cols() > 0) {
        CMat H = X.adjoint() * pairing_matrix(d).cast<cplx>() * X;
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> es(H);
        r.min_pairing = es.eigenvalues()(0);
        r.cond3 = r.min_pairing > 0;
    }
    r.degenerate = !r.plus_transverse || !r.minus_transverse || !r.cond1;
    return r;
}

double subspace_distance(const CMat& a, const CMat& b) {
    CMat Qa = orthonormal_basis(a), Qb = orthonormal_basis(b);
    if (Qa.cols() != a.cols() || Qb.cols() != b.cols())
        throw Error(ErrorCode::invalid_argument, "subspace_distance: rank deficient basis");
    if (Qa.cols() != Qb.cols()) throw Error(ErrorCode::invalid_argument, "subspace_distance: dimension mismatch");
    CMat R = Qb - Qa * (Qa.adjoint() * Qb);
    Eigen::JacobiSVD<CMat> s1(R);
    Eigen::JacobiSVD<CMat> s2(Qa.adjoint() * Qb);
    double sinmax = s1.singularValues()(0);
    double cosmin = s2.singularValues()(s2.singularValues().size() - 1);
    return std::atan2(sinmax, cosmin);
}

double subspace_distance(const DiracSubspace& L1, const DiracSubspace& L2) { return subspace_distance(L1.basis, L2.basis); }

}  // namespace gkpot
