#include "models.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

namespace gkpot {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::cotangent: return "cotangent";
        case ModelKind::pair: return "pair";
        case ModelKind::affine: return "affine";
    }
    return "?";
}

Mat omega0_re(int n) {
    CMat om = CMat::Zero(4 * n, 4 * n);
    for (int k = 0; k < n; ++k) om += wedge(dq(2 * n, k), dq(2 * n, n + k));
    return om.real();
}

Mat omega0_im(int n) {
    CMat om = CMat::Zero(4 * n, 4 * n);
    for (int k = 0; k < n; ++k) om += wedge(dq(2 * n, k), dq(2 * n, n + k));
    return om.imag();
}

MapEval eval_holo_map(const HoloMap& f, int in_dim, int out_dim, const CVec& z) {
    if (2 * in_dim > ad::kMaxVars) throw Error(ErrorCode::invalid_argument, "chart map exceeds jet capacity");
    std::vector<ad::T2> zin(in_dim), wout(out_dim);
    for (int k = 0; k < in_dim; ++k) zin[k] = ad::complex_var(k, z(k), 2 * in_dim, false);
    f(zin, wout);
    MapEval r;
    r.value.resize(2 * out_dim);
    r.jac.resize(2 * out_dim, 2 * in_dim);
    for (int j = 0; j < out_dim; ++j) {
        r.value(2 * j) = wout[j].v.real();
        r.value(2 * j + 1) = wout[j].v.imag();
        for (int c = 0; c < 2 * in_dim; ++c) {
            r.jac(2 * j, c) = wout[j].g[c].real();
            r.jac(2 * j + 1, c) = wout[j].g[c].imag();
        }
    }
    if (!r.value.allFinite() || !r.jac.allFinite()) throw Error(ErrorCode::domain, "chart map not finite");
    return r;
}

MapEval project_minus(const MoritaModel& m, const CVec& z) { return eval_holo_map(m.s_map, 2 * m.n, m.n, z); }

namespace {
MapEval project_plus_raw(const MoritaModel& m, const CVec& z) { return eval_holo_map(m.t_map, 2 * m.n, m.n, z); }
}  // namespace

MapEval project_plus(const MoritaModel& m, const CVec& z) {
    MapEval raw = project_plus_raw(m, z);
    if (!m.plus_relabel) return raw;
    MapEval r = m.plus_relabel(raw.value);
    return MapEval{r.value, r.jac * raw.jac};
}

Mat omega_re_at(const MoritaModel& m, const CVec& z) {
    Mat re = omega0_re(m.n);
    if (m.plus_twist) {
        MapEval raw = project_plus_raw(m, z);
        re += raw.jac.transpose() * m.plus_twist(raw.value) * raw.jac;
    }
    return re;
}

Mat darboux_complex_structure(const MoritaModel& m, const CVec& z) {
    return omega0_im(m.n).partialPivLu().solve(omega_re_at(m, z));
}

MoritaModel make_cotangent_model(int n, FormField omega_twist) {
    if (n < 1 || 4 * n > 2 * ad::kMaxVars) throw Error(ErrorCode::invalid_argument, "cotangent model: bad dimension");
    MoritaModel m;
    m.kind = ModelKind::cotangent;
    m.n = n;
    auto proj = [n](std::span<const ad::T2> z, std::span<ad::T2> w) {
        for (int k = 0; k < n; ++k) w[k] = z[n + k];
    };
    m.s_map = proj;
    m.t_map = proj;
    m.sigma_minus = [n](const Vec&) { return CMat::Zero(2 * n, 2 * n).eval(); };
    if (omega_twist) {
        Vec probe = Vec::Zero(2 * n);
        for (int i = 0; i < 2 * n; ++i) probe(i) = 0.1 * (i + 1);
        double res = closedness_residual(omega_twist, probe);
        if (res > 1e-6) throw Error(ErrorCode::not_closed, "cotangent model: twist is not closed");
        m.plus_twist = omega_twist;
    }
    m.domain = [](const CVec&) { return true; };
    return m;
}

LinearDarboux linear_darboux(const CMat& omega) {
    const int d = static_cast<int>(omega.rows());
    if (d != 4) throw Error(ErrorCode::invalid_argument, "pair model: bases must have real dimension 4");
    Mat B = omega.real(), w = omega.imag();
    if (condition_number(w) > tol::cond_max) throw Error(ErrorCode::invalid_argument, "pair model: Im(Omega) degenerate");
    LinearDarboux r;
    r.I = w.partialPivLu().solve(B);
    if ((r.I * r.I + Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
        throw Error(ErrorCode::invalid_argument, "pair model: Omega is not holomorphic symplectic");
    const cplx i(0, 1);
    CMat Z = null_space(r.I.transpose().cast<cplx>() - i * CMat::Identity(d, d), 1e-8);
    if (Z.cols() != 2) throw Error(ErrorCode::invalid_argument, "pair model: bad (1,0) space");
    CVec z1 = Z.col(0), z2 = Z.col(1);
    CMat W = wedge(z2, z1);
    cplx c = (W.conjugate().cwiseProduct(omega)).sum() / (W.conjugate().cwiseProduct(W)).sum();
    if ((c * W - omega).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::invalid_argument, "pair model: Omega is not of type (2,0)");
    r.q = z1.transpose();
    r.p = (c * z2).transpose();
    return r;
}

namespace {

struct PairData {
    LinearDarboux plus, minus;
    CMat darboux;  // 4 x 8 complex: rows (p', Q', q', P') as functionals of (x+, x-)
};

PairData pair_data(const CMat& op, const CMat& om) {
    PairData d;
    d.plus = linear_darboux(op);
    d.minus = linear_darboux(om);
    d.darboux = CMat::Zero(4, 8);
    // (p'_1, p'_2, q'_1, q'_2) = (p+, q-, q+, p-)
    d.darboux.block(0, 0, 1, 4) = d.plus.p;
    d.darboux.block(1, 4, 1, 4) = d.minus.q;
    d.darboux.block(2, 0, 1, 4) = d.plus.q;
    d.darboux.block(3, 4, 1, 4) = d.minus.p;
    return d;
}

}  // namespace

MoritaModel make_pair_model(const CMat& omega_plus, const CMat& omega_minus) {
    PairData pd = pair_data(omega_plus, omega_minus);
    MoritaModel m;
    m.kind = ModelKind::pair;
    m.n = 2;
    // plus base chart (q+, p+), minus base chart (q-, p-)
    m.t_map = [](std::span<const ad::T2> z, std::span<ad::T2> w) {
        w[0] = z[2];
        w[1] = z[0];
    };
    m.s_map = [](std::span<const ad::T2> z, std::span<ad::T2> w) {
        w[0] = z[1];
        w[1] = z[3];
    };
    // minus base Poisson structure: pi_- pushes (Im Omega)^-1 to minus the GK bivector
    CVec z0 = CVec::Zero(4);
    MapEval pm = project_minus(m, z0);
    Mat Qm = -pm.jac * omega0_im(2).inverse() * pm.jac.transpose();
    Qm = 0.5 * (Qm - Qm.transpose()).eval();
    CMat sig = -0.25 * (jstd(2) * Qm).cast<cplx>() - cplx(0, 0.25) * Qm.cast<cplx>();
    m.sigma_minus = [sig](const Vec&) { return sig; };
    m.domain = [](const CVec&) { return true; };
    return m;
}

BraneBisection pair_diagonal_brane(const CMat& omega_plus, const CMat& omega_minus) {
    PairData pd = pair_data(omega_plus, omega_minus);
    CMat D = pd.darboux;
    BraneBisection L;
    L.n = 2;
    L.description = "pair diagonal";
    L.eval = [D](const Vec& x) {
        Vec xx(8);
        xx << x, x;
        BranePoint bp;
        bp.z = D * xx.cast<cplx>();
        CMat Dd = D.leftCols(4) + D.rightCols(4);
        bp.lambda.resize(8, 4);
        for (int c = 0; c < 4; ++c) {
            bp.lambda.row(2 * c) = Dd.row(c).real();
            bp.lambda.row(2 * c + 1) = Dd.row(c).imag();
        }
        return bp;
    };
    return L;
}

MoritaModel make_affine_model() {
    MoritaModel m;
    m.kind = ModelKind::affine;
    m.n = 2;
    // z = (p1, p2, q1, q2)
    m.s_map = [](std::span<const ad::T2> z, std::span<ad::T2> w) {
        w[0] = z[3];
        w[1] = z[2] + z[1] * z[3];
    };
    m.t_map = [](std::span<const ad::T2> z, std::span<ad::T2> w) {
        w[0] = ad::exp(z[0]) * z[3];
        w[1] = z[2];
    };
    // sigma_- = -x d/dx ^ d/dy in GK normalization
    m.sigma_minus = [](const Vec& w) {
        cplx x(w(0), w(1));
        return CMat(-x * wedge(dvec(2, 0), dvec(2, 1)));
    };
    m.domain = [](const CVec& z) { return z.allFinite() && std::abs(z(0).real()) < 50; };
    return m;
}

double closedness_residual(const FormField& F, const Vec& u, double h) {
    const int d = static_cast<int>(u.size());
    std::vector<Mat> D(d);
    for (int r = 0; r < d; ++r) {
        Vec up = u, um = u;
        up(r) += h;
        um(r) -= h;
        D[r] = (F(up) - F(um)) / (2 * h);
    }
    // (dF)_{abc} = d_a F_bc + d_b F_ca + d_c F_ab with F_bc = M(c, b)
    double worst = 0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                double v = D[a](c, b) + D[b](a, c) + D[c](b, a);
                worst = std::max(worst, std::abs(v));
            }
    return worst;
}

CVec affine_to_darboux(const CVec& g) {
    // (a, b, x, y) -> (p1, p2, q1, q2) = (a, -b, y + x b, x)
    CVec z(4);
    z << g(0), -g(1), g(3) + g(2) * g(1), g(2);
    return z;
}

CVec darboux_to_affine(const CVec& z) {
    CVec g(4);
    g << z(0), -z(1), z(3), z(2) + z(3) * z(1);
    return g;
}

CVec affine_multiply(const CVec& g1, const CVec& g2) {
    CVec m(4);
    m << g1(0) + g2(0), g1(1) * std::exp(g2(0)) + g2(1), g2(2), g2(3);
    return m;
}

double composability_defect(const CVec& g1, const CVec& g2) {
    // s(g) = (x, y), t(g) = (e^a x, y + x b)
    cplx s1 = g1(2), s2 = g1(3);
    cplx t1 = std::exp(g2(0)) * g2(2), t2 = g2(3) + g2(2) * g2(1);
    return std::max(std::abs(s1 - t1), std::abs(s2 - t2));
}

double multiplicativity_residual(const CVec& g1, const CVec& g2) {
    if (composability_defect(g1, g2) > 1e-12 * std::max(1.0, g1.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::invalid_argument, "multiplicativity_residual: pair is not composable");
    // composable pairs parametrized holomorphically by (a1, b1, a2, b2, x2, y2)
    using ad::T2;
    std::array<T2, 6> v;
    cplx vals[6] = {g1(0), g1(1), g2(0), g2(1), g2(2), g2(3)};
    for (int k = 0; k < 6; ++k) {
        v[k] = T2(vals[k]);
        v[k].m = 6;
        v[k].g[k] = 1.0;
    }
    auto to_darboux = [](const T2& a, const T2& b, const T2& x, const T2& y) {
        return std::array<T2, 4>{a, -b, y + x * b, x};
    };
    T2 x1 = ad::exp(v[2]) * v[4];
    T2 y1 = v[5] + v[4] * v[3];
    auto z1 = to_darboux(v[0], v[1], x1, y1);
    auto z2 = to_darboux(v[2], v[3], v[4], v[5]);
    auto zm = to_darboux(v[0] + v[2], v[1] * ad::exp(v[2]) + v[3], v[4], v[5]);
    auto jac = [](const std::array<T2, 4>& z) {
        CMat J(4, 6);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 6; ++c) J(r, c) = z[r].g[c];
        return J;
    };
    // holomorphic Omega_0 = dp1^dq1 + dp2^dq2 on complex coordinates
    CMat om = CMat::Zero(4, 4);
    auto e = [](int k) {
        CVec v = CVec::Zero(4);
        v(k) = 1.0;
        return v;
    };
    om += wedge(e(0), e(2)) + wedge(e(1), e(3));
    CMat J1 = jac(z1), J2 = jac(z2), Jm = jac(zm);
    CMat res = Jm.transpose() * om * Jm - J1.transpose() * om * J1 - J2.transpose() * om * J2;
    return res.cwiseAbs().maxCoeff();
}

BraneBisection brane_from_potential(const MoritaModel& m, const PotentialFn& K) {
    if (K.n != m.n) throw Error(ErrorCode::invalid_argument, "brane_from_potential: potential dimension differs from model");
    const int n = m.n;
    BraneBisection L;
    L.n = n;
    L.description = "Gr(-i dK), K = " + K.name;
    L.potential = K;
    L.eval = [K, n](const Vec& u) {
        RealJet rj = eval_real_jet(K, u, 0.0, true);
        Jet2 j = jet_from_real(rj);
        const cplx mi(0, -1);
        BranePoint bp;
        bp.z.resize(2 * n);
        bp.lambda = Mat::Zero(4 * n, 2 * n);
        for (int k = 0; k < n; ++k) {
            bp.z(k) = mi * j.d(k);
            bp.z(n + k) = cplx(u(2 * k), u(2 * k + 1));
            for (int r = 0; r < 2 * n; ++r) {
                // d/du_r of d_k K = (K_{x_k r} - i K_{y_k r}) / 2
                cplx dp = mi * 0.5 * cplx(rj.hess(2 * k, r), -rj.hess(2 * k + 1, r));
                bp.lambda(2 * k, r) = dp.real();
                bp.lambda(2 * k + 1, r) = dp.imag();
            }
            bp.lambda(2 * (n + k), 2 * k) = 1.0;
            bp.lambda(2 * (n + k) + 1, 2 * k + 1) = 1.0;
        }
        return bp;
    };
    return L;
}

Mat potential_form(const PotentialFn& K, const Vec& u) { return ddbar_form(eval_jet2(K, ChartPoint::from_real(u)).ddbar); }

namespace {

struct Tangents {
    BranePoint bp;
    MapEval minus, plus;
    Mat Tm, Tp;
};

Tangents tangents(const MoritaModel& m, const BraneBisection& L, const Vec& u) {
    Tangents t;
    t.bp = L.eval(u);
    if (m.domain && !m.domain(t.bp.z)) throw Error(ErrorCode::domain, "brane point outside the model domain");
    t.minus = project_minus(m, t.bp.z);
    t.plus = project_plus(m, t.bp.z);
    t.Tm = t.minus.jac * t.bp.lambda;
    t.Tp = t.plus.jac * t.bp.lambda;
    if (!(condition_number(t.Tm) < tol::cond_max))
        throw Error(ErrorCode::transversality, "brane is not transverse to ker(ds)");
    if (!(condition_number(t.Tp) < tol::cond_max))
        throw Error(ErrorCode::transversality, "brane is not transverse to ker(dt)");
    return t;
}

}  // namespace

DegenerateGKData induced_structures(const MoritaModel& m, const BraneBisection& L, const Vec& u) {
    Tangents t = tangents(m, L, u);
    DegenerateGKData d;
    d.Iminus = pushforward_cx(t.Tm);
    d.Iplus = pushforward_cx(t.Tp);
    Mat F = t.bp.lambda.transpose() * omega_re_at(m, t.bp.z) * t.bp.lambda;
    d.F = 0.5 * (F - F.transpose());
    Mat Qm = poisson_from_sigma(m.sigma_minus(t.minus.value));
    auto lu = t.Tm.partialPivLu();
    Mat Q = lu.solve(lu.solve(Qm).transpose()).transpose();
    d.Q = 0.5 * (Q - Q.transpose());
    return d;
}

Mat induced_poisson_via_plus(const MoritaModel& m, const BraneBisection& L, const Vec& u) {
    Tangents t = tangents(m, L, u);
    Mat Qp = t.plus.jac * omega0_im(m.n).inverse() * t.plus.jac.transpose();
    auto lu = t.Tp.partialPivLu();
    return lu.solve(lu.solve(Qp).transpose()).transpose();
}

double lagrangian_defect(const MoritaModel& m, const BraneBisection& L, const Vec& u) {
    BranePoint bp = L.eval(u);
    return (bp.lambda.transpose() * omega0_im(m.n) * bp.lambda).cwiseAbs().maxCoeff();
}

namespace {

void require_graph_over_q(const BranePoint& bp, int n) {
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < 2 * n; ++r) {
            double want = (r == 2 * k) ? 1.0 : 0.0;
            double want_y = (r == 2 * k + 1) ? 1.0 : 0.0;
            if (std::abs(bp.lambda(2 * (n + k), r) - want) > 1e-12 || std::abs(bp.lambda(2 * (n + k) + 1, r) - want_y) > 1e-12)
                throw Error(ErrorCode::invalid_argument, "brane is not a graph over the q coordinates");
        }
}

// Im(eta) components (dx_k: Im p_k, dy_k: Re p_k) and their Jacobian
void im_eta(const BranePoint& bp, int n, Vec& a, Mat& Da) {
    a.resize(2 * n);
    Da.resize(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        a(2 * k) = bp.z(k).imag();
        a(2 * k + 1) = bp.z(k).real();
        Da.row(2 * k) = bp.lambda.row(2 * k + 1);
        Da.row(2 * k + 1) = bp.lambda.row(2 * k);
    }
}

}  // namespace

double eta_closedness(const BraneBisection& L, const Vec& u) {
    BranePoint bp = L.eval(u);
    Vec a;
    Mat Da;
    im_eta(bp, L.n, a, Da);
    return (Da - Da.transpose()).cwiseAbs().maxCoeff();
}

PotentialFn potential_from_brane(const MoritaModel& m, const BraneBisection& L, const Vec& base) {
    const int n = L.n;
    if (n != m.n) throw Error(ErrorCode::invalid_argument, "potential_from_brane: brane dimension differs from model");
    require_graph_over_q(L.eval(base), n);
    auto value_at = [L, base, n](const Vec& u) {
        Vec dir = u - base;
        auto f = [&](double s) {
            BranePoint bp = L.eval(base + s * dir);
            Vec a;
            Mat Da;
            im_eta(bp, n, a, Da);
            return a.dot(dir);
        };
        return -2.0 * boost::math::quadrature::gauss<double, 64>::integrate(f, 0.0, 1.0);
    };
    // closedness pre-check on the segment nodes of a probe neighbourhood
    double worst = eta_closedness(L, base);
    if (worst > 1e-6) throw Error(ErrorCode::not_closed, "potential_from_brane: Im(eta) is not closed");
    PotentialFn K;
    K.n = n;
    K.name = "line integral of " + L.description;
    K.eval = [L, value_at, n](std::span<const ad::T2> q, double) {
        Vec u(2 * n);
        for (int k = 0; k < n; ++k) {
            u(2 * k) = q[k].v.real();
            u(2 * k + 1) = q[k].v.imag();
        }
        if (eta_closedness(L, u) > 1e-6) throw Error(ErrorCode::not_closed, "potential_from_brane: Im(eta) is not closed");
        BranePoint bp = L.eval(u);
        Vec a;
        Mat Da;
        im_eta(bp, n, a, Da);
        Vec g = -2.0 * a;
        Mat H = -(Da + Da.transpose());
        // second-order Taylor model in the real coordinates of q
        std::vector<ad::T2> du(2 * n);
        for (int k = 0; k < n; ++k) {
            du[2 * k] = ad::real(q[k]) - ad::T2(u(2 * k));
            du[2 * k + 1] = ad::imag(q[k]) - ad::T2(u(2 * k + 1));
        }
        ad::T2 out(value_at(u));
        for (int r = 0; r < 2 * n; ++r) {
            out += ad::T2(g(r)) * du[r];
            for (int s = 0; s < 2 * n; ++s) out += ad::T2(0.5 * H(r, s)) * du[r] * du[s];
        }
        return out;
    };
    return K;
}

OneFormField one_form_from_potential(const PotentialFn& f) {
    OneFormField a;
    a.eval = [f](const Vec& u) {
        const int n = f.n;
        RealJet rj = eval_real_jet(f, u, 0.0, true);
        const cplx mi(0, -1);
        CVec v(n);
        Mat D(2 * n, 2 * n);
        for (int k = 0; k < n; ++k) {
            v(k) = mi * 0.5 * cplx(rj.grad(2 * k), -rj.grad(2 * k + 1));
            for (int r = 0; r < 2 * n; ++r) {
                cplx dv = mi * 0.5 * cplx(rj.hess(2 * k, r), -rj.hess(2 * k + 1, r));
                D(2 * k, r) = dv.real();
                D(2 * k + 1, r) = dv.imag();
            }
        }
        return std::make_pair(v, D);
    };
    return a;
}

BraneBisection deform_brane(const BraneBisection& L, const OneFormField& alpha) {
    BraneBisection r;
    r.n = L.n;
    r.description = L.description + " + alpha";
    auto inner = L.eval;
    const int n = L.n;
    r.eval = [inner, alpha, n](const Vec& u) {
        BranePoint bp = inner(u);
        auto [v, D] = alpha.eval(u);
        for (int k = 0; k < n; ++k) {
            bp.z(k) += v(k);
            bp.lambda.row(2 * k) += D.row(2 * k);
            bp.lambda.row(2 * k + 1) += D.row(2 * k + 1);
        }
        return bp;
    };
    return r;
}

double smallest_principal_angle(const Mat& a, const Mat& b) {
    Eigen::JacobiSVD<Mat> sa(a, Eigen::ComputeThinU), sb(b, Eigen::ComputeThinU);
    auto rank = [](const Eigen::VectorXd& s) {
        int r = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > 1e-12 * s(0)) ++r;
        return r;
    };
    Mat Qa = sa.matrixU().leftCols(rank(sa.singularValues()));
    Mat Qb = sb.matrixU().leftCols(rank(sb.singularValues()));
    Mat both(Qa.rows(), Qa.cols() + Qb.cols());
    both << Qa, Qb;
    Eigen::JacobiSVD<Mat> s(both);
    // singular values of [Qa Qb] include sqrt(1 - cos(theta_min))
    double smin = s.singularValues()(s.singularValues().size() - 1);
    if (both.cols() > both.rows()) smin = 0.0;
    return 2.0 * std::asin(std::min(1.0, smin / std::sqrt(2.0)));
}

TransversalityReport brane_transversality(const MoritaModel& m, const BraneBisection& L, const Vec& u) {
    TransversalityReport r;
    BranePoint bp = L.eval(u);
    MapEval mi = project_minus(m, bp.z), pl = project_plus(m, bp.z);
    const int N = 4 * m.n;
    Mat Km = Eigen::FullPivLU<Mat>(mi.jac).kernel();
    Mat Kp = Eigen::FullPivLU<Mat>(pl.jac).kernel();
    r.angle_minus = smallest_principal_angle(bp.lambda, Km);
    r.angle_plus = smallest_principal_angle(bp.lambda, Kp);
    auto rank = [](const Mat& a) {
        Eigen::JacobiSVD<Mat> s(a);
        int k = 0;
        for (int i = 0; i < s.singularValues().size(); ++i)
            if (s.singularValues()(i) > 1e-9 * s.singularValues()(0)) ++k;
        return k;
    };
    Mat TKm(N, bp.lambda.cols() + Km.cols()), TKp(N, bp.lambda.cols() + Kp.cols());
    TKm << bp.lambda, Km;
    TKp << bp.lambda, Kp;
    r.rank_minus = rank(TKm);
    r.rank_plus = rank(TKp);
    r.transverse = r.rank_minus == N && r.rank_plus == N && r.angle_minus > 1e-6 && r.angle_plus > 1e-6;

    Mat IZ = darboux_complex_structure(m, bp.z);
    Mat ITL = IZ * bp.lambda;
    Mat A(N, 2 * bp.lambda.cols());
    A << ITL, bp.lambda;
    r.f_invertible = rank(A) == N;
    if (r.transverse) {
        // each k+ splits as l + k- with l in TL; the average kernel is spanned by k+ - l/2
        Mat sys(N, bp.lambda.cols() + Km.cols());
        sys << bp.lambda, Km;
        Mat coef = sys.fullPivLu().solve(Kp);
        Mat l = bp.lambda * coef.topRows(bp.lambda.cols());
        Mat Kavg = Kp - 0.5 * l;
        Mat B(N, ITL.cols() + Kavg.cols());
        B << ITL, Kavg;
        r.ipm_invertible = rank(B) == N;
        r.metric_nondegenerate = r.f_invertible && r.ipm_invertible;
        DegenerateGKData d = induced_structures(m, L, u);
        r.f_cond = condition_number(d.F);
        r.ipm_cond = condition_number(d.Iplus + d.Iminus);
    }
    return r;
}

Mat closed_form_affine_metric(cplx q1, cplx q2, double alpha, double beta) {
    const cplx i(0, 1);
    CMat g = alpha * symprod(dq(2, 0), dqbar(2, 0)) + beta * symprod(dq(2, 1), dqbar(2, 1)) +
             i * alpha * beta * std::conj(q2) * symprod(dq(2, 0), dq(2, 1)) -
             i * alpha * beta * q2 * symprod(dqbar(2, 0), dqbar(2, 1));
    (void)q1;
    return (2.0 * g).real();
}

double nijenhuis_residual(const std::function<Mat(const Vec&)>& I, const Vec& u, double h) {
    const int d = static_cast<int>(u.size());
    Mat I0 = I(u);
    std::vector<Mat> D(d);
    for (int r = 0; r < d; ++r) {
        Vec up = u, um = u;
        up(r) += h;
        um(r) -= h;
        D[r] = (I(up) - I(um)) / (2 * h);
    }
    double worst = 0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            // N(e_a, e_b) = [Ie_a, Ie_b] + I d_b(I e_a) - I d_a(I e_b)
            Vec br = Vec::Zero(d);
            for (int r = 0; r < d; ++r) br += I0(r, a) * D[r].col(b) - I0(r, b) * D[r].col(a);
            Vec nvec = br + I0 * D[b].col(a) - I0 * D[a].col(b);
            worst = std::max(worst, nvec.cwiseAbs().maxCoeff());
        }
    return worst;
}

}  // namespace gkpot
