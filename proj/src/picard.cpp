#include "picard.hpp"

#include <cmath>

namespace gkpot {

double MembershipReport::worst() const {
    return std::max({compat, pushforward, square, q_preserved, closedness});
}

CourantAutomorphism identity_automorphism(int dim) {
    CourantAutomorphism a;
    a.dim = dim;
    a.phi = [dim](const Vec& x) { return MapEval{x, Mat::Identity(dim, dim)}; };
    a.inverse_phi = a.phi;
    a.f2 = [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); };
    return a;
}

CourantAutomorphism b_field(int dim, FormField F) {
    CourantAutomorphism a = identity_automorphism(dim);
    a.f2 = std::move(F);
    return a;
}

CourantAutomorphism affine_automorphism(const Mat& A, const Vec& c, FormField F) {
    const int d = static_cast<int>(A.rows());
    if (A.cols() != d || c.size() != d) throw Error(ErrorCode::invalid_argument, "affine_automorphism: shape mismatch");
    if (condition_number(A) > tol::cond_max) throw Error(ErrorCode::conditioning, "affine_automorphism: singular map");
    CourantAutomorphism a = identity_automorphism(d);
    Mat Ai = A.inverse();
    a.phi = [A, c](const Vec& x) { return MapEval{A * x + c, A}; };
    a.inverse_phi = [Ai, c](const Vec& x) { return MapEval{Ai * (x - c), Ai}; };
    if (F) a.f2 = std::move(F);
    return a;
}

CourantAutomorphism compose(const CourantAutomorphism& a1, const CourantAutomorphism& a2) {
    if (a1.dim != a2.dim) throw Error(ErrorCode::invalid_argument, "compose: dimension mismatch");
    CourantAutomorphism r;
    r.dim = a1.dim;
    auto p1 = a1.phi, p2 = a2.phi;
    auto f1 = a1.f2, f2 = a2.f2;
    r.phi = [p1, p2](const Vec& x) {
        MapEval e2 = p2(x);
        MapEval e1 = p1(e2.value);
        return MapEval{e1.value, e1.jac * e2.jac};
    };
    r.f2 = [p2, f1, f2](const Vec& x) {
        MapEval e2 = p2(x);
        return Mat(e2.jac.transpose() * f1(e2.value) * e2.jac + f2(x));
    };
    if (a1.inverse_phi && a2.inverse_phi) {
        auto i1 = *a1.inverse_phi, i2 = *a2.inverse_phi;
        r.inverse_phi = [i1, i2](const Vec& y) {
            MapEval e1 = i1(y);
            MapEval e2 = i2(e1.value);
            return MapEval{e2.value, e2.jac * e1.jac};
        };
    }
    return r;
}

CourantAutomorphism inverse(const CourantAutomorphism& a) {
    if (!a.inverse_phi) throw Error(ErrorCode::invalid_argument, "inverse: automorphism carries no inverse map");
    CourantAutomorphism r;
    r.dim = a.dim;
    auto psi = *a.inverse_phi;
    auto F = a.f2;
    r.phi = psi;
    r.inverse_phi = a.phi;
    r.f2 = [psi, F](const Vec& x) {
        MapEval e = psi(x);
        return Mat(-(e.jac.transpose() * F(e.value) * e.jac));
    };
    return r;
}

MembershipReport check_membership(const CourantAutomorphism& a, const EndoField& I,
                                  const std::function<Mat(const Vec&)>& Q, const std::vector<Vec>& points) {
    MembershipReport r;
    for (const Vec& x : points) {
        Mat F = a.f2(x), Ix = I(x), Qx = Q(x);
        MapEval e = a.phi(x);
        const int d = static_cast<int>(Ix.rows());
        Mat IF = Ix + Qx * F;
        r.compat = std::max(r.compat, (F * Ix + Ix.transpose() * F + F * Qx * F).cwiseAbs().maxCoeff());
        r.pushforward = std::max(r.pushforward, (e.jac * IF - I(e.value) * e.jac).cwiseAbs().maxCoeff());
        r.square = std::max(r.square, (IF * IF + Mat::Identity(d, d)).cwiseAbs().maxCoeff());
        r.q_preserved =
            std::max(r.q_preserved, (e.jac * Qx * e.jac.transpose() - Q(e.value)).cwiseAbs().maxCoeff());
        r.closedness = std::max(r.closedness, closedness_residual(a.f2, x));
    }
    return r;
}

double automorphism_distance(const CourantAutomorphism& a, const CourantAutomorphism& b, const Vec& x) {
    MapEval ea = a.phi(x), eb = b.phi(x);
    double d = (ea.value - eb.value).cwiseAbs().maxCoeff();
    d = std::max(d, (ea.jac - eb.jac).cwiseAbs().maxCoeff());
    d = std::max(d, (a.f2(x) - b.f2(x)).cwiseAbs().maxCoeff());
    return d;
}

std::pair<MoritaModel, BraneBisection> act_on_gk(const CourantAutomorphism& a, const MoritaModel& m,
                                                 const BraneBisection& L) {
    if (a.dim != 2 * m.n) throw Error(ErrorCode::invalid_argument, "act_on_gk: automorphism lives on another base");
    MoritaModel out = m;
    ChartMap r = m.plus_relabel;
    if (!r) {
        const int d = a.dim;
        r = [d](const Vec& w) { return MapEval{w, Mat::Identity(d, d)}; };
    }
    FormField old_twist = m.plus_twist;
    FormField F = a.f2;
    out.plus_twist = [old_twist, F, r](const Vec& w) {
        MapEval e = r(w);
        Mat add = e.jac.transpose() * F(e.value) * e.jac;
        return old_twist ? Mat(old_twist(w) + add) : add;
    };
    ChartMap phi = a.phi;
    out.plus_relabel = [phi, r](const Vec& w) {
        MapEval e = r(w);
        MapEval p = phi(e.value);
        return MapEval{p.value, p.jac * e.jac};
    };
    return {out, L};
}

}  // namespace gkpot
