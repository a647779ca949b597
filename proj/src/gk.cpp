#include "gk.hpp"

#include <cmath>

namespace gkpot {

StarResiduals star_residuals(const DegenerateGKData& d) {
    StarResiduals r;
    r.star1 = (d.Iplus - d.Iminus - d.Q * d.F).norm();
    r.star2 = (d.F * d.Iplus + d.Iminus.transpose() * d.F).norm();
    return r;
}

MetricB metric_b_from_data(const DegenerateGKData& d) {
    MetricB r;
    Mat g = -0.5 * d.F * (d.Iplus + d.Iminus);
    Mat b = -0.5 * d.F * (d.Iplus - d.Iminus);
    r.g_sym_defect = sym_defect(g);
    r.b_antisym_defect = antisym_defect(b);
    r.g = 0.5 * (g + g.transpose());
    r.b = 0.5 * (b - b.transpose());
    return r;
}

Mat hitchin_poisson(const Mat& g, const Mat& Ip, const Mat& Im) {
    if (condition_number(g) > tol::cond_max) throw Error(ErrorCode::conditioning, "hitchin_poisson: g is singular");
    Mat Q = 0.5 * (Im * Ip - Ip * Im) * g.inverse();
    return 0.5 * (Q - Q.transpose());
}

HoloPoisson holomorphic_poisson(const Mat& I, const Mat& Q) {
    HoloPoisson r;
    r.sigma = -0.25 * (I * Q).cast<cplx>() - cplx(0, 0.25) * Q.cast<cplx>();
    const cplx i(0, 1);
    double a = (I.cast<cplx>() * r.sigma - i * r.sigma).cwiseAbs().maxCoeff();
    double b = (r.sigma * I.transpose().cast<cplx>() - i * r.sigma).cwiseAbs().maxCoeff();
    r.type_defect = std::max(a, b);
    return r;
}

Mat poisson_from_sigma(const CMat& sigma) { return -4.0 * sigma.imag(); }

SymAntisym split_sym_antisym(const Mat& F, const Mat& I) {
    Mat F11 = oneone_part(F, I);
    SymAntisym r;
    r.S = F11 * I;
    r.A = (F - F11) * I;
    return r;
}

double min_sym_eigenvalue(const Mat& S) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

GKReport analyze(const DegenerateGKData& d) {
    GKReport r;
    auto s = star_residuals(d);
    r.star1_residual = s.star1;
    r.star2_residual = s.star2;
    auto mb = metric_b_from_data(d);
    r.g = mb.g;
    r.b = mb.b;
    r.min_metric_eigenvalue = min_sym_eigenvalue(mb.g);
    r.degenerate = !(condition_number(mb.g) < tol::cond_max);
    return r;
}

LocusRecord evaluate_point(const DataField& field, const Vec& u) {
    LocusRecord rec;
    rec.coords = u;
    try {
        GKReport r = analyze(field(u));
        rec.min_eig = r.min_metric_eigenvalue;
        rec.star1 = r.star1_residual;
        rec.star2 = r.star2_residual;
        rec.ok = std::isfinite(rec.min_eig);
        if (!rec.ok) rec.error = "non-finite metric";
    } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

RayBoundary scan_ray(const DataField& field, const Ray& ray, int index, double xtol) {
    RayBoundary out;
    out.ray = index;
    const int m = std::max(2, ray.samples);
    auto at = [&](double s) -> Vec { return ray.origin + s * ray.direction; };
    auto eig = [&](double s, bool& ok) {
        LocusRecord r = evaluate_point(field, at(s));
        ok = r.ok;
        return r.min_eig;
    };
    bool ok_prev = false;
    double s_prev = ray.t0;
    double v_prev = eig(s_prev, ok_prev);
    if (!ok_prev) ++out.failures;
    for (int k = 1; k < m; ++k) {
        double s = ray.t0 + (ray.t1 - ray.t0) * k / (m - 1);
        bool ok = false;
        double v = eig(s, ok);
        if (!ok) ++out.failures;
        if (ok && ok_prev && ((v > 0) != (v_prev > 0))) {
            double a = s_prev, b = s, fa = v_prev;
            while (std::abs(b - a) > xtol) {
                double c = 0.5 * (a + b);
                bool okc = false;
                double fc = eig(c, okc);
                if (!okc) {
                    ++out.failures;
                    break;
                }
                if ((fc > 0) == (fa > 0)) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            double root = 0.5 * (a + b);
            out.params.push_back(root);
            out.points.push_back(at(root));
        }
        ok_prev = ok;
        s_prev = s;
        v_prev = v;
    }
    return out;
}

LocusReport positivity_scan(const DataField& field, const std::vector<Vec>& points, const std::vector<Ray>& rays,
                            int threads) {
    LocusReport rep;
    rep.records.resize(points.size());
    parallel_for(points.size(), threads, [&](size_t i) { rep.records[i] = evaluate_point(field, points[i]); });
    rep.boundaries.resize(rays.size());
    parallel_for(rays.size(), threads,
                 [&](size_t i) { rep.boundaries[i] = scan_ray(field, rays[i], static_cast<int>(i)); });
    for (auto& r : rep.records)
        if (!r.ok) ++rep.failures;
    for (auto& b : rep.boundaries) rep.failures += b.failures;
    return rep;
}

}  // namespace gkpot
