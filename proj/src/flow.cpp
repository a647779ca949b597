#include "flow.hpp"

#include <cmath>
#include <sstream>

namespace gkpot {

void IntegratorConfig::validate() const {
    if (steps < 4 || steps % 2 != 0) throw Error(ErrorCode::config, "integrator: steps must be even and >= 4");
    if (!(step_tol > 0) || !(quad_tol > 0)) throw Error(ErrorCode::config, "integrator: tolerances must be positive");
}

Mat BivectorField::at(const Vec& x) const {
    std::vector<ad::T2> xs(dim), q(dim * dim);
    for (int i = 0; i < dim; ++i) xs[i] = ad::real_var(i, x(i), dim, false);
    eval(xs, q);
    Mat Q(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) Q(i, j) = q[i * dim + j].v.real();
    return Q;
}

BivectorField constant_bivector(const Mat& Q) {
    if (antisym_defect(Q) > 1e-12) throw Error(ErrorCode::invalid_argument, "bivector must be antisymmetric");
    BivectorField b;
    b.dim = static_cast<int>(Q.rows());
    b.eval = [Q](std::span<const ad::T2>, std::span<ad::T2> out) {
        const int d = static_cast<int>(Q.rows());
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i * d + j] = ad::T2(Q(i, j));
    };
    return b;
}

BivectorField zero_bivector(int dim) { return constant_bivector(Mat::Zero(dim, dim)); }

BivectorField affine_base_bivector(double sign) {
    CMat W = wedge(dvec(2, 0), dvec(2, 1));
    BivectorField b;
    b.dim = 4;
    b.eval = [W, sign](std::span<const ad::T2> x, std::span<ad::T2> out) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                out[i * 4 + j] = ad::T2(4.0 * sign * W(i, j).imag()) * x[0] + ad::T2(4.0 * sign * W(i, j).real()) * x[1];
    };
    return b;
}

VectorField hamiltonian_field(const BivectorField& Q, const PotentialFn& f) {
    if (2 * f.n != Q.dim) throw Error(ErrorCode::invalid_argument, "hamiltonian_field: dimension mismatch");
    VectorField V;
    V.dim = Q.dim;
    V.eval = [Q, f](double t, const Vec& x) {
        const int d = Q.dim;
        RealJet rj = eval_real_jet(f, x, t, true);
        std::vector<ad::T2> xs(d), q(d * d);
        for (int i = 0; i < d; ++i) xs[i] = ad::real_var(i, x(i), d, false);
        Q.eval(xs, q);
        Vec v = Vec::Zero(d);
        Mat Dv = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const ad::T2& qij = q[i * d + j];
                v(i) += qij.v.real() * rj.grad(j);
                for (int k = 0; k < d; ++k) Dv(i, k) += qij.g[k].real() * rj.grad(j) + qij.v.real() * rj.hess(j, k);
            }
        return std::make_pair(v, Dv);
    };
    return V;
}

namespace {

void check_state(const VectorField& V, const Vec& x, double t) {
    if (!x.allFinite() || (V.domain && !V.domain(x))) {
        std::ostringstream os;
        os << "flow left the domain at t = " << t;
        throw Error(ErrorCode::flow_escape, os.str());
    }
}

}  // namespace

FlowTrajectory integrate(const VectorField& V, const Vec& x0, double t0, double t1, int steps, bool transport) {
    if (steps < 1) throw Error(ErrorCode::invalid_argument, "integrate: steps must be positive");
    const int d = V.dim;
    if (x0.size() != d) throw Error(ErrorCode::invalid_argument, "integrate: state dimension mismatch");
    FlowTrajectory tr;
    const double h = (t1 - t0) / steps;
    Vec x = x0;
    Mat J = Mat::Identity(d, d);
    check_state(V, x, t0);
    tr.t.push_back(t0);
    tr.x.push_back(x);
    if (transport) tr.jac.push_back(J);
    for (int k = 0; k < steps; ++k) {
        double t = t0 + k * h;
        auto [v1, D1] = V.eval(t, x);
        Vec x2 = x + 0.5 * h * v1;
        check_state(V, x2, t + 0.5 * h);
        auto [v2, D2] = V.eval(t + 0.5 * h, x2);
        Vec x3 = x + 0.5 * h * v2;
        check_state(V, x3, t + 0.5 * h);
        auto [v3, D3] = V.eval(t + 0.5 * h, x3);
        Vec x4 = x + h * v3;
        check_state(V, x4, t + h);
        auto [v4, D4] = V.eval(t + h, x4);
        if (transport) {
            Mat K1 = D1 * J;
            Mat K2 = D2 * (J + 0.5 * h * K1);
            Mat K3 = D3 * (J + 0.5 * h * K2);
            Mat K4 = D4 * (J + h * K3);
            J += h / 6.0 * (K1 + 2 * K2 + 2 * K3 + K4);
        }
        x += h / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4);
        check_state(V, x, t + h);
        tr.t.push_back(t0 + (k + 1) * h);
        tr.x.push_back(x);
        if (transport) tr.jac.push_back(J);
    }
    return tr;
}

FlowTrajectory hamiltonian_base_flow(const BivectorField& Q, const TimeDependentPotential& f, const Vec& z0,
                                     const IntegratorConfig& cfg, std::function<bool(const Vec&)> domain) {
    cfg.validate();
    VectorField V = hamiltonian_field(Q, f);
    V.domain = domain;
    FlowTrajectory tr = integrate(V, z0, 0.0, 1.0, cfg.steps, cfg.jacobian_transport);
    FlowTrajectory fine = integrate(V, z0, 0.0, 1.0, 2 * cfg.steps, cfg.jacobian_transport);
    double err = (tr.x.back() - fine.x.back()).cwiseAbs().maxCoeff();
    if (cfg.jacobian_transport) err = std::max(err, (tr.jac.back() - fine.jac.back()).cwiseAbs().maxCoeff());
    tr.error_estimate = err / 15.0;
    if (tr.error_estimate > cfg.step_tol) {
        std::ostringstream os;
        os << "step-halving error estimate " << tr.error_estimate << " exceeds " << cfg.step_tol;
        throw Error(ErrorCode::tolerance, os.str());
    }
    return tr;
}

Mat ddc_of(const PotentialFn& f, const Vec& x, double t) {
    return ddc_form(eval_jet2(f, ChartPoint::from_real(x), t).ddbar);
}

namespace {

std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(n + 1);
    for (int k = 0; k <= n; ++k) w[k] = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    for (auto& v : w) v *= h / 3.0;
    return w;
}

}  // namespace

FlowConstruction flow_construction(const BivectorField& Q, const TimeDependentPotential& f, const Vec& z,
                                   const IntegratorConfig& cfg, std::function<bool(const Vec&)> domain) {
    IntegratorConfig c = cfg;
    c.jacobian_transport = true;
    FlowTrajectory tr = hamiltonian_base_flow(Q, f, z, c, domain);
    const int N = c.steps, d = Q.dim;
    std::vector<Mat> integrand(N + 1);
    for (int k = 0; k <= N; ++k) integrand[k] = tr.jac[k].transpose() * ddc_of(f, tr.x[k], tr.t[k]) * tr.jac[k];
    auto w = simpson_weights(N, 1.0 / N);
    Mat F = Mat::Zero(d, d);
    for (int k = 0; k <= N; ++k) F += w[k] * integrand[k];
    Mat coarse = Mat::Zero(d, d);
    if (N % 4 == 0) {
        auto wc = simpson_weights(N / 2, 2.0 / N);
        for (int k = 0; k <= N / 2; ++k) coarse += wc[k] * integrand[2 * k];
    } else {
        for (int k = 0; k <= N; ++k) coarse += ((k == 0 || k == N) ? 0.5 : 1.0) / N * integrand[k];
    }
    FlowConstruction out;
    out.step_error = tr.error_estimate;
    out.quad_error = (F - coarse).cwiseAbs().maxCoeff() / 15.0;
    if (out.quad_error > c.quad_tol * std::max(1.0, F.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "quadrature error estimate " << out.quad_error << " exceeds tolerance";
        throw Error(ErrorCode::tolerance, os.str());
    }
    out.psi1 = tr.x.back();
    out.jac1 = tr.jac.back();
    if (condition_number(out.jac1) > tol::cond_max) throw Error(ErrorCode::conditioning, "flow Jacobian is singular");
    Mat Jm = jstd(d / 2);
    out.data.Iminus = Jm;
    out.data.Iplus = out.jac1.partialPivLu().solve(Jm * out.jac1);
    out.data.F = 0.5 * (F - F.transpose());
    out.data.Q = Q.at(z);
    out.star = star_residuals(out.data);
    return out;
}

CourantAutomorphism ExpPath::at(double t) const {
    CourantAutomorphism a;
    a.dim = V.dim;
    VectorField v = V;
    FormField om = omega;
    const int steps = cfg.steps;
    a.phi = [v, t, steps](const Vec& x) {
        FlowTrajectory tr = integrate(v, x, 0.0, t, steps, true);
        return MapEval{tr.x.back(), tr.jac.back()};
    };
    a.inverse_phi = [v, t, steps](const Vec& x) {
        FlowTrajectory tr = integrate(v, x, 0.0, -t, steps, true);
        return MapEval{tr.x.back(), tr.jac.back()};
    };
    a.f2 = [v, om, t, steps](const Vec& x) {
        FlowTrajectory tr = integrate(v, x, 0.0, t, steps, true);
        auto w = simpson_weights(steps, t / steps);
        Mat F = Mat::Zero(v.dim, v.dim);
        for (int k = 0; k <= steps; ++k) F += w[k] * tr.jac[k].transpose() * om(tr.x[k]) * tr.jac[k];
        return Mat(0.5 * (F - F.transpose()));
    };
    return a;
}

ExpPath exp_courant(const VectorField& V, const FormField& omega, const IntegratorConfig& cfg) {
    cfg.validate();
    return ExpPath{V, omega, cfg};
}

ExpPath exp_courant_exact(const BivectorField& Q, const PotentialFn& f, const IntegratorConfig& cfg,
                          std::function<bool(const Vec&)> domain) {
    VectorField V = hamiltonian_field(Q, f);
    V.domain = domain;
    FormField om = [f](const Vec& x) { return ddc_of(f, x, 0.0); };
    return exp_courant(V, om, cfg);
}

LieAlgebraResiduals lie_algebra_residuals(const VectorField& V, const FormField& omega,
                                          const std::function<Mat(const Vec&)>& I, const BivectorField& Q,
                                          const Vec& x, double h) {
    const int d = V.dim;
    Mat I0 = I(x), w = omega(x);
    auto [v, Dv] = V.eval(0.0, x);
    // L_V I = V.grad(I) - DV I + I DV
    Mat L = I0 * Dv - Dv * I0;
    for (int k = 0; k < d; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        L += v(k) * (I(xp) - I(xm)) / (2 * h);
    }
    LieAlgebraResiduals r;
    r.type11 = (w * I0 + I0.transpose() * w).cwiseAbs().maxCoeff();
    r.lie_deriv = (L - Q.at(x) * w).cwiseAbs().maxCoeff();
    return r;
}

namespace {

CVec complexify(const Vec& x) {
    CVec z(x.size() / 2);
    for (int c = 0; c < z.size(); ++c) z(c) = cplx(x(2 * c), x(2 * c + 1));
    return z;
}

Vec realify(const CVec& z) {
    Vec x(2 * z.size());
    for (int c = 0; c < z.size(); ++c) {
        x(2 * c) = z(c).real();
        x(2 * c + 1) = z(c).imag();
    }
    return x;
}

}  // namespace

VectorField z_flow_field(const MoritaModel& m, const PotentialFn& f) {
    if (m.plus_relabel) throw Error(ErrorCode::invalid_argument, "z_flow_field: relabeled plus projection is not supported");
    if (f.n != m.n) throw Error(ErrorCode::invalid_argument, "z_flow_field: potential must live on the plus base");
    const int N = 4 * m.n;
    if (N > ad::kMaxVars) throw Error(ErrorCode::invalid_argument, "z_flow_field: jet capacity exceeded");
    Mat winv = omega0_im(m.n).inverse();
    VectorField V;
    V.dim = N;
    auto tmap = m.t_map;
    auto dom = m.domain;
    const int n = m.n;
    V.eval = [tmap, f, winv, N, n](double t, const Vec& x) {
        std::vector<ad::T2> z(2 * n), w(n);
        for (int c = 0; c < 2 * n; ++c) z[c] = ad::complex_var(c, cplx(x(2 * c), x(2 * c + 1)), N, true);
        tmap(z, w);
        ad::T2 val = f.eval(w, t);
        Vec a(N);
        Mat H(N, N);
        for (int r = 0; r < N; ++r) {
            a(r) = val.g[r].real();
            for (int s = 0; s < N; ++s) H(r, s) = val.hess(r, s).real();
        }
        return std::make_pair(Vec(winv * a), Mat(winv * H));
    };
    if (dom) V.domain = [dom](const Vec& x) { return dom(complexify(x)); };
    return V;
}

BraneBisection brane_flow_in_Z(const MoritaModel& m, const BraneBisection& L, const PotentialFn& f, double t,
                               const IntegratorConfig& cfg) {
    cfg.validate();
    VectorField V = z_flow_field(m, f);
    BraneBisection out;
    out.n = L.n;
    std::ostringstream os;
    os << L.description << " flowed to t = " << t;
    out.description = os.str();
    auto inner = L.eval;
    const int steps = cfg.steps;
    out.eval = [inner, V, t, steps](const Vec& u) {
        BranePoint bp = inner(u);
        if (t == 0.0) return bp;
        FlowTrajectory tr = integrate(V, realify(bp.z), 0.0, t, steps, true);
        BranePoint r;
        r.z = complexify(tr.x.back());
        r.lambda = tr.jac.back() * bp.lambda;
        return r;
    };
    return out;
}

}  // namespace gkpot
