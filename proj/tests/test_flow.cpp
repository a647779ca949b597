#include <doctest.h>

#include "flow.hpp"
#include "oracles.hpp"
#include "potential.hpp"

using namespace gkpot;

namespace {
Vec vec4(double a, double b, double c, double d) {
    Vec u(4);
    u << a, b, c, d;
    return u;
}
Mat expm_taylor(const Mat& A) {
    Mat r = Mat::Identity(A.rows(), A.cols()), term = r;
    for (int k = 1; k < 60; ++k) {
        term = (term * A / k).eval();
        r += term;
    }
    return r;
}
CMat omega_plus() {
    oracle::Quaternions q;
    return q.J.cast<cplx>() + cplx(0, 1) * q.K.cast<cplx>();
}
CMat omega_minus() {
    oracle::Quaternions q;
    return -q.I.cast<cplx>() + cplx(0, 1) * q.K.cast<cplx>();
}
}  // namespace

TEST_CASE("integrator settings") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.steps = 7;
    CHECK_THROWS_AS(c.validate(), Error);
    c.steps = 2;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("zero bivector gives the constant trajectory") {
    FlowTrajectory tr = hamiltonian_base_flow(zero_bivector(4), catalog_potential("dilog", 2), vec4(0.1, 0.2, 0.3, 0.4),
                                              IntegratorConfig{});
    CHECK((tr.x.back() - vec4(0.1, 0.2, 0.3, 0.4)).norm() == 0.0);
    CHECK((tr.jac.back() - Mat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("linear Hamiltonian flow matches the matrix exponential") {
    oracle::Quaternions q;
    Mat Q = q.K.inverse();
    PotentialFn f = potential_from_expression("abs2(q1) + 0.5*re(q1*q2) + 0.3*abs2(q2)", 2);
    Vec z0 = vec4(0.3, -0.1, 0.2, 0.5);
    Mat H = eval_real_jet(f, z0).hess;  // constant
    Mat E = expm_taylor(Q * H);
    IntegratorConfig cfg;
    cfg.steps = 400;
    FlowTrajectory tr = hamiltonian_base_flow(constant_bivector(Q), f, z0, cfg);
    CHECK((tr.x.back() - E * z0).norm() < 1e-9);
    CHECK((tr.jac.back() - E).norm() < 1e-9);
}

TEST_CASE("flow construction with Q = 0 reproduces i ddbar K") {
    PotentialFn K = catalog_potential("dilog", 2);
    Vec z = vec4(0.2, -0.4, 0.7, 0.3);
    FlowConstruction fc = flow_construction(zero_bivector(4), scaled(K, -0.5), z, IntegratorConfig{});
    CHECK((fc.data.F - potential_form(K, z)).norm() < 1e-9);
    CHECK((fc.data.Iplus - fc.data.Iminus).norm() < 1e-14);
    FlowConstruction f0 = flow_construction(affine_base_bivector(), potential_from_expression("0", 2), z, IntegratorConfig{});
    CHECK(f0.data.F.norm() == 0.0);
    CHECK((f0.data.Iplus - f0.data.Iminus).norm() < 1e-14);
}

TEST_CASE("affine flow construction satisfies the star equations") {
    for (double eps : {0.02, 0.1}) {
        PotentialFn f = scaled(potential_from_expression("abs2(q1) + abs2(q2)", 2), eps);
        FlowConstruction fc = flow_construction(affine_base_bivector(), f, vec4(0.3, 0.1, 0.4, -0.2), IntegratorConfig{});
        CHECK(fc.star.star1 < 1e-5);
        CHECK(fc.star.star2 < 1e-5);
        CHECK(fc.step_error < 1e-7);
    }
}

TEST_CASE("time-dependent potentials") {
    // f_t = -(t + 1/2) K / 2 integrates to -K/2 over [0, 1] when Q = 0
    PotentialFn f = potential_from_expression("-(t + 0.5)*(abs2(q1) + abs2(q1)*abs2(q2))/2", 2);
    PotentialFn K = potential_from_expression("abs2(q1) + abs2(q1)*abs2(q2)", 2);
    Vec z = vec4(0.2, -0.4, 0.7, 0.3);
    FlowConstruction fc = flow_construction(zero_bivector(4), f, z, IntegratorConfig{});
    CHECK((fc.data.F - potential_form(K, z)).norm() < 1e-9);
}

TEST_CASE("tolerance and escape errors") {
    IntegratorConfig tight;
    tight.steps = 4;
    tight.step_tol = 1e-15;
    PotentialFn f = potential_from_expression("abs2(q1)^2 + abs2(q2)^2", 2);
    try {
        hamiltonian_base_flow(affine_base_bivector(), f, vec4(0.3, 0.1, 0.9, -0.6), tight);
        FAIL("expected a tolerance error");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::tolerance);
    }
    auto inside = [](const Vec& x) { return x.norm() < 0.5; };
    try {
        // a linear f translates at constant speed and leaves the ball
        hamiltonian_base_flow(constant_bivector(oracle::jstd(2)), potential_from_expression("5*re(q1)", 2),
                              vec4(0.3, 0.1, 0.2, -0.1), IntegratorConfig{}, inside);
        FAIL("expected a flow escape");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::flow_escape);
    }
}

TEST_CASE("exponentiated symmetries") {
    IntegratorConfig cfg;
    ExpPath idp = exp_courant(VectorField{4, [](double, const Vec&) { return std::pair<Vec, Mat>{Vec::Zero(4), Mat::Zero(4, 4)}; }, {}},
                              [](const Vec&) { return Mat(Mat::Zero(4, 4)); }, cfg);
    CourantAutomorphism a = idp.at(0.7);
    Vec x = vec4(0.1, 0.5, -0.3, 0.2);
    CHECK((a.phi(x).value - x).norm() == 0.0);
    CHECK(a.f2(x).norm() == 0.0);

    PotentialFn f = catalog_potential("split_quartic", 2);
    ExpPath p = exp_courant_exact(zero_bivector(4), f, cfg);
    CourantAutomorphism b = p.at(0.6);
    CHECK((b.phi(x).value - x).norm() == 0.0);
    CHECK((b.f2(x) - 0.6 * ddc_of(f, x)).norm() < 1e-12);

    LieAlgebraResiduals r = lie_algebra_residuals(hamiltonian_field(affine_base_bivector(), f),
                                                  [f](const Vec& w) { return ddc_of(f, w); },
                                                  [](const Vec&) { return oracle::jstd(2); }, affine_base_bivector(), x);
    CHECK(r.type11 < 1e-12);
    CHECK(r.lie_deriv < 1e-6);
}

TEST_CASE("brane flow in Z") {
    IntegratorConfig cfg;
    MoritaModel cot = make_cotangent_model(2);
    BraneBisection L = brane_from_potential(cot, catalog_potential("quadratic", 2));
    Vec u = vec4(0.2, -0.3, 0.5, 0.1);
    BraneBisection L0 = brane_flow_in_Z(cot, L, potential_from_expression("0", 2), 0.8, cfg);
    CHECK((L0.eval(u).z - L.eval(u).z).norm() == 0.0);

    // cotangent model: F gains t d^c d f
    PotentialFn f = potential_from_expression("0.3*abs2(q1)*abs2(q2) + re(q1^2*q2)", 2);
    double t = 0.4;
    Mat dF = induced_structures(cot, brane_flow_in_Z(cot, L, f, t, cfg), u).F - induced_structures(cot, L, u).F;
    CHECK((dF - t * ddc_of(f, u)).norm() < 1e-9);

    // pair model: the diagonal moves by the Hamiltonian flow of f, I- is untouched
    MoritaModel pair = make_pair_model(omega_plus(), omega_minus());
    BraneBisection D = pair_diagonal_brane(omega_plus(), omega_minus());
    PotentialFn g = potential_from_expression("re(q1)^2", 2);
    DegenerateGKData d0 = induced_structures(pair, D, u);
    for (double s : {0.1, 0.3, 0.5}) {
        DegenerateGKData ds = induced_structures(pair, brane_flow_in_Z(pair, D, g, s, cfg), u);
        StarResiduals st = star_residuals(ds);
        CHECK(st.star1 < 1e-5);
        CHECK(st.star2 < 1e-5);
        CHECK((ds.Iminus - d0.Iminus).norm() < 1e-10);
    }
}

TEST_CASE("Z flow matches the Courant action of the exponentiated symmetry") {
    IntegratorConfig cfg;
    MoritaModel m = make_affine_model();
    BraneBisection L = brane_from_potential(m, catalog_potential("quadratic", 2));
    PotentialFn f = scaled(potential_from_expression("abs2(q1) + re(q2)^2", 2), 0.2);
    double t = 0.3;
    BraneBisection Lz = brane_flow_in_Z(m, L, f, t, cfg);
    auto [m2, L2] = act_on_gk(exp_courant_exact(affine_base_bivector(), f, cfg).at(t), m, L);
    Vec u = vec4(0.1, 0.2, 0.3, -0.2);
    DegenerateGKData a = induced_structures(m, Lz, u), b = induced_structures(m2, L2, u);
    CHECK((a.Iplus - b.Iplus).norm() < 1e-8);
    CHECK((a.Iminus - b.Iminus).norm() < 1e-8);
    CHECK((a.F - b.F).norm() < 1e-8);
    CHECK((a.Q - b.Q).norm() < 1e-8);
}
