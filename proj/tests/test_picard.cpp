#include <doctest.h>

#include "flow.hpp"
#include "oracles.hpp"
#include "picard.hpp"
#include "potential.hpp"

using namespace gkpot;

namespace {
Vec vec4(double a, double b, double c, double d) {
    Vec u(4);
    u << a, b, c, d;
    return u;
}
const EndoField I_std = [](const Vec&) { return oracle::jstd(2); };
}  // namespace

TEST_CASE("identity is a member") {
    MembershipReport r = check_membership(identity_automorphism(4), I_std, [](const Vec&) { return Mat(Mat::Zero(4, 4)); },
                                          {vec4(0.1, 0.2, 0.3, 0.4)});
    CHECK(r.worst() == 0.0);
}

TEST_CASE("exponentials of Hamiltonian symmetries are members") {
    IntegratorConfig cfg;
    BivectorField Q = affine_base_bivector();
    auto Qf = [Q](const Vec& x) { return Q.at(x); };
    std::vector<Vec> pts = {vec4(0.1, 0.2, 0.3, 0.4), vec4(-0.5, 0.1, 0.2, -0.3)};
    for (const auto& name : catalog_names()) {
        ExpPath p = exp_courant_exact(Q, scaled(catalog_potential(name, 2), 0.3), cfg);
        CHECK(check_membership(p.at(1.0), I_std, Qf, pts).worst() < 1e-5);
    }
    // a generic closed 2-form is not compatible
    Mat B = Mat::Zero(4, 4);
    B(1, 0) = 1;
    B(0, 1) = -1;
    B(3, 0) = 0.5;
    B(0, 3) = -0.5;
    CHECK(check_membership(b_field(4, [B](const Vec&) { return B; }), I_std, Qf, pts).worst() > 1e-3);
}

TEST_CASE("composition law") {
    Mat A = Mat::Identity(4, 4);
    A(0, 1) = 0.3;
    A(2, 3) = -0.4;
    Vec c = vec4(0.1, 0, -0.2, 0.3);
    Mat B = Mat::Zero(4, 4);
    B(2, 1) = 1;
    B(1, 2) = -1;
    CourantAutomorphism a1 = affine_automorphism(A, c, [B](const Vec&) { return B; });
    CourantAutomorphism a2 = b_field(4, [](const Vec& x) { return potential_form(catalog_potential("split_quartic", 2), x); });
    Vec x = vec4(0.5, -0.1, 0.3, 0.2);
    CourantAutomorphism c12 = compose(a1, a2);
    // phi = phi1 o phi2 with phi2 = id; F = F1 + F2
    CHECK((c12.phi(x).value - (A * x + c)).norm() < 1e-15);
    CHECK((c12.f2(x) - (B + a2.f2(x))).norm() < 1e-14);
    CourantAutomorphism c21 = compose(a2, a1);
    Vec y = A * x + c;
    CHECK((c21.f2(x) - (A.transpose() * a2.f2(y) * A + B)).norm() < 1e-14);
    CHECK(automorphism_distance(compose(c21, inverse(c21)), identity_automorphism(4), x) < 1e-12);
    CourantAutomorphism no_inv = c12;
    no_inv.inverse_phi.reset();
    CHECK_THROWS_AS(inverse(no_inv), Error);
}

TEST_CASE("acting on GK data") {
    MoritaModel m = make_cotangent_model(2);
    BraneBisection L = brane_from_potential(m, catalog_potential("quadratic", 2));
    Vec u = vec4(0.2, 0.1, -0.4, 0.3);
    auto [m1, L1] = act_on_gk(identity_automorphism(4), m, L);
    DegenerateGKData a = induced_structures(m, L, u), b = induced_structures(m1, L1, u);
    CHECK((a.F - b.F).norm() < 1e-14);
    CHECK((a.Iplus - b.Iplus).norm() < 1e-14);

    PotentialFn f = potential_from_expression("abs2(q1)*abs2(q2)", 2);
    auto [m2, L2] = act_on_gk(b_field(4, [f](const Vec& x) { return potential_form(f, x); }), m, L);
    DegenerateGKData c = induced_structures(m2, L2, u);
    CHECK((c.F - a.F - potential_form(f, u)).norm() < 1e-12);
}
