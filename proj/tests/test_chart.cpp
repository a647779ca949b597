#include <doctest.h>

#include "chart.hpp"
#include "models.hpp"
#include "oracles.hpp"
#include "potential.hpp"

using namespace gkpot;

namespace {
ChartPoint pt(cplx a) { return ChartPoint{CVec::Constant(1, a)}; }
ChartPoint pt(cplx a, cplx b) {
    CVec q(2);
    q << a, b;
    return ChartPoint{q};
}
}  // namespace

TEST_CASE("jet of |q|^2") {
    Jet2 j = eval_jet2(potential_from_expression("abs2(q1)", 1), pt({1, 1}));
    CHECK(std::abs(j.d(0) - cplx(1, -1)) < 1e-14);
    CHECK(std::abs(j.ddbar(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(j.dd(0, 0)) < 1e-14);
}

TEST_CASE("quadratic potential has identity ddbar everywhere") {
    PotentialFn K = catalog_potential("quadratic", 2);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
        Vec u(4);
        for (int i = 0; i < 4; ++i) u(i) = oracle::uniform(rng, -3, 3);
        Jet2 j = eval_jet2(K, ChartPoint::from_real(u));
        CHECK((j.ddbar - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("dilogarithm block gives beta = 1/(1+|q2|^2)") {
    PotentialFn K = catalog_potential("dilog", 2);
    CHECK(std::abs(eval_jet2(K, pt(0, 0.5)).ddbar(1, 1).real() - 0.8) < 1e-12);
    CHECK(std::abs(eval_jet2(K, pt(0, 1.0)).ddbar(1, 1).real() - 0.5) < 1e-12);
    CHECK(std::abs(eval_jet2(K, pt(0, {0.3, -2.0})).ddbar(1, 1).real() - oracle::dilog_beta(0.09 + 4.0)) < 1e-12);
}

TEST_CASE("expression and catalog potentials agree") {
    PotentialFn a = potential_from_expression("abs2(q1)/C - dilog(-abs2(q2))", 2, {{"C", 2.0}});
    PotentialFn b = catalog_potential("dilog", 2, {{"C", 2.0}});
    Jet2 ja = eval_jet2(a, pt({0.3, 0.2}, {-0.7, 0.4})), jb = eval_jet2(b, pt({0.3, 0.2}, {-0.7, 0.4}));
    CHECK(std::abs(ja.value - jb.value) < 1e-13);
    CHECK((ja.ddbar - jb.ddbar).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("third derivatives") {
    ThirdDerivs z = third_derivs_fd(potential_from_expression("abs2(q1)", 1), pt(1.0));
    CHECK(std::abs(z.ddbar3(0, 0, 0)) < 1e-6);
    CHECK(std::abs(z.dd3(0, 0, 0)) < 1e-6);
    // d d dbar |q|^4 = d(2 q qbar^2)... = 2 * 2 qbar at q = 1
    ThirdDerivs q4 = third_derivs_fd(potential_from_expression("abs2(q1)^2", 1), pt(1.0));
    CHECK(std::abs(q4.ddbar3(0, 0, 0) - 4.0) < 1e-6);
    // beta' = d/dq2 of 1/(1+|q2|^2) = -conj(q2)/(1+|q2|^2)^2
    ThirdDerivs dl = third_derivs_fd(catalog_potential("dilog", 2), pt(0, 0.5));
    CHECK(std::abs(dl.ddbar3(1, 1, 1) - (-0.5 / (1.25 * 1.25))) < 1e-6);
}

TEST_CASE("non-finite potential values raise a domain error") {
    PotentialFn K = potential_from_expression("ln(abs2(q1))", 1);
    CHECK_THROWS_AS(eval_jet2(K, pt(0.0)), Error);
}

TEST_CASE("(1,1) projection") {
    Mat I = oracle::jstd(2);
    Mat F = 2.0 * oracle::jstd(2);
    CHECK((oneone_part(F, I) - F).cwiseAbs().maxCoeff() < 1e-15);
    Mat F20 = wedge(dq(2, 0), dq(2, 1)).real();
    CHECK(oneone_part(F20, I).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("(1,1) part of the affine quadratic F with respect to I-") {
    double x2 = 0.3, y2 = -0.4;
    cplx q2(x2, y2);
    Mat Im = oracle::affine_quadratic_iminus(0.1, 0.2, x2, y2);
    Mat got = oneone_part(oracle::affine_quadratic_F(), Im);
    const cplx i(0, 1);
    CMat want = i * wedge(dq(2, 0), dqbar(2, 0)) + i * (1.0 - 2 * std::norm(q2)) * wedge(dq(2, 1), dqbar(2, 1)) +
                std::conj(q2) * wedge(dq(2, 1), dq(2, 0)) + q2 * wedge(dqbar(2, 1), dqbar(2, 0));
    CHECK(want.imag().cwiseAbs().maxCoeff() < 1e-15);
    CHECK((got - want.real()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(wedge_top4(got, got) + 2 * (1 - std::norm(q2))) < 1e-12);
}

TEST_CASE("top-degree wedge normalization") {
    Mat F = 2.0 * oracle::jstd(2);  // i(dq1^dq1bar + dq2^dq2bar)
    CHECK(std::abs(wedge_top4(F, F) + 2.0) < 1e-14);
    Mat dxdy = wedge(dq(2, 0).real().cast<cplx>(), dq(2, 0).imag().cast<cplx>()).real();
    CHECK(std::abs(wedge_top4(dxdy, dxdy)) < 1e-15);
}

TEST_CASE("pushforward of the standard structure") {
    CHECK((pushforward_cx(Mat::Identity(4, 4)) - oracle::jstd(2)).cwiseAbs().maxCoeff() < 1e-15);
    Mat bad = Mat::Identity(4, 4);
    bad(3, 3) = 1e-14;
    CHECK_THROWS_AS(pushforward_cx(bad), Error);
}

TEST_CASE("affine quadratic brane: I- coordinates (q2, q1 - i|q2|^2), I+ standard at q2 = 0") {
    MoritaModel m = make_affine_model();
    BraneBisection L = brane_from_potential(m, catalog_potential("quadratic", 2));
    Vec u(4);
    u << 0, 0, 0.5, 0;
    DegenerateGKData d = induced_structures(m, L, u);
    cplx q2(0.5, 0);
    CVec xi1 = dq(2, 1);
    CVec xi2 = dq(2, 0) - cplx(0, 1) * std::conj(q2) * dq(2, 1) - cplx(0, 1) * q2 * dqbar(2, 1);
    CHECK((d.Iminus.cast<cplx>().transpose() * xi1 - cplx(0, 1) * xi1).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((d.Iminus.cast<cplx>().transpose() * xi2 - cplx(0, 1) * xi2).cwiseAbs().maxCoeff() < 1e-12);
    u << 0.4, -0.3, 0, 0;
    CHECK((induced_structures(m, L, u).Iplus - oracle::jstd(2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dilogarithm values") {
    CHECK(dilog(0.0) == 0.0);
    CHECK(std::abs(dilog(-1.0) + M_PI * M_PI / 12) < 1e-13);
    // series and quadrature branches agree near the switch
    CHECK(std::abs(dilog(-0.49) - dilog_quadrature(-0.49)) < 1e-13);
    CHECK(std::abs(dilog(-0.51) - dilog_quadrature(-0.51)) < 1e-13);
    CHECK_THROWS_AS(dilog(0.5), Error);
}
