#pragma once
#include <optional>

#include "chart.hpp"
#include "models.hpp"

namespace gkpot {

struct CourantAutomorphism {
    int dim = 0;
    ChartMap phi;
    FormField f2;
    std::optional<ChartMap> inverse_phi;
};

CourantAutomorphism identity_automorphism(int dim);
CourantAutomorphism b_field(int dim, FormField F);
CourantAutomorphism affine_automorphism(const Mat& A, const Vec& c, FormField F = {});

// (phi1 o phi2, phi2^* F1 + F2)
CourantAutomorphism compose(const CourantAutomorphism& a1, const CourantAutomorphism& a2);
CourantAutomorphism inverse(const CourantAutomorphism& a);

struct MembershipReport {
    double compat = 0;       // |F I + I^T F + F Q F|
    double pushforward = 0;  // |D phi (I + Q F) - I(phi) D phi|
    double square = 0;       // |(I + Q F)^2 + 1|
    double q_preserved = 0;  // |D phi Q D phi^T - Q(phi)|
    double closedness = 0;
    double worst() const;
};

using EndoField = std::function<Mat(const Vec&)>;
MembershipReport check_membership(const CourantAutomorphism& a, const EndoField& I,
                                  const std::function<Mat(const Vec&)>& Q, const std::vector<Vec>& points);

// distance between two automorphisms at a point (phi values, Jacobians, forms)
double automorphism_distance(const CourantAutomorphism& a, const CourantAutomorphism& b, const Vec& x);

// new model has Omega + pi_+^* F with pi_+ relabeled by phi
std::pair<MoritaModel, BraneBisection> act_on_gk(const CourantAutomorphism& a, const MoritaModel& m,
                                                 const BraneBisection& L);

}  // namespace gkpot
