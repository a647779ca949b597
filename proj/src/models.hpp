#pragma once
#include <functional>
#include <optional>

#include "chart.hpp"
#include "dirac.hpp"
#include "gk.hpp"

namespace gkpot {

// Value and real Jacobian of a chart map.
struct MapEval {
    Vec value;
    Mat jac;
};

using HoloMap = std::function<void(std::span<const ad::T2> z, std::span<ad::T2> w)>;
using FormField = std::function<Mat(const Vec&)>;
using ChartMap = std::function<MapEval(const Vec&)>;

enum class ModelKind { cotangent, pair, affine };
const char* to_string(ModelKind k);

// Darboux coordinates on Z are (p_1..p_n, q_1..q_n), Omega_0 = sum dp_k ^ dq_k.
struct MoritaModel {
    ModelKind kind = ModelKind::affine;
    int n = 0;  // complex dimension of each base
    HoloMap s_map, t_map;
    // holomorphic Poisson structure of the minus base in its chart coordinates
    std::function<CMat(const Vec&)> sigma_minus;
    // closed real 2-form on the plus base, pulled back by the unrelabeled t_map
    FormField plus_twist;
    // diffeomorphism of the plus base applied after t_map
    ChartMap plus_relabel;
    std::function<bool(const CVec&)> domain;

    int darboux_dim() const { return 2 * n; }
};

struct BranePoint {
    CVec z;      // Darboux point
    Mat lambda;  // real Jacobian d(Re z, Im z)/du, size 4n x 2n
};

struct BraneBisection {
    int n = 0;
    std::string description;
    std::function<BranePoint(const Vec&)> eval;
    std::optional<PotentialFn> potential;
};

Mat omega0_re(int n);
Mat omega0_im(int n);
Mat darboux_complex_structure(const MoritaModel& m, const CVec& z);

MapEval eval_holo_map(const HoloMap& f, int in_dim, int out_dim, const CVec& z);
MapEval project_minus(const MoritaModel& m, const CVec& z);
MapEval project_plus(const MoritaModel& m, const CVec& z);
Mat omega_re_at(const MoritaModel& m, const CVec& z);

MoritaModel make_cotangent_model(int n, FormField omega_twist = {});
MoritaModel make_pair_model(const CMat& omega_plus, const CMat& omega_minus);
MoritaModel make_affine_model();

// pair model internals: linear holomorphic Darboux coordinates of a constant holomorphic symplectic form
struct LinearDarboux {
    Mat I;      // complex structure (Im Omega)^-1 Re Omega
    CMat q, p;  // rows are complex covectors with Omega = dp ^ dq
};
LinearDarboux linear_darboux(const CMat& omega);
BraneBisection pair_diagonal_brane(const CMat& omega_plus, const CMat& omega_minus);

double closedness_residual(const FormField& F, const Vec& u, double h = 1e-4);

// affine groupoid in (a, b, x, y) coordinates
CVec affine_to_darboux(const CVec& abxy);
CVec darboux_to_affine(const CVec& z);
CVec affine_multiply(const CVec& g1, const CVec& g2);
double multiplicativity_residual(const CVec& g1, const CVec& g2);
double composability_defect(const CVec& g1, const CVec& g2);

BraneBisection brane_from_potential(const MoritaModel& m, const PotentialFn& K);
Mat potential_form(const PotentialFn& K, const Vec& u);  // i ddbar K

DegenerateGKData induced_structures(const MoritaModel& m, const BraneBisection& L, const Vec& u);
// Q recomputed from (Im Omega)^-1 pushed through the plus projection; cross-check only
Mat induced_poisson_via_plus(const MoritaModel& m, const BraneBisection& L, const Vec& u);
double lagrangian_defect(const MoritaModel& m, const BraneBisection& L, const Vec& u);

// K(z) = -2 int Im(eta) along the segment from base
PotentialFn potential_from_brane(const MoritaModel& m, const BraneBisection& L, const Vec& base);
double eta_closedness(const BraneBisection& L, const Vec& u);

// (1,0)-form field alpha on brane coordinates: value and real Jacobian rows (Re a_k, Im a_k)
struct OneFormField {
    std::function<std::pair<CVec, Mat>(const Vec&)> eval;
};
OneFormField one_form_from_potential(const PotentialFn& f);  // alpha = -i d f
BraneBisection deform_brane(const BraneBisection& L, const OneFormField& alpha);

struct TransversalityReport {
    double angle_minus = 0, angle_plus = 0;  // smallest principal angles of TL against ker(ds), ker(dt)
    int rank_minus = 0, rank_plus = 0;
    bool transverse = false;
    bool f_invertible = false;       // I(TL) and TL meet trivially
    bool ipm_invertible = false;        // I(TL) and the average kernel meet trivially, so I+ + I- is invertible
    bool metric_nondegenerate = false;  // both of the above, g = -F(I+ + I-)/2
    double f_cond = 0, ipm_cond = 0;
};
TransversalityReport brane_transversality(const MoritaModel& m, const BraneBisection& L, const Vec& u);

Mat closed_form_affine_metric(cplx q1, cplx q2, double alpha, double beta);

// Nijenhuis tensor of a field of endomorphisms via central differences
double nijenhuis_residual(const std::function<Mat(const Vec&)>& I, const Vec& u, double h = 1e-5);

double smallest_principal_angle(const Mat& a, const Mat& b);

}  // namespace gkpot
