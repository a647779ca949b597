#pragma once
#include "chart.hpp"

namespace gkpot {

struct GenTangentVector {
    CVec x;   // tangent part
    CVec xi;  // form part
};

// columns span L inside T_C + T*_C; rows ordered (tangent; form)
struct DiracSubspace {
    CMat basis;
    int dim() const { return static_cast<int>(basis.rows()) / 2; }
};

struct GCStructure {
    Mat j;
};

Mat pairing_matrix(int d);
cplx pairing(const GenTangentVector& u, const GenTangentVector& v);
double isotropy_defect(const DiracSubspace& L);

// column space helpers (relative singular value threshold)
CMat orthonormal_basis(const CMat& a, double rel = 1e-10);
CMat null_space(const CMat& a, double rel = 1e-10);
int numerical_rank(const CMat& a, double rel = 1e-10);

DiracSubspace graph_two_form(const CMat& B);
DiracSubspace tangent_space(int d);
DiracSubspace scale_dirac(cplx lambda, const DiracSubspace& L);
DiracSubspace sum_dirac(const DiracSubspace& L1, const DiracSubspace& L2);
DiracSubspace gauge(const CMat& B, const DiracSubspace& L);
DiracSubspace conjugate(const DiracSubspace& L);
DiracSubspace intersect(const DiracSubspace& L1, const DiracSubspace& L2);
int intersection_dim(const CMat& a, const CMat& b);

// (2,0) type defect of sigma with respect to I
double type20_defect(const Mat& I, const CMat& sigma);
DiracSubspace build_L_sigma(const Mat& I, const CMat& sigma);

// L_A = Gamma_{-iF}, L_B = e^{iF}(2i conj(L_{sigma_-}))
DiracSubspace build_LA(const Mat& F);
DiracSubspace build_LB(const Mat& F, const Mat& Iminus, const CMat& sigma_minus);

struct GCPair {
    GCStructure JA;
    GCStructure JB;
};
GCPair build_gc_pair(const Mat& g, const Mat& Iplus, const Mat& Iminus, const Mat& b);
Mat gk_metric_operator(const GCPair& p);  // G = -JA JB
double gc_defect(const GCStructure& J);    // max of |J^2 + 1| and |J^T P J - P|

struct Bihermitian {
    Mat g, b, Iplus, Iminus;
};
Bihermitian extract_bihermitian(const GCStructure& JA, const GCStructure& JB);

struct GKConditionsReport {
    int dim_LA_cap_conj = -1;
    int dim_LB_cap_conj = -1;
    bool cond1 = false;
    bool plus_transverse = false, minus_transverse = false;
    bool plus_splits = false, minus_splits = false;
    bool cond2 = false;
    int dim_intersection = 0;
    double min_pairing = 0;
    bool cond3 = false;
    bool degenerate = false;
    DiracSubspace L_sigma_plus, L_sigma_minus;
};
GKConditionsReport check_gk_conditions(const DiracSubspace& LA, const DiracSubspace& LB);

double subspace_distance(const DiracSubspace& L1, const DiracSubspace& L2);
double subspace_distance(const CMat& a, const CMat& b);

}  // namespace gkpot
