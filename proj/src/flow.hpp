#pragma once
#include <functional>
#include <optional>

#include "chart.hpp"
#include "gk.hpp"
#include "models.hpp"
#include "picard.hpp"

namespace gkpot {

// f_t is a PotentialFn whose evaluator reads t in [0, 1]
using TimeDependentPotential = PotentialFn;

struct IntegratorConfig {
    int steps = 100;             // RK4 steps over the unit interval; Simpson uses the same nodes
    bool jacobian_transport = true;
    double step_tol = 1e-7;      // step-halving estimate per unit time
    double quad_tol = 1e-6;      // Simpson against the half-resolution rule, relative
    void validate() const;
};

// value and Jacobian of a (possibly time-dependent) vector field
struct VectorField {
    int dim = 0;
    std::function<std::pair<Vec, Mat>(double t, const Vec& x)> eval;
    std::function<bool(const Vec&)> domain;
};

// bivector field on real coordinates; x are first-order real seeds, Q is row-major dim x dim
struct BivectorField {
    int dim = 0;
    std::function<void(std::span<const ad::T2> x, std::span<ad::T2> Q)> eval;
    Mat at(const Vec& x) const;
};

BivectorField constant_bivector(const Mat& Q);
// Q = sign * 4 Im(x d/dx ^ d/dy) on the affine base chart (x, y)
BivectorField affine_base_bivector(double sign = 1.0);
BivectorField zero_bivector(int dim);

// X_f = Q(df)
VectorField hamiltonian_field(const BivectorField& Q, const PotentialFn& f);

struct FlowTrajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Mat> jac;   // empty when transport is off
    double error_estimate = 0;
};

// fixed-step RK4 on [t0, t1] with optional variational system
FlowTrajectory integrate(const VectorField& V, const Vec& x0, double t0, double t1, int steps, bool transport);

FlowTrajectory hamiltonian_base_flow(const BivectorField& Q, const TimeDependentPotential& f, const Vec& z0,
                                     const IntegratorConfig& cfg, std::function<bool(const Vec&)> domain = {});

struct FlowConstruction {
    DegenerateGKData data;
    StarResiduals star;
    Vec psi1;
    Mat jac1;
    double step_error = 0, quad_error = 0;
};

// F = int_0^1 psi_t^*(d^c d f_t) dt and I+ = psi_1^* I-, with I- the chart complex structure
FlowConstruction flow_construction(const BivectorField& Q, const TimeDependentPotential& f, const Vec& z,
                                   const IntegratorConfig& cfg, std::function<bool(const Vec&)> domain = {});

// real 2-form d^c d f = -2i ddbar f in chart coordinates
Mat ddc_of(const PotentialFn& f, const Vec& x, double t = 0.0);

// one-parameter family (phi_t, F_t = int_0^t phi_s^* omega ds) of a time-independent symmetry (V, omega)
struct ExpPath {
    VectorField V;
    FormField omega;
    IntegratorConfig cfg;
    CourantAutomorphism at(double t) const;
};
ExpPath exp_courant(const VectorField& V, const FormField& omega, const IntegratorConfig& cfg);

// infinitesimal symmetry of d f: (Q(df), d^c d f)
ExpPath exp_courant_exact(const BivectorField& Q, const PotentialFn& f, const IntegratorConfig& cfg,
                          std::function<bool(const Vec&)> domain = {});

struct LieAlgebraResiduals {
    double type11 = 0;     // |w I + I^T w|
    double lie_deriv = 0;  // |L_V I - Q w|
};
LieAlgebraResiduals lie_algebra_residuals(const VectorField& V, const FormField& omega,
                                          const std::function<Mat(const Vec&)>& I, const BivectorField& Q,
                                          const Vec& x, double h = 1e-5);

// flow of V = (Im Omega)^-1 pi_+^* df for time t applied to a brane; f lives on the plus base
BraneBisection brane_flow_in_Z(const MoritaModel& m, const BraneBisection& L, const PotentialFn& f, double t,
                               const IntegratorConfig& cfg);
VectorField z_flow_field(const MoritaModel& m, const PotentialFn& f);

}  // namespace gkpot
