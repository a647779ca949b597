#pragma once
#include <functional>

#include "chart.hpp"
#include "grid.hpp"

namespace gkpot {

// (I+, I-, Q, F) at a point; the gauge beta = 0 is fixed
struct DegenerateGKData {
    Mat Iplus, Iminus, Q, F;
};

struct StarResiduals {
    double star1 = 0, star2 = 0;
};

struct MetricB {
    Mat g, b;
    double g_sym_defect = 0, b_antisym_defect = 0;
};

struct GKReport {
    double star1_residual = 0, star2_residual = 0;
    double min_metric_eigenvalue = 0;
    bool degenerate = false;
    Mat g, b;
};

struct HoloPoisson {
    CMat sigma;
    double type_defect = 0;
};

struct SymAntisym {
    Mat S, A;
};

StarResiduals star_residuals(const DegenerateGKData& d);
MetricB metric_b_from_data(const DegenerateGKData& d);
Mat hitchin_poisson(const Mat& g, const Mat& Iplus, const Mat& Iminus);
HoloPoisson holomorphic_poisson(const Mat& I, const Mat& Q);
Mat poisson_from_sigma(const CMat& sigma);  // Q = -4 Im(sigma)
SymAntisym split_sym_antisym(const Mat& F, const Mat& I);
double min_sym_eigenvalue(const Mat& S);
GKReport analyze(const DegenerateGKData& d);

using DataField = std::function<DegenerateGKData(const Vec&)>;

struct Ray {
    Vec origin, direction;
    double t0 = 0, t1 = 1;
    int samples = 64;
};

struct LocusRecord {
    Vec coords;
    double min_eig = 0, star1 = 0, star2 = 0;
    bool ok = false;
    std::string error;
};

struct RayBoundary {
    int ray = 0;
    std::vector<double> params;  // ray parameters where min_eig changes sign
    std::vector<Vec> points;
    int failures = 0;
};

struct LocusReport {
    std::vector<LocusRecord> records;
    std::vector<RayBoundary> boundaries;
    int failures = 0;
};

LocusRecord evaluate_point(const DataField& field, const Vec& u);
RayBoundary scan_ray(const DataField& field, const Ray& ray, int index = 0, double xtol = 1e-6);
LocusReport positivity_scan(const DataField& field, const std::vector<Vec>& points, const std::vector<Ray>& rays,
                            int threads = 1);

}  // namespace gkpot
