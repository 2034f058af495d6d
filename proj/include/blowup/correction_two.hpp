#pragma once
#include <complex>
#include <functional>
#include <vector>

#include "blowup/chebyshev.hpp"
#include "blowup/correction_one.hpp"
#include "blowup/scaling.hpp"

namespace blowup {

using cplx = std::complex<double>;

// c_{n,m}(a) = c.coeff(n, m) * a when linear, else constant in a
struct RecursionParams {
    double nu_tilde = 0.0;
    double eps_tilde = 0.0;
    AdmissibleFn c;
    bool linear_forcing = false;
    int N = 30;
    int degree = 128;
    void validate() const;
};

// One g_{n,m} on a in [0,1], stored in y with a = 1 - (1-y)^4:
// g = a^2 H0, g' = a H1, g'' = H2.
struct LevelEntry {
    ChebSeries<cplx> H0, H1, H2, dH2, ddH2;
    double sup[3] = {0.0, 0.0, 0.0};  // sup over nodes of |g|, |g'|, |g''|

    // k-th derivative, k <= 4 (k > 2 needs a < 1)
    cplx g(double a, int k = 0) const;
    // g, g', g'' at a = y_to_a(y) in one pass
    void g012(double y, double a, cplx out[3]) const;
    LevelEntry conj() const;
};

double a_to_y(double a);
double y_to_a(double y);

class CoefficientTable {
public:
    CoefficientTable() = default;
    explicit CoefficientTable(int N) : levels_(N + 1) {}
    int N() const { return static_cast<int>(levels_.size()) - 1; }
    bool has(int n, int m) const { return n >= 0 && n <= N() && m >= 0 && m <= n; }
    const LevelEntry& entry(int n, int m) const { return levels_[n][m]; }
    std::vector<LevelEntry>& level(int n) { return levels_[n]; }
    // 0 outside the triangle
    cplx g(int n, int m, double a, int k = 0) const { return has(n, m) ? levels_[n][m].g(a, k) : cplx{}; }

private:
    std::vector<std::vector<LevelEntry>> levels_;
};

// R_{n,m}(a) and R'_{n,m}(a)
std::pair<cplx, cplx> recursion_rhs(const CoefficientTable& table, int n, int m, const RecursionParams& rp, double a);

using RhsFn = std::function<std::pair<cplx, cplx>(double)>;
// k = n - 2m; solves the level ODE with zero data at a = 0
LevelEntry solve_level(int k, const RhsFn& rhs, double nu_tilde, int degree = 128);

struct GrowthReport {
    std::vector<double> level_max;  // max over m, k<=2 of sup |g^(k)_{n,m}|
    std::vector<double> roots;      // level_max^(1/n)
    double C0_root = 0.0;           // last root
    double C0_slope = 0.0;          // exp of log-slope fitted on n in [10, N]
    double C0 = 0.0;                // max root on [10, N], bounds every level there
    double drift = 0.0;             // spread of C0_slope refitted on [10, n], n in [20, N]
    double tail_bound = 0.0;        // (C0 eps)^(N+1) / (1 - C0 eps)
};

CoefficientTable build_table(const RecursionParams& rp);
GrowthReport growth_of(const CoefficientTable& t, double eps_tilde);

struct QSeries {
    int j = 0;
    RecursionParams rp;
    CoefficientTable table;
    GrowthReport growth;

    // d_a^l (t d_t)^k q(a, t)
    double eval(double a, double t, int l = 0, int k = 0) const;
    // forcing c(a, t)
    double forcing(double a, double t) const;
};

QSeries build_q(int j, const ScalingParams& p, const AdmissibleFn& c_j, int N = 30, int degree = 128);

struct SecondCorrection {
    ScalingParams params;
    FirstCorrection fc;
    QSeries q1, q2;
    double b1 = 0.1;  // bump width outside the cone
};

SecondCorrection build_second_correction(const ScalingParams& p, int N = 30);

double v2(const SecondCorrection& sc, double t, double r);
// d_r^l v2 for l <= 2
double v2_dr(const SecondCorrection& sc, double t, double r, int l);
double u2(const SecondCorrection& sc, double t, double r);
double u2_dr(const SecondCorrection& sc, double t, double r, int l);
// quintic smoothstep: 1 for x <= 1, 0 for x >= 1 + b1
double bump_B1(double x, double b1, int deriv = 0);
double extend_beyond_cone(const SecondCorrection& sc, double t, double r);
// d_r^l of the extension, l <= 2
double extend_dr(const SecondCorrection& sc, double t, double r, int l);
// u2 inside, extension outside
double u2_full(const SecondCorrection& sc, double t, double r);

}  // namespace blowup
