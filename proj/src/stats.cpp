#include "icl/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace icl {

namespace {

double gammln(double xx) {
    static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                  24.01409824083091,     -1.231739572450155,
                                  0.1208650973866179e-2, -0.5395239384953e-5};
    double x = xx, y = xx;
    double tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    double ser = 1.000000000190015;
    for (int j = 0; j <= 5; ++j) ser += cof[j] / ++y;
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

// continued fraction for the incomplete beta (Lentz's method)
double betacf(double a, double b, double x) {
    const double FPMIN = 1e-30;
    const double EPS = 3e-14;
    const int MAXIT = 1000;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < FPMIN) d = FPMIN;
    d = 1.0 / d;
    double h = d;
    int m = 1;
    for (; m <= MAXIT; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < FPMIN) d = FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < FPMIN) c = FPMIN;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < FPMIN) d = FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < FPMIN) c = FPMIN;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < EPS) break;
    }
    if (m > MAXIT) throw std::runtime_error("betacf did not converge");
    return h;
}

}  // namespace

double betai(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw std::runtime_error("betai needs x in [0, 1]");
    double bt = 0.0;
    if (x != 0.0 && x != 1.0)
        bt = std::exp(gammln(a + b) - gammln(a) - gammln(b) + a * std::log(x) +
                      b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
    if (df < 1) throw std::runtime_error("t distribution needs df >= 1");
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) throw std::runtime_error("t statistic is NaN");
    return betai(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::runtime_error("paired t-test needs equal-length vectors");
    const int n = (int)a.size();
    if (n < 2) throw std::runtime_error("paired t-test needs at least two pairs");

    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double dev = (a[i] - b[i]) - mean;
        ss += dev * dev;
    }
    double sd = std::sqrt(ss / (n - 1));

    TTestResult r;
    r.df = n - 1;
    if (sd == 0.0) {
        if (mean == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    r.t = mean / (sd / std::sqrt((double)n));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

CriticalVerdict pct_verdict(double acc_keep_only, double acc_zero_shot, double acc_standard,
                            double acc_without, double delta_pp) {
    CriticalVerdict v;
    v.delta = delta_pp;
    v.gain_over_zero_shot = (acc_keep_only - acc_zero_shot) * 100.0;
    v.loss_under_removal = (acc_standard - acc_without) * 100.0;
    v.gain_leg = v.gain_over_zero_shot >= delta_pp;
    v.loss_leg = v.loss_under_removal >= delta_pp;
    v.critical = v.gain_leg && v.loss_leg;
    return v;
}

}  // namespace icl
