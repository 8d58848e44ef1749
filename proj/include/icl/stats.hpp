#pragma once

#include <vector>

namespace icl {

// Regularized incomplete beta I_x(a, b) via the standard continued fraction.
double betai(double a, double b, double x);

// Two-sided Student-t tail probability for df degrees of freedom.
double student_t_two_sided_p(double t, int df);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
};

// Paired t-test with sample (n-1) standard deviation. A zero-variance,
// zero-mean difference vector gives t = 0, p = 1; zero variance with a
// nonzero mean gives t = +/-inf, p = 0. Fewer than two pairs is an error.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct CriticalVerdict {
    double gain_over_zero_shot = 0.0;  // pp, keep-only minus empty context
    double loss_under_removal = 0.0;   // pp, full context minus full-minus-subset
    double delta = 10.0;               // margin, pp, inclusive
    bool gain_leg = false;
    bool loss_leg = false;
    bool critical = false;             // both legs hold
};

// Both-sided sufficiency test: keeping only the subset must beat the empty
// context by at least delta, and removing it from the full context must cost
// at least delta. Accuracies are fractions; delta is percentage points.
CriticalVerdict pct_verdict(double acc_keep_only, double acc_zero_shot, double acc_standard,
                            double acc_without, double delta_pp);

}  // namespace icl
