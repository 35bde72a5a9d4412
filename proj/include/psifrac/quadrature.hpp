#pragma once

#include <functional>
#include <vector>

namespace psifrac {

struct QuadOptions {
    double rel_tol = 1e-9;   // relative to the running global estimate
    double abs_tol = 1e-14;  // floor when the integral is near zero
    int max_depth = 48;      // bisection depth per panel
};

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Legendre (15-point panels, recursive bisection) over [lo, hi].
// Never evaluates f at panel endpoints, so integrable endpoint behaviour is fine.
double integrate(const ScalarFn& f, double lo, double hi, const QuadOptions& opts = {});

// Same, with caller-supplied initial panel boundaries (ascending, >= 2 entries).
// Useful when the integrand has a known peak or grading requirement.
double integrate_with_breaks(const ScalarFn& f, const std::vector<double>& breaks,
                             const QuadOptions& opts = {});

// Fixed composite rule: `panels` equal panels with the 15-point Gauss-Legendre
// nodes each, returned as (nodes, weights). No node lands on an endpoint. For
// integrands shared across many projections the fixed nodes let callers build
// the evaluation matrix once.
struct FixedRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
FixedRule composite_gauss_rule(double lo, double hi, int panels);

} // namespace psifrac
