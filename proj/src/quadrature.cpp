#include "psifrac/quadrature.hpp"
#include "psifrac/errors.hpp"

#include <cmath>
#include <algorithm>

namespace psifrac {

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1,1], symmetric half stored.
constexpr double kNodes[8] = {
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.9372733924007060,
    0.9879925180204854,
};
constexpr double kWeights[8] = {
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
};

double gl15(const ScalarFn& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = kWeights[0] * f(c);
    for (int i = 1; i < 8; ++i) {
        const double d = h * kNodes[i];
        acc += kWeights[i] * (f(c - d) + f(c + d));
    }
    return acc * h;
}

// Recursive bisection. Panels that hit the depth cap contribute their defect to
// `unresolved` instead of aborting; the caller decides whether the total is fatal.
// The panel counter bounds total work so that an integrand dominated by noise
// raises an error instead of exploding the refinement tree.
double refine(const ScalarFn& f, double a, double b, double whole, double tol,
              int depth, const QuadOptions& opts, double& unresolved, long& panels)
{
    if (++panels > 1000000)
        throw QuadratureError("adaptive quadrature exceeded its panel budget");
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) // interval narrower than double spacing
        return whole;
    const double left = gl15(f, a, m);
    const double right = gl15(f, m, b);
    const double sum = left + right;
    const double defect = std::abs(sum - whole);
    if (defect <= tol)
        return sum;
    if (depth >= opts.max_depth) {
        unresolved += defect;
        return sum;
    }
    return refine(f, a, m, left, 0.5 * tol, depth + 1, opts, unresolved, panels)
         + refine(f, m, b, right, 0.5 * tol, depth + 1, opts, unresolved, panels);
}

} // namespace

double integrate_with_breaks(const ScalarFn& f, const std::vector<double>& breaks,
                             const QuadOptions& opts)
{
    if (breaks.size() < 2)
        throw DomainError("integrate_with_breaks: need at least two break points");
    for (size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] >= breaks[i - 1]))
            throw DomainError("integrate_with_breaks: break points must be ascending");

    // First pass fixes the tolerance scale; panels then refine against it.
    std::vector<double> rough(breaks.size() - 1);
    double scale = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i] == breaks[i + 1]) { rough[i] = 0.0; continue; }
        rough[i] = gl15(f, breaks[i], breaks[i + 1]);
        scale += std::abs(rough[i]);
    }
    const double tol_total = std::max(opts.abs_tol, opts.rel_tol * scale);

    double acc = 0.0;
    double unresolved = 0.0;
    long panels = 0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i] == breaks[i + 1]) continue;
        const double share =
            scale > 0.0 ? std::max(std::abs(rough[i]) / scale, 1e-3) : 1.0;
        acc += refine(f, breaks[i], breaks[i + 1], rough[i], tol_total * share, 0,
                      opts, unresolved, panels);
    }
    if (!std::isfinite(acc))
        throw QuadratureError("adaptive quadrature produced a non-finite value");
    if (unresolved > 5.0 * std::max(tol_total, opts.rel_tol * std::abs(acc)))
        throw QuadratureError("adaptive quadrature did not converge to tolerance");
    return acc;
}

double integrate(const ScalarFn& f, double lo, double hi, const QuadOptions& opts)
{
    return integrate_with_breaks(f, {lo, hi}, opts);
}

FixedRule composite_gauss_rule(double lo, double hi, int panels)
{
    if (!(hi > lo) || panels < 1)
        throw DomainError("composite_gauss_rule: need hi > lo and panels >= 1");
    FixedRule rule;
    rule.nodes.reserve(15 * panels);
    rule.weights.reserve(15 * panels);
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * width;
        const double h = 0.5 * width;
        for (int i = 7; i >= 1; --i) {
            rule.nodes.push_back(c - h * kNodes[i]);
            rule.weights.push_back(h * kWeights[i]);
        }
        rule.nodes.push_back(c);
        rule.weights.push_back(h * kWeights[0]);
        for (int i = 1; i <= 7; ++i) {
            rule.nodes.push_back(c + h * kNodes[i]);
            rule.weights.push_back(h * kWeights[i]);
        }
    }
    return rule;
}

} // namespace psifrac
