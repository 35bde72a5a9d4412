#include "psifrac/psi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "psifrac/errors.hpp"
#include "psifrac/specfn.hpp"

namespace psifrac {

namespace {

double interval_scale(double a, double b) {
    return std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

PsiFunction::PsiFunction(Kind kind, double a, double b, std::vector<double> params,
                         ScalarFn fn, ScalarFn dfn)
    : kind_(kind), a_(a), b_(b), params_(std::move(params)),
      fn_(std::move(fn)), dfn_(std::move(dfn)) {
    ya_ = value(a_);
    yb_ = value(b_);
    if (!std::isfinite(ya_) || !std::isfinite(yb_) || !(yb_ > ya_))
        throw ConfigError("PsiFunction: psi must be finite and increasing across [a,b]");
}

PsiFunction PsiFunction::linear(double a, double b, double slope, double offset) {
    if (!(b > a))
        throw ConfigError("PsiFunction: require b > a");
    if (!(slope > 0.0))
        throw ConfigError("PsiFunction: linear slope must be positive");
    return PsiFunction(Kind::linear, a, b, {slope, offset}, nullptr, nullptr);
}

PsiFunction PsiFunction::power(double a, double b, double exponent) {
    if (!(b > a))
        throw ConfigError("PsiFunction: require b > a");
    if (!(exponent > 0.0))
        throw ConfigError("PsiFunction: power exponent must be positive");
    if (a < 0.0)
        throw ConfigError("PsiFunction: power clock needs a >= 0");
    if (a == 0.0 && exponent < 1.0)
        throw ConfigError("PsiFunction: power clock with exponent < 1 has unbounded derivative at a = 0");
    return PsiFunction(Kind::power, a, b, {exponent}, nullptr, nullptr);
}

PsiFunction PsiFunction::exponential(double a, double b, double rate) {
    if (!(b > a))
        throw ConfigError("PsiFunction: require b > a");
    if (!(rate > 0.0))
        throw ConfigError("PsiFunction: exponential rate must be positive");
    return PsiFunction(Kind::exponential, a, b, {rate}, nullptr, nullptr);
}

PsiFunction PsiFunction::logarithmic(double a, double b) {
    if (!(b > a))
        throw ConfigError("PsiFunction: require b > a");
    if (!(a > 0.0))
        throw ConfigError("PsiFunction: logarithmic clock needs a > 0");
    return PsiFunction(Kind::logarithmic, a, b, {}, nullptr, nullptr);
}

PsiFunction PsiFunction::custom(double a, double b, ScalarFn value, ScalarFn derivative) {
    if (!(b > a))
        throw ConfigError("PsiFunction: require b > a");
    if (!value || !derivative)
        throw ConfigError("PsiFunction: custom clock needs both psi and psi' callables");
    // Monotonicity certificate: sample psi' on 1000 nodes; any nonpositive slope
    // (beyond a vanishing one at the left endpoint) rejects the clock.
    const int nodes = 1000;
    double prev = value(a);
    for (int i = 0; i < nodes; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / (nodes - 1);
        const double d = derivative(t);
        const double v = value(t);
        if (!std::isfinite(d) || !std::isfinite(v))
            throw ConfigError("PsiFunction: custom clock not evaluable on the certificate grid");
        if (!(d > 0.0) && !(i == 0 && d == 0.0))
            throw ConfigError("PsiFunction: custom clock fails the monotonicity certificate (psi' <= 0)");
        if (i > 0 && !(v > prev))
            throw ConfigError("PsiFunction: custom clock fails the monotonicity certificate (psi not increasing)");
        prev = v;
    }
    return PsiFunction(Kind::custom, a, b, {}, std::move(value), std::move(derivative));
}

double PsiFunction::check_domain(double t) const {
    const double slack = 1e-12 * interval_scale(a_, b_);
    if (!(t >= a_ - slack) || !(t <= b_ + slack))
        throw DomainError("PsiFunction: argument outside [a,b]");
    return std::min(std::max(t, a_), b_);
}

double PsiFunction::value(double t) const {
    t = check_domain(t);
    switch (kind_) {
    case Kind::linear:      return params_[0] * t + params_[1];
    case Kind::power:       return std::pow(t, params_[0]);
    case Kind::exponential: return std::exp(params_[0] * t);
    case Kind::logarithmic: return std::log(t);
    case Kind::custom:      return fn_(t);
    }
    return 0.0;
}

double PsiFunction::derivative(double t) const {
    t = check_domain(t);
    switch (kind_) {
    case Kind::linear:      return params_[0];
    case Kind::power:       return params_[0] * std::pow(t, params_[0] - 1.0);
    case Kind::exponential: return params_[0] * std::exp(params_[0] * t);
    case Kind::logarithmic: return 1.0 / t;
    case Kind::custom:      return dfn_(t);
    }
    return 0.0;
}

double PsiFunction::inverse(double y) const {
    y = std::min(std::max(y, ya_), yb_);
    switch (kind_) {
    case Kind::linear:      return (y - params_[1]) / params_[0];
    case Kind::power:       return std::pow(y, 1.0 / params_[0]);
    case Kind::exponential: return std::log(y) / params_[0];
    case Kind::logarithmic: return std::exp(y);
    case Kind::custom:      break;
    }
    // Bisection on the certified monotone clock.
    double lo = a_, hi = b_;
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * interval_scale(a_, b_);
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        (fn_(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> psi_eval(const PsiFunction& psi, double t) {
    return {psi.value(t), psi.derivative(t)};
}

FracOrder::FracOrder(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw UnsupportedRangeError(
            "FracOrder: alpha must lie in (1/2, 1]; the singular kernel is square integrable only there");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw ConfigError("FracOrder: beta must lie in [0, 1]");
    gamma = alpha + beta * (1.0 - alpha);
}

namespace {

std::vector<double> graded_breaks(double total) {
    static const double grading[] = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.6, 1.0};
    std::vector<double> breaks;
    breaks.reserve(std::size(grading));
    for (double c : grading)
        breaks.push_back(total * c);
    return breaks;
}

// Graded layout on [0, total] with extra interior points merged in (sorted,
// deduplicated at clock resolution so no panel degenerates).
std::vector<double> merged_breaks(double total, const std::vector<double>& extra) {
    if (extra.empty())
        return graded_breaks(total);
    std::vector<double> pool = graded_breaks(total);
    pool.insert(pool.end(), extra.begin(), extra.end());
    std::sort(pool.begin(), pool.end());
    const double tol = 1e-12 * total;
    std::vector<double> breaks;
    breaks.reserve(pool.size() + 1);
    breaks.push_back(0.0);
    for (double v : pool)
        if (v > breaks.back() + tol && v < total - tol)
            breaks.push_back(v);
    breaks.push_back(total);
    return breaks;
}

} // namespace

double weighted_kernel_integral(const PsiFunction& psi, double mu, const ScalarFn& f,
                                double t, const QuadOptions& opts) {
    return weighted_kernel_integral(psi, mu, f, t, std::vector<double>{}, opts);
}

double weighted_kernel_integral(const PsiFunction& psi, double mu, const ScalarFn& f,
                                double t, const std::vector<double>& s_breaks,
                                const QuadOptions& opts) {
    if (!(mu > 0.0))
        throw DomainError("weighted_kernel_integral: mu must be positive");
    const double span = psi.span(t, psi.a()); // domain-checks t
    if (span <= 0.0)
        return 0.0;
    const double ya = psi.value(psi.a());
    const double yt = psi.value(t);
    const double inv_mu = 1.0 / mu;
    // Below this distance from psi(a) the clock cannot resolve s > a, so the
    // integrand is treated as zero; any admissible endpoint singularity of f
    // (weaker than Psi^{-1/2}) contributes O(sqrt(cliff)) there.
    const double cliff = 4.0 * std::numeric_limits<double>::epsilon()
                       * std::max({1.0, std::abs(ya), std::abs(yt)});

    const double mid = ya + 0.5 * span;
    if (!(mid > ya) || !(mid < yt)) {
        // Interval at clock resolution: single substitution, guard the left end.
        auto whole = [&](double w) {
            const double y = yt - std::pow(w, inv_mu);
            if (!(y - ya > cliff))
                return 0.0;
            return f(psi.inverse(y));
        };
        return integrate_with_breaks(whole, graded_breaks(std::pow(span, mu)), opts) / mu;
    }

    // Caller-supplied breakpoints (control kinks and the like), mapped through
    // the substitution of whichever piece they land in.
    std::vector<double> right_extra;
    std::vector<double> left_extra;
    for (double s : s_breaks) {
        if (!(s > psi.a() && s < t))
            continue;
        const double y = psi.value(s);
        if (y > mid)
            right_extra.push_back(std::pow(yt - y, mu));
        else if (y - ya > cliff)
            left_extra.push_back(std::sqrt(y - ya));
    }

    // Split at the psi-midpoint and absorb one endpoint per piece.
    // Right piece [m,t]: w = (psi(t)-psi(s))^mu removes the kernel weight exactly.
    auto right = [&](double w) {
        return f(psi.inverse(yt - std::pow(w, inv_mu)));
    };
    const double right_total = std::pow(0.5 * span, mu);
    const double right_part =
        integrate_with_breaks(right, merged_breaks(right_total, right_extra), opts) / mu;

    // Left piece [a,m]: u = sqrt(psi(s)-psi(a)) tames any integrable endpoint
    // singularity of f up to order Psi^{-1/2}; the kernel is smooth here and is
    // computed in difference space (u*u <= span/2, so span - u*u is exact) to
    // avoid cancellation noise when span is tiny against |psi|.
    auto left = [&](double u) {
        const double d = u * u;
        if (!(d > cliff))
            return 0.0;
        return 2.0 * u * std::pow(span - d, mu - 1.0) * f(psi.inverse(ya + d));
    };
    const double left_total = std::sqrt(0.5 * span);
    const double left_part =
        integrate_with_breaks(left, merged_breaks(left_total, left_extra), opts);

    return right_part + left_part;
}

double psi_frac_integral(const PsiFunction& psi, double alpha, const ScalarFn& f,
                         double t, const QuadOptions& opts) {
    if (!(alpha > 0.0))
        throw DomainError("psi_frac_integral: alpha must be positive");
    return rgamma(alpha) * weighted_kernel_integral(psi, alpha, f, t, opts);
}

namespace {

// d/dpsi of q at psi-coordinate ys: central difference with step h, falling back
// to a second-order one-sided stencil when ys is within h of either endpoint.
double psi_derivative_fd(const PsiFunction& psi, const ScalarFn& q, double ys,
                         double h, double ya, double yb) {
    auto qy = [&](double y) { return q(psi.inverse(y)); };
    if (ys - h >= ya && ys + h <= yb)
        return (qy(ys + h) - qy(ys - h)) / (2.0 * h);
    if (ys + h > yb) {
        if (!(ys - 2.0 * h >= ya))
            throw QuadratureError("psi_hilfer_derivative: finite-difference step underflow");
        return (3.0 * qy(ys) - 4.0 * qy(ys - h) + qy(ys - 2.0 * h)) / (2.0 * h);
    }
    if (!(ys + 2.0 * h <= yb))
        throw QuadratureError("psi_hilfer_derivative: finite-difference step underflow");
    return (-3.0 * qy(ys) + 4.0 * qy(ys + h) - qy(ys + 2.0 * h)) / (2.0 * h);
}

} // namespace

double psi_hilfer_derivative(const PsiFunction& psi, const FracOrder& order,
                             const ScalarFn& f, double t) {
    const double a = psi.a();
    if (!(t > a) || !(t <= psi.b()))
        throw DomainError("psi_hilfer_derivative: t must lie in (a,b]");

    const double sigma = (1.0 - order.beta) * (1.0 - order.alpha); // inner order, 1 - gamma
    const double mu = order.beta * (1.0 - order.alpha);            // outer order, gamma - alpha
    const double fa = f(a);
    const bool split = std::isfinite(fa);

    const double ya = psi.value(a);
    const double yb = psi.value(psi.b());
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (yb - ya);
    const double yt = psi.value(t);

    if (split) {
        // f - f(a) vanishes at a, so the outer integral commutes past the
        // derivative and the composition collapses to d/dpsi I^{1-alpha;psi}.
        // The constant part f(a) contributes the closed-form singular term.
        const double nu = 1.0 - order.alpha; // = sigma + mu
        QuadOptions tight;
        tight.rel_tol = 1e-11;
        tight.abs_tol = 1e-14;
        auto shifted = [&](double s) { return f(s) - fa; };
        auto q = [&](double tau) -> double {
            if (nu == 0.0)
                return shifted(tau);
            return rgamma(nu) * weighted_kernel_integral(psi, nu, shifted, tau, tight);
        };
        const double deriv = psi_derivative_fd(psi, q, yt, h, ya, yb);
        const double sing = sigma > 0.0
            ? fa * rgamma(1.0 - order.alpha) * std::pow(psi.span(t, a), -order.alpha)
            : 0.0;
        return deriv + sing;
    }

    // f(a) is not finite: evaluate the literal composition. The outer tolerance
    // gets an absolute floor matched to the finite-difference jitter of the
    // inner quadrature so that noise does not drive endless refinement.
    QuadOptions inner;
    inner.rel_tol = 1e-10;
    inner.abs_tol = 1e-13;

    auto g_reg = [&](double tau) -> double {
        if (sigma == 0.0)
            return f(tau);
        return rgamma(sigma) * weighted_kernel_integral(psi, sigma, f, tau, inner);
    };
    auto h_reg = [&](double s) -> double {
        return psi_derivative_fd(psi, g_reg, psi.value(s), h, ya, yb);
    };

    if (mu == 0.0)
        return h_reg(t);

    const double g_scale = std::abs(g_reg(t));
    const double g_noise = sigma == 0.0
        ? std::numeric_limits<double>::epsilon() * g_scale
        : inner.rel_tol * g_scale + inner.abs_tol;
    QuadOptions outer;
    outer.rel_tol = 1e-8;
    outer.abs_tol = std::max(1e-12, 3.0 * (g_noise / h) * std::pow(psi.span(t, a), mu));
    return rgamma(mu) * weighted_kernel_integral(psi, mu, h_reg, t, outer);
}

double kernel_l2_norm(const PsiFunction& psi, double alpha, double t) {
    if (!(alpha > 0.5))
        throw UnsupportedRangeError(
            "kernel_l2_norm: the squared kernel is integrable only for alpha > 1/2");
    if (!(t > psi.a()) || !(t <= psi.b()))
        throw DomainError("kernel_l2_norm: t must lie in (a,b]");
    auto weight = [&](double s) { return psi.derivative(s); };
    return std::sqrt(weighted_kernel_integral(psi, 2.0 * alpha - 1.0, weight, t));
}

} // namespace psifrac
