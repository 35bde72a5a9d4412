#include "psifrac/specfn.hpp"
#include "psifrac/errors.hpp"
#include "psifrac/quadrature.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <sstream>
#include <vector>

namespace psifrac {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeriesWindow = 5.0;   // attempt the series for |z| <= this
constexpr double kGuardRatio = 1e4;     // max|term|/|sum| allowed before the series is distrusted

// Kahan-Neumaier compensated accumulator.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double x)
    {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// sin(pi*x) with argument reduction; exact zeros at integers.
double sinpi(double x)
{
    double k = std::floor(x);
    double f = x - k;
    double s = std::sin(kPi * f);
    if (std::fmod(k, 2.0) != 0.0)
        s = -s;
    return s;
}

struct SeriesResult {
    double value = 0.0;
    double max_term = 0.0;
    bool converged = false;
};

// sum_k c_k z^k / Gamma(alpha k + beta) with c_k = 1 (value) or k+1 (derivative series).
SeriesResult ml_series(double alpha, double beta, double z, bool deriv_weights)
{
    SeriesResult out;
    if (z == 0.0) {
        out.value = rgamma(beta);
        out.max_term = std::abs(out.value);
        out.converged = true;
        return out;
    }
    const double lz = std::log(std::abs(z));
    CompensatedSum sum;
    int consec = 0;
    const int kmax = z > 0.0 ? 40000 : 600;
    for (int k = 0; k <= kmax; ++k) {
        const double idx = alpha * k + beta;
        double lt = k * lz - std::lgamma(idx);
        if (deriv_weights)
            lt += std::log1p(static_cast<double>(k));
        if (lt > 709.0) {
            out.value = std::numeric_limits<double>::infinity();
            out.max_term = out.value;
            out.converged = true; // honest overflow of a positive-term series
            return out;
        }
        double t = std::exp(lt);
        if (z < 0.0 && (k & 1))
            t = -t;
        sum.add(t);
        out.max_term = std::max(out.max_term, std::abs(t));
        if (std::abs(t) < 1e-18 * (std::abs(sum.value()) + 1e-300)) {
            if (++consec >= 3) {
                out.converged = true;
                break;
            }
        } else {
            consec = 0;
        }
    }
    out.value = sum.value();
    return out;
}

// Real-axis integral representation of E_{a,b}(-x), x > 0, 0 < a < 1, 0 < b < 1+a:
//   E_{a,b}(-x) = (1/(pi a)) \int_0^inf r^{(1-b)/a} e^{-r^{1/a}}
//                  [ r sin(pi(1-b)) + x sin(pi(1-b+a)) ] / ((r + x cos(pi a))^2 + x^2 sin^2(pi a)) dr
double ml_integral(double a, double b, double x)
{
    const double s1 = sinpi(1.0 - b);
    const double s2 = sinpi(1.0 - b + a);
    const double cpa = std::cos(kPi * a);
    const double spa2 = 1.0 - cpa * cpa;
    const double pre_exp = (1.0 - b) / a;
    auto K = [=](double r) {
        const double num = r * s1 + x * s2;
        const double u = r + x * cpa;
        const double den = u * u + x * x * spa2;
        return std::pow(r, pre_exp) * std::exp(-std::pow(r, 1.0 / a)) * num / den;
    };
    const double rmax = std::pow(709.0, a);
    std::vector<double> breaks{0.0};
    const double r0 = cpa < 0.0 ? -x * cpa : 0.0; // denominator minimum (peak)
    for (double p : {0.25 * r0, 0.5 * r0, r0, 1.5 * r0, 2.0 * r0, 4.0 * r0, 1.0, 4.0, 16.0, 64.0})
        if (p > 0.0 && p < rmax)
            breaks.push_back(p);
    breaks.push_back(rmax);
    std::sort(breaks.begin(), breaks.end());
    QuadOptions opts;
    opts.rel_tol = 2e-13;
    opts.abs_tol = 1e-305;
    return integrate_with_breaks(K, breaks, opts) / (kPi * a);
}

// x-derivative counterpart for beta = alpha: dE_{a,a}/dz at z = -x equals
//   (1/(pi a)) \int_0^inf r^{(1-a)/a + 1} e^{-r^{1/a}} sin(pi a) * (2r cos(pi a) + 2x) / den^2 dr
double ml_deriv_integral(double a, double x)
{
    const double spa = sinpi(a);
    const double cpa = std::cos(kPi * a);
    const double spa2 = 1.0 - cpa * cpa;
    const double pre_exp = (1.0 - a) / a + 1.0;
    auto K = [=](double r) {
        const double u = r + x * cpa;
        const double den = u * u + x * x * spa2;
        return std::pow(r, pre_exp) * std::exp(-std::pow(r, 1.0 / a)) * spa
               * (2.0 * r * cpa + 2.0 * x) / (den * den);
    };
    const double rmax = std::pow(709.0, a);
    std::vector<double> breaks{0.0};
    const double r0 = cpa < 0.0 ? -x * cpa : 0.0;
    for (double p : {0.25 * r0, 0.5 * r0, r0, 1.5 * r0, 2.0 * r0, 4.0 * r0, 1.0, 4.0, 16.0, 64.0})
        if (p > 0.0 && p < rmax)
            breaks.push_back(p);
    breaks.push_back(rmax);
    std::sort(breaks.begin(), breaks.end());
    QuadOptions opts;
    opts.rel_tol = 2e-13;
    opts.abs_tol = 1e-305;
    return integrate_with_breaks(K, breaks, opts) / (kPi * a);
}

struct WrightEval {
    double value = 0.0;
    double noise = 0.0; // absolute noise floor estimate of the summation
};

WrightEval wright_eval(double alpha, double theta)
{
    WrightEval out;
    if (theta == 0.0) {
        out.value = rgamma(1.0 - alpha);
        out.noise = 1e-16 * std::abs(out.value);
        return out;
    }
    const double lth = std::log(theta);
    CompensatedSum sum;
    double noise = 0.0;
    int consec = 0;
    bool converged = false;
    double ring[5] = {0.0, 0.0, 0.0, 0.0, 0.0}; // last five |term|s
    int rc = 0;
    for (int n = 0; n <= 800; ++n) {
        const double y = 1.0 - alpha * (n + 1); // reciprocal-Gamma argument
        double lmag, sign;
        if (y >= 0.5) {
            lmag = -std::lgamma(y);
            sign = 1.0;
        } else {
            const double s = sinpi(y);
            if (s == 0.0) // Gamma pole: the term vanishes
                continue;
            lmag = std::lgamma(1.0 - y) + std::log(std::abs(s)) - std::log(kPi);
            sign = s > 0.0 ? 1.0 : -1.0;
        }
        const double lgn = std::lgamma(n + 1.0);
        const double lt = n * lth - lgn + lmag;
        if (lt > 700.0) { // series numerically useless here
            out.noise = std::numeric_limits<double>::infinity();
            out.value = 0.0;
            return out;
        }
        double t = std::exp(lt) * sign;
        if (n & 1)
            t = -t;
        sum.add(t);
        // forward error bound: the log-space pieces each carry ~1 ulp of
        // absolute error, which exp() turns into a relative error of the term
        noise += std::abs(t) * 1.1e-16 * (std::abs(n * lth) + std::abs(lgn) + std::abs(lmag) + 3.0);
        ring[rc++ % 5] = std::abs(t);
        if (std::abs(t) < 1e-16 * (std::abs(sum.value()) + 1e-300)) {
            if (++consec >= 3) {
                converged = true;
                break;
            }
        } else {
            consec = 0;
        }
    }
    out.value = sum.value();
    if (!converged) {
        // bound the truncated tail geometrically; the smoothed four-step decay
        // ratio rides over the sin(pi y) wiggle of consecutive terms, and the
        // factor 10 covers coherent same-sign blocks of the quasi-periodic
        // sign pattern
        const double last = ring[(rc + 4) % 5], old = ring[rc % 5];
        double tail = std::numeric_limits<double>::infinity();
        if (rc >= 5 && last > 0.0 && old > 0.0 && last < old) {
            const double r = std::pow(last / old, 0.25);
            if (r < 0.95)
                tail = 10.0 * last * r / (1.0 - r);
        }
        noise += tail;
    }
    out.noise = noise;
    return out;
}

} // namespace

double gamma_fn(double x)
{
    if (x <= 0.0 && x == std::floor(x)) {
        std::ostringstream os;
        os << "gamma_fn: pole at non-positive integer x=" << x;
        throw DomainError(os.str());
    }
    return std::tgamma(x);
}

double log_gamma(double x)
{
    if (!(x > 0.0))
        throw DomainError("log_gamma: requires x > 0");
    return std::lgamma(x);
}

double rgamma(double x)
{
    if (x > 0.5) {
        if (x > 171.62)
            return 0.0; // 1/Gamma underflows
        return 1.0 / std::tgamma(x);
    }
    const double s = sinpi(x);
    if (s == 0.0)
        return 0.0; // pole of Gamma
    // 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
    const double l = std::lgamma(1.0 - x) + std::log(std::abs(s) / kPi);
    if (l > 709.0)
        return s > 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    return std::copysign(std::exp(l), s);
}

MLParams::MLParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_)
{
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw DomainError("MLParams: alpha must lie in (0,1]");
    if (!(beta > 0.0))
        throw DomainError("MLParams: beta must be positive");
}

double mittag_leffler(double alpha, double beta, double z)
{
    if (!(alpha > 0.0))
        throw DomainError("mittag_leffler: alpha must be positive");
    if (!(beta > 0.0))
        throw DomainError("mittag_leffler: beta must be positive");
    if (!std::isfinite(z))
        throw DomainError("mittag_leffler: z must be finite");

    if (alpha == 1.0 && beta == 1.0)
        return std::exp(z);
    if (z >= 0.0)
        return ml_series(alpha, beta, z, false).value;

    if (std::abs(z) <= kSeriesWindow) {
        const SeriesResult s = ml_series(alpha, beta, z, false);
        if (s.converged && s.max_term <= kGuardRatio * std::abs(s.value))
            return s.value;
    }
    if (alpha < 1.0 && beta < 1.0 + alpha)
        return ml_integral(alpha, beta, -z);

    std::ostringstream os;
    os << "mittag_leffler: no certified path for alpha=" << alpha << " beta=" << beta
       << " z=" << z;
    throw UnsupportedRangeError(os.str());
}

double mittag_leffler(const MLParams& p, double z)
{
    return mittag_leffler(p.alpha, p.beta, z);
}

double mittag_leffler_deriv_aa(double alpha, double z)
{
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw DomainError("mittag_leffler_deriv_aa: alpha must lie in (0,1]");
    if (alpha == 1.0)
        return std::exp(z); // E_{1,1} = exp
    if (z >= 0.0)
        return ml_series(alpha, 2.0 * alpha, z, true).value;
    if (std::abs(z) <= kSeriesWindow) {
        const SeriesResult s = ml_series(alpha, 2.0 * alpha, z, true);
        if (s.converged && s.max_term <= kGuardRatio * std::abs(s.value))
            return s.value;
    }
    return ml_deriv_integral(alpha, -z);
}

double mainardi_wright(double alpha, double theta)
{
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw DomainError("mainardi_wright: alpha must lie in (0,1)");
    if (!(theta >= 0.0))
        throw DomainError("mainardi_wright: theta must be >= 0");
    const WrightEval w = wright_eval(alpha, theta);
    // reject when the predicted cancellation loss exceeds 6 digits
    if (!(w.noise <= 1e-6 * std::abs(w.value))) {
        std::ostringstream os;
        os << "mainardi_wright: series loses more than 6 digits at alpha=" << alpha
           << " theta=" << theta;
        throw UnsupportedRangeError(os.str());
    }
    return w.value;
}

namespace {

// Fixed 15-point Gauss-Legendre on [a,b]; the Wright integrands are analytic in
// the panel interior, so no adaptivity is needed (and the series noise floor
// would defeat tolerance-driven refinement anyway).
double wright_gl15(double alpha, const std::function<double(double)>& weight,
                   double a, double b, double& panel_noise)
{
    static constexpr double nodes[8] = {
        0.0, 0.2011940939974345, 0.3941513470775634, 0.5709721726085388,
        0.7244177313601701, 0.8482065834104272, 0.9372733924007060, 0.9879925180204854,
    };
    static constexpr double wts[8] = {
        0.2025782419255613, 0.1984314853271116, 0.1861610000155622, 0.1662692058169939,
        0.1395706779261543, 0.1071592204671719, 0.0703660474881081, 0.0307532419961173,
    };
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    auto g = [&](double th) {
        const WrightEval w = wright_eval(alpha, th);
        panel_noise = std::max(panel_noise, w.noise);
        return weight(th) * w.value;
    };
    double acc = wts[0] * g(c);
    for (int i = 1; i < 8; ++i) {
        const double d = h * nodes[i];
        acc += wts[i] * (g(c - d) + g(c + d));
    }
    return acc * h;
}

// Upper bound for the mass beyond position lo, extrapolated from the decay of
// the accepted panels (mean |integrand| g at midpoints m).  Returns +inf when
// the contributions are not yet decaying, so no stop can be certified.  The
// integrands here (Wright kernel times an analytic weight) decay
// superexponentially once past their last maximum, so an exponential fitted
// from the peak side bounds the true tail from above.  The reference panel is
// taken at least min_baseline back so that panel-level noise cannot fake the
// decay rate.
double wright_tail_bound(const std::vector<std::pair<double, double>>& hist, double lo)
{
    if (hist.size() < 2)
        return std::numeric_limits<double>::infinity();
    const double min_baseline = 0.02;
    const auto [m_last, g_last] = hist.back();
    if (!(g_last > 0.0))
        return std::numeric_limits<double>::infinity();
    for (auto it = hist.rbegin() + 1; it != hist.rend(); ++it) {
        const auto [m_ref, g_ref] = *it;
        if (m_last - m_ref < min_baseline || g_ref <= g_last)
            continue;
        const double lambda = std::log(g_ref / g_last) / (m_last - m_ref);
        return g_last * std::exp(-lambda * (lo - m_last)) / lambda;
    }
    return std::numeric_limits<double>::infinity();
}

// Panel walker shared by the Wright-kernel integrals (all with nonnegative
// integrands).  The series noise grows explosively with theta, so a panel
// whose noise exceeds its budget is retried at half width, and the walk stops
// as soon as the extrapolated tail beyond the current position is provably
// below the requested accuracy.  Each accepted panel contributes at most
// noise_budget of absolute noise.  The dropped tail lies in [0, tb] because
// the exponential fit majorizes the superexponential decay, so adding tb/2
// leaves an error of at most tb/2.
double wright_panel_integral(double alpha, const std::function<double(double)>& weight,
                             double noise_budget, double rel_stop)
{
    const double base_width = 0.5;
    const double min_width = base_width / 4096.0;
    CompensatedSum acc;
    std::vector<std::pair<double, double>> hist; // (midpoint, mean |integrand|)
    int evals = 0;
    double lo = 0.0, width = base_width;
    const double theta_cap = 64.0;
    while (lo < theta_cap) {
        if (++evals > 8192)
            throw QuadratureError("wright quadrature: panel budget exhausted");
        const double hi = lo + width;
        double panel_noise = 0.0;
        // one level of Richardson: whole panel vs two halves
        const double whole = wright_gl15(alpha, weight, lo, hi, panel_noise);
        const double halves = wright_gl15(alpha, weight, lo, 0.5 * (lo + hi), panel_noise)
                            + wright_gl15(alpha, weight, 0.5 * (lo + hi), hi, panel_noise);
        if (!std::isfinite(panel_noise) || !std::isfinite(halves)
            || panel_noise * width > noise_budget) {
            if (width > min_width) {
                width *= 0.5; // retry a narrower panel against the noise cliff
                continue;
            }
            // noise wall: the series cannot resolve the integrand past here,
            // so the walk may only stop if the remaining mass is negligible
            const double tb = wright_tail_bound(hist, lo);
            if (tb <= 2.0 * (rel_stop * std::abs(acc.value()) + 1e-9)) {
                acc.add(0.5 * tb);
                break;
            }
            throw QuadratureError("wright quadrature: noise wall before tail decay");
        }
        if (std::abs(halves - whole) > 1e-9 * (std::abs(acc.value()) + std::abs(halves))
                                           + 3.0 * panel_noise * width + 1e-12)
            throw QuadratureError("wright quadrature: panel failed to converge");
        acc.add(halves);
        hist.emplace_back(0.5 * (lo + hi), std::abs(halves) / width);
        lo = hi;
        width = std::min(width * 2.0, base_width);
        const double tb = wright_tail_bound(hist, lo);
        if (tb <= 0.5 * rel_stop * std::abs(acc.value()) + 1e-9) {
            acc.add(0.5 * tb);
            break;
        }
    }
    return acc.value();
}

} // namespace

double ml_via_wright_quadrature(double alpha, double z)
{
    if (!(alpha > 0.5) || !(alpha < 1.0))
        throw DomainError("ml_via_wright_quadrature: alpha must lie in (0.5,1)");
    if (!(z >= 0.0))
        throw DomainError("ml_via_wright_quadrature: z must be >= 0");
    auto weight = [alpha, z](double th) { return alpha * th * std::exp(-z * th); };
    return wright_panel_integral(alpha, weight, 1e-9, 1e-6);
}

double wright_moment(double alpha, double p)
{
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw DomainError("wright_moment: alpha must lie in (0,1)");
    if (!(p >= 0.0))
        throw DomainError("wright_moment: p must be >= 0");
    auto weight = [p](double th) { return p == 0.0 ? 1.0 : std::pow(th, p); };
    return wright_panel_integral(alpha, weight, 1e-9, 1e-6);
}

} // namespace psifrac
