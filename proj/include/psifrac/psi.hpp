#pragma once

#include <utility>
#include <vector>

#include "psifrac/quadrature.hpp"

namespace psifrac {

// Strictly increasing clock function psi on [a,b], with derivative and inverse.
// Parametric families cover the usual choices; custom takes a pair of callables
// plus a sampled monotonicity certificate (1000 nodes, nonpositive slope rejected;
// a zero derivative is tolerated at the left endpoint only, cf. psi(t)=t^p, a=0).
class PsiFunction {
public:
    enum class Kind { linear, power, exponential, logarithmic, custom };

    static PsiFunction linear(double a, double b, double slope = 1.0, double offset = 0.0);
    static PsiFunction power(double a, double b, double exponent);
    static PsiFunction exponential(double a, double b, double rate);
    static PsiFunction logarithmic(double a, double b);
    static PsiFunction custom(double a, double b, ScalarFn value, ScalarFn derivative);

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }

    double value(double t) const;      // psi(t), t in [a,b]
    double derivative(double t) const; // psi'(t)
    double span(double t, double s) const { return value(t) - value(s); } // psi(t)-psi(s)
    double inverse(double y) const;    // psi^{-1}(y), y clamped into [psi(a), psi(b)]

private:
    PsiFunction(Kind kind, double a, double b, std::vector<double> params,
                ScalarFn fn, ScalarFn dfn);
    double check_domain(double t) const;

    Kind kind_;
    double a_;
    double b_;
    std::vector<double> params_;
    ScalarFn fn_;  // custom only
    ScalarFn dfn_; // custom only
    double ya_ = 0.0;
    double yb_ = 0.0;
};

// (psi(t), psi'(t)); domain error outside [a,b].
std::pair<double, double> psi_eval(const PsiFunction& psi, double t);

// Order pair for the n=1 psi-Hilfer derivative with the derived exponent
// gamma = alpha + beta (1 - alpha). The gate 1/2 < alpha <= 1 is enforced here
// because the singular kernel psi'(s) (psi(t)-psi(s))^{alpha-1} is square
// integrable exactly when alpha > 1/2.
struct FracOrder {
    double alpha;
    double beta;
    double gamma;
    FracOrder(double alpha_, double beta_);
};

// integral_a^t psi'(s) (psi(t)-psi(s))^{mu-1} f(s) ds for mu > 0.
// Split at the psi-midpoint: w = (psi(t)-psi(s))^mu absorbs the kernel weight on
// the right piece, u = sqrt(psi(s)-psi(a)) tames any admissible singularity of f
// (weaker than Psi^{-1/2}) on the left piece. Graded breaks guard the endpoints.
double weighted_kernel_integral(const PsiFunction& psi, double mu, const ScalarFn& f,
                                double t, const QuadOptions& opts = {});

// Same, with known kink or jump locations of f handed in as panel boundaries
// (points outside (a,t) are ignored) so adaptive bisection never has to hunt
// for them. Used for piecewise linear controls and switching selections.
double weighted_kernel_integral(const PsiFunction& psi, double mu, const ScalarFn& f,
                                double t, const std::vector<double>& s_breaks,
                                const QuadOptions& opts = {});

// I^{alpha;psi}_{a+} f(t) = weighted_kernel_integral / Gamma(alpha), alpha > 0.
double psi_frac_integral(const PsiFunction& psi, double alpha, const ScalarFn& f,
                         double t, const QuadOptions& opts = {});

// n=1 psi-Hilfer derivative
//   D^{alpha,beta;psi} f = I^{beta(1-alpha);psi} (1/psi') d/dt I^{(1-beta)(1-alpha);psi} f
// evaluated by quadrature around a central finite difference in the psi variable.
// The constant part f(a) is propagated in closed form so the quadratures only see
// f - f(a); when f(a) is not finite the split is skipped and f is integrated as is.
double psi_hilfer_derivative(const PsiFunction& psi, const FracOrder& order,
                             const ScalarFn& f, double t);

// L2 norm of s -> psi'(s) (psi(t)-psi(s))^{alpha-1} over [a,t].
// Finite precisely for alpha > 1/2; smaller alpha raises an error.
double kernel_l2_norm(const PsiFunction& psi, double alpha, double t);

} // namespace psifrac
