#pragma once

namespace psifrac {

// Gamma(x); throws DomainError at the poles x = 0, -1, -2, ...
double gamma_fn(double x);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// 1/Gamma(x), entire: returns 0 at the poles. Reflection below x = 0.5.
double rgamma(double x);

// Index pair for the fractional-evolution regime: alpha in (0,1], beta > 0.
// The scalar evaluator below deliberately accepts a wider alpha range (the
// series converges for every alpha > 0, which the identity tests use).
struct MLParams {
    double alpha;
    double beta;
    MLParams(double alpha_, double beta_);
};

// Two-parameter Mittag-Leffler E_{alpha,beta}(z) = sum z^k / Gamma(alpha k + beta).
// z >= 0: direct series (positive terms). z < 0 with 0 < alpha < 1: series while a
// cancellation guard certifies ~12 digits, otherwise a real-axis integral
// representation of the inverted Laplace transform. Throws UnsupportedRangeError
// where no path self-certifies (alpha >= 1, beta != 1, deep negative z).
double mittag_leffler(double alpha, double beta, double z);
double mittag_leffler(const MLParams& p, double z);

// d/dz E_{alpha,alpha}(z). Same series/integral split as mittag_leffler.
double mittag_leffler_deriv_aa(double alpha, double z);

// Mainardi-Wright density M_alpha(theta) = sum (-theta)^n / (n! Gamma(1 - alpha(n+1))).
// Rejects theta where the alternating series loses more than 6 digits.
double mainardi_wright(double alpha, double theta);

// integral_0^inf alpha * theta * M_alpha(theta) * exp(-z theta) dtheta for z >= 0.
// The mild-solution kernel evaluated literally; oracle for E_{alpha,alpha}(-z).
double ml_via_wright_quadrature(double alpha, double z);

// integral_0^inf theta^p M_alpha(theta) dtheta  (= Gamma(p+1)/Gamma(alpha p + 1)).
double wright_moment(double alpha, double p);

} // namespace psifrac
