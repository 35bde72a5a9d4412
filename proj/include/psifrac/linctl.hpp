#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "psifrac/report.hpp"
#include "psifrac/spectral.hpp"

namespace psifrac {

// Diagonal controllability Gramian of the linear system on [a, b]:
//   r_n = int_a^b [psi'(s) (Psi(b,s))^{alpha-1}]^2 B_n^2
//         [E_{a,a}(-lambda_n Psi(b,s)^alpha)]^2 ds.
// The integrand behaves like (Psi(b,s))^{2 alpha - 2} near s = b, so r_n is
// finite exactly because of the alpha > 1/2 order gate, and r_n > 0 whenever
// B_n > 0 (every actuated mode is approximately controllable).
struct GramianDiag {
    std::vector<double> entries;
    double horizon = 0.0;
};

GramianDiag gramian(const EvolutionProblem& pb, double quad_tol = 1e-9);

// Target defect N(f) = x1 - S(Psi(b,a)) x0 - int_a^b psi'(s) K_alpha(Psi(b,s)) f(s) ds,
// the part of the target the control has to produce. Computed as x1 minus the
// endpoint of the uncontrolled mild solution. forcing may be null;
// forcing_breaks passes its known kink locations to the quadrature.
SpectralState target_defect(const EvolutionProblem& pb,
                            const std::function<SpectralState(double)>& forcing,
                            const SpectralState& x1,
                            const QuadOptions& opts = mild_quad_defaults(),
                            const std::vector<double>& forcing_breaks = {});

// Epsilon-regularized steering control
//   u_n(t) = psi'(t) (Psi(b,t))^{alpha-1} B_n E_{a,a}(-lambda_n Psi(b,t)^alpha)
//            * defect_n / (eps + r_n)
// (the duality map is the identity since the state space is Hilbert). Returned
// in resolvent form: per-mode weight defect_n/(eps + r_n), samples on the
// default grid, exact evaluator attached.
ControlFunction synthesize_control(const EvolutionProblem& pb, double eps,
                                   const SpectralState& defect, const GramianDiag& gram);

// Exact endpoint miss of the linear system under the synthesized control:
//   q_eps(b) - x1 = -eps (eps I + R(b))^{-1} N, per mode -eps defect_n/(eps + r_n).
SpectralState endpoint_error_closed_form(double eps, const SpectralState& defect,
                                         const GramianDiag& gram);

// For each eps in eps_list (positive, strictly decreasing): synthesize the
// control, simulate the endpoint, and record the simulated miss, the closed
// form miss, and the control energy. Rows keep the given (descending) order.
ConvergenceReport eps_sweep(const EvolutionProblem& pb,
                            const std::function<SpectralState(double)>& forcing,
                            const SpectralState& x1,
                            const std::vector<double>& eps_list);

// Reading of the d/dt P_alpha factor in the controllability witness below.
// `family` differentiates the solution family with respect to its own argument
// and evaluates at Psi(T,t) (no clock factor); `chain` is the literal time
// derivative of t -> P_alpha(Psi(T,t)), which appends a -psi'(t) factor. Only
// `family` satisfies the moment identity L(rho) = xi: with it the integrand of
// L(rho) is exactly d/dy [ y P_alpha(W - y)^2 ] in the clock variable
// y = psi(s) - psi(a), so the integral telescopes to xi. `chain` stays
// selectable so the verification run can demonstrate the failure.
enum class RhoDerivative { family, chain };

// Controllability witness for the adjoint moment problem on [a, T]:
//   rho(t) = Gamma(alpha)^2 / W * (Psi(T,t))^{1-alpha}
//            [ P_alpha(Psi(T,t)) xi - 2 (psi(t)-psi(a)) dP_alpha(Psi(T,t)) xi ],
// W = psi(T) - psi(a). In the family convention the weights merge per mode into
//   rho_n(t) = Gamma(alpha)^2/W [ Psi(T,t)^{1-alpha} E_{a,a}(-lambda_n Psi(T,t)^alpha)
//            + 2 lambda_n alpha (psi(t)-psi(a)) E'_{a,a}(-lambda_n Psi(T,t)^alpha) ] xi_n,
// finite on all of [a, T] for every mode (the derivative needs no stencil near
// t = T because E' is evaluated analytically and its weight cancels exactly).
ControlFunction rho_witness(const EvolutionProblem& pb, const SpectralState& xi, double T,
                            RhoDerivative convention = RhoDerivative::family);

// Relative defect ||L(rho) - xi|| / ||xi|| of the moment identity
//   L(rho) = int_a^T psi'(s) (Psi(T,s))^{alpha-1} P_alpha(Psi(T,s)) rho(s) ds = xi,
// which holds exactly in the family convention; the returned value is pure
// quadrature and table error there (zero when xi = 0).
double verify_L_rho(const EvolutionProblem& pb, const SpectralState& xi, double T,
                    RhoDerivative convention = RhoDerivative::family,
                    const QuadOptions& opts = mild_quad_defaults());

struct OptimalControlResult {
    ControlFunction control;
    Trajectory trajectory;
    double cost = 0.0;
};

// Optimal control of the quadratic cost J(q,u) = ||q(b)-x_b||^2 + lambda ||u||_{L2}^2:
//   u_n(t) = psi'(t) (Psi(b,t))^{alpha-1} B_n E_{a,a}(-lambda_n Psi(b,t)^alpha)
//            * (x_b - S(Psi(b,a)) x0)_n / (lambda + r_n).
// The reported cost uses the exact control energy sum_n r_n w_n^2 (the L2 norm
// of a resolvent-form control is the Gramian quadratic form of its weights);
// the trapezoid field on the sample grid cannot see the (Psi(b,t))^{alpha-1}
// tail at t = b. grid selects the simulation nodes; empty means {a, b}, which
// is all the cost needs.
OptimalControlResult optimal_control_quadratic(const EvolutionProblem& pb, double lambda,
                                               const SpectralState& x_b,
                                               std::vector<double> grid = {});

} // namespace psifrac
