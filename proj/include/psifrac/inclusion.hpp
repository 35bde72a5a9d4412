#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "psifrac/linctl.hpp"
#include "psifrac/report.hpp"
#include "psifrac/spectral.hpp"

namespace psifrac {

// The multimap F(t,x) = a_coeff(t,.) H(x) where H(x) collects every profile
// pinched between the envelopes:
//   H(x) = { y in X : f1(xi, r) <= y(xi) <= f2(xi, r) },  r = <phi, x>.
// phi is held by its sine coefficients, so r is the Euclidean pairing with the
// state coefficients. l records the Lipschitz-in-xi bound of the envelopes
// (the default instance has none); m dominates |a_coeff(t, .)| and K1 bounds
// |f_i| uniformly, giving ||F(t,x)|| <= 2 K1 m(t) for every state x.
struct MultimapSpec {
    std::function<double(double, double)> f1;      // lower envelope (xi, r)
    std::function<double(double, double)> f2;      // upper envelope (xi, r)
    std::function<double(double)> l;               // Lipschitz-in-xi bound
    SpectralState phi;                             // pairing weight, sine coefficients
    std::function<double(double, double)> a_coeff; // (t, xi) factor
    std::function<double(double)> m;               // dominating bound for a_coeff
    double K1 = 0.0;                               // uniform envelope bound
};

// The arctan instance: phi = e_1, f1 = atan(r) - 1/2, f2 = atan(r) + 1/2,
// a_coeff = m = 1, K1 = pi/2 + 1/2. Smooth enough to converge, yet its switch
// selection jumps at r = 0.
MultimapSpec default_multimap(std::size_t n_modes);

// f1 = f2 = 0: the inclusion degenerates to the linear problem.
MultimapSpec zero_multimap(std::size_t n_modes);

// How to pick one admissible profile out of H(x). switch_at_zero takes the
// lower branch for r < 0 and the upper branch for r >= 0 (the tie at r = 0
// lands on f2 by convention), which is the jump-discontinuous motivating case.
enum class SelectionStrategy { lower, upper, midpoint, switch_at_zero };

// One selection value f(t) in X: computes r = <phi, q>, picks the profile
// y(xi) between the envelopes, multiplies by a_coeff(t, xi), and projects back
// onto the sine basis with a fixed composite Gauss rule of at least
// max(4 n_modes, 128) nodes (the node set and sine matrix are cached per mode
// count). Throws DomainError if the envelopes cross at any node.
SpectralState evaluate_selection(const MultimapSpec& spec, SelectionStrategy strategy,
                                 double t, const SpectralState& q);

struct InclusionSolveResult {
    Trajectory trajectory;
    ControlFunction control;
    int iterations = 0;           // Picard applications performed
    double residual = 0.0;        // re-simulation defect at the returned pair
    double closed_form_miss = 0.0; // ||eps (eps I + R)^{-1} N(f)|| at the final selection
    double last_step = 0.0;       // final Picard defect ||Gamma(q) - q|| in weighted norm
    bool converged = false;
};

// Picard iteration for the fixed point of Gamma_eps: starting from the
// homogeneous solution, each pass freezes the selection at the nodes of a
// graded 65-point solve grid, takes f to be the interpolant that is linear in
// psi between those samples, steers the resulting linear problem toward x1
// with the eps-regularized control, and re-simulates. Stops when the weighted
// distance between consecutive iterates drops to tol; an oscillating step
// halves the damping factor (floor 1/16).
// Non-convergence is reported through the flag, never silently accepted. The
// returned control is re-synthesized against the final trajectory, and
// `residual` certifies the pair by one more full simulation.
InclusionSolveResult fixed_point_solve(const EvolutionProblem& pb, const MultimapSpec& spec,
                                       SelectionStrategy strategy, const SpectralState& x1,
                                       double eps, int max_iter = 40, double tol = 1e-9);

// One fixed_point_solve per eps (positive, strictly decreasing); rows keep the
// given order and carry endpoint miss, closed-form miss at the final
// selection, control energy, iteration count, and the convergence flag.
ConvergenceReport inclusion_eps_sweep(const EvolutionProblem& pb, const MultimapSpec& spec,
                                      SelectionStrategy strategy, const SpectralState& x1,
                                      const std::vector<double>& eps_list);

} // namespace psifrac
