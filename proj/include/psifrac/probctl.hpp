#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psifrac/report.hpp"
#include "psifrac/spectral.hpp"

namespace psifrac {

// State-dependent admissible-control ball
//   U(t,x) = { (Psi(t,a))^{1-gamma} y : ||y - g(x)|| <= rho(x) }
// with the linear instance g(x) = g_gain x and rho(x) = rho_gain ||x||. Both
// maps vanish at zero and are Lipschitz with constants g_gain and rho_gain, so
// the growth bound ||U(t,x)|| <= a_u(t) + c_u (Psi(t,a))^{1-gamma} ||x|| holds
// with a_u identically zero and c_u = g_gain + rho_gain.
struct ConstraintSpec {
    double g_gain = 0.25;  // slope of the ball center g(x) = g_gain x
    double rho_gain = 0.5; // slope of the radius rho(x) = rho_gain ||x||

    double a_u_norm() const { return 0.0; }
    double c_u() const { return g_gain + rho_gain; }
    double lipschitz() const { return g_gain > rho_gain ? g_gain : rho_gain; }
};

// Running cost density h(t, x, u) = k1(t) + k2(t) ||x|| + c_h ||u||. The form
// is nonnegative, convex in u, and Lipschitz in x with constant sup k2, so the
// growth and convexity hypotheses of the existence theorem hold by
// construction.
struct RunningCostSpec {
    std::function<double(double)> k1 = [](double) { return 0.5; };
    std::function<double(double)> k2 = [](double) { return 1.0; };
    double c_h = 0.1;
};

// Euclidean projection of the control sample v onto U(t, q_t): unweight
// y = v / (Psi(t,a))^{1-gamma}, project y onto the ball around g(q_t) of
// radius rho(q_t), and re-weight. Feasible samples pass through unchanged. At
// t = a the weight is singular and the feasible value is pinned to the
// weighted center, which is the zero state. Throws DomainError for t outside
// [a,b] or negative gains.
SpectralState project_feasible(const EvolutionProblem& pb, const ConstraintSpec& spec,
                               double t, const SpectralState& q_t, const SpectralState& v);

// Hausdorff continuity check for the ball model: `bound` is the analytic
// estimate 2 L (Psi(t,a))^{1-gamma} ||x - y|| with L = max(g_gain, rho_gain),
// `witnessed` the exact Hausdorff distance of the two weighted balls,
// (Psi(t,a))^{1-gamma} (||g(x)-g(y)|| + |rho(x)-rho(y)|). The contract
// witnessed <= bound holds for every pair of states.
struct HausdorffCheck {
    double bound = 0.0;
    double witnessed = 0.0;
};
HausdorffCheck hausdorff_bound_check(const EvolutionProblem& pb, const ConstraintSpec& spec,
                                     double t, const SpectralState& x,
                                     const SpectralState& y);

// Trapezoid rule for J = int_a^b h(t, q(t), u(t)) dt over the shared grid of
// the trajectory and the sampled control. The first node uses the stored
// weighted limit of the trajectory (the raw state is unbounded at a); the
// graded default grid keeps that cell small. Throws DomainError when the
// grids differ.
double running_cost(const RunningCostSpec& hspec, const Trajectory& traj,
                    const ControlFunction& u);

struct CandidateRecord {
    int candidate_id = 0;
    int feasibility_rounds = 0;
    double cost = 0.0;
    bool accepted = false; // became the running best when evaluated
    bool feasible = false; // alternation stabilized within the round budget
};

struct FeasibleSearchResult {
    Trajectory trajectory;   // best feasible pair
    ControlFunction control;
    double cost = 0.0;
    double feasibility_defect = 0.0; // max node distance to U at the best pair
    double n0 = 0.0;                 // a-priori constant bounding both norms
    std::vector<CandidateRecord> history;
    std::uint64_t digest = 0; // FNV-1a over the history rows
};

// Projected direct search for low-cost feasible pairs. Candidate 0 is the
// zero control; the others draw smooth per-mode coefficient paths from an RNG
// split per candidate index, so serial and parallel evaluation orders agree.
// Each candidate alternates simulate -> project onto U(t, q(t)) at every grid
// node -> re-simulate until two successive trajectories differ by <= 1e-6 in
// the weighted norm and the projection no longer moves the samples; a
// candidate that fails to stabilize within 50 rounds is recorded as
// infeasible and excluded from the argmin. The best pair, its cost, the full
// per-candidate history, and the history digest are returned; identical seeds
// give identical digests. n0 is the Gronwall a-priori constant of the
// constraint instance, and the returned pair satisfies weighted trajectory
// norm <= n0 and control L2 norm <= n0.
FeasibleSearchResult feasible_search(const EvolutionProblem& pb, const ConstraintSpec& cspec,
                                     const RunningCostSpec& hspec, int n_candidates,
                                     std::uint64_t seed);

} // namespace psifrac
