#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "psifrac/psi.hpp"
#include "psifrac/quadrature.hpp"

namespace psifrac {

// Coefficients against the orthonormal sine basis e_n(xi) = sqrt(2/pi) sin(n xi)
// of X = L2(0, pi). By Parseval the L2 norm is the Euclidean norm of coeffs.
struct SpectralState {
    std::vector<double> coeffs;

    SpectralState() = default;
    explicit SpectralState(std::size_t n_modes) : coeffs(n_modes, 0.0) {}
    explicit SpectralState(std::vector<double> c) : coeffs(std::move(c)) {}

    std::size_t size() const { return coeffs.size(); }
    double operator[](std::size_t i) const { return coeffs[i]; }
    double& operator[](std::size_t i) { return coeffs[i]; }
};

double norm(const SpectralState& x);
double dot(const SpectralState& x, const SpectralState& y);
SpectralState operator+(const SpectralState& x, const SpectralState& y);
SpectralState operator-(const SpectralState& x, const SpectralState& y);
SpectralState operator*(double c, const SpectralState& x);

// e_mode (1-based) embedded in an n_modes-dimensional state.
SpectralState unit_state(std::size_t n_modes, std::size_t mode);

// The truncated evolution problem: Dirichlet Laplacian rates lambda_n = n^2 on
// X = L2(0, pi), a psi clock, the (alpha, beta) order pair, initial coefficient
// vector x0 (zero padded to n_modes), and a diagonal control gain B (all ones
// when omitted). The semigroup bound M is 1 since ||T(t)|| <= 1.
//
// Construction eagerly fits piecewise Chebyshev tables for x -> E_{a,a}(-x),
// E_{a,g}(-x) and dE_{a,a}/dz at z = -x on [0, lambda_N (psi(b)-psi(a))^a]; the
// mild-solution quadrature queries them millions of times, so the direct series
// or integral evaluation would dominate the runtime. Arguments past the table
// range fall back to the direct evaluator. alpha = 1 bypasses the tables and
// uses exp. Copies share the tables.
class EvolutionProblem {
public:
    EvolutionProblem(PsiFunction psi, FracOrder order, std::size_t n_modes,
                     SpectralState x0, std::vector<double> control_gain = {});

    const PsiFunction& psi() const { return psi_; }
    const FracOrder& order() const { return order_; }
    std::size_t n_modes() const { return n_modes_; }
    const SpectralState& x0() const { return x0_; }
    const std::vector<double>& rates() const { return rates_; }        // lambda_n = n^2
    const std::vector<double>& control_gain() const { return gain_; }  // diagonal B
    double semigroup_bound() const { return 1.0; }                     // M

    double table_xmax() const;
    double ml_aa(double x) const;        // E_{alpha,alpha}(-x), x >= 0
    double ml_ag(double x) const;        // E_{alpha,gamma}(-x)
    double ml_aa_deriv(double x) const;  // dE_{alpha,alpha}/dz at z = -x

private:
    struct Tables;

    PsiFunction psi_;
    FracOrder order_;
    std::size_t n_modes_;
    SpectralState x0_;
    std::vector<double> rates_;
    std::vector<double> gain_;
    std::shared_ptr<const Tables> tables_;
};

// Solution operators applied per mode. The argument s is the elapsed clock
// span Psi(t, reference), not a raw time.
//   apply_P: result_n = E_{a,a}(-lambda_n s^a) x_n, s >= 0
//   apply_K: s^{a-1} apply_P(s, x), s > 0 (the weight is singular at s = 0)
//   apply_S: result_n = s^{g-1} E_{a,g}(-lambda_n s^a) x_n, s > 0
SpectralState apply_P(const EvolutionProblem& pb, double s, const SpectralState& x);
SpectralState apply_K(const EvolutionProblem& pb, double s, const SpectralState& x);
SpectralState apply_S(const EvolutionProblem& pb, double s, const SpectralState& x);

// A control in L2([a,b], Y) held as grid samples plus optional exact structure.
//
// Resolvent-form controls u_n(s) = psi'(s) (Psi(b,s))^{alpha-1} B_n
// E_{a,a}(-lambda_n Psi(b,s)^alpha) resolvent_weight_n carry their per-mode
// weight vector; the stored sample at t = b is zero by convention when
// alpha < 1 (the true value diverges like (Psi(b,t))^{alpha-1}, which is
// square integrable but not bounded), and the mild-solution endpoint integral
// merges that weight with the kernel analytically. energy is the trapezoid
// rule applied to ||u||^2 on the grid.
struct ControlFunction {
    std::vector<double> grid;
    std::vector<SpectralState> values;
    double energy = 0.0;
    std::vector<double> resolvent_weight;            // empty unless resolvent form
    std::function<SpectralState(double)> evaluator;  // optional exact evaluator

    bool empty() const { return values.empty() && !evaluator && resolvent_weight.empty(); }
    SpectralState at(double t) const;                 // evaluator, else linear interpolation
    double sample_mode(double t, std::size_t n) const; // linear interpolation of one coefficient
};

double control_energy_trapezoid(const std::vector<double>& grid,
                                const std::vector<SpectralState>& values);

// Solution samples on a grid with grid[0] = a. states[0] holds the weighted
// limit lim_{t->a+} (Psi(t,a))^{1-gamma} q(t) = x0 / Gamma(gamma) (q itself is
// unbounded at a when gamma < 1); states[i>0] hold q(grid[i]). weighted_norm
// is the C^{1-gamma;psi} norm: the max over nodes of (Psi(t,a))^{1-gamma}
// ||q(t)||, using the stored limit at the first node.
struct Trajectory {
    std::vector<double> grid;
    std::vector<SpectralState> states;
    double weighted_norm = 0.0;
};

// Weighted state y(t_i) = (Psi(t_i,a))^{1-gamma} q(t_i) at a node, linear
// interpolation of y between nodes, and the unweighted state q(t) recovered
// from it (DomainError at t = a where q is unbounded). The weighted variable
// is the one that is continuous on [a,b], so interpolation happens there.
SpectralState weighted_state(const EvolutionProblem& pb, const Trajectory& traj, std::size_t i);
SpectralState weighted_interp(const EvolutionProblem& pb, const Trajectory& traj, double t);
SpectralState state_interp(const EvolutionProblem& pb, const Trajectory& traj, double t);
double weighted_distance(const EvolutionProblem& pb, const Trajectory& t1, const Trajectory& t2);

// Default reporting grid: n_nodes points t_i = a + (b-a) (i/(n-1))^{1/gamma},
// graded toward a to resolve the (Psi(t,a))^{gamma-1} weight.
std::vector<double> default_grid(const EvolutionProblem& pb, std::size_t n_nodes = 201);

inline QuadOptions mild_quad_defaults() { return QuadOptions{1e-7, 1e-12, 48}; }

// Mild solution on the given grid (grid[0] must equal a, ascending, inside [a,b]):
//   q_n(t) = (Psi(t,a))^{gamma-1} E_{a,g}(-lambda_n Psi(t,a)^alpha) x0_n
//          + integral_a^t psi'(s) (Psi(t,s))^{alpha-1}
//                         E_{a,a}(-lambda_n Psi(t,s)^alpha) [f_n(s) + B_n u_n(s)] ds
// with the integral done by the singular kernel quadrature per mode. forcing
// may be null (treated as zero); control may be empty. Sample-based controls
// are linearly interpolated and their grid nodes are handed to the quadrature
// as panel breaks so the kinks never land inside a panel; forcing_breaks does
// the same for kink or jump locations of the forcing (e.g. a selection driven
// by an interpolated trajectory kinks at every trajectory node).
Trajectory mild_solution(const EvolutionProblem& pb,
                         const std::function<SpectralState(double)>& forcing,
                         const ControlFunction& control,
                         const std::vector<double>& grid,
                         const QuadOptions& opts = mild_quad_defaults(),
                         const std::vector<double>& forcing_breaks = {});

// Product-integration form of the mild solution for forcings known by their
// samples on a fixed grid. The forcing is taken to be the interpolant of the
// node samples that is linear in the clock variable psi(s) between nodes (for
// the linear clock this is ordinary piecewise-linear interpolation of the
// samples), so each response value is a fixed linear combination
//   F_n(t_i) = sum_j fw[i][j,n] f_n(t_j)
// of the samples. Construction pays the quadrature cost once: far cells take
// one fixed Gauss panel each, and the cell touching s = t_i, which carries
// both the integrable kernel singularity and the stiff Mittag-Leffler decay,
// is integrated exactly against the interpolation hats via the closed-form
// moment int_0^h y^{a-1} E_{a,a}(-la y^a) dy = (1 - E_{a,1}(-la h^a)) / la.
// A propagate() call is then a dense multiply-accumulate, which makes the
// class the right tool for iterative schemes that re-solve one problem with
// updated forcing samples. The grid must start at a, be strictly increasing,
// and stay inside [a,b].
class MildPropagator {
public:
    MildPropagator(const EvolutionProblem& pb, std::vector<double> grid);

    const std::vector<double>& grid() const { return grid_; }

    // homogeneous rows: [0] holds the weighted limit x0 / Gamma(gamma), the
    // rest hold the S-term states, exactly as in a Trajectory
    const std::vector<SpectralState>& homogeneous() const { return homog_; }

    // mild solution driven by the sampled forcing (samples pair with the grid
    // nodes; forcing_samples[0] seeds the interpolant on the first cell)
    Trajectory propagate(const std::vector<SpectralState>& forcing_samples) const;

    // forcing response alone at the last grid node (zero initial data)
    SpectralState forcing_endpoint(const std::vector<SpectralState>& forcing_samples) const;

private:
    const EvolutionProblem* pb_;
    std::vector<double> grid_;
    std::size_t m_ = 0;
    std::size_t modes_ = 0;
    std::vector<SpectralState> homog_;
    std::vector<std::vector<double>> fw_; // fw_[i] holds (i+1)*modes hat weights
};

// A-priori envelope C E_alpha(D Gamma(alpha) (Psi(t,a))^alpha) for the weighted
// trajectory norm under ||u(t)|| <= a_u(t) + c_u (Psi(t,a))^{1-gamma} ||q(t)||:
//   C = M/Gamma(gamma) ||x0|| + M/Gamma(alpha) b_norm (Psi(b,a))^{1-gamma}
//       a_u_norm ((Psi(b,a))^{2 alpha - 1} / (2 alpha - 1))^{1/2}
//   D = M c_u / Gamma(alpha) b_norm (Psi(b,a))^{1-gamma}
// where a_u_norm is the L2 norm of a_u and b_norm the operator norm of B.
double gronwall_bound(const EvolutionProblem& pb, double a_u_norm, double c_u,
                      double b_norm, double t);

} // namespace psifrac
