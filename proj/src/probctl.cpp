#include "psifrac/probctl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <utility>

#include "psifrac/errors.hpp"

namespace psifrac {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_gains(const ConstraintSpec& spec, const char* who) {
    if (!(spec.g_gain >= 0.0) || !(spec.rho_gain >= 0.0))
        throw DomainError(std::string(who) + ": constraint gains must be nonnegative");
}

void check_pair_size(const EvolutionProblem& pb, const SpectralState& x,
                     const SpectralState& y, const char* who) {
    if (x.size() != pb.n_modes() || y.size() != pb.n_modes())
        throw DomainError(std::string(who) + ": state size must match the mode count");
}

// Weighted ball U(t, q) = { v : ||v - center|| <= radius } with
// center = w g(q), radius = w rho(q), w = (Psi(t,a))^{1-gamma}. Radial
// projection commutes with the weighting, so working in the weighted
// variables avoids dividing by the vanishing weight near t = a.
struct WeightedBall {
    SpectralState center;
    double radius = 0.0;
};

WeightedBall weighted_ball(const EvolutionProblem& pb, const ConstraintSpec& spec,
                           double span, const SpectralState& q) {
    const double w = std::pow(span, 1.0 - pb.order().gamma);
    WeightedBall ball;
    ball.center = (w * spec.g_gain) * q;
    ball.radius = w * spec.rho_gain * norm(q);
    return ball;
}

double ball_distance(const WeightedBall& ball, const SpectralState& v) {
    return std::max(0.0, norm(v - ball.center) - ball.radius);
}

// uniform double in (-1, 1) built from the top 53 bits, so the stream does
// not depend on the standard library's distribution implementation
double symmetric_unit(std::mt19937_64& eng) {
    const double u01 = static_cast<double>(eng() >> 11) * 0x1p-53;
    return 2.0 * u01 - 1.0;
}

void append_bytes(std::vector<unsigned char>& buf, const void* data, std::size_t size) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    buf.insert(buf.end(), p, p + size);
}

} // namespace

SpectralState project_feasible(const EvolutionProblem& pb, const ConstraintSpec& spec,
                               double t, const SpectralState& q_t, const SpectralState& v) {
    check_gains(spec, "project_feasible");
    check_pair_size(pb, q_t, v, "project_feasible");
    const double span = pb.psi().span(t, pb.psi().a()); // domain-checks t
    if (span == 0.0)
        return SpectralState(pb.n_modes()); // U(a, x) = {0}: the weight vanishes
    const WeightedBall ball = weighted_ball(pb, spec, span, q_t);
    const SpectralState delta = v - ball.center;
    const double d = norm(delta);
    if (d <= ball.radius)
        return v;
    return ball.center + (ball.radius / d) * delta;
}

HausdorffCheck hausdorff_bound_check(const EvolutionProblem& pb, const ConstraintSpec& spec,
                                     double t, const SpectralState& x,
                                     const SpectralState& y) {
    check_gains(spec, "hausdorff_bound_check");
    check_pair_size(pb, x, y, "hausdorff_bound_check");
    const double span = pb.psi().span(t, pb.psi().a()); // domain-checks t
    const double w = std::pow(span, 1.0 - pb.order().gamma);
    const double dxy = norm(x - y);
    HausdorffCheck out;
    out.bound = 2.0 * spec.lipschitz() * w * dxy;
    // Hausdorff distance of two balls: center shift plus radius mismatch
    out.witnessed = w * (spec.g_gain * dxy +
                         spec.rho_gain * std::abs(norm(x) - norm(y)));
    return out;
}

double running_cost(const RunningCostSpec& hspec, const Trajectory& traj,
                    const ControlFunction& u) {
    if (!hspec.k1 || !hspec.k2)
        throw ConfigError("running_cost: cost coefficients k1 and k2 must be set");
    if (!(hspec.c_h >= 0.0))
        throw DomainError("running_cost: the control weight c_h must be nonnegative");
    if (traj.grid.size() < 2 || traj.states.size() != traj.grid.size())
        throw DomainError("running_cost: trajectory must carry at least two grid nodes");
    if (u.grid != traj.grid || u.values.size() != traj.grid.size())
        throw DomainError("running_cost: trajectory and control must share one grid");

    auto density = [&](std::size_t j) {
        const double t = traj.grid[j];
        // the raw state is unbounded at the first node; its stored value is
        // the finite weighted limit, which stands in for ||q|| there
        return hspec.k1(t) + hspec.k2(t) * norm(traj.states[j]) +
               hspec.c_h * norm(u.values[j]);
    };
    double cost = 0.0;
    double prev = density(0);
    for (std::size_t j = 1; j < traj.grid.size(); ++j) {
        const double here = density(j);
        cost += 0.5 * (prev + here) * (traj.grid[j] - traj.grid[j - 1]);
        prev = here;
    }
    return cost;
}

FeasibleSearchResult feasible_search(const EvolutionProblem& pb, const ConstraintSpec& cspec,
                                     const RunningCostSpec& hspec, int n_candidates,
                                     std::uint64_t seed) {
    check_gains(cspec, "feasible_search");
    if (!hspec.k1 || !hspec.k2)
        throw ConfigError("feasible_search: cost coefficients k1 and k2 must be set");
    if (!(hspec.c_h >= 0.0))
        throw DomainError("feasible_search: the control weight c_h must be nonnegative");
    if (n_candidates < 1)
        throw DomainError("feasible_search: need at least one candidate");

    const PsiFunction& psi = pb.psi();
    const double a = psi.a();
    const double b = psi.b();
    const std::size_t modes = pb.n_modes();
    const auto& gain = pb.control_gain();
    const MildPropagator prop(pb, default_grid(pb, 65));
    const std::vector<double>& grid = prop.grid();
    const std::size_t m = grid.size();
    const double span_b = psi.span(b, a);

    // a-priori envelope: the weighted trajectory norm is bounded by the
    // Gronwall constant of the growth hypothesis, and the pointwise control
    // bound ||u(t)|| <= a_u + c_u (Psi(t,a))^{1-gamma} ||q(t)|| turns it into
    // an L2 bound over the horizon
    const double b_norm = *std::max_element(gain.begin(), gain.end());
    const double m0 = gronwall_bound(pb, cspec.a_u_norm(), cspec.c_u(), b_norm, b);
    const double n0 =
        std::max(m0, cspec.a_u_norm() + cspec.c_u() * m0 * std::sqrt(b - a));

    constexpr int kMaxRounds = 50;
    constexpr double kAltTol = 1e-7;    // alternation stationarity
    constexpr double kFeasTol = 1e-6;   // certified feasibility defect

    FeasibleSearchResult result;
    result.n0 = n0;
    result.history.reserve(static_cast<std::size_t>(n_candidates));
    double best_cost = std::numeric_limits<double>::infinity();

    std::vector<SpectralState> forcing(m, SpectralState(modes));
    for (int c = 0; c < n_candidates; ++c) {
        std::vector<SpectralState> vals(m, SpectralState(modes));
        if (c > 0) {
            // split the RNG per candidate index so the candidate set depends
            // only on (seed, index), not on evaluation order
            std::uint64_t key[2] = {seed, static_cast<std::uint64_t>(c)};
            std::mt19937_64 eng(fnv1a64(key, sizeof key));
            for (std::size_t n = 0; n < modes; ++n) {
                const double c0 = symmetric_unit(eng);
                const double c1 = symmetric_unit(eng);
                const double scale = 0.5 / static_cast<double>(n + 1);
                for (std::size_t j = 1; j < m; ++j) {
                    const double tau = psi.span(grid[j], a) / span_b;
                    vals[j][n] = scale * (c0 * std::cos(kPi * tau) +
                                          c1 * std::sin(kPi * tau));
                }
            }
        }

        // alternate simulate -> project until both the trajectory and the
        // projected samples are stationary
        Trajectory traj;
        Trajectory prev_traj;
        bool have_prev = false;
        bool stable = false;
        int rounds = 0;
        while (rounds < kMaxRounds) {
            ++rounds;
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t n = 0; n < modes; ++n)
                    forcing[j][n] = gain[n] * vals[j][n];
            traj = prop.propagate(forcing);
            double move = 0.0;
            vals[0] = SpectralState(modes); // U(a, x) = {0}
            for (std::size_t j = 1; j < m; ++j) {
                const double span = psi.span(grid[j], a);
                const WeightedBall ball = weighted_ball(pb, cspec, span, traj.states[j]);
                const SpectralState delta = vals[j] - ball.center;
                const double d = norm(delta);
                if (d > ball.radius) {
                    SpectralState proj = ball.center + (ball.radius / d) * delta;
                    move = std::max(move, norm(proj - vals[j]));
                    vals[j] = std::move(proj);
                }
            }
            const double drift = have_prev ? weighted_distance(pb, prev_traj, traj)
                                           : std::numeric_limits<double>::infinity();
            prev_traj = traj;
            have_prev = true;
            if (move <= kAltTol && drift <= kAltTol) {
                stable = true;
                break;
            }
        }

        // re-simulate the projected control once more and certify the pair
        // against the trajectory it actually generates
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t n = 0; n < modes; ++n)
                forcing[j][n] = gain[n] * vals[j][n];
        traj = prop.propagate(forcing);
        double defect = norm(vals[0]);
        for (std::size_t j = 1; j < m; ++j) {
            const double span = psi.span(grid[j], a);
            defect = std::max(defect, ball_distance(
                                          weighted_ball(pb, cspec, span, traj.states[j]),
                                          vals[j]));
        }

        ControlFunction u;
        u.grid = grid;
        u.values = vals;
        u.energy = control_energy_trapezoid(grid, vals);

        CandidateRecord rec;
        rec.candidate_id = c;
        rec.feasibility_rounds = rounds;
        rec.cost = running_cost(hspec, traj, u);
        rec.feasible = stable && defect <= kFeasTol;
        rec.accepted = rec.feasible && rec.cost < best_cost;
        if (rec.accepted) {
            best_cost = rec.cost;
            result.trajectory = traj;
            result.control = std::move(u);
            result.cost = rec.cost;
            result.feasibility_defect = defect;
        }
        result.history.push_back(rec);
    }

    if (!std::isfinite(best_cost))
        throw ConfigError("feasible_search: no candidate stabilized into a feasible pair");

    // canonical digest of the history: fixed-width little-endian rows
    std::vector<unsigned char> buf;
    buf.reserve(result.history.size() * 26);
    for (const CandidateRecord& rec : result.history) {
        const std::int64_t id = rec.candidate_id;
        const std::int64_t rounds = rec.feasibility_rounds;
        append_bytes(buf, &id, sizeof id);
        append_bytes(buf, &rounds, sizeof rounds);
        append_bytes(buf, &rec.cost, sizeof rec.cost);
        const unsigned char flags[2] = {static_cast<unsigned char>(rec.accepted ? 1 : 0),
                                        static_cast<unsigned char>(rec.feasible ? 1 : 0)};
        append_bytes(buf, flags, sizeof flags);
    }
    result.digest = fnv1a64(buf.data(), buf.size());
    return result;
}

} // namespace psifrac
