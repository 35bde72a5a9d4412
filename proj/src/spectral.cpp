#include "psifrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "psifrac/errors.hpp"
#include "psifrac/specfn.hpp"

namespace psifrac {

double norm(const SpectralState& x) {
    double s = 0.0;
    for (double c : x.coeffs)
        s += c * c;
    return std::sqrt(s);
}

double dot(const SpectralState& x, const SpectralState& y) {
    if (x.size() != y.size())
        throw DomainError("dot: spectral states have different mode counts");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

SpectralState operator+(const SpectralState& x, const SpectralState& y) {
    if (x.size() != y.size())
        throw DomainError("operator+: spectral states have different mode counts");
    SpectralState out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + y[i];
    return out;
}

SpectralState operator-(const SpectralState& x, const SpectralState& y) {
    if (x.size() != y.size())
        throw DomainError("operator-: spectral states have different mode counts");
    SpectralState out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] - y[i];
    return out;
}

SpectralState operator*(double c, const SpectralState& x) {
    SpectralState out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = c * x[i];
    return out;
}

SpectralState unit_state(std::size_t n_modes, std::size_t mode) {
    if (mode < 1 || mode > n_modes)
        throw DomainError("unit_state: mode index must lie in [1, n_modes]");
    SpectralState out(n_modes);
    out[mode - 1] = 1.0;
    return out;
}

namespace {

constexpr int kChebNodes = 33;

// Chebyshev interpolant of f on [lo, hi]; c[0] is halved at evaluation time.
struct ChebPiece {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> c;
};

ChebPiece fit_piece(const std::function<double(double)>& f, double lo, double hi) {
    const double pi = std::acos(-1.0);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::vector<double> fx(kChebNodes);
    for (int k = 0; k < kChebNodes; ++k)
        fx[k] = f(mid + half * std::cos(pi * (k + 0.5) / kChebNodes));
    ChebPiece p{lo, hi, std::vector<double>(kChebNodes)};
    for (int j = 0; j < kChebNodes; ++j) {
        double s = 0.0;
        for (int k = 0; k < kChebNodes; ++k)
            s += fx[k] * std::cos(j * pi * (k + 0.5) / kChebNodes);
        p.c[j] = 2.0 * s / kChebNodes;
    }
    return p;
}

double eval_piece(const ChebPiece& p, double x) {
    const double u = (2.0 * x - p.lo - p.hi) / (p.hi - p.lo);
    const double two_u = 2.0 * u;
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t j = p.c.size(); j-- > 1;) {
        const double b0 = p.c[j] + two_u * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return 0.5 * p.c[0] + u * b1 - b2;
}

// Piecewise Chebyshev table on [0, 1], [1, 2], [2, 4], ... covering xmax; the
// dyadic layout keeps the singularity-free Bernstein ellipse wide on every
// piece, so 33 nodes reach near machine precision. Queries past the last
// piece fall back to the direct evaluator.
class MlTable {
public:
    MlTable() = default;
    MlTable(std::function<double(double)> direct, double xmax) : direct_(std::move(direct)) {
        int top = 0;
        while (std::ldexp(1.0, top) < xmax)
            ++top;
        pieces_.reserve(static_cast<std::size_t>(top) + 1);
        pieces_.push_back(fit_piece(direct_, 0.0, 1.0));
        for (int j = 1; j <= top; ++j)
            pieces_.push_back(fit_piece(direct_, std::ldexp(1.0, j - 1), std::ldexp(1.0, j)));
        hi_ = std::ldexp(1.0, top);
    }

    double operator()(double x) const {
        if (x <= 1.0)
            return eval_piece(pieces_[0], x);
        if (x <= hi_) {
            std::size_t j = static_cast<std::size_t>(std::ilogb(x)) + 1;
            if (j >= pieces_.size())
                j = pieces_.size() - 1;
            return eval_piece(pieces_[j], x);
        }
        return direct_(x);
    }

private:
    std::function<double(double)> direct_;
    std::vector<ChebPiece> pieces_;
    double hi_ = 1.0;
};

void check_modes(const EvolutionProblem& pb, const SpectralState& x, const char* who) {
    if (x.size() != pb.n_modes()) {
        std::ostringstream os;
        os << who << ": state has " << x.size() << " modes, problem has " << pb.n_modes();
        throw DomainError(os.str());
    }
}

double interval_slack(const PsiFunction& psi) {
    return 1e-12 * std::max({1.0, std::abs(psi.a()), std::abs(psi.b())});
}

} // namespace

struct EvolutionProblem::Tables {
    bool classical = false; // alpha == 1: all three functions are exp(-x)
    double xmax = 0.0;
    MlTable aa;
    MlTable ag;
    MlTable aad;
};

EvolutionProblem::EvolutionProblem(PsiFunction psi, FracOrder order, std::size_t n_modes,
                                   SpectralState x0, std::vector<double> control_gain)
    : psi_(std::move(psi)), order_(order), n_modes_(n_modes), x0_(std::move(x0)) {
    if (n_modes_ == 0)
        throw ConfigError("EvolutionProblem: n_modes must be at least 1");
    if (x0_.size() > n_modes_)
        throw ConfigError("EvolutionProblem: x0 has more coefficients than modes");
    x0_.coeffs.resize(n_modes_, 0.0);
    for (double c : x0_.coeffs)
        if (!std::isfinite(c))
            throw ConfigError("EvolutionProblem: x0 coefficients must be finite");
    rates_.resize(n_modes_);
    for (std::size_t n = 0; n < n_modes_; ++n)
        rates_[n] = static_cast<double>((n + 1) * (n + 1));
    if (control_gain.empty()) {
        gain_.assign(n_modes_, 1.0);
    } else {
        if (control_gain.size() != n_modes_)
            throw ConfigError("EvolutionProblem: control_gain must have one entry per mode");
        for (double g : control_gain)
            if (!(g >= 0.0) || !std::isfinite(g))
                throw ConfigError("EvolutionProblem: control_gain entries must be finite and nonnegative");
        gain_ = std::move(control_gain);
    }

    auto tables = std::make_shared<Tables>();
    const double alpha = order_.alpha;
    const double gamma = order_.gamma;
    tables->classical = (alpha == 1.0);
    tables->xmax = rates_.back() * std::pow(psi_.span(psi_.b(), psi_.a()), alpha);
    if (!tables->classical) {
        tables->aa = MlTable([alpha](double x) { return mittag_leffler(alpha, alpha, -x); },
                             tables->xmax);
        tables->ag = MlTable([alpha, gamma](double x) { return mittag_leffler(alpha, gamma, -x); },
                             tables->xmax);
        tables->aad = MlTable([alpha](double x) { return mittag_leffler_deriv_aa(alpha, -x); },
                              tables->xmax);
    }
    tables_ = std::move(tables);
}

double EvolutionProblem::table_xmax() const { return tables_->xmax; }

double EvolutionProblem::ml_aa(double x) const {
    return tables_->classical ? std::exp(-x) : tables_->aa(x);
}

double EvolutionProblem::ml_ag(double x) const {
    return tables_->classical ? std::exp(-x) : tables_->ag(x);
}

double EvolutionProblem::ml_aa_deriv(double x) const {
    return tables_->classical ? std::exp(-x) : tables_->aad(x);
}

SpectralState apply_P(const EvolutionProblem& pb, double s, const SpectralState& x) {
    check_modes(pb, x, "apply_P");
    if (!(s >= 0.0))
        throw DomainError("apply_P: the elapsed span s must be nonnegative");
    const double sa = std::pow(s, pb.order().alpha);
    SpectralState out(pb.n_modes());
    for (std::size_t n = 0; n < pb.n_modes(); ++n)
        out[n] = pb.ml_aa(pb.rates()[n] * sa) * x[n];
    return out;
}

SpectralState apply_K(const EvolutionProblem& pb, double s, const SpectralState& x) {
    check_modes(pb, x, "apply_K");
    if (!(s > 0.0))
        throw DomainError("apply_K: the weight s^{alpha-1} is singular at s = 0");
    const double alpha = pb.order().alpha;
    const double w = std::pow(s, alpha - 1.0);
    const double sa = std::pow(s, alpha);
    SpectralState out(pb.n_modes());
    for (std::size_t n = 0; n < pb.n_modes(); ++n)
        out[n] = w * pb.ml_aa(pb.rates()[n] * sa) * x[n];
    return out;
}

SpectralState apply_S(const EvolutionProblem& pb, double s, const SpectralState& x) {
    check_modes(pb, x, "apply_S");
    if (!(s > 0.0))
        throw DomainError("apply_S: only the weighted limit exists at s = 0");
    const double alpha = pb.order().alpha;
    const double gamma = pb.order().gamma;
    const double w = std::pow(s, gamma - 1.0);
    const double sa = std::pow(s, alpha);
    SpectralState out(pb.n_modes());
    for (std::size_t n = 0; n < pb.n_modes(); ++n)
        out[n] = w * pb.ml_ag(pb.rates()[n] * sa) * x[n];
    return out;
}

SpectralState ControlFunction::at(double t) const {
    if (evaluator)
        return evaluator(t);
    if (values.empty())
        throw DomainError("ControlFunction::at: control has no samples and no evaluator");
    if (t <= grid.front())
        return values.front();
    if (t >= grid.back())
        return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    SpectralState out(values[lo].size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = (1.0 - w) * values[lo][n] + w * values[hi][n];
    return out;
}

double ControlFunction::sample_mode(double t, std::size_t n) const {
    if (values.empty())
        throw DomainError("ControlFunction::sample_mode: control has no samples");
    if (t <= grid.front())
        return values.front()[n];
    if (t >= grid.back())
        return values.back()[n];
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
    return (1.0 - w) * values[lo][n] + w * values[hi][n];
}

double control_energy_trapezoid(const std::vector<double>& grid,
                                const std::vector<SpectralState>& values) {
    if (grid.size() != values.size())
        throw DomainError("control_energy_trapezoid: grid and values differ in length");
    if (grid.size() < 2)
        return 0.0;
    double e = 0.0;
    double prev = norm(values[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double cur = norm(values[i]);
        e += 0.5 * (grid[i] - grid[i - 1]) * (prev * prev + cur * cur);
        prev = cur;
    }
    return e;
}

SpectralState weighted_state(const EvolutionProblem& pb, const Trajectory& traj, std::size_t i) {
    if (i >= traj.states.size())
        throw DomainError("weighted_state: node index out of range");
    if (i == 0)
        return traj.states[0];
    const double span = pb.psi().span(traj.grid[i], pb.psi().a());
    return std::pow(span, 1.0 - pb.order().gamma) * traj.states[i];
}

SpectralState weighted_interp(const EvolutionProblem& pb, const Trajectory& traj, double t) {
    if (traj.grid.size() < 2)
        throw DomainError("weighted_interp: trajectory needs at least two nodes");
    const double slack = interval_slack(pb.psi());
    if (t < traj.grid.front() - slack || t > traj.grid.back() + slack)
        throw DomainError("weighted_interp: t outside the trajectory grid");
    if (t <= traj.grid.front())
        return traj.states[0];
    if (t >= traj.grid.back())
        return weighted_state(pb, traj, traj.grid.size() - 1);
    const auto it = std::upper_bound(traj.grid.begin(), traj.grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - traj.grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - traj.grid[lo]) / (traj.grid[hi] - traj.grid[lo]);
    const SpectralState ylo = weighted_state(pb, traj, lo);
    const SpectralState yhi = weighted_state(pb, traj, hi);
    SpectralState out(ylo.size());
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] = (1.0 - w) * ylo[n] + w * yhi[n];
    return out;
}

SpectralState state_interp(const EvolutionProblem& pb, const Trajectory& traj, double t) {
    const double span = pb.psi().span(t, pb.psi().a());
    if (!(span > 0.0))
        throw DomainError("state_interp: q is unbounded at t = a; use the weighted view there");
    return std::pow(span, pb.order().gamma - 1.0) * weighted_interp(pb, traj, t);
}

double weighted_distance(const EvolutionProblem& pb, const Trajectory& t1, const Trajectory& t2) {
    if (t1.grid.size() != t2.grid.size())
        throw DomainError("weighted_distance: trajectories must share a grid");
    const double slack = interval_slack(pb.psi());
    double d = 0.0;
    for (std::size_t i = 0; i < t1.grid.size(); ++i) {
        if (std::abs(t1.grid[i] - t2.grid[i]) > slack)
            throw DomainError("weighted_distance: trajectories must share a grid");
        d = std::max(d, norm(weighted_state(pb, t1, i) - weighted_state(pb, t2, i)));
    }
    return d;
}

std::vector<double> default_grid(const EvolutionProblem& pb, std::size_t n_nodes) {
    if (n_nodes < 2)
        throw ConfigError("default_grid: need at least two nodes");
    const double a = pb.psi().a();
    const double b = pb.psi().b();
    const double expo = 1.0 / pb.order().gamma;
    std::vector<double> grid(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double r = static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        grid[i] = a + (b - a) * std::pow(r, expo);
    }
    grid.front() = a;
    grid.back() = b;
    return grid;
}

Trajectory mild_solution(const EvolutionProblem& pb,
                         const std::function<SpectralState(double)>& forcing,
                         const ControlFunction& control,
                         const std::vector<double>& grid,
                         const QuadOptions& opts,
                         const std::vector<double>& forcing_breaks) {
    const PsiFunction& psi = pb.psi();
    const double a = psi.a();
    const double b = psi.b();
    const double alpha = pb.order().alpha;
    const double gamma = pb.order().gamma;
    const std::size_t n_modes = pb.n_modes();
    const double slack = interval_slack(psi);

    if (grid.empty())
        throw DomainError("mild_solution: empty grid");
    if (std::abs(grid.front() - a) > slack)
        throw DomainError("mild_solution: grid must start at the left endpoint a");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("mild_solution: grid must be strictly increasing");
    if (grid.back() > b + slack)
        throw DomainError("mild_solution: grid extends past the right endpoint b");

    const bool has_f = static_cast<bool>(forcing);
    const bool has_u = !control.empty();
    const bool resolvent = has_u && !control.resolvent_weight.empty();
    if (resolvent && control.resolvent_weight.size() != n_modes)
        throw DomainError("mild_solution: resolvent weight must have one entry per mode");
    const bool sampled = has_u && !resolvent && !control.values.empty();

    // All known kink locations of the integrand's smooth factor, in s-space;
    // the quadrature clamps them into (a, t) per node.
    std::vector<double> s_breaks = forcing_breaks;
    if (sampled) s_breaks.insert(s_breaks.end(), control.grid.begin(), control.grid.end());

    const auto& rates = pb.rates();
    const auto& gain = pb.control_gain();
    const SpectralState& x0 = pb.x0();

    Trajectory out;
    out.grid = grid;
    out.states.reserve(grid.size());
    out.states.push_back(rgamma(gamma) * x0); // weighted limit at the first node
    double weighted_max = norm(out.states[0]);

    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t = grid[i];
        const double span = psi.span(t, a);
        const bool at_b = t >= b - slack;
        const double s_weight = std::pow(span, gamma - 1.0);
        const double sa = std::pow(span, alpha);
        SpectralState q(n_modes);
        for (std::size_t n = 0; n < n_modes; ++n) {
            double qn = s_weight * pb.ml_ag(rates[n] * sa) * x0[n];
            if (resolvent && at_b) {
                // At t = b the control weight (Psi(b,s))^{alpha-1} collides with
                // the kernel; their product integrates under mu = 2 alpha - 1,
                // finite exactly because alpha > 1/2.
                if (gain[n] > 0.0 && control.resolvent_weight[n] != 0.0) {
                    auto g2 = [&](double s) {
                        const double e = pb.ml_aa(rates[n] * std::pow(psi.span(b, s), alpha));
                        return psi.derivative(s) * e * e;
                    };
                    qn += gain[n] * gain[n] * control.resolvent_weight[n]
                        * weighted_kernel_integral(psi, 2.0 * alpha - 1.0, g2, t, opts);
                }
                if (has_f) {
                    auto src = [&](double s) {
                        return pb.ml_aa(rates[n] * std::pow(psi.span(t, s), alpha))
                             * forcing(s)[n];
                    };
                    qn += s_breaks.empty()
                        ? weighted_kernel_integral(psi, alpha, src, t, opts)
                        : weighted_kernel_integral(psi, alpha, src, t, s_breaks, opts);
                }
            } else if (has_f || has_u) {
                auto src = [&](double s) {
                    double v = 0.0;
                    if (has_f)
                        v += forcing(s)[n];
                    if (has_u) {
                        if (resolvent) {
                            if (gain[n] > 0.0 && control.resolvent_weight[n] != 0.0) {
                                const double bs = psi.span(b, s);
                                v += psi.derivative(s) * std::pow(bs, alpha - 1.0) * gain[n]
                                   * pb.ml_aa(rates[n] * std::pow(bs, alpha))
                                   * gain[n] * control.resolvent_weight[n];
                            }
                        } else if (sampled) {
                            v += gain[n] * control.sample_mode(s, n);
                        } else {
                            v += gain[n] * control.at(s)[n];
                        }
                    }
                    if (v == 0.0)
                        return 0.0;
                    return pb.ml_aa(rates[n] * std::pow(psi.span(t, s), alpha)) * v;
                };
                qn += s_breaks.empty()
                    ? weighted_kernel_integral(psi, alpha, src, t, opts)
                    : weighted_kernel_integral(psi, alpha, src, t, s_breaks, opts);
            }
            q[n] = qn;
        }
        out.states.push_back(std::move(q));
        weighted_max = std::max(weighted_max,
                                std::pow(span, 1.0 - gamma) * norm(out.states.back()));
    }
    out.weighted_norm = weighted_max;
    return out;
}

MildPropagator::MildPropagator(const EvolutionProblem& pb, std::vector<double> grid)
    : pb_(&pb), grid_(std::move(grid)), m_(grid_.size()), modes_(pb.n_modes()) {
    const PsiFunction& psi = pb.psi();
    const double a = psi.a();
    const double b = psi.b();
    const double slack = interval_slack(psi);
    if (m_ < 2)
        throw DomainError("MildPropagator: need at least two grid nodes");
    if (std::abs(grid_.front() - a) > slack)
        throw DomainError("MildPropagator: grid must start at the left endpoint a");
    for (std::size_t i = 1; i < m_; ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw DomainError("MildPropagator: grid must be strictly increasing");
    if (grid_.back() > b + slack)
        throw DomainError("MildPropagator: grid extends past the right endpoint b");

    const double alpha = pb.order().alpha;
    const double gamma = pb.order().gamma;
    const auto& rates = pb.rates();
    const SpectralState& x0 = pb.x0();
    const QuadOptions cell_opts{1e-10, 1e-16, 48};
    const FixedRule unit = composite_gauss_rule(0.0, 1.0, 1);

    homog_.reserve(m_);
    homog_.push_back(rgamma(gamma) * x0);
    for (std::size_t i = 1; i < m_; ++i) {
        const double span = psi.span(grid_[i], a);
        const double sa = std::pow(span, alpha);
        SpectralState q(modes_);
        for (std::size_t n = 0; n < modes_; ++n)
            q[n] = std::pow(span, gamma - 1.0) * pb.ml_ag(rates[n] * sa) * x0[n];
        homog_.push_back(std::move(q));
    }

    fw_.resize(m_);
    for (std::size_t i = 1; i < m_; ++i) {
        const double yt = psi.value(grid_[i]);
        std::vector<double>& row = fw_[i];
        row.assign((i + 1) * modes_, 0.0);

        // far cells: the kernel is smooth there, one fixed panel each
        for (std::size_t j = 0; j + 1 < i; ++j) {
            const double lo = grid_[j];
            const double hi = grid_[j + 1];
            const double ylo = psi.value(lo);
            const double yhi = psi.value(hi);
            for (std::size_t g = 0; g < unit.nodes.size(); ++g) {
                const double s = lo + (hi - lo) * unit.nodes[g];
                const double ys = psi.value(s);
                const double tau = yt - ys;
                const double common = (hi - lo) * unit.weights[g] * psi.derivative(s) *
                                      std::pow(tau, alpha - 1.0);
                const double frac = (ys - ylo) / (yhi - ylo);
                const double ta = std::pow(tau, alpha);
                for (std::size_t n = 0; n < modes_; ++n) {
                    const double e = pb.ml_aa(rates[n] * ta);
                    row[j * modes_ + n] += common * e * (1.0 - frac);
                    row[(j + 1) * modes_ + n] += common * e * frac;
                }
            }
        }

        // adjacent cell [t_{i-1}, t_i]: exact kernel moments against the hat
        const double hy = yt - psi.value(grid_[i - 1]);
        const double hya = std::pow(hy, alpha);
        for (std::size_t n = 0; n < modes_; ++n) {
            const double lam = rates[n];
            const double p0 = (1.0 - mittag_leffler(alpha, 1.0, -lam * hya)) / lam;
            const double p1 = integrate(
                [&](double y) {
                    return std::pow(y, alpha) * pb.ml_aa(lam * std::pow(y, alpha));
                },
                0.0, hy, cell_opts);
            row[i * modes_ + n] += p0 - p1 / hy;       // sample at t_i
            row[(i - 1) * modes_ + n] += p1 / hy;      // sample at t_{i-1}
        }
    }
}

SpectralState MildPropagator::forcing_endpoint(
    const std::vector<SpectralState>& forcing_samples) const {
    if (forcing_samples.size() != m_)
        throw DomainError("MildPropagator: need one forcing sample per grid node");
    SpectralState f(modes_);
    const std::vector<double>& row = fw_.back();
    for (std::size_t j = 0; j < m_; ++j) {
        const double* wj = row.data() + j * modes_;
        for (std::size_t n = 0; n < modes_; ++n) f[n] += wj[n] * forcing_samples[j][n];
    }
    return f;
}

Trajectory MildPropagator::propagate(
    const std::vector<SpectralState>& forcing_samples) const {
    if (forcing_samples.size() != m_)
        throw DomainError("MildPropagator: need one forcing sample per grid node");
    const PsiFunction& psi = pb_->psi();
    const double one_minus_gamma = 1.0 - pb_->order().gamma;
    Trajectory out;
    out.grid = grid_;
    out.states.reserve(m_);
    out.states.push_back(homog_[0]);
    double wn_max = norm(homog_[0]);
    for (std::size_t i = 1; i < m_; ++i) {
        SpectralState q = homog_[i];
        const std::vector<double>& row = fw_[i];
        for (std::size_t j = 0; j <= i; ++j) {
            const double* wj = row.data() + j * modes_;
            for (std::size_t n = 0; n < modes_; ++n) q[n] += wj[n] * forcing_samples[j][n];
        }
        out.states.push_back(std::move(q));
        wn_max = std::max(wn_max, std::pow(psi.span(grid_[i], psi.a()), one_minus_gamma) *
                                      norm(out.states.back()));
    }
    out.weighted_norm = wn_max;
    return out;
}

double gronwall_bound(const EvolutionProblem& pb, double a_u_norm, double c_u,
                      double b_norm, double t) {
    if (!(a_u_norm >= 0.0) || !(c_u >= 0.0) || !(b_norm >= 0.0))
        throw DomainError("gronwall_bound: constants must be nonnegative");
    const PsiFunction& psi = pb.psi();
    const double alpha = pb.order().alpha;
    const double gamma = pb.order().gamma;
    const double m = pb.semigroup_bound();
    const double span_b = psi.span(psi.b(), psi.a());
    const double span_t = psi.span(t, psi.a()); // domain-checks t
    const double c = m * rgamma(gamma) * norm(pb.x0())
                   + m * rgamma(alpha) * b_norm * std::pow(span_b, 1.0 - gamma) * a_u_norm
                     * std::sqrt(std::pow(span_b, 2.0 * alpha - 1.0) / (2.0 * alpha - 1.0));
    const double d = m * c_u * rgamma(alpha) * b_norm * std::pow(span_b, 1.0 - gamma);
    return c * mittag_leffler(alpha, 1.0, d * gamma_fn(alpha) * std::pow(span_t, alpha));
}

} // namespace psifrac
