#include "psifrac/linctl.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "psifrac/errors.hpp"
#include "psifrac/specfn.hpp"

namespace psifrac {

namespace {

double interval_slack(const PsiFunction& psi) {
    return 1e-12 * std::max({1.0, std::abs(psi.a()), std::abs(psi.b())});
}

// One coefficient of a resolvent-form control at t < b (and at t = b itself
// when alpha = 1, where the formula is regular).
double resolvent_sample(const EvolutionProblem& pb, double t, std::size_t n, double w_n) {
    const PsiFunction& psi = pb.psi();
    const double alpha = pb.order().alpha;
    const double span = psi.span(psi.b(), t);
    return psi.derivative(t) * std::pow(span, alpha - 1.0) * pb.control_gain()[n]
         * pb.ml_aa(pb.rates()[n] * std::pow(span, alpha)) * w_n;
}

ControlFunction build_resolvent_control(const EvolutionProblem& pb, std::vector<double> weight) {
    const PsiFunction& psi = pb.psi();
    const double b = psi.b();
    const double alpha = pb.order().alpha;
    const double slack = interval_slack(psi);
    const std::size_t modes = pb.n_modes();

    ControlFunction u;
    u.resolvent_weight = std::move(weight);
    u.grid = default_grid(pb);
    u.values.reserve(u.grid.size());
    for (double t : u.grid) {
        SpectralState v(modes);
        if (!(t >= b - slack && alpha < 1.0)) { // sample at b stays zero for alpha < 1
            for (std::size_t n = 0; n < modes; ++n)
                v[n] = resolvent_sample(pb, t, n, u.resolvent_weight[n]);
        }
        u.values.push_back(std::move(v));
    }
    u.energy = control_energy_trapezoid(u.grid, u.values);
    u.evaluator = [pb, w = u.resolvent_weight, b, alpha, slack, modes](double t) {
        SpectralState v(modes);
        if (t >= b - slack && alpha < 1.0) return v;
        for (std::size_t n = 0; n < modes; ++n)
            v[n] = resolvent_sample(pb, t, n, w[n]);
        return v;
    };
    return u;
}

void check_mode_count(const EvolutionProblem& pb, const SpectralState& x, const char* what) {
    if (x.size() != pb.n_modes())
        throw DomainError(std::string(what) + ": state has wrong number of modes");
}

// rho_n(t) with the per-mode weights already merged; finite on [a, T].
double rho_mode(const EvolutionProblem& pb, double t, std::size_t n, double xi_n,
                double T, RhoDerivative convention) {
    const PsiFunction& psi = pb.psi();
    const double alpha = pb.order().alpha;
    const double lam = pb.rates()[n];
    const double tau = psi.span(T, t);
    const double x = lam * std::pow(tau, alpha);
    const double head = std::pow(tau, 1.0 - alpha) * pb.ml_aa(x);
    double tail = 2.0 * lam * alpha * psi.span(t, psi.a()) * pb.ml_aa_deriv(x);
    if (convention == RhoDerivative::chain) tail *= -psi.derivative(t);
    const double scale = gamma_fn(alpha) * gamma_fn(alpha) / psi.span(T, psi.a());
    return scale * (head + tail) * xi_n;
}

double check_witness_horizon(const EvolutionProblem& pb, double T, const char* what) {
    const PsiFunction& psi = pb.psi();
    const double slack = interval_slack(psi);
    if (!(T > psi.a() + slack) || T > psi.b() + slack)
        throw DomainError(std::string(what) + ": T must lie in (a, b]");
    return std::min(T, psi.b());
}

} // namespace

GramianDiag gramian(const EvolutionProblem& pb, double quad_tol) {
    if (!(quad_tol > 0.0)) throw DomainError("gramian: quad_tol must be positive");
    const PsiFunction& psi = pb.psi();
    const double b = psi.b();
    const double alpha = pb.order().alpha;
    QuadOptions opts;
    opts.rel_tol = quad_tol;
    opts.abs_tol = 1e-15;

    GramianDiag gram;
    gram.horizon = b;
    gram.entries.resize(pb.n_modes(), 0.0);
    for (std::size_t n = 0; n < pb.n_modes(); ++n) {
        const double gain = pb.control_gain()[n];
        if (gain == 0.0) continue; // unactuated mode carries no energy
        const double lam = pb.rates()[n];
        // One psi' comes with the kernel weight; the squared integrand owns the other.
        gram.entries[n] = weighted_kernel_integral(
            psi, 2.0 * alpha - 1.0,
            [&](double s) {
                const double e = pb.ml_aa(lam * std::pow(psi.span(b, s), alpha));
                return psi.derivative(s) * gain * gain * e * e;
            },
            b, opts);
    }
    return gram;
}

SpectralState target_defect(const EvolutionProblem& pb,
                            const std::function<SpectralState(double)>& forcing,
                            const SpectralState& x1, const QuadOptions& opts,
                            const std::vector<double>& forcing_breaks) {
    check_mode_count(pb, x1, "target_defect");
    const PsiFunction& psi = pb.psi();
    const Trajectory free_run =
        mild_solution(pb, forcing, ControlFunction{}, {psi.a(), psi.b()}, opts, forcing_breaks);
    return x1 - free_run.states.back();
}

ControlFunction synthesize_control(const EvolutionProblem& pb, double eps,
                                   const SpectralState& defect, const GramianDiag& gram) {
    if (!(eps > 0.0)) throw DomainError("synthesize_control: eps must be positive");
    check_mode_count(pb, defect, "synthesize_control");
    if (gram.entries.size() != pb.n_modes())
        throw DomainError("synthesize_control: gramian has wrong number of modes");
    std::vector<double> weight(pb.n_modes());
    for (std::size_t n = 0; n < weight.size(); ++n)
        weight[n] = defect[n] / (eps + gram.entries[n]);
    return build_resolvent_control(pb, std::move(weight));
}

SpectralState endpoint_error_closed_form(double eps, const SpectralState& defect,
                                         const GramianDiag& gram) {
    if (!(eps > 0.0)) throw DomainError("endpoint_error_closed_form: eps must be positive");
    if (gram.entries.size() != defect.size())
        throw DomainError("endpoint_error_closed_form: defect and gramian sizes differ");
    SpectralState err(defect.size());
    for (std::size_t n = 0; n < defect.size(); ++n)
        err[n] = -eps * defect[n] / (eps + gram.entries[n]);
    return err;
}

ConvergenceReport eps_sweep(const EvolutionProblem& pb,
                            const std::function<SpectralState(double)>& forcing,
                            const SpectralState& x1, const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw ConfigError("eps_sweep: eps_list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0))
            throw ConfigError("eps_sweep: eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw ConfigError("eps_sweep: eps values must be strictly decreasing");
    }
    const GramianDiag gram = gramian(pb);
    const SpectralState defect = target_defect(pb, forcing, x1);
    const PsiFunction& psi = pb.psi();
    const std::vector<double> endpoint_grid{psi.a(), psi.b()};

    ConvergenceReport report;
    report.kind = "sweep";
    for (double eps : eps_list) {
        const ControlFunction u = synthesize_control(pb, eps, defect, gram);
        const Trajectory traj = mild_solution(pb, forcing, u, endpoint_grid);
        SweepRow row;
        row.eps = eps;
        row.endpoint_miss = norm(traj.states.back() - x1);
        row.closed_form_miss = norm(endpoint_error_closed_form(eps, defect, gram));
        row.energy = u.energy;
        report.rows.push_back(row);
    }
    return report;
}

ControlFunction rho_witness(const EvolutionProblem& pb, const SpectralState& xi, double T,
                            RhoDerivative convention) {
    check_mode_count(pb, xi, "rho_witness");
    T = check_witness_horizon(pb, T, "rho_witness");
    const PsiFunction& psi = pb.psi();
    const double a = psi.a();
    const double inv_gamma = 1.0 / pb.order().gamma;
    const std::size_t modes = pb.n_modes();

    ControlFunction rho;
    const std::size_t n_nodes = 201;
    rho.grid.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        rho.grid.push_back(a + (T - a) * std::pow(frac, inv_gamma));
    }
    rho.grid.back() = T;
    rho.values.reserve(n_nodes);
    for (double t : rho.grid) {
        SpectralState v(modes);
        for (std::size_t n = 0; n < modes; ++n)
            if (xi[n] != 0.0) v[n] = rho_mode(pb, t, n, xi[n], T, convention);
        rho.values.push_back(std::move(v));
    }
    rho.energy = control_energy_trapezoid(rho.grid, rho.values);
    rho.evaluator = [pb, xi, T, convention, modes](double t) {
        SpectralState v(modes);
        for (std::size_t n = 0; n < modes; ++n)
            if (xi[n] != 0.0) v[n] = rho_mode(pb, t, n, xi[n], T, convention);
        return v;
    };
    return rho;
}

double verify_L_rho(const EvolutionProblem& pb, const SpectralState& xi, double T,
                    RhoDerivative convention, const QuadOptions& opts) {
    check_mode_count(pb, xi, "verify_L_rho");
    T = check_witness_horizon(pb, T, "verify_L_rho");
    const double xi_norm = norm(xi);
    if (xi_norm == 0.0) return 0.0;
    const PsiFunction& psi = pb.psi();
    const double alpha = pb.order().alpha;
    double err_sq = 0.0;
    for (std::size_t n = 0; n < pb.n_modes(); ++n) {
        if (xi[n] == 0.0) continue; // rho_n and hence L_n vanish with xi_n
        const double lam = pb.rates()[n];
        const double ln = weighted_kernel_integral(
            psi, alpha,
            [&](double s) {
                const double e = pb.ml_aa(lam * std::pow(psi.span(T, s), alpha));
                return e * rho_mode(pb, s, n, xi[n], T, convention);
            },
            T, opts);
        const double d = ln - xi[n];
        err_sq += d * d;
    }
    return std::sqrt(err_sq) / xi_norm;
}

OptimalControlResult optimal_control_quadratic(const EvolutionProblem& pb, double lambda,
                                               const SpectralState& x_b,
                                               std::vector<double> grid) {
    if (!(lambda > 0.0))
        throw DomainError("optimal_control_quadratic: lambda must be positive");
    check_mode_count(pb, x_b, "optimal_control_quadratic");
    const PsiFunction& psi = pb.psi();
    const GramianDiag gram = gramian(pb);
    const SpectralState free_b = apply_S(pb, psi.span(psi.b(), psi.a()), pb.x0());

    std::vector<double> weight(pb.n_modes());
    for (std::size_t n = 0; n < weight.size(); ++n)
        weight[n] = (x_b[n] - free_b[n]) / (lambda + gram.entries[n]);

    OptimalControlResult result;
    result.control = build_resolvent_control(pb, std::move(weight));
    if (grid.empty()) grid = {psi.a(), psi.b()};
    result.trajectory = mild_solution(pb, {}, result.control, grid);

    double energy = 0.0;
    for (std::size_t n = 0; n < pb.n_modes(); ++n)
        energy += gram.entries[n] * result.control.resolvent_weight[n]
                * result.control.resolvent_weight[n];
    const double miss = norm(result.trajectory.states.back() - x_b);
    result.cost = miss * miss + lambda * energy;
    return result;
}

} // namespace psifrac
