#include "scmem/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace scmem::energy {

namespace {

void check_dims(const EnergyModel& m, const std::vector<double>& x, const std::vector<double>& y,
                const char* where) {
    if (x.size() != m.n_visible)
        throw invalid_parameter(std::string(where) + ": x must have n_visible entries");
    if (y.size() != m.n_hidden)
        throw invalid_parameter(std::string(where) + ": y must have n_hidden entries");
}

} // namespace

Potential Potential::quadratic() {
    Potential p;
    p.name = "quadratic";
    p.U = [](double y) { return 0.5 * y * y; };
    p.phi = [](double y) { return y; };
    p.dphi = [](double) { return 1.0; };
    return p;
}

Potential Potential::quartic() {
    Potential p;
    p.name = "quartic";
    p.U = [](double y) { return 0.25 * y * y * y * y; };
    p.phi = [](double y) { return y * y * y; };
    p.dphi = [](double y) { return 3.0 * y * y; };
    return p;
}

Potential Potential::custom(std::string name, std::function<double(double)> U,
                            std::function<double(double)> phi,
                            std::function<double(double)> dphi) {
    if (!U || !phi || !dphi) throw invalid_parameter("Potential: all three callables are required");
    const double h = 1e-5;
    for (const double y : {-1.7, -0.9, -0.3, 0.2, 0.8, 1.6}) {
        const double fd_phi = (U(y + h) - U(y - h)) / (2.0 * h);
        if (std::abs(phi(y) - fd_phi) > 1e-4 * std::max(1.0, std::abs(fd_phi)))
            throw invalid_parameter("Potential '" + name + "': phi is not the derivative of U at y=" +
                                    std::to_string(y));
        const double fd_dphi = (phi(y + h) - phi(y - h)) / (2.0 * h);
        if (std::abs(dphi(y) - fd_dphi) > 1e-4 * std::max(1.0, std::abs(fd_dphi)))
            throw invalid_parameter("Potential '" + name +
                                    "': dphi is not the derivative of phi at y=" + std::to_string(y));
    }
    Potential p;
    p.name = std::move(name);
    p.U = std::move(U);
    p.phi = std::move(phi);
    p.dphi = std::move(dphi);
    return p;
}

EnergyModel EnergyModel::make(std::size_t n_visible, std::size_t n_hidden, std::vector<double> xi,
                              Potential potential) {
    if (n_visible == 0 || n_hidden == 0)
        throw invalid_parameter("EnergyModel: both layers need at least one unit");
    if (xi.size() != n_visible * n_hidden)
        throw invalid_parameter("EnergyModel: pattern matrix must hold n_hidden * n_visible values");
    EnergyModel m;
    m.n_visible = n_visible;
    m.n_hidden = n_hidden;
    m.xi = std::move(xi);
    m.potential = std::move(potential);
    return m;
}

double EnergyModel::drive(const std::vector<double>& x, std::size_t mu) const {
    double u = 0.0;
    for (std::size_t i = 0; i < n_visible; ++i) u += pattern(mu, i) * x[i];
    return u;
}

double energy(const EnergyModel& model, const std::vector<double>& x,
              const std::vector<double>& y) {
    check_dims(model, x, y, "energy");
    double e = 0.0;
    for (const double v : x) e += 0.5 * v * v;
    for (std::size_t mu = 0; mu < model.n_hidden; ++mu)
        e += model.potential.U(y[mu]) - model.drive(x, mu) * model.potential.phi(y[mu]);
    return e;
}

EnergyGradients energy_gradients(const EnergyModel& model, const std::vector<double>& x,
                                 const std::vector<double>& y) {
    check_dims(model, x, y, "energy_gradients");
    EnergyGradients g;
    g.x = x;
    g.y.assign(model.n_hidden, 0.0);
    for (std::size_t mu = 0; mu < model.n_hidden; ++mu) {
        const double p = model.potential.phi(y[mu]);
        for (std::size_t i = 0; i < model.n_visible; ++i) g.x[i] -= model.pattern(mu, i) * p;
        g.y[mu] = p - model.drive(x, mu) * model.potential.dphi(y[mu]);
    }
    return g;
}

double phi_transform(const Potential& potential, double u) {
    const auto g = [&](double y) { return potential.U(y) - u * potential.phi(y); };

    // downhill bracket expansion from y = 0
    double a = 0.0, b = 1.0;
    double ga = g(a), gb = g(b);
    if (gb > ga) {
        std::swap(a, b);
        std::swap(ga, gb);
    }
    const double grow = 1.618033988749895;
    double c = b + grow * (b - a);
    double gc = g(c);
    int guard = 0;
    while (gc < gb) {
        a = b;
        b = c;
        gb = gc;
        c = b + grow * (c - a);
        gc = g(c);
        if (++guard > 300)
            throw numerical_error("phi_transform: inner problem looks unbounded below");
    }

    // golden-section refinement on the bracketing interval
    double lo = std::min(a, c), hi = std::max(a, c);
    const double r = 0.6180339887498949;
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    while (hi - lo > 1e-10) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = g(x2);
        }
    }
    return -g(0.5 * (lo + hi));
}

double EffectiveEnergy::phi_at(double u) const {
    const auto it = cache_.find(u);
    if (it != cache_.end()) return it->second;
    const double v = phi_transform(model_->potential, u);
    cache_.emplace(u, v);
    return v;
}

double EffectiveEnergy::operator()(const std::vector<double>& x) const {
    if (x.size() != model_->n_visible)
        throw invalid_parameter("EffectiveEnergy: x must have n_visible entries");
    double e = 0.0;
    for (const double v : x) e += 0.5 * v * v;
    for (std::size_t mu = 0; mu < model_->n_hidden; ++mu) e -= phi_at(model_->drive(x, mu));
    return e;
}

double effective_energy(const EnergyModel& model, const std::vector<double>& x) {
    return EffectiveEnergy(model)(x);
}

std::vector<double> quadratic_effective_coupling(const EnergyModel& model) {
    std::vector<double> J(model.n_visible * model.n_visible, 0.0);
    for (std::size_t mu = 0; mu < model.n_hidden; ++mu)
        for (std::size_t i = 0; i < model.n_visible; ++i) {
            const double w = model.pattern(mu, i);
            for (std::size_t j = 0; j < model.n_visible; ++j)
                J[i * model.n_visible + j] += w * model.pattern(mu, j);
        }
    return J;
}

std::vector<DescendStep> descend(const EnergyModel& model, std::vector<double> x0,
                                 std::vector<double> y0, const DescendOptions& opts) {
    check_dims(model, x0, y0, "descend");
    if (!(opts.dt > 0.0) || !std::isfinite(opts.dt))
        throw invalid_parameter("descend: dt must be finite and > 0");
    if (!(opts.tau_x > 0.0) || !(opts.tau_y > 0.0))
        throw invalid_parameter("descend: time constants must be > 0");

    std::vector<DescendStep> steps;
    steps.reserve(opts.n_steps + 1);
    steps.push_back({x0, y0, energy(model, x0, y0)});
    std::vector<double> x = std::move(x0);
    std::vector<double> y = std::move(y0);
    const auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double s) { return std::isfinite(s); });
    };
    for (std::uint64_t k = 1; k <= opts.n_steps; ++k) {
        const auto grad = energy_gradients(model, x, y);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= opts.dt / opts.tau_x * grad.x[i];
        for (std::size_t mu = 0; mu < y.size(); ++mu) y[mu] -= opts.dt / opts.tau_y * grad.y[mu];
        if (!finite(x) || !finite(y))
            throw numerical_error("descend: state diverged at step " + std::to_string(k) +
                                  "; reduce dt");
        const double e = energy(model, x, y);
        if (!std::isfinite(e))
            throw numerical_error("descend: energy diverged at step " + std::to_string(k) +
                                  "; reduce dt");
        steps.push_back({x, y, e});
    }
    return steps;
}

} // namespace scmem::energy
