#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scmem/errors.hpp"

namespace scmem::energy {

// Hidden-unit potential U with its derivative phi = U' and second derivative
// dphi = phi'.  Custom potentials are finite-difference checked on
// construction so phi and dphi cannot silently disagree with U.
struct Potential {
    std::string name;
    std::function<double(double)> U;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;

    static Potential quadratic(); // U(y) = y^2 / 2
    static Potential quartic();   // U(y) = y^4 / 4
    static Potential custom(std::string name, std::function<double(double)> U,
                            std::function<double(double)> phi,
                            std::function<double(double)> dphi);
};

// Two-layer energy
//   E(x, y) = 1/2 |x|^2 + sum_mu U(y_mu) - sum_mu u_mu(x) phi(y_mu),
// with drives u_mu(x) = sum_i xi[mu, i] x_i.
struct EnergyModel {
    std::size_t n_visible = 0;
    std::size_t n_hidden = 0;
    std::vector<double> xi; // row-major n_hidden x n_visible
    Potential potential;

    static EnergyModel make(std::size_t n_visible, std::size_t n_hidden, std::vector<double> xi,
                            Potential potential);

    double pattern(std::size_t mu, std::size_t i) const { return xi[mu * n_visible + i]; }
    double drive(const std::vector<double>& x, std::size_t mu) const;
};

double energy(const EnergyModel& model, const std::vector<double>& x,
              const std::vector<double>& y);

// dE/dx_i = x_i - sum_mu xi[mu, i] phi(y_mu)
// dE/dy_mu = phi(y_mu) - u_mu(x) dphi(y_mu)
struct EnergyGradients {
    std::vector<double> x;
    std::vector<double> y;
};

EnergyGradients energy_gradients(const EnergyModel& model, const std::vector<double>& x,
                                 const std::vector<double>& y);

// Phi(u) = -inf_y [ U(y) - u phi(y) ], found by bracket expansion plus
// golden-section refinement to 1e-10.
double phi_transform(const Potential& potential, double u);

// E_eff(x) = 1/2 |x|^2 - sum_mu Phi(u_mu(x)); memoises Phi per drive value.
class EffectiveEnergy {
  public:
    explicit EffectiveEnergy(const EnergyModel& model) : model_(&model) {}

    double phi_at(double u) const;
    double operator()(const std::vector<double>& x) const;

  private:
    const EnergyModel* model_;
    mutable std::unordered_map<double, double> cache_;
};

double effective_energy(const EnergyModel& model, const std::vector<double>& x);

// For the quadratic potential E_eff is 1/2 x^T (I - Xi^T Xi) x; this returns
// Xi^T Xi row-major (n_visible x n_visible).
std::vector<double> quadratic_effective_coupling(const EnergyModel& model);

struct DescendOptions {
    double dt = 1e-3;
    double tau_x = 1.0;
    double tau_y = 1.0;
    std::uint64_t n_steps = 0;
};

struct DescendStep {
    std::vector<double> x;
    std::vector<double> y;
    double energy = 0.0;
};

// Explicit-Euler flow  tau_x x' = -dE/dx, tau_y y' = -dE/dy.  Records every
// state including the initial one; throws numerical_error naming the step if
// the state stops being finite.
std::vector<DescendStep> descend(const EnergyModel& model, std::vector<double> x0,
                                 std::vector<double> y0, const DescendOptions& opts);

} // namespace scmem::energy
