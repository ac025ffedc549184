#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scmem/retrieval.hpp"

namespace scmem::bounds {

// Evaluated closed form plus enough context to audit it.  `value` is the raw
// formula value (a bound may legitimately exceed 1); `clamped()` is what gets
// compared against empirical rates.
struct BoundReport {
    std::string name;
    std::vector<std::pair<std::string, double>> inputs;
    double value = 0.0;
    std::optional<double> oracle_value; // independent check, when one was run
    std::optional<bool> satisfied;      // for condition-style checks

    double clamped() const { return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value); }
};

// log C(n, k); exact-in-double for small n, lgamma for the rest.
double log_binom(std::uint64_t n, std::uint64_t k);
double binom_coeff(std::uint64_t n, std::uint64_t k);

// P * C(L, t+1) * (L/M)^{t+1}: chance any of P concepts shares more than t
// strokes with a fixed size-L concept, all concepts uniform size-L subsets of
// M strokes.  Pass P = 1 for the single-pair form.
double overlap_tail_bound(std::uint64_t n_concepts, std::uint64_t size, std::uint64_t n_strokes,
                          std::uint64_t t);

// C(l_a, t+1) * (l_b / (M - t))^{t+1}: single-pair form when the two subset
// sizes differ.
double overlap_tail_bound_variable(std::uint64_t size_a, std::uint64_t size_b,
                                   std::uint64_t n_strokes, std::uint64_t t);

// (e T p / k)^k for Bin(T, p) upper tails; valid for real k > T p (out of
// regime otherwise).
double binom_tail_bound(double trials, double p, double k);

// P(Bin(T, p) >= k), summing whichever tail is smaller for stability.
double binom_tail_exact(std::uint64_t trials, double p, std::uint64_t k);

// C(L, m) q_minus^m + ((M - L) q_plus)^(rho+1) / (rho+1)! with
// m = floor(delta L) + 1.  q_minus is the per-stroke miss probability,
// q_plus a per-stroke almost-sure false-fire envelope.
double good_event_bound_fixed(std::uint64_t size, const GoodEventParams& params, double q_minus,
                              std::uint64_t n_strokes, double q_plus);

// Window form: max over sizes l..u of the per-size expression with
// size-indexed envelopes and m_l = floor(delta l) + 1.
double good_event_bound_window(std::uint32_t lower, std::uint32_t upper,
                               const GoodEventParams& params,
                               const std::function<double(std::uint32_t)>& q_minus,
                               const std::function<double(std::uint32_t)>& q_plus,
                               std::uint64_t n_strokes);

// (e T p / theta)^theta with theta = kappa ln(n_features) and p the derived
// sparsity; `trials` is the cue-weight cap the envelope is taken at.
// Out of regime unless theta > trials * p.
double false_positive_envelope(std::uint64_t n_features, double kappa, double trials);

// c(C, L) = C * ln(C / (e L)); positive exactly when C > e L (regime).
double cue_size_tail_exponent(double c_factor, std::uint64_t size);
// n_features^{-c(C, L)}: chance the cue carries more than C ln(n_features)
// features.
double cue_size_tail(std::uint64_t n_features, double c_factor, std::uint64_t size);

// a(kappa) = (1 - kappa)^2 / 2 for kappa in (0, 1).
double exact_recovery_exponent(double kappa);
// M * n_features^{-a(kappa)}: all-stroke threshold failure bound.
double exact_recovery_bound(std::uint64_t n_strokes, std::uint64_t n_features, double kappa);

// L * n_features^{-a} + cue_tail + ((M - L) q_plus)^{rho+1} / (rho+1)! with
// q_plus the false-positive envelope at cue cap C ln(n_features).  When
// cue_tail is not supplied it defaults to cue_size_tail(n_features, C, L),
// which needs C > e L.
double good_event_bound_sparse(std::uint64_t n_features, std::uint64_t n_strokes,
                               std::uint64_t size, double kappa, std::uint32_t rho,
                               double c_factor,
                               std::optional<double> cue_tail = std::nullopt);

// Largest integer strictly below (1 - delta) l - rho - (b/a)(u - l).  May be
// negative; that signals "no admissible overlap margin".  a must be > 0.
long long margin_threshold(std::uint32_t lower, std::uint32_t upper, double delta,
                           std::uint32_t rho, double a, double b);

// P * (2 u^2 / M)^{t+1} <= target: one-line sufficient check that overlaps
// stay below t with probability target; reported with its margin.
BoundReport simple_overlap_condition(std::uint64_t n_concepts, std::uint64_t upper,
                                     std::uint64_t n_strokes, std::uint64_t t, double target);

// gamma > r/(t+1) (fixed target) or gamma > 2r/(t+1) (uniform over targets).
BoundReport capacity_exponent_check(double gamma, double r, std::uint64_t t, bool uniform);

// (P-1) C(u, t+1) (u/(M-t))^{t+1} + good_event_term + size_tail_term: failure
// bound for window-restricted decoding with variable sizes.
double retrieval_error_bound_variable(std::uint64_t n_concepts, std::uint64_t upper,
                                      std::uint64_t n_strokes, long long t_window,
                                      double good_event_term, double size_tail_term);

// c1 * exp(-c2 * u): generic exponential size-tail form for user-supplied
// constants.
double exp_size_tail(double c1, double c2, double upper);

} // namespace scmem::bounds
