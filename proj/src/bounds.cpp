#include "scmem/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scmem/errors.hpp"
#include "scmem/model.hpp"

namespace scmem::bounds {

namespace {

double factorial(std::uint32_t n) {
    double r = 1.0;
    for (std::uint32_t i = 2; i <= n; ++i) r *= static_cast<double>(i);
    return r;
}

void require_prob(double q, const char* what) {
    if (!(q >= 0.0) || !(q <= 1.0))
        throw invalid_parameter(std::string(what) + " must lie in [0, 1]");
}

} // namespace

double log_binom(std::uint64_t n, std::uint64_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    if (k == 0 || k == n) return 0.0;
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double binom_coeff(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    if (k == 0) return 1.0;
    // running quotient keeps every partial value a binomial coefficient, so
    // the loop is exact while results stay below 2^53
    double r = 1.0;
    for (std::uint64_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (!std::isfinite(r)) return std::exp(log_binom(n, k));
    return r;
}

double overlap_tail_bound(std::uint64_t n_concepts, std::uint64_t size, std::uint64_t n_strokes,
                          std::uint64_t t) {
    if (n_concepts < 1) throw invalid_parameter("overlap_tail_bound: n_concepts must be >= 1");
    if (size < 1) throw invalid_parameter("overlap_tail_bound: size must be >= 1");
    if (size > n_strokes) throw invalid_parameter("overlap_tail_bound: size exceeds n_strokes");
    if (t + 1 > size) throw invalid_parameter("overlap_tail_bound: t must be at most size - 1");
    const double ratio = static_cast<double>(size) / static_cast<double>(n_strokes);
    return static_cast<double>(n_concepts) * binom_coeff(size, t + 1) *
           std::pow(ratio, static_cast<double>(t + 1));
}

double overlap_tail_bound_variable(std::uint64_t size_a, std::uint64_t size_b,
                                   std::uint64_t n_strokes, std::uint64_t t) {
    if (size_a < 1 || size_b < 1)
        throw invalid_parameter("overlap_tail_bound_variable: sizes must be >= 1");
    if (size_a > n_strokes || size_b > n_strokes)
        throw invalid_parameter("overlap_tail_bound_variable: size exceeds n_strokes");
    if (t >= std::min(size_a, size_b))
        throw invalid_parameter("overlap_tail_bound_variable: t must be below both sizes");
    const double ratio =
        static_cast<double>(size_b) / static_cast<double>(n_strokes - t);
    return binom_coeff(size_a, t + 1) * std::pow(ratio, static_cast<double>(t + 1));
}

double binom_tail_bound(double trials, double p, double k) {
    if (!(trials >= 0.0) || !std::isfinite(trials))
        throw invalid_parameter("binom_tail_bound: trials must be finite and >= 0");
    require_prob(p, "binom_tail_bound: p");
    if (!std::isfinite(k)) throw invalid_parameter("binom_tail_bound: k must be finite");
    const double mean = trials * p;
    if (!(k > mean)) throw out_of_regime("binom_tail_bound: requires k > trials * p");
    if (mean == 0.0) return 0.0;
    return std::exp(k * (1.0 + std::log(mean / k)));
}

double binom_tail_exact(std::uint64_t trials, double p, std::uint64_t k) {
    require_prob(p, "binom_tail_exact: p");
    if (k == 0) return 1.0;
    if (k > trials) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const auto n = static_cast<double>(trials);
    const long double ratio =
        static_cast<long double>(p) / (1.0L - static_cast<long double>(p));
    const double mean = n * p;
    long double acc = 0.0L;
    if (static_cast<double>(k) > mean) {
        // upper tail is the smaller one: sum it directly so deep tails keep
        // relative accuracy
        const double log_start = log_binom(trials, k) + static_cast<double>(k) * std::log(p) +
                                 (n - static_cast<double>(k)) * std::log1p(-p);
        long double term = std::exp(static_cast<long double>(log_start));
        for (std::uint64_t j = k; j <= trials; ++j) {
            acc += term;
            if (term < acc * 1e-22L && static_cast<double>(j) > mean) break;
            term *= static_cast<long double>(trials - j) / static_cast<long double>(j + 1) * ratio;
        }
        return std::clamp(static_cast<double>(acc), 0.0, 1.0);
    }
    // lower tail is the smaller one: subtracting it from 1 is stable here
    long double term = std::exp(static_cast<long double>(n) *
                                static_cast<long double>(std::log1p(-p)));
    for (std::uint64_t j = 0; j < k; ++j) {
        acc += term;
        term *= static_cast<long double>(trials - j) / static_cast<long double>(j + 1) * ratio;
    }
    return std::clamp(static_cast<double>(1.0L - acc), 0.0, 1.0);
}

double good_event_bound_fixed(std::uint64_t size, const GoodEventParams& params, double q_minus,
                              std::uint64_t n_strokes, double q_plus) {
    if (size < 1) throw invalid_parameter("good_event_bound_fixed: size must be >= 1");
    if (size > n_strokes)
        throw invalid_parameter("good_event_bound_fixed: size exceeds n_strokes");
    require_prob(q_minus, "good_event_bound_fixed: q_minus");
    // q_plus is a rate bound, not a probability; above 1 it is merely useless
    if (!(q_plus >= 0.0) || !std::isfinite(q_plus))
        throw invalid_parameter("good_event_bound_fixed: q_plus must be finite and >= 0");
    const std::uint64_t m = params.floor_delta_times(size) + 1;
    const double miss =
        binom_coeff(size, m) * std::pow(q_minus, static_cast<double>(m));
    const double mass = static_cast<double>(n_strokes - size) * q_plus;
    const double fire =
        std::pow(mass, static_cast<double>(params.rho + 1)) / factorial(params.rho + 1);
    return miss + fire;
}

double good_event_bound_window(std::uint32_t lower, std::uint32_t upper,
                               const GoodEventParams& params,
                               const std::function<double(std::uint32_t)>& q_minus,
                               const std::function<double(std::uint32_t)>& q_plus,
                               std::uint64_t n_strokes) {
    if (lower < 1) throw invalid_parameter("good_event_bound_window: lower must be >= 1");
    if (lower > upper)
        throw invalid_parameter("good_event_bound_window: lower exceeds upper");
    double worst = 0.0;
    for (std::uint32_t l = lower; l <= upper; ++l)
        worst = std::max(worst, good_event_bound_fixed(l, params, q_minus(l), n_strokes, q_plus(l)));
    return worst;
}

double false_positive_envelope(std::uint64_t n_features, double kappa, double trials) {
    if (!(kappa > 0.0) || !(kappa < 1.0))
        throw invalid_parameter("false_positive_envelope: kappa must lie in (0, 1)");
    if (!(trials >= 0.0) || !std::isfinite(trials))
        throw invalid_parameter("false_positive_envelope: trials must be finite and >= 0");
    const double p = derive_sparsity(n_features);
    const double theta = kappa * std::log(static_cast<double>(n_features));
    const double mean = trials * p;
    if (!(theta > mean))
        throw out_of_regime("false_positive_envelope: requires theta > trials * sparsity");
    if (mean == 0.0) return 0.0;
    return std::exp(theta * (1.0 + std::log(mean / theta)));
}

double cue_size_tail_exponent(double c_factor, std::uint64_t size) {
    if (size < 1) throw invalid_parameter("cue_size_tail_exponent: size must be >= 1");
    if (!(c_factor > 0.0) || !std::isfinite(c_factor))
        throw invalid_parameter("cue_size_tail_exponent: c_factor must be finite and > 0");
    const double ratio = c_factor / (std::exp(1.0) * static_cast<double>(size));
    if (!(ratio > 1.0))
        throw out_of_regime("cue_size_tail_exponent: requires c_factor > e * size");
    return c_factor * std::log(ratio);
}

double cue_size_tail(std::uint64_t n_features, double c_factor, std::uint64_t size) {
    if (n_features < 2)
        throw invalid_parameter("cue_size_tail: n_features must be >= 2");
    const double c = cue_size_tail_exponent(c_factor, size);
    return std::pow(static_cast<double>(n_features), -c);
}

double exact_recovery_exponent(double kappa) {
    if (!(kappa > 0.0) || !(kappa < 1.0))
        throw invalid_parameter("exact_recovery_exponent: kappa must lie in (0, 1)");
    const double gap = 1.0 - kappa;
    return gap * gap / 2.0;
}

double exact_recovery_bound(std::uint64_t n_strokes, std::uint64_t n_features, double kappa) {
    if (n_strokes < 1)
        throw invalid_parameter("exact_recovery_bound: n_strokes must be >= 1");
    if (n_features < 2)
        throw invalid_parameter("exact_recovery_bound: n_features must be >= 2");
    const double a = exact_recovery_exponent(kappa);
    return static_cast<double>(n_strokes) * std::pow(static_cast<double>(n_features), -a);
}

double good_event_bound_sparse(std::uint64_t n_features, std::uint64_t n_strokes,
                               std::uint64_t size, double kappa, std::uint32_t rho,
                               double c_factor,
                               std::optional<double> cue_tail) {
    if (size < 1) throw invalid_parameter("good_event_bound_sparse: size must be >= 1");
    if (size > n_strokes)
        throw invalid_parameter("good_event_bound_sparse: size exceeds n_strokes");
    const double a = exact_recovery_exponent(kappa);
    const double miss =
        static_cast<double>(size) * std::pow(static_cast<double>(n_features), -a);
    const double tail =
        cue_tail.has_value() ? *cue_tail : cue_size_tail(n_features, c_factor, size);
    const double cap = c_factor * std::log(static_cast<double>(n_features));
    const double env = false_positive_envelope(n_features, kappa, cap);
    const double mass = static_cast<double>(n_strokes - size) * env;
    const double fire = std::pow(mass, static_cast<double>(rho + 1)) / factorial(rho + 1);
    return miss + tail + fire;
}

long long margin_threshold(std::uint32_t lower, std::uint32_t upper, double delta,
                           std::uint32_t rho, double a, double b) {
    if (lower > upper) throw invalid_parameter("margin_threshold: lower exceeds upper");
    if (!(a > 0.0) || !std::isfinite(a))
        throw invalid_parameter("margin_threshold: a must be finite and > 0");
    if (!(b >= 0.0) || !std::isfinite(b))
        throw invalid_parameter("margin_threshold: b must be finite and >= 0");
    if (!(delta >= 0.0) || !(delta < 1.0))
        throw invalid_parameter("margin_threshold: delta must lie in [0, 1)");
    const double margin = (1.0 - delta) * static_cast<double>(lower) -
                          static_cast<double>(rho) -
                          (b / a) * static_cast<double>(upper - lower);
    // snap near-integers before flooring so "strictly below" survives rounding
    const double nearest = std::round(margin);
    if (std::fabs(margin - nearest) < 1e-9)
        return static_cast<long long>(std::llround(nearest)) - 1;
    return static_cast<long long>(std::floor(margin));
}

BoundReport simple_overlap_condition(std::uint64_t n_concepts, std::uint64_t upper,
                                     std::uint64_t n_strokes, std::uint64_t t, double target) {
    if (n_concepts < 1)
        throw invalid_parameter("simple_overlap_condition: n_concepts must be >= 1");
    if (n_strokes < 1)
        throw invalid_parameter("simple_overlap_condition: n_strokes must be >= 1");
    if (!(target >= 0.0))
        throw invalid_parameter("simple_overlap_condition: target must be >= 0");
    const double base = 2.0 * static_cast<double>(upper) * static_cast<double>(upper) /
                        static_cast<double>(n_strokes);
    BoundReport r;
    r.name = "simple_overlap_condition";
    r.inputs = {{"n_concepts", static_cast<double>(n_concepts)},
                {"upper", static_cast<double>(upper)},
                {"n_strokes", static_cast<double>(n_strokes)},
                {"t", static_cast<double>(t)},
                {"target", target}};
    r.value = static_cast<double>(n_concepts) * std::pow(base, static_cast<double>(t + 1));
    r.satisfied = r.value <= target;
    return r;
}

BoundReport capacity_exponent_check(double gamma, double r, std::uint64_t t, bool uniform) {
    if (!std::isfinite(gamma) || !std::isfinite(r) || !(r >= 0.0))
        throw invalid_parameter("capacity_exponent_check: gamma and r must be finite, r >= 0");
    const double needed =
        (uniform ? 2.0 : 1.0) * r / static_cast<double>(t + 1);
    BoundReport rep;
    rep.name = "capacity_exponent_check";
    rep.inputs = {{"gamma", gamma},
                  {"r", r},
                  {"t", static_cast<double>(t)},
                  {"uniform", uniform ? 1.0 : 0.0}};
    rep.value = needed;
    rep.satisfied = gamma > needed;
    return rep;
}

double retrieval_error_bound_variable(std::uint64_t n_concepts, std::uint64_t upper,
                                      std::uint64_t n_strokes, long long t_window,
                                      double good_event_term, double size_tail_term) {
    if (n_concepts < 1)
        throw invalid_parameter("retrieval_error_bound_variable: n_concepts must be >= 1");
    if (upper < 1 || upper > n_strokes)
        throw invalid_parameter("retrieval_error_bound_variable: upper must lie in [1, n_strokes]");
    if (t_window < 0)
        throw invalid_parameter("retrieval_error_bound_variable: t_window must be >= 0");
    if (static_cast<std::uint64_t>(t_window) >= n_strokes)
        throw invalid_parameter("retrieval_error_bound_variable: t_window must be below n_strokes");
    if (!(good_event_term >= 0.0) || !(size_tail_term >= 0.0))
        throw invalid_parameter("retrieval_error_bound_variable: additive terms must be >= 0");
    const auto t = static_cast<std::uint64_t>(t_window);
    const double ratio =
        static_cast<double>(upper) / static_cast<double>(n_strokes - t);
    const double cross = static_cast<double>(n_concepts - 1) * binom_coeff(upper, t + 1) *
                         std::pow(ratio, static_cast<double>(t + 1));
    return cross + good_event_term + size_tail_term;
}

double exp_size_tail(double c1, double c2, double upper) {
    if (!(c1 >= 0.0) || !std::isfinite(c1))
        throw invalid_parameter("exp_size_tail: c1 must be finite and >= 0");
    if (!(c2 >= 0.0) || !std::isfinite(c2))
        throw invalid_parameter("exp_size_tail: c2 must be finite and >= 0");
    return c1 * std::exp(-c2 * upper);
}

} // namespace scmem::bounds
