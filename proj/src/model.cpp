#include "scmem/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "scmem/errors.hpp"

namespace scmem {

SizeSpec SizeSpec::fixed(std::uint32_t size) {
    SizeSpec s;
    s.kind = Kind::fixed;
    s.fixed_size = size;
    s.lower_cut = size;
    s.upper_cut = size;
    s.validate();
    return s;
}

SizeSpec SizeSpec::poisson_conditioned(double lambda, std::uint32_t lower_cut,
                                       std::uint32_t upper_cut) {
    SizeSpec s;
    s.kind = Kind::poisson_conditioned;
    s.lambda = lambda;
    s.lower_cut = lower_cut;
    s.upper_cut = upper_cut;
    s.validate();
    return s;
}

SizeSpec SizeSpec::empirical(std::vector<std::pair<std::uint32_t, double>> weights,
                             std::uint32_t lower_cut, std::uint32_t upper_cut) {
    SizeSpec s;
    s.kind = Kind::empirical;
    s.weights = std::move(weights);
    s.lower_cut = lower_cut;
    s.upper_cut = upper_cut;
    s.validate();
    // store normalised so pmf and sampling agree exactly
    double total = 0.0;
    for (const auto& [size, w] : s.weights) total += w;
    for (auto& [size, w] : s.weights) w /= total;
    return s;
}

std::uint32_t SizeSpec::max_size() const {
    switch (kind) {
        case Kind::fixed: return fixed_size;
        case Kind::poisson_conditioned: return unbounded();
        case Kind::empirical: {
            std::uint32_t mx = 0;
            for (const auto& [size, w] : weights) mx = std::max(mx, size);
            return mx;
        }
    }
    return 0;
}

double SizeSpec::pmf(std::uint32_t size) const {
    switch (kind) {
        case Kind::fixed: return size == fixed_size ? 1.0 : 0.0;
        case Kind::poisson_conditioned: {
            if (size == 0) return 0.0;
            const double norm = -std::expm1(-lambda);
            return std::exp(static_cast<double>(size) * std::log(lambda) - lambda -
                            std::lgamma(static_cast<double>(size) + 1.0)) /
                   norm;
        }
        case Kind::empirical: {
            double total = 0.0;
            for (const auto& [s, w] : weights)
                if (s == size) total += w;
            return total;
        }
    }
    return 0.0;
}

double SizeSpec::window_miss_prob(std::uint32_t lo, std::uint32_t hi) const {
    switch (kind) {
        case Kind::fixed: return (fixed_size >= lo && fixed_size <= hi) ? 0.0 : 1.0;
        case Kind::poisson_conditioned: {
            double inside = 0.0;
            for (std::uint32_t k = std::max(1u, lo); k <= hi; ++k) inside += pmf(k);
            return std::max(0.0, 1.0 - inside);
        }
        case Kind::empirical: {
            double outside = 0.0;
            for (const auto& [s, w] : weights)
                if (s < lo || s > hi) outside += w;
            return outside;
        }
    }
    return 0.0;
}

std::uint32_t SizeSpec::sample(Rng& rng) const {
    switch (kind) {
        case Kind::fixed: return fixed_size;
        case Kind::poisson_conditioned:
            return static_cast<std::uint32_t>(rng.poisson_conditioned(lambda));
        case Kind::empirical: {
            const double u = rng.next_unit();
            double cum = 0.0;
            for (const auto& [size, w] : weights) {
                cum += w;
                if (u < cum) return size;
            }
            return weights.back().first;
        }
    }
    return 0;
}

void SizeSpec::validate() const {
    if (lower_cut > upper_cut)
        throw invalid_parameter("SizeSpec: lower_cut exceeds upper_cut");
    switch (kind) {
        case Kind::fixed:
            if (fixed_size == 0) throw invalid_parameter("SizeSpec: fixed size must be >= 1");
            break;
        case Kind::poisson_conditioned:
            if (!(lambda > 0.0))
                throw invalid_parameter("SizeSpec: lambda must be > 0");
            break;
        case Kind::empirical: {
            if (weights.empty())
                throw invalid_parameter("SizeSpec: empirical law needs at least one size");
            double total = 0.0;
            for (const auto& [size, w] : weights) {
                if (size == 0)
                    throw invalid_parameter("SizeSpec: empirical sizes must be >= 1");
                if (w < 0.0 || !std::isfinite(w))
                    throw invalid_parameter("SizeSpec: empirical weights must be >= 0");
                total += w;
            }
            if (!(total > 0.0))
                throw invalid_parameter("SizeSpec: empirical weights must not all vanish");
            break;
        }
    }
}

double derive_sparsity(std::uint64_t n_features) {
    if (n_features < 2)
        throw invalid_parameter("derive_sparsity: need at least two features");
    const double n = static_cast<double>(n_features);
    return std::log(n) / n;
}

ModelParams ModelParams::make(std::uint64_t n_features, std::uint64_t n_strokes,
                              std::uint64_t n_concepts, double kappa, SizeSpec sizes) {
    return make_with_sparsity(n_features, n_strokes, n_concepts, kappa,
                              derive_sparsity(n_features), std::move(sizes));
}

ModelParams ModelParams::make_with_sparsity(std::uint64_t n_features, std::uint64_t n_strokes,
                                            std::uint64_t n_concepts, double kappa, double sparsity,
                                            SizeSpec sizes) {
    if (n_features < 2)
        throw invalid_parameter("ModelParams: need at least two features");
    if (n_strokes == 0) throw invalid_parameter("ModelParams: need at least one stroke");
    if (n_concepts == 0) throw invalid_parameter("ModelParams: need at least one concept");
    if (!(kappa > 0.0) || !(kappa < 1.0))
        throw invalid_parameter("ModelParams: kappa must lie strictly inside (0, 1)");
    if (!(sparsity >= 0.0) || !(sparsity <= 1.0))
        throw invalid_parameter("ModelParams: sparsity must lie in [0, 1]");
    sizes.validate();
    if (sizes.is_fixed() && sizes.fixed_size > n_strokes)
        throw invalid_parameter("ModelParams: fixed concept size exceeds the stroke inventory");
    ModelParams p;
    p.n_features = n_features;
    p.n_strokes = n_strokes;
    p.n_concepts = n_concepts;
    p.kappa = kappa;
    p.sparsity = sparsity;
    p.threshold = kappa * std::log(static_cast<double>(n_features));
    p.sizes = std::move(sizes);
    return p;
}

StrokeDictionary sample_stroke_dictionary(const ModelParams& params, const Rng& rng) {
    StrokeDictionary dict;
    dict.n_features = params.n_features;
    dict.strokes.resize(params.n_strokes);
    for (std::uint64_t mu = 0; mu < params.n_strokes; ++mu) {
        Rng child = rng.fork(mu);
        const std::uint64_t weight = child.binomial(params.n_features, params.sparsity);
        dict.strokes[mu] = child.subset(params.n_features, weight);
    }
    return dict;
}

ConceptBook sample_concept_book(const ModelParams& params, const Rng& rng) {
    ConceptBook book;
    book.n_strokes = params.n_strokes;
    book.concepts.resize(params.n_concepts);
    for (std::uint64_t alpha = 0; alpha < params.n_concepts; ++alpha) {
        Rng child = rng.fork(alpha);
        const std::uint32_t size = params.sizes.sample(child);
        if (size > params.n_strokes)
            throw invalid_parameter("sample_concept_book: drew a concept size of " +
                                    std::to_string(size) + " with only " +
                                    std::to_string(params.n_strokes) + " strokes");
        book.concepts[alpha] = child.subset(params.n_strokes, size);
    }
    return book;
}

Cue compose_cue(const StrokeDictionary& dict, const ConceptBook& book, std::uint32_t alpha) {
    if (alpha >= book.size())
        throw invalid_parameter("compose_cue: concept index out of range");
    Cue cue;
    cue.n_features = dict.n_features;
    std::set<std::uint32_t> on;
    for (const auto mu : book.concepts[alpha])
        on.insert(dict.strokes[mu].begin(), dict.strokes[mu].end());
    cue.on.assign(on.begin(), on.end());
    return cue;
}

std::vector<std::uint32_t> used_strokes(const ConceptBook& book) {
    std::set<std::uint32_t> used;
    for (const auto& c : book.concepts) used.insert(c.begin(), c.end());
    return {used.begin(), used.end()};
}

} // namespace scmem
