#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "scmem/rng.hpp"

namespace scmem {

// Law of the concept sizes.  `lower_cut`/`upper_cut` do not truncate sampling;
// they carry the size window that restricted decoding and the window-form
// failure estimates refer to.
struct SizeSpec {
    enum class Kind { fixed, poisson_conditioned, empirical };

    Kind kind = Kind::fixed;
    std::uint32_t fixed_size = 0;                             // fixed
    double lambda = 0.0;                                      // poisson_conditioned
    std::vector<std::pair<std::uint32_t, double>> weights;    // empirical (size, weight)
    std::uint32_t lower_cut = 0;
    std::uint32_t upper_cut = 0;

    static SizeSpec fixed(std::uint32_t size);
    static SizeSpec poisson_conditioned(double lambda, std::uint32_t lower_cut,
                                        std::uint32_t upper_cut);
    static SizeSpec empirical(std::vector<std::pair<std::uint32_t, double>> weights,
                              std::uint32_t lower_cut, std::uint32_t upper_cut);

    bool is_fixed() const { return kind == Kind::fixed; }

    // Largest size the law can emit; unbounded() for the Poisson family.
    static constexpr std::uint32_t unbounded() { return std::numeric_limits<std::uint32_t>::max(); }
    std::uint32_t max_size() const;

    double pmf(std::uint32_t size) const;
    // P(size outside [lo, hi]).
    double window_miss_prob(std::uint32_t lo, std::uint32_t hi) const;

    std::uint32_t sample(Rng& rng) const;

    void validate() const; // throws invalid_parameter
};

double derive_sparsity(std::uint64_t n_features); // ln(n) / n, n >= 2

struct ModelParams {
    std::uint64_t n_features = 0; // feature-layer width
    std::uint64_t n_strokes = 0;  // stroke inventory size
    std::uint64_t n_concepts = 0; // book size
    double kappa = 0.0;           // firing threshold factor, in (0, 1)
    double sparsity = 0.0;        // per-feature on-probability
    double threshold = 0.0;       // kappa * ln(n_features), never rounded
    SizeSpec sizes;

    static ModelParams make(std::uint64_t n_features, std::uint64_t n_strokes,
                            std::uint64_t n_concepts, double kappa, SizeSpec sizes);

    // Test hook: same validation but with the sparsity pinned by hand
    // (e.g. 0 to force empty strokes) instead of derived from n_features.
    static ModelParams make_with_sparsity(std::uint64_t n_features, std::uint64_t n_strokes,
                                          std::uint64_t n_concepts, double kappa, double sparsity,
                                          SizeSpec sizes);
};

// Sparse binary strokes; each support is a sorted, duplicate-free feature list.
struct StrokeDictionary {
    std::uint64_t n_features = 0;
    std::vector<std::vector<std::uint32_t>> strokes;

    std::size_t size() const { return strokes.size(); }
    std::size_t weight(std::size_t mu) const { return strokes[mu].size(); }
};

// Concepts as sorted stroke-index subsets.  Distinct concepts may collide
// (identical subsets are allowed and flagged downstream, not rejected).
struct ConceptBook {
    std::uint64_t n_strokes = 0;
    std::vector<std::vector<std::uint32_t>> concepts;

    std::size_t size() const { return concepts.size(); }
    std::uint32_t concept_size(std::size_t alpha) const {
        return static_cast<std::uint32_t>(concepts[alpha].size());
    }
};

// Feature-layer cue: sorted support of the union of the member strokes.
struct Cue {
    std::uint64_t n_features = 0;
    std::vector<std::uint32_t> on;

    std::size_t weight() const { return on.size(); }
};

// Stroke mu draws its own child stream (mu-indexed) off `rng`, so dictionaries
// agree between serial and parallel callers.  Per stroke: weight ~ Bin(n_features,
// sparsity), then a uniform subset of that weight; jointly this is the i.i.d.
// per-feature Bernoulli law.
StrokeDictionary sample_stroke_dictionary(const ModelParams& params, const Rng& rng);

// Concept alpha draws size then a uniform subset of strokes from its own
// alpha-indexed child stream.  An emitted size > n_strokes is an error.
ConceptBook sample_concept_book(const ModelParams& params, const Rng& rng);

Cue compose_cue(const StrokeDictionary& dict, const ConceptBook& book, std::uint32_t alpha);

// Sorted union of all stroke indices referenced by the book.
std::vector<std::uint32_t> used_strokes(const ConceptBook& book);

} // namespace scmem
