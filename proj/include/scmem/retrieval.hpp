#pragma once

#include <cstdint>
#include <vector>

#include "scmem/model.hpp"

namespace scmem {

// Stroke-layer state after thresholding; sorted active index list.
struct Activation {
    std::uint64_t n_strokes = 0;
    std::vector<std::uint32_t> active;

    bool is_active(std::uint32_t mu) const;
};

struct ErrorCounts {
    std::uint32_t false_negatives = 0; // target strokes missing from the activation
    std::uint32_t false_positives = 0; // active strokes outside the target
    std::uint32_t target_size = 0;
};

enum class ScoreRule { plain, penalised, normalised };

// plain:      score = hits
// penalised:  score = a * hits - b * size      (a > 0, b >= 0)
// normalised: score = hits / size
struct ScoreKind {
    ScoreRule rule = ScoreRule::plain;
    double a = 1.0;
    double b = 0.0;

    static ScoreKind plain() { return {ScoreRule::plain, 1.0, 0.0}; }
    static ScoreKind penalised(double a, double b);
    static ScoreKind normalised() { return {ScoreRule::normalised, 1.0, 0.0}; }
};

struct ScoreTable {
    ScoreKind kind;
    std::vector<double> scores;
};

// Tolerated error budget: false_negatives <= delta * target_size and
// false_positives <= rho.  When delta is handed over as a ratio of integers
// the first comparison is evaluated in exact integer arithmetic; otherwise it
// is a plain real comparison, no epsilon.
struct GoodEventParams {
    double delta = 0.0;
    std::uint32_t rho = 0;
    std::int64_t delta_num = 0;
    std::int64_t delta_den = 0; // 0 means "no exact form"

    static GoodEventParams real(double delta, std::uint32_t rho);
    static GoodEventParams ratio(std::int64_t num, std::int64_t den, std::uint32_t rho);

    bool has_ratio() const { return delta_den > 0; }
    // floor(delta * size), exact when a ratio is present.
    std::uint64_t floor_delta_times(std::uint64_t size) const;
};

// Per-stroke overlap counts |supp(stroke) ∩ supp(cue)|.
std::vector<std::uint32_t> overlaps(const StrokeDictionary& dict, const Cue& cue);

// Inclusive comparison against the real-valued threshold.
Activation stroke_layer(const std::vector<std::uint32_t>& overlap_counts, double threshold);

ScoreTable concept_scores(const ConceptBook& book, const Activation& act, ScoreKind kind);

// Arg-max with lowest-index tie break.  Empty table is a contract violation.
std::uint32_t wta_decode(const ScoreTable& scores);

// Arg-max restricted to concepts whose size lies in [lower, upper]; throws
// empty_window_error when no concept qualifies.
std::uint32_t window_decode(const ConceptBook& book, const Activation& act, std::uint32_t lower,
                            std::uint32_t upper, ScoreKind kind);

ErrorCounts error_counts(const Activation& act, const std::vector<std::uint32_t>& target);
ErrorCounts error_counts(const Activation& act, const ConceptBook& book, std::uint32_t alpha);

bool good_event(const ErrorCounts& err, const GoodEventParams& params);

// Largest pairwise overlap |S_alpha ∩ S_beta| over competitors beta != alpha,
// optionally restricted to competitor sizes in [lower, upper].  0 when there
// is no competitor.
std::uint32_t max_overlap(const ConceptBook& book, std::uint32_t alpha);
std::uint32_t max_overlap(const ConceptBook& book, std::uint32_t alpha, std::uint32_t lower,
                          std::uint32_t upper);

// Certificate that one competitor cannot outscore the target when the error
// budget holds.  `overlap` is |S_alpha ∩ S_beta|.  Preconditions: the good
// event holds for `err` (contract error otherwise); penalised needs a > 0.
//   plain:      overlap + rho < (1 - delta) * target_size
//   penalised:  overlap < (1 - delta) * target_size - rho
//                         - (b/a) * (target_size - competitor_size)
//   normalised: overlap + rho < (1 - delta) * competitor_size
bool check_separation(std::uint32_t target_size, std::uint32_t competitor_size,
                      std::uint32_t overlap, const ErrorCounts& err,
                      const GoodEventParams& params, ScoreKind kind);

} // namespace scmem
