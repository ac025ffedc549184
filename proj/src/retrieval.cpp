#include "scmem/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "scmem/errors.hpp"

namespace scmem {

bool Activation::is_active(std::uint32_t mu) const {
    return std::binary_search(active.begin(), active.end(), mu);
}

ScoreKind ScoreKind::penalised(double a, double b) {
    if (!(a > 0.0)) throw invalid_parameter("ScoreKind::penalised: a must be > 0");
    if (b < 0.0) throw invalid_parameter("ScoreKind::penalised: b must be >= 0");
    return {ScoreRule::penalised, a, b};
}

GoodEventParams GoodEventParams::real(double delta, std::uint32_t rho) {
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw invalid_parameter("GoodEventParams: delta must be a finite value >= 0");
    GoodEventParams p;
    p.delta = delta;
    p.rho = rho;
    return p;
}

GoodEventParams GoodEventParams::ratio(std::int64_t num, std::int64_t den, std::uint32_t rho) {
    if (num < 0 || den <= 0)
        throw invalid_parameter("GoodEventParams: delta ratio needs num >= 0 and den > 0");
    GoodEventParams p;
    p.delta = static_cast<double>(num) / static_cast<double>(den);
    p.rho = rho;
    p.delta_num = num;
    p.delta_den = den;
    return p;
}

std::uint64_t GoodEventParams::floor_delta_times(std::uint64_t size) const {
    if (has_ratio())
        return static_cast<std::uint64_t>(delta_num) * size / static_cast<std::uint64_t>(delta_den);
    return static_cast<std::uint64_t>(std::floor(delta * static_cast<double>(size)));
}

std::vector<std::uint32_t> overlaps(const StrokeDictionary& dict, const Cue& cue) {
    std::vector<char> on(dict.n_features, 0);
    for (const auto i : cue.on) on[i] = 1;
    std::vector<std::uint32_t> out(dict.size(), 0);
    for (std::size_t mu = 0; mu < dict.size(); ++mu) {
        std::uint32_t o = 0;
        for (const auto i : dict.strokes[mu]) o += on[i];
        out[mu] = o;
    }
    return out;
}

Activation stroke_layer(const std::vector<std::uint32_t>& overlap_counts, double threshold) {
    Activation act;
    act.n_strokes = overlap_counts.size();
    for (std::uint32_t mu = 0; mu < overlap_counts.size(); ++mu)
        if (static_cast<double>(overlap_counts[mu]) >= threshold) act.active.push_back(mu);
    return act;
}

namespace {

std::uint32_t count_hits(const std::vector<std::uint32_t>& concept_strokes,
                         const Activation& act) {
    std::uint32_t hits = 0;
    for (const auto mu : concept_strokes)
        if (act.is_active(mu)) ++hits;
    return hits;
}

double score_of(std::uint32_t hits, std::uint32_t size, ScoreKind kind) {
    switch (kind.rule) {
        case ScoreRule::plain: return static_cast<double>(hits);
        case ScoreRule::penalised:
            return kind.a * static_cast<double>(hits) - kind.b * static_cast<double>(size);
        case ScoreRule::normalised:
            return static_cast<double>(hits) / static_cast<double>(size);
    }
    return 0.0;
}

} // namespace

ScoreTable concept_scores(const ConceptBook& book, const Activation& act, ScoreKind kind) {
    ScoreTable table;
    table.kind = kind;
    table.scores.reserve(book.size());
    for (std::size_t b = 0; b < book.size(); ++b)
        table.scores.push_back(score_of(count_hits(book.concepts[b], act),
                                        book.concept_size(b), kind));
    return table;
}

std::uint32_t wta_decode(const ScoreTable& scores) {
    if (scores.scores.empty()) throw contract_error("wta_decode: empty score table");
    std::uint32_t best = 0;
    for (std::uint32_t b = 1; b < scores.scores.size(); ++b)
        if (scores.scores[b] > scores.scores[best]) best = b;
    return best;
}

std::uint32_t window_decode(const ConceptBook& book, const Activation& act, std::uint32_t lower,
                            std::uint32_t upper, ScoreKind kind) {
    if (lower > upper) throw invalid_parameter("window_decode: lower exceeds upper");
    bool any = false;
    std::uint32_t best = 0;
    double best_score = 0.0;
    for (std::uint32_t b = 0; b < book.size(); ++b) {
        const auto size = book.concept_size(b);
        if (size < lower || size > upper) continue;
        const double s = score_of(count_hits(book.concepts[b], act), size, kind);
        if (!any || s > best_score) {
            any = true;
            best = b;
            best_score = s;
        }
    }
    if (!any) throw empty_window_error("window_decode: no concept size inside the window");
    return best;
}

ErrorCounts error_counts(const Activation& act, const std::vector<std::uint32_t>& target) {
    ErrorCounts err;
    err.target_size = static_cast<std::uint32_t>(target.size());
    std::uint32_t hits = 0;
    for (const auto mu : target)
        if (act.is_active(mu)) ++hits;
    err.false_negatives = err.target_size - hits;
    err.false_positives = static_cast<std::uint32_t>(act.active.size()) - hits;
    return err;
}

ErrorCounts error_counts(const Activation& act, const ConceptBook& book, std::uint32_t alpha) {
    if (alpha >= book.size()) throw contract_error("error_counts: concept index out of range");
    return error_counts(act, book.concepts[alpha]);
}

bool good_event(const ErrorCounts& err, const GoodEventParams& params) {
    if (err.false_positives > params.rho) return false;
    if (params.has_ratio()) {
        // F- <= (num/den) L exactly, in integers
        return static_cast<std::int64_t>(err.false_negatives) * params.delta_den <=
               params.delta_num * static_cast<std::int64_t>(err.target_size);
    }
    return static_cast<double>(err.false_negatives) <=
           params.delta * static_cast<double>(err.target_size);
}

namespace {

std::uint32_t pair_overlap(const std::vector<std::uint32_t>& a,
                           const std::vector<std::uint32_t>& b) {
    std::uint32_t o = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else {
            ++o;
            ++ia;
            ++ib;
        }
    }
    return o;
}

} // namespace

std::uint32_t max_overlap(const ConceptBook& book, std::uint32_t alpha) {
    return max_overlap(book, alpha, 0, std::numeric_limits<std::uint32_t>::max());
}

std::uint32_t max_overlap(const ConceptBook& book, std::uint32_t alpha, std::uint32_t lower,
                          std::uint32_t upper) {
    if (alpha >= book.size()) throw contract_error("max_overlap: concept index out of range");
    std::uint32_t best = 0;
    for (std::uint32_t b = 0; b < book.size(); ++b) {
        if (b == alpha) continue;
        const auto size = book.concept_size(b);
        if (size < lower || size > upper) continue;
        best = std::max(best, pair_overlap(book.concepts[alpha], book.concepts[b]));
    }
    return best;
}

bool check_separation(std::uint32_t target_size, std::uint32_t competitor_size,
                      std::uint32_t overlap, const ErrorCounts& err,
                      const GoodEventParams& params, ScoreKind kind) {
    ErrorCounts scoped = err;
    scoped.target_size = target_size;
    if (!good_event(scoped, params))
        throw contract_error("check_separation: the error budget does not hold");
    const std::int64_t lhs = static_cast<std::int64_t>(overlap) + params.rho;
    switch (kind.rule) {
        case ScoreRule::plain:
            if (params.has_ratio())
                return lhs * params.delta_den <
                       (params.delta_den - params.delta_num) * static_cast<std::int64_t>(target_size);
            return static_cast<double>(lhs) <
                   (1.0 - params.delta) * static_cast<double>(target_size);
        case ScoreRule::penalised: {
            const double margin = (1.0 - params.delta) * static_cast<double>(target_size) -
                                  static_cast<double>(params.rho) -
                                  (kind.b / kind.a) * (static_cast<double>(target_size) -
                                                       static_cast<double>(competitor_size));
            return static_cast<double>(overlap) < margin;
        }
        case ScoreRule::normalised:
            if (params.has_ratio())
                return lhs * params.delta_den < (params.delta_den - params.delta_num) *
                                                    static_cast<std::int64_t>(competitor_size);
            return static_cast<double>(lhs) <
                   (1.0 - params.delta) * static_cast<double>(competitor_size);
    }
    return false;
}

} // namespace scmem
