#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scmem/retrieval.hpp"

using namespace scmem;

namespace {

// Dense re-computation of per-stroke overlaps, used as the oracle for the
// sparse merge implementation.
std::vector<std::uint32_t> dense_overlaps(const StrokeDictionary& dict, const Cue& cue) {
    std::vector<char> on(dict.n_features, 0);
    for (const auto i : cue.on) on[i] = 1;
    std::vector<std::uint32_t> out(dict.size(), 0);
    for (std::size_t mu = 0; mu < dict.size(); ++mu)
        for (const auto i : dict.strokes[mu])
            if (on[i]) ++out[mu];
    return out;
}

Activation make_act(std::uint64_t n, std::vector<std::uint32_t> active) {
    Activation a;
    a.n_strokes = n;
    a.active = std::move(active);
    return a;
}

ConceptBook make_book(std::uint64_t n, std::vector<std::vector<std::uint32_t>> concepts) {
    ConceptBook b;
    b.n_strokes = n;
    b.concepts = std::move(concepts);
    return b;
}

} // namespace

TEST_CASE("overlaps equals the dense oracle on random instances") {
    const auto params = ModelParams::make(128, 40, 5, 0.5, SizeSpec::fixed(4));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto dict = sample_stroke_dictionary(params, Rng(seed));
        const auto book = sample_concept_book(params, Rng(seed + 1000));
        const auto cue = compose_cue(dict, book, 0);
        CHECK(overlaps(dict, cue) == dense_overlaps(dict, cue));
    }
}

TEST_CASE("stroke_layer applies an inclusive real threshold") {
    const std::vector<std::uint32_t> counts{0, 2, 3, 1, 2};
    const auto act = stroke_layer(counts, 2.0);
    CHECK(act.n_strokes == 5);
    CHECK(act.active == std::vector<std::uint32_t>{1, 2, 4}); // count >= 2, inclusive
    CHECK(stroke_layer(counts, 1.5).active == std::vector<std::uint32_t>{1, 2, 4});
    CHECK(stroke_layer(counts, 0.5).active == std::vector<std::uint32_t>{1, 2, 3, 4});
    CHECK(stroke_layer(counts, 0.0).active == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    CHECK(stroke_layer(counts, 3.1).active.empty());
}

TEST_CASE("concept_scores: hand-worked case for all three rules") {
    const auto book = make_book(4, {{0, 1}, {1, 2}, {3}});
    const auto act = make_act(4, {0, 1});
    // hits: 2, 1, 0

    const auto plain = concept_scores(book, act, ScoreKind::plain());
    CHECK(plain.scores == std::vector<double>{2.0, 1.0, 0.0});

    const auto pen = concept_scores(book, act, ScoreKind::penalised(1.0, 0.5));
    CHECK(pen.scores == std::vector<double>{1.0, 0.0, -0.5});

    const auto norm = concept_scores(book, act, ScoreKind::normalised());
    CHECK(norm.scores == std::vector<double>{1.0, 0.5, 0.0});

    CHECK_THROWS_AS(ScoreKind::penalised(0.0, 0.5), invalid_parameter);
    CHECK_THROWS_AS(ScoreKind::penalised(1.0, -0.1), invalid_parameter);
}

TEST_CASE("wta_decode breaks ties toward the lowest index") {
    ScoreTable t;
    t.kind = ScoreKind::plain();
    t.scores = {1.0, 3.0, 3.0, 2.0};
    CHECK(wta_decode(t) == 1);
    t.scores = {2.0, 2.0, 2.0};
    CHECK(wta_decode(t) == 0);
    t.scores = {};
    CHECK_THROWS_AS(wta_decode(t), contract_error);
}

TEST_CASE("window_decode restricts to eligible sizes") {
    const auto book = make_book(6, {{0}, {1, 2, 3}, {2, 4}, {0, 1, 2, 3, 4}});
    const auto act = make_act(6, {0, 1, 2, 3, 4});
    // plain scores: 1, 3, 2, 5; sizes: 1, 3, 2, 5
    CHECK(window_decode(book, act, 2, 3, ScoreKind::plain()) == 1);
    CHECK(window_decode(book, act, 1, 5, ScoreKind::plain()) == 3);
    CHECK(window_decode(book, act, 2, 2, ScoreKind::plain()) == 2);
    CHECK_THROWS_AS(window_decode(book, act, 6, 9, ScoreKind::plain()), empty_window_error);
    CHECK_THROWS_AS(window_decode(book, act, 3, 2, ScoreKind::plain()), invalid_parameter);
}

TEST_CASE("error_counts splits misses and intrusions") {
    const auto act = make_act(8, {1, 2, 5});
    const std::vector<std::uint32_t> target{1, 3, 5};
    const auto err = error_counts(act, target);
    CHECK(err.target_size == 3);
    CHECK(err.false_negatives == 1); // 3 missing
    CHECK(err.false_positives == 1); // 2 intrudes

    // conservation: hits + misses = target size, on random instances
    Rng g(17);
    for (int rep = 0; rep < 200; ++rep) {
        const std::uint64_t m = 10 + g.below(30);
        const auto tgt = g.subset(m, 1 + g.below(6));
        const auto a = make_act(m, g.subset(m, g.below(m + 1)));
        const auto e = error_counts(a, tgt);
        std::uint32_t hits = 0;
        for (const auto mu : tgt)
            if (a.is_active(mu)) ++hits;
        CHECK(hits + e.false_negatives == tgt.size());
        CHECK(e.false_positives == a.active.size() - hits);
    }
}

TEST_CASE("good_event: rational delta is exact where doubles round") {
    // delta = 1/3, size 3: one miss is exactly on budget
    const auto ratio = GoodEventParams::ratio(1, 3, 0);
    ErrorCounts err;
    err.target_size = 3;
    err.false_negatives = 1;
    err.false_positives = 0;
    CHECK(good_event(err, ratio));
    err.false_negatives = 2;
    CHECK_FALSE(good_event(err, ratio));

    // the rounded real 0.333333333 lies below 1/3, so the same miss fails
    const auto real = GoodEventParams::real(0.333333333, 0);
    err.false_negatives = 1;
    CHECK_FALSE(good_event(err, real));

    // intrusion budget is a plain integer comparison
    const auto rho1 = GoodEventParams::real(0.5, 1);
    err.target_size = 4;
    err.false_negatives = 2;
    err.false_positives = 1;
    CHECK(good_event(err, rho1));
    err.false_positives = 2;
    CHECK_FALSE(good_event(err, rho1));

    CHECK_THROWS_AS(GoodEventParams::ratio(1, 0, 0), invalid_parameter);
    CHECK_THROWS_AS(GoodEventParams::ratio(-1, 3, 0), invalid_parameter);
    CHECK_THROWS_AS(GoodEventParams::real(-0.25, 0), invalid_parameter);

    // floor helper: exact at integer products
    CHECK(GoodEventParams::ratio(2, 5, 0).floor_delta_times(5) == 2);
    CHECK(GoodEventParams::ratio(1, 3, 0).floor_delta_times(7) == 2);
    CHECK(GoodEventParams::real(0.4, 0).floor_delta_times(5) == 2);
}

TEST_CASE("max_overlap scans competitors, optionally inside a window") {
    const auto book = make_book(10, {{0, 1, 2}, {2, 3, 4}, {0, 1, 9}, {5}});
    CHECK(max_overlap(book, 0) == 2);          // against {0,1,9}
    CHECK(max_overlap(book, 3) == 0);          // disjoint from everyone
    CHECK(max_overlap(book, 0, 3, 3) == 2);    // same-size competitors only
    CHECK(max_overlap(book, 0, 1, 1) == 0);    // only {5} eligible
    CHECK(max_overlap(book, 0, 4, 9) == 0);    // nobody eligible -> 0
    const auto lone = make_book(4, {{0, 1}});
    CHECK(max_overlap(lone, 0) == 0);
}

TEST_CASE("check_separation: worked cases") {
    ErrorCounts err;
    err.target_size = 4;
    err.false_negatives = 1;
    err.false_positives = 1;
    const auto gp = GoodEventParams::ratio(1, 4, 1); // delta = 0.25, rho = 1

    // plain: t + rho < (1 - delta) L  <=>  t + 1 < 3
    CHECK(check_separation(4, 4, 1, err, gp, ScoreKind::plain()));
    CHECK_FALSE(check_separation(4, 4, 2, err, gp, ScoreKind::plain()));

    // penalised, larger competitor helps: 0 < 3 - 1 - 0.5 (4 - 6) = 3
    CHECK(check_separation(4, 6, 0, err, gp, ScoreKind::penalised(1.0, 0.5)));
    CHECK(check_separation(4, 6, 2, err, gp, ScoreKind::penalised(1.0, 0.5)));
    CHECK_FALSE(check_separation(4, 6, 3, err, gp, ScoreKind::penalised(1.0, 0.5)));
    // smaller competitor costs margin: t < 3 - 1 - 0.5 (4 - 2) = 1
    CHECK(check_separation(4, 2, 0, err, gp, ScoreKind::penalised(1.0, 0.5)));
    CHECK_FALSE(check_separation(4, 2, 1, err, gp, ScoreKind::penalised(1.0, 0.5)));

    // normalised compares against the competitor size
    ErrorCounts err2;
    err2.target_size = 4;
    err2.false_negatives = 0;
    err2.false_positives = 0;
    const auto gp0 = GoodEventParams::ratio(1, 4, 0);
    CHECK(check_separation(4, 2, 1, err2, gp0, ScoreKind::normalised()));        // 1 < 1.5
    CHECK_FALSE(check_separation(4, 2, 2, err2, gp0, ScoreKind::normalised()));  // 2 < 1.5 fails
    const auto gp1 = GoodEventParams::ratio(1, 4, 1);
    CHECK_FALSE(check_separation(4, 2, 1, err2, gp1, ScoreKind::normalised()));  // 2 < 1.5 fails

    // the certificate only speaks on the good event
    ErrorCounts bad;
    bad.target_size = 4;
    bad.false_negatives = 3;
    bad.false_positives = 0;
    CHECK_THROWS_AS(check_separation(4, 4, 0, bad, gp, ScoreKind::plain()), contract_error);
}

// The theorem behind the certificate: whenever the error budget holds and
// every competitor passes check_separation, the decoder must return the
// target.  Randomised here at moderate scale; the acceptance suite rechecks
// at 10^4 instances per rule.
TEST_CASE("separation certificate implies correct decoding") {
    Rng g(4242);
    const std::vector<ScoreKind> kinds{ScoreKind::plain(), ScoreKind::penalised(1.0, 0.25),
                                       ScoreKind::normalised()};
    for (const auto& kind : kinds) {
        int checked = 0;
        int attempts = 0;
        while (checked < 2000 && attempts < 200000) {
            ++attempts;
            const std::uint64_t m = 40 + g.below(40);
            const std::uint64_t n_concepts = 2 + g.below(5);
            ConceptBook book;
            book.n_strokes = m;
            for (std::uint64_t b = 0; b < n_concepts; ++b)
                book.concepts.push_back(g.subset(m, 2 + g.below(7)));
            const auto alpha = static_cast<std::uint32_t>(g.below(n_concepts));
            const auto& target = book.concepts[alpha];
            const auto L = static_cast<std::uint32_t>(target.size());

            const auto gp = GoodEventParams::ratio(1, 4, static_cast<std::uint32_t>(g.below(2)));

            // build an activation obeying the budget: drop at most floor(L/4)
            // target strokes, insert at most rho outsiders
            const std::uint64_t drops = g.below(gp.floor_delta_times(L) + 1);
            const std::uint64_t adds = g.below(static_cast<std::uint64_t>(gp.rho) + 1);
            std::vector<std::uint32_t> active = target;
            for (std::uint64_t d = 0; d < drops; ++d)
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(g.below(active.size())));
            for (std::uint64_t aidx = 0; aidx < adds; ++aidx) {
                const auto cand = static_cast<std::uint32_t>(g.below(m));
                if (!std::binary_search(target.begin(), target.end(), cand)) {
                    const auto it = std::lower_bound(active.begin(), active.end(), cand);
                    if (it == active.end() || *it != cand) active.insert(it, cand);
                }
            }
            Activation act;
            act.n_strokes = m;
            act.active = active;
            const auto err = error_counts(act, target);
            REQUIRE(good_event(err, gp));

            bool all_separated = true;
            for (std::uint32_t beta = 0; beta < n_concepts && all_separated; ++beta) {
                if (beta == alpha) continue;
                std::vector<std::uint32_t> inter;
                std::set_intersection(target.begin(), target.end(), book.concepts[beta].begin(),
                                      book.concepts[beta].end(), std::back_inserter(inter));
                all_separated = check_separation(L, book.concept_size(beta),
                                                 static_cast<std::uint32_t>(inter.size()), err, gp,
                                                 kind);
            }
            if (!all_separated) continue;
            ++checked;
            CHECK(wta_decode(concept_scores(book, act, kind)) == alpha);
        }
        REQUIRE(checked == 2000);
    }
}

TEST_CASE("on the good event the target score clears the (1-delta)L floor") {
    // integer form: hits >= ceil((1 - delta) L) for delta = num/den
    Rng g(888);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::uint32_t L = 1 + static_cast<std::uint32_t>(g.below(30));
        const std::int64_t den = 2 + static_cast<std::int64_t>(g.below(8));
        const std::int64_t num = static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(den)));
        const auto gp = GoodEventParams::ratio(num, den, 2);
        const auto budget = gp.floor_delta_times(L);
        const auto fn = static_cast<std::uint32_t>(g.below(budget + 1));
        const std::uint32_t hits = L - fn;
        // ceil((den - num) L / den) in integers
        const std::int64_t ceil_floor =
            ((den - num) * static_cast<std::int64_t>(L) + den - 1) / den;
        CHECK(static_cast<std::int64_t>(hits) >= ceil_floor);
    }
}
