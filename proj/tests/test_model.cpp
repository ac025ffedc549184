#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "scmem/model.hpp"

using namespace scmem;

TEST_CASE("derive_sparsity frozen values") {
    CHECK(derive_sparsity(1000) == doctest::Approx(0.006907755278982137).epsilon(1e-14));
    CHECK(derive_sparsity(3) == doctest::Approx(0.3662040962227032).epsilon(1e-14));
    // smallest legal width: ln(2)/2
    CHECK(derive_sparsity(2) == doctest::Approx(0.34657359027997264).epsilon(1e-14));
    CHECK_THROWS_AS(derive_sparsity(1), invalid_parameter);
    CHECK_THROWS_AS(derive_sparsity(0), invalid_parameter);
}

TEST_CASE("ModelParams derives sparsity and threshold, validates kappa") {
    const auto p = ModelParams::make(4096, 200, 20, 0.5, SizeSpec::fixed(4));
    CHECK(p.sparsity == doctest::Approx(std::log(4096.0) / 4096.0).epsilon(1e-15));
    CHECK(p.threshold == doctest::Approx(0.5 * std::log(4096.0)).epsilon(1e-15));
    CHECK_THROWS_AS(ModelParams::make(4096, 200, 20, 0.0, SizeSpec::fixed(4)), invalid_parameter);
    CHECK_THROWS_AS(ModelParams::make(4096, 200, 20, 1.0, SizeSpec::fixed(4)), invalid_parameter);
    CHECK_THROWS_AS(ModelParams::make(4096, 200, 20, -0.2, SizeSpec::fixed(4)), invalid_parameter);
    CHECK_THROWS_AS(ModelParams::make(4096, 0, 20, 0.5, SizeSpec::fixed(4)), invalid_parameter);
    CHECK_THROWS_AS(ModelParams::make(4096, 200, 0, 0.5, SizeSpec::fixed(4)), invalid_parameter);
    CHECK_THROWS_AS(ModelParams::make(1, 200, 20, 0.5, SizeSpec::fixed(4)), invalid_parameter);
    // fixed sizes larger than the stroke inventory can never be sampled
    CHECK_THROWS_AS(ModelParams::make(4096, 3, 2, 0.5, SizeSpec::fixed(4)), invalid_parameter);

    const auto q = ModelParams::make_with_sparsity(64, 10, 2, 0.5, 0.0, SizeSpec::fixed(2));
    CHECK(q.sparsity == 0.0);
    CHECK_THROWS_AS(ModelParams::make_with_sparsity(64, 10, 2, 0.5, 1.5, SizeSpec::fixed(2)),
                    invalid_parameter);
}

TEST_CASE("SizeSpec validation and window bookkeeping") {
    const auto f = SizeSpec::fixed(4);
    CHECK(f.lower_cut == 4);
    CHECK(f.upper_cut == 4);
    CHECK(f.max_size() == 4);
    CHECK(f.pmf(4) == 1.0);
    CHECK(f.pmf(3) == 0.0);
    CHECK(f.window_miss_prob(2, 9) == 0.0);
    CHECK(f.window_miss_prob(5, 9) == 1.0);
    CHECK_THROWS_AS(SizeSpec::fixed(0), invalid_parameter);

    const auto p = SizeSpec::poisson_conditioned(4.0, 2, 9);
    CHECK(p.max_size() == SizeSpec::unbounded());
    // oracle: 4 e^-4 / (1 - e^-4)
    CHECK(p.pmf(1) == doctest::Approx(0.07462944145509619).epsilon(1e-12));
    CHECK(p.pmf(0) == 0.0);
    // oracle: 1 - P(2 <= K <= 9 | K >= 1)
    CHECK(p.window_miss_prob(2, 9) == doctest::Approx(0.08291341043645816).epsilon(1e-12));
    CHECK_THROWS_AS(SizeSpec::poisson_conditioned(0.0, 1, 5), invalid_parameter);
    CHECK_THROWS_AS(SizeSpec::poisson_conditioned(4.0, 5, 2), invalid_parameter);

    const auto e = SizeSpec::empirical({{2, 0.5}, {5, 1.5}}, 2, 5);
    CHECK(e.pmf(2) == doctest::Approx(0.25).epsilon(1e-15)); // weights renormalised
    CHECK(e.pmf(5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(e.pmf(3) == 0.0);
    CHECK(e.max_size() == 5);
    CHECK(e.window_miss_prob(3, 9) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(SizeSpec::empirical({}, 1, 2), invalid_parameter);
    CHECK_THROWS_AS(SizeSpec::empirical({{0, 1.0}}, 0, 2), invalid_parameter);
    CHECK_THROWS_AS(SizeSpec::empirical({{2, -1.0}}, 2, 2), invalid_parameter);
}

TEST_CASE("stroke dictionary: determinism, support shape, weight statistics") {
    const auto params = ModelParams::make(1024, 10000, 2, 0.5, SizeSpec::fixed(2));
    const Rng rng(99);
    const auto d1 = sample_stroke_dictionary(params, rng);
    const auto d2 = sample_stroke_dictionary(params, rng);
    REQUIRE(d1.size() == 10000);
    CHECK(d1.strokes == d2.strokes); // same stream, same dictionary

    double sum = 0.0, sum2 = 0.0;
    for (std::size_t mu = 0; mu < d1.size(); ++mu) {
        const auto& s = d1.strokes[mu];
        for (std::size_t i = 0; i < s.size(); ++i) {
            REQUIRE(s[i] < 1024);
            if (i > 0) REQUIRE(s[i - 1] < s[i]);
        }
        sum += static_cast<double>(s.size());
        sum2 += static_cast<double>(s.size()) * static_cast<double>(s.size());
    }
    const double n = static_cast<double>(d1.size());
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double want_mean = 1024.0 * params.sparsity; // = ln(1024)
    const double want_var = want_mean * (1.0 - params.sparsity);
    CHECK(std::abs(mean - want_mean) < 5.0 * std::sqrt(want_var / n));
    CHECK(std::abs(var - want_var) < 0.10 * want_var);
}

TEST_CASE("stroke weights concentrate near ln(n_features)") {
    const auto params = ModelParams::make(4096, 1000, 2, 0.5, SizeSpec::fixed(2));
    const auto d = sample_stroke_dictionary(params, Rng(7));
    double sum = 0.0;
    for (std::size_t mu = 0; mu < d.size(); ++mu) sum += static_cast<double>(d.weight(mu));
    const double mean = sum / 1000.0;
    const double want = std::log(4096.0); // 8.3178
    const double se = std::sqrt(want * (1.0 - params.sparsity) / 1000.0);
    CHECK(std::abs(mean - want) < 5.0 * se);
}

TEST_CASE("zero sparsity forces empty strokes") {
    const auto params = ModelParams::make_with_sparsity(256, 50, 2, 0.5, 0.0, SizeSpec::fixed(2));
    const auto d = sample_stroke_dictionary(params, Rng(1));
    for (const auto& s : d.strokes) CHECK(s.empty());
}

TEST_CASE("concept book: shape, determinism, collisions allowed") {
    const auto params = ModelParams::make(64, 40, 30, 0.5, SizeSpec::fixed(3));
    const auto b1 = sample_concept_book(params, Rng(5));
    const auto b2 = sample_concept_book(params, Rng(5));
    REQUIRE(b1.size() == 30);
    CHECK(b1.concepts == b2.concepts);
    for (std::size_t a = 0; a < b1.size(); ++a) {
        REQUIRE(b1.concept_size(a) == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(b1.concepts[a][i] < 40);
            if (i > 0) REQUIRE(b1.concepts[a][i - 1] < b1.concepts[a][i]);
        }
    }

    // two strokes, four size-1 concepts: collisions are unavoidable and fine
    const auto tiny = ModelParams::make(64, 2, 4, 0.5, SizeSpec::fixed(1));
    const auto tb = sample_concept_book(tiny, Rng(11));
    REQUIRE(tb.size() == 4);
    std::set<std::vector<std::uint32_t>> distinct(tb.concepts.begin(), tb.concepts.end());
    CHECK(distinct.size() < tb.size());
}

TEST_CASE("concept book with conditioned-Poisson sizes") {
    const auto params =
        ModelParams::make(64, 1000, 20000, 0.5, SizeSpec::poisson_conditioned(3.0, 1, 8));
    const auto b = sample_concept_book(params, Rng(21));
    int ones = 0;
    for (std::size_t a = 0; a < b.size(); ++a) {
        REQUIRE(b.concept_size(a) >= 1);
        if (b.concept_size(a) == 1) ++ones;
    }
    // oracle: size-1 mass 3 e^-3 / (1 - e^-3)
    const double want = 0.1571870894737679;
    const double f = static_cast<double>(ones) / static_cast<double>(b.size());
    CHECK(std::abs(f - want) < 5.0 * std::sqrt(want * (1.0 - want) / static_cast<double>(b.size())));

    // a size law that overshoots the stroke inventory must be rejected at draw time
    const auto bad = ModelParams::make(64, 3, 5, 0.5, SizeSpec::poisson_conditioned(1000.0, 1, 3));
    CHECK_THROWS_AS(sample_concept_book(bad, Rng(2)), invalid_parameter);
}

TEST_CASE("compose_cue equals the support union") {
    const auto params = ModelParams::make(512, 30, 6, 0.5, SizeSpec::fixed(4));
    const auto dict = sample_stroke_dictionary(params, Rng(3));
    const auto book = sample_concept_book(params, Rng(4));
    for (std::uint32_t alpha = 0; alpha < book.size(); ++alpha) {
        const auto cue = compose_cue(dict, book, alpha);
        CHECK(cue.n_features == 512);
        // oracle: dense OR over member strokes
        std::vector<char> dense(512, 0);
        for (const auto mu : book.concepts[alpha])
            for (const auto i : dict.strokes[mu]) dense[i] = 1;
        std::vector<std::uint32_t> want;
        for (std::uint32_t i = 0; i < 512; ++i)
            if (dense[i]) want.push_back(i);
        CHECK(cue.on == want);
    }
    CHECK_THROWS_AS(compose_cue(dict, book, static_cast<std::uint32_t>(book.size())),
                    invalid_parameter);
}

TEST_CASE("used_strokes is the sorted union of the book") {
    ConceptBook book;
    book.n_strokes = 10;
    book.concepts = {{0, 1}, {1, 2}, {7}};
    CHECK(used_strokes(book) == std::vector<std::uint32_t>{0, 1, 2, 7});

    const auto params = ModelParams::make(64, 50, 8, 0.5, SizeSpec::fixed(5));
    const auto b = sample_concept_book(params, Rng(13));
    const auto u = used_strokes(b);
    std::set<std::uint32_t> want;
    for (const auto& c : b.concepts) want.insert(c.begin(), c.end());
    CHECK(u == std::vector<std::uint32_t>(want.begin(), want.end()));
}
