#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scmem/bounds.hpp"
#include "scmem/retrieval.hpp"

namespace scmem::mc {

// Stream layout.  Every random object of trial k hangs off a documented fork
// of Rng(master_seed), so trials can be replayed individually and thread
// layout cannot change a single byte of output:
//   instance root  = Rng(master_seed).fork(kInstanceStream, j)
//                    with j = resample_per_trial ? k : 0
//   dictionary     = sample_stroke_dictionary(params, root.fork(kDictStream, 0))
//   concept book   = sample_concept_book(params, root.fork(kBookStream, 0))
//   uniform target = Rng(master_seed).fork(kTargetStream, k).below(P)
//   cue corruption = Rng(master_seed).fork(kNoiseStream, k)
inline constexpr std::uint64_t kInstanceStream = 1;
inline constexpr std::uint64_t kDictStream = 2;
inline constexpr std::uint64_t kBookStream = 3;
inline constexpr std::uint64_t kTargetStream = 4;
inline constexpr std::uint64_t kNoiseStream = 5;

// Cue corruption is an extension beyond the guarantees the closed forms cover;
// reports label it and drop bound comparisons when it is on.
struct CueNoise {
    double delete_prob = 0.0;
    double insert_prob = 0.0;

    bool enabled() const { return delete_prob > 0.0 || insert_prob > 0.0; }
};

// fixed: always decode concept `fixed_target`;
// uniform: fresh uniform target each trial;
// all: decode every concept of the instance, a trial counts as correct only
//      if every one comes back right.
enum class TargetRule { fixed, uniform, all };

struct DecoderSpec {
    ScoreKind kind = ScoreKind::plain();
    bool has_window = false;
    std::uint32_t lower = 0;
    std::uint32_t upper = 0;
};

struct TrialConfig {
    ModelParams params;
    GoodEventParams good_event;
    DecoderSpec decoder;
    TargetRule target_rule = TargetRule::uniform;
    std::uint32_t fixed_target = 0;
    CueNoise noise;
    std::uint64_t n_trials = 0;
    std::uint64_t master_seed = 0;
    // Cue-weight cap for bound assembly: C = envelope_c_factor * e * size.
    double envelope_c_factor = 2.0;
    // false: dictionary and book are drawn once (trial stream 0) and shared;
    // targets and noise still vary per trial.
    bool resample_per_trial = true;

    void validate() const;
};

struct TrialResult {
    std::uint32_t target = 0;
    std::uint32_t decoded = 0;
    bool correct = false;
    ErrorCounts err;
    bool good_event_held = false;
    std::uint32_t t_star = 0; // largest competitor overlap (window-restricted if decoding is)
    std::uint32_t target_size = 0;
    bool target_in_window = true;
    bool window_empty = false; // restricted decode had no candidate; counted incorrect
    bool had_duplicate_target = false;
    bool exact_recovery = false;      // activation == target indicator on every stroke
    bool exact_recovery_used = false; // same, restricted to strokes some concept uses
};

// The sampled state behind one trial, for inspection and CSV export.  `cue`
// already includes any configured corruption; `clean_cue` never does.
struct Instance {
    StrokeDictionary dict;
    ConceptBook book;
    std::uint32_t target = 0;
    Cue clean_cue;
    Cue cue;
};

Instance materialize_instance(const TrialConfig& cfg, std::uint64_t trial_index);

struct RateEntry {
    std::uint64_t count = 0;
    std::uint64_t n = 0;
    double rate = 0.0;
    double half_width = 0.0; // 95% normal-approximation half width
};

struct Comparison {
    std::string name;
    double empirical = 0.0;
    double bound = 0.0; // already clamped to [0, 1]
    double sigma = 0.0; // binomial std. error of the empirical rate
    bool pass = false;  // empirical <= bound + 3 sigma
};

struct ExperimentReport {
    std::string mode; // "experiment" | "good_event" | "recovery_full" | "recovery_used"
    TrialConfig config;
    std::vector<TrialResult> trials; // index == trial index
    RateEntry success;
    RateEntry good_event;
    RateEntry overlap_tail; // t_star above the margin threshold
    RateEntry exact_recovery;
    RateEntry in_window;
    RateEntry window_empty;
    RateEntry duplicate_target;
    std::map<std::string, double> bound_values; // raw formula values
    std::vector<Comparison> comparisons;
    std::map<std::uint32_t, RateEntry> per_size_failure; // good-event mode only
    bool noise_extension = false;
    double wall_clock_seconds = 0.0;

    bool all_comparisons_pass() const;
};

// One self-contained trial: instance streams derive from
// (master_seed, trial_index), so any subset of trials can be replayed in any
// order or thread layout with identical results.
TrialResult run_trial(const TrialConfig& cfg, std::uint64_t trial_index);

// The closed-form values a report pairs with this config, keyed as in
// ExperimentReport::bound_values.  Entries whose regime or validity premises
// fail are omitted rather than faked; a negative overlap margin degrades the
// overlap terms to the trivial bound 1.
std::map<std::string, double> bound_assembly(const TrialConfig& cfg);

// Aggregate n_trials trials (optionally across worker threads; results are
// identical either way), pair the empirical rates with their closed forms.
ExperimentReport run_experiment(const TrialConfig& cfg, unsigned jobs = 1);

// Rate of the error-budget event alone, with per-size breakdown for variable
// size laws.
ExperimentReport estimate_good_event(const TrialConfig& cfg, unsigned jobs = 1);

// All-stroke indicator recovery.  used_only restricts the checked strokes to
// the union the book actually references; per trial that failure event is
// contained in the all-stroke one, so the restricted failure rate never
// exceeds the full one.
ExperimentReport run_exact_recovery_experiment(const TrialConfig& cfg, bool used_only,
                                               unsigned jobs = 1);

} // namespace scmem::mc
