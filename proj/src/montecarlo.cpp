#include "scmem/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "scmem/errors.hpp"

namespace scmem::mc {

namespace {

enum class RunMode { experiment, good_event, recovery_full, recovery_used };

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::experiment: return "experiment";
        case RunMode::good_event: return "good_event";
        case RunMode::recovery_full: return "recovery_full";
        case RunMode::recovery_used: return "recovery_used";
    }
    return "experiment";
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Deletions first (one Bernoulli per clean-cue feature, ascending), then
// insertions (a Binomial count over the complement, then a uniform subset of
// it), all off one stream so the corruption is a pure function of
// (master_seed, trial, target).
std::vector<std::uint32_t> corrupt_cue(const Cue& clean, const CueNoise& noise, Rng rng) {
    std::vector<std::uint32_t> kept;
    kept.reserve(clean.on.size());
    for (const auto f : clean.on)
        if (!rng.bernoulli(noise.delete_prob)) kept.push_back(f);

    std::vector<std::uint32_t> complement;
    complement.reserve(static_cast<std::size_t>(clean.n_features) - clean.on.size());
    std::size_t pos = 0;
    for (std::uint32_t f = 0; f < clean.n_features; ++f) {
        if (pos < clean.on.size() && clean.on[pos] == f) {
            ++pos;
            continue;
        }
        complement.push_back(f);
    }
    const auto extra_count = rng.binomial(complement.size(), noise.insert_prob);
    const auto picks = rng.subset(complement.size(), extra_count);
    std::vector<std::uint32_t> extra;
    extra.reserve(picks.size());
    for (const auto ix : picks) extra.push_back(complement[ix]);

    std::vector<std::uint32_t> merged;
    merged.reserve(kept.size() + extra.size());
    std::merge(kept.begin(), kept.end(), extra.begin(), extra.end(), std::back_inserter(merged));
    return merged;
}

Cue cue_for_target(const TrialConfig& cfg, const StrokeDictionary& dict, const ConceptBook& book,
                   std::uint32_t target, const Rng& noise_rng) {
    Cue cue = compose_cue(dict, book, target);
    if (cfg.noise.enabled()) cue.on = corrupt_cue(cue, cfg.noise, noise_rng);
    return cue;
}

TrialResult decode_target(const TrialConfig& cfg, const StrokeDictionary& dict,
                          const ConceptBook& book, std::uint32_t target, const Rng& noise_rng) {
    const auto cue = cue_for_target(cfg, dict, book, target, noise_rng);
    const auto act = stroke_layer(overlaps(dict, cue), cfg.params.threshold);
    const auto& dec = cfg.decoder;

    TrialResult r;
    r.target = target;
    r.target_size = book.concept_size(target);
    r.target_in_window =
        !dec.has_window || (r.target_size >= dec.lower && r.target_size <= dec.upper);
    if (dec.has_window) {
        try {
            r.decoded = window_decode(book, act, dec.lower, dec.upper, dec.kind);
        } catch (const empty_window_error&) {
            r.window_empty = true;
            r.decoded = static_cast<std::uint32_t>(book.size());
        }
    } else {
        r.decoded = wta_decode(concept_scores(book, act, dec.kind));
    }
    r.correct = !r.window_empty && r.decoded == target;
    r.err = error_counts(act, book, target);
    r.good_event_held = good_event(r.err, cfg.good_event);
    r.t_star = dec.has_window ? max_overlap(book, target, dec.lower, dec.upper)
                              : max_overlap(book, target);

    const auto& own = book.concepts[target];
    for (std::uint32_t beta = 0; beta < book.size() && !r.had_duplicate_target; ++beta)
        if (beta != target && book.concepts[beta] == own) r.had_duplicate_target = true;

    const auto matches_target = [&](const std::vector<std::uint32_t>& strokes) {
        for (const auto mu : strokes) {
            const bool member = std::binary_search(own.begin(), own.end(), mu);
            if (act.is_active(mu) != member) return false;
        }
        return true;
    };
    std::vector<std::uint32_t> every(cfg.params.n_strokes);
    for (std::uint32_t mu = 0; mu < cfg.params.n_strokes; ++mu) every[mu] = mu;
    r.exact_recovery = matches_target(every);
    r.exact_recovery_used = matches_target(used_strokes(book));
    return r;
}

RateEntry tally(const std::vector<TrialResult>& trials, bool (*pred)(const TrialResult&, long long),
                long long arg) {
    RateEntry e;
    e.n = trials.size();
    for (const auto& r : trials)
        if (pred(r, arg)) ++e.count;
    const auto n = static_cast<double>(e.n);
    e.rate = static_cast<double>(e.count) / n;
    e.half_width = 1.96 * std::sqrt(e.rate * (1.0 - e.rate) / n);
    return e;
}

void finish_entry(RateEntry& e) {
    const auto n = static_cast<double>(e.n);
    e.rate = static_cast<double>(e.count) / n;
    e.half_width = 1.96 * std::sqrt(e.rate * (1.0 - e.rate) / n);
}

void attach_comparisons(ExperimentReport& rep, RunMode mode) {
    if (rep.config.noise.enabled()) return; // corruption sits outside the closed forms
    if (rep.config.target_rule == TargetRule::all) return; // joint event, per-target forms
    const auto& bv = rep.bound_values;
    const auto add = [&](const char* name, const RateEntry& basis, double empirical, double raw) {
        Comparison c;
        c.name = name;
        c.empirical = empirical;
        c.bound = clamp01(raw);
        c.sigma = std::sqrt(basis.rate * (1.0 - basis.rate) / static_cast<double>(basis.n));
        c.pass = empirical <= c.bound + 3.0 * c.sigma;
        rep.comparisons.push_back(std::move(c));
    };

    if (mode == RunMode::recovery_full || mode == RunMode::recovery_used) {
        if (bv.count("exact_recovery_fail"))
            add("exact_recovery_fail_vs_bound", rep.exact_recovery,
                1.0 - rep.exact_recovery.rate, bv.at("exact_recovery_fail"));
        return;
    }

    const bool windowed = rep.config.decoder.has_window || !rep.config.params.sizes.is_fixed();
    const char* overlap_key = windowed ? "overlap_tail_window" : "overlap_tail";
    if (bv.count(overlap_key))
        add("overlap_vs_bound", rep.overlap_tail, rep.overlap_tail.rate, bv.at(overlap_key));
    if (!windowed) {
        if (bv.count("good_event_total"))
            add("good_event_vs_bound", rep.good_event, 1.0 - rep.good_event.rate,
                bv.at("good_event_total"));
    } else if (bv.count("good_event_window") && bv.count("size_window_miss")) {
        add("good_event_vs_bound", rep.good_event, 1.0 - rep.good_event.rate,
            bv.at("good_event_window") + bv.at("size_window_miss"));
    }
    if (mode == RunMode::experiment) {
        const char* fail_key = windowed ? "failure_or_out_of_window" : "failure_total";
        if (bv.count(fail_key))
            add("failure_vs_bound", rep.success, 1.0 - rep.success.rate, bv.at(fail_key));
    }
}

ExperimentReport run_core(const TrialConfig& cfg, unsigned jobs, RunMode mode) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    ExperimentReport rep;
    rep.mode = mode_name(mode);
    rep.config = cfg;
    rep.noise_extension = cfg.noise.enabled();
    rep.trials.resize(cfg.n_trials);

    const unsigned workers =
        std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cfg.n_trials)));
    if (workers == 1) {
        for (std::uint64_t k = 0; k < cfg.n_trials; ++k) rep.trials[k] = run_trial(cfg, k);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    const std::uint64_t lo = cfg.n_trials * w / workers;
                    const std::uint64_t hi = cfg.n_trials * (w + 1) / workers;
                    for (std::uint64_t k = lo; k < hi; ++k) rep.trials[k] = run_trial(cfg, k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    rep.bound_values = bound_assembly(cfg);
    const long long margin = rep.bound_values.count("margin_t")
                                 ? static_cast<long long>(rep.bound_values.at("margin_t"))
                                 : -1;

    rep.success = tally(rep.trials, [](const TrialResult& r, long long) { return r.correct; }, 0);
    rep.good_event =
        tally(rep.trials, [](const TrialResult& r, long long) { return r.good_event_held; }, 0);
    rep.overlap_tail = tally(
        rep.trials,
        [](const TrialResult& r, long long m) { return static_cast<long long>(r.t_star) > m; },
        margin);
    rep.exact_recovery = tally(
        rep.trials,
        [](const TrialResult& r, long long used) {
            return used != 0 ? r.exact_recovery_used : r.exact_recovery;
        },
        mode == RunMode::recovery_used ? 1 : 0);
    rep.in_window =
        tally(rep.trials, [](const TrialResult& r, long long) { return r.target_in_window; }, 0);
    rep.window_empty =
        tally(rep.trials, [](const TrialResult& r, long long) { return r.window_empty; }, 0);
    rep.duplicate_target = tally(
        rep.trials, [](const TrialResult& r, long long) { return r.had_duplicate_target; }, 0);

    if (mode == RunMode::good_event) {
        for (const auto& r : rep.trials) {
            auto& e = rep.per_size_failure[r.target_size];
            ++e.n;
            if (!r.good_event_held) ++e.count;
        }
        for (auto& [size, e] : rep.per_size_failure) finish_entry(e);
    }

    attach_comparisons(rep, mode);
    rep.wall_clock_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
    return rep;
}

} // namespace

void TrialConfig::validate() const {
    if (n_trials == 0) throw invalid_parameter("TrialConfig: n_trials must be >= 1");
    if (decoder.has_window && decoder.lower > decoder.upper)
        throw invalid_parameter("TrialConfig: decoder window lower exceeds upper");
    if (decoder.kind.rule == ScoreRule::penalised &&
        (!(decoder.kind.a > 0.0) || !(decoder.kind.b >= 0.0)))
        throw invalid_parameter("TrialConfig: penalised score needs a > 0 and b >= 0");
    if (target_rule == TargetRule::fixed && fixed_target >= params.n_concepts)
        throw invalid_parameter("TrialConfig: fixed_target out of range");
    const auto bad_prob = [](double p) { return !(p >= 0.0) || !(p <= 1.0); };
    if (bad_prob(noise.delete_prob) || bad_prob(noise.insert_prob))
        throw invalid_parameter("TrialConfig: noise probabilities must lie in [0, 1]");
    if (!(envelope_c_factor > 0.0) || !std::isfinite(envelope_c_factor))
        throw invalid_parameter("TrialConfig: envelope_c_factor must be finite and > 0");
}

Instance materialize_instance(const TrialConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    const std::uint64_t inst_index = cfg.resample_per_trial ? trial_index : 0;
    const Rng root = Rng(cfg.master_seed).fork(kInstanceStream, inst_index);

    Instance inst;
    inst.dict = sample_stroke_dictionary(cfg.params, root.fork(kDictStream, 0));
    inst.book = sample_concept_book(cfg.params, root.fork(kBookStream, 0));
    switch (cfg.target_rule) {
        case TargetRule::fixed: inst.target = cfg.fixed_target; break;
        case TargetRule::uniform: {
            Rng tr = Rng(cfg.master_seed).fork(kTargetStream, trial_index);
            inst.target = static_cast<std::uint32_t>(tr.below(cfg.params.n_concepts));
            break;
        }
        case TargetRule::all: inst.target = 0; break;
    }
    inst.clean_cue = compose_cue(inst.dict, inst.book, inst.target);
    const Rng noise_root = Rng(cfg.master_seed).fork(kNoiseStream, trial_index);
    inst.cue = inst.clean_cue;
    if (cfg.noise.enabled()) {
        const Rng noise_rng =
            cfg.target_rule == TargetRule::all ? noise_root.fork(inst.target) : noise_root;
        inst.cue.on = corrupt_cue(inst.clean_cue, cfg.noise, noise_rng);
    }
    return inst;
}

TrialResult run_trial(const TrialConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    const std::uint64_t inst_index = cfg.resample_per_trial ? trial_index : 0;
    const Rng root = Rng(cfg.master_seed).fork(kInstanceStream, inst_index);
    const auto dict = sample_stroke_dictionary(cfg.params, root.fork(kDictStream, 0));
    const auto book = sample_concept_book(cfg.params, root.fork(kBookStream, 0));
    const Rng noise_root = Rng(cfg.master_seed).fork(kNoiseStream, trial_index);

    if (cfg.target_rule == TargetRule::all) {
        // detail fields describe the first failing target (or target 0 when
        // every decode is right); `correct` is the conjunction over targets
        TrialResult first;
        TrialResult chosen;
        bool have_failure = false;
        bool all_ok = true;
        for (std::uint32_t alpha = 0; alpha < cfg.params.n_concepts; ++alpha) {
            auto r = decode_target(cfg, dict, book, alpha, noise_root.fork(alpha));
            all_ok = all_ok && r.correct;
            if (alpha == 0) first = r;
            if (!r.correct && !have_failure) {
                chosen = std::move(r);
                have_failure = true;
            }
        }
        TrialResult out = have_failure ? chosen : first;
        out.correct = all_ok;
        return out;
    }

    std::uint32_t target = cfg.fixed_target;
    if (cfg.target_rule == TargetRule::uniform) {
        Rng tr = Rng(cfg.master_seed).fork(kTargetStream, trial_index);
        target = static_cast<std::uint32_t>(tr.below(cfg.params.n_concepts));
    }
    return decode_target(cfg, dict, book, target, noise_root);
}

std::map<std::string, double> bound_assembly(const TrialConfig& cfg) {
    cfg.validate();
    const auto& P = cfg.params;
    std::map<std::string, double> out;

    const bool penalised = cfg.decoder.kind.rule == ScoreRule::penalised;
    const double a = penalised ? cfg.decoder.kind.a : 1.0;
    const double b = penalised ? cfg.decoder.kind.b : 0.0;
    const bool windowed = cfg.decoder.has_window || !P.sizes.is_fixed();
    const std::uint32_t wl = cfg.decoder.has_window ? cfg.decoder.lower : P.sizes.lower_cut;
    const std::uint32_t wu = cfg.decoder.has_window ? cfg.decoder.upper : P.sizes.upper_cut;

    bool have_margin = false;
    long long margin = 0;
    try {
        margin = bounds::margin_threshold(wl, wu, cfg.good_event.delta, cfg.good_event.rho, a, b);
        out["margin_t"] = static_cast<double>(margin);
        have_margin = true;
    } catch (const invalid_parameter&) {
    }

    const auto theta_ceil = static_cast<std::uint64_t>(std::ceil(P.threshold));
    const double q_minus = 1.0 - bounds::binom_tail_exact(P.n_features, P.sparsity, theta_ceil);
    out["q_minus"] = q_minus;

    try {
        out["exact_recovery_fail"] =
            bounds::exact_recovery_bound(P.n_strokes, P.n_features, P.kappa);
    } catch (const invalid_parameter&) {
    }

    const double e1 = std::exp(1.0);
    const double log_nf = std::log(static_cast<double>(P.n_features));

    if (!windowed) {
        const std::uint64_t L = P.sizes.fixed_size;
        const double cap = cfg.envelope_c_factor * e1 * static_cast<double>(L);
        bool have_env = false, have_tail = false;
        double env = 0.0, tail = 0.0;
        try {
            env = bounds::false_positive_envelope(P.n_features, P.kappa, cap * log_nf);
            out["false_fire_envelope"] = env;
            have_env = true;
        } catch (const out_of_regime&) {
        } catch (const invalid_parameter&) {
        }
        try {
            tail = bounds::cue_size_tail(P.n_features, cap, L);
            out["cue_size_tail"] = tail;
            have_tail = true;
        } catch (const out_of_regime&) {
        } catch (const invalid_parameter&) {
        }
        bool have_budget = false;
        double budget = 0.0;
        if (have_env && have_tail) {
            try {
                budget = bounds::good_event_bound_fixed(L, cfg.good_event, q_minus, P.n_strokes,
                                                        env) +
                         tail;
                out["good_event_total"] = budget;
                have_budget = true;
            } catch (const invalid_parameter&) {
            }
        }
        bool have_overlap = false;
        double overlap = 0.0;
        if (have_margin) {
            try {
                overlap = margin < 0 ? 1.0
                                     : bounds::overlap_tail_bound(
                                           P.n_concepts, L, P.n_strokes,
                                           static_cast<std::uint64_t>(margin));
                out["overlap_tail"] = overlap;
                have_overlap = true;
            } catch (const invalid_parameter&) {
            }
        }
        if (have_budget && have_overlap) out["failure_total"] = overlap + budget;
        return out;
    }

    bool have_window_budget = false;
    double window_budget = 0.0;
    try {
        // worst size in the window: per-size error budget plus that size's
        // cue-weight tail, envelopes taken at the size-scaled cue cap
        double worst = 0.0;
        for (std::uint32_t l = wl; l <= wu; ++l) {
            const double cap = cfg.envelope_c_factor * e1 * static_cast<double>(l);
            const double env =
                bounds::false_positive_envelope(P.n_features, P.kappa, cap * log_nf);
            const double per_size =
                bounds::good_event_bound_fixed(l, cfg.good_event, q_minus, P.n_strokes, env) +
                bounds::cue_size_tail(P.n_features, cap, l);
            worst = std::max(worst, per_size);
        }
        out["good_event_window"] = worst;
        window_budget = worst;
        have_window_budget = true;
    } catch (const out_of_regime&) {
    } catch (const invalid_parameter&) {
    }

    const double miss = P.sizes.window_miss_prob(wl, wu);
    out["size_window_miss"] = miss;

    bool have_overlap = false;
    if (have_margin) {
        try {
            out["overlap_tail_window"] =
                margin < 0 ? 1.0
                           : bounds::retrieval_error_bound_variable(P.n_concepts, wu, P.n_strokes,
                                                                    margin, 0.0, 0.0);
            have_overlap = true;
        } catch (const invalid_parameter&) {
        }
    }
    if (have_window_budget && have_overlap) {
        try {
            out["failure_or_out_of_window"] =
                margin < 0 ? 1.0 + window_budget + miss
                           : bounds::retrieval_error_bound_variable(
                                 P.n_concepts, wu, P.n_strokes, margin, window_budget, miss);
        } catch (const invalid_parameter&) {
        }
    }
    return out;
}

ExperimentReport run_experiment(const TrialConfig& cfg, unsigned jobs) {
    return run_core(cfg, jobs, RunMode::experiment);
}

ExperimentReport estimate_good_event(const TrialConfig& cfg, unsigned jobs) {
    return run_core(cfg, jobs, RunMode::good_event);
}

ExperimentReport run_exact_recovery_experiment(const TrialConfig& cfg, bool used_only,
                                               unsigned jobs) {
    return run_core(cfg, jobs, used_only ? RunMode::recovery_used : RunMode::recovery_full);
}

bool ExperimentReport::all_comparisons_pass() const {
    return std::all_of(comparisons.begin(), comparisons.end(),
                       [](const Comparison& c) { return c.pass; });
}

} // namespace scmem::mc
