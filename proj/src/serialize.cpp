#include "scmem/serialize.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>

#include <zlib.h>

#include "scmem/errors.hpp"

namespace scmem::io {

using nlohmann::json;

namespace {

const json& require_object(const json& j, const char* what) {
    if (!j.is_object()) throw invalid_parameter(std::string(what) + " must be a JSON object");
    return j;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw invalid_parameter("unknown key '" + item.key() + "' in " + where);
    }
}

const json& require_key(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key))
        throw invalid_parameter(std::string(where) + " is missing key '" + key + "'");
    return obj.at(key);
}

std::uint64_t get_uint(const json& obj, const char* key, const char* where) {
    const json& v = require_key(obj, key, where);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw invalid_parameter(std::string(where) + "." + key + " must be a non-negative integer");
}

double get_double(const json& obj, const char* key, const char* where) {
    const json& v = require_key(obj, key, where);
    if (!v.is_number())
        throw invalid_parameter(std::string(where) + "." + key + " must be a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const char* key, const char* where) {
    const json& v = require_key(obj, key, where);
    if (!v.is_boolean())
        throw invalid_parameter(std::string(where) + "." + key + " must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const char* where) {
    const json& v = require_key(obj, key, where);
    if (!v.is_string())
        throw invalid_parameter(std::string(where) + "." + key + " must be a string");
    return v.get<std::string>();
}

SizeSpec parse_sizes(const json& j) {
    require_object(j, "model.sizes");
    const auto kind = get_string(j, "kind", "model.sizes");
    if (kind == "fixed") {
        check_keys(j, {"kind", "size"}, "model.sizes");
        return SizeSpec::fixed(static_cast<std::uint32_t>(get_uint(j, "size", "model.sizes")));
    }
    if (kind == "poisson") {
        check_keys(j, {"kind", "lambda", "lower_cut", "upper_cut"}, "model.sizes");
        return SizeSpec::poisson_conditioned(
            get_double(j, "lambda", "model.sizes"),
            static_cast<std::uint32_t>(get_uint(j, "lower_cut", "model.sizes")),
            static_cast<std::uint32_t>(get_uint(j, "upper_cut", "model.sizes")));
    }
    if (kind == "empirical") {
        check_keys(j, {"kind", "weights", "lower_cut", "upper_cut"}, "model.sizes");
        const json& table = require_key(j, "weights", "model.sizes");
        if (!table.is_array() || table.empty())
            throw invalid_parameter("model.sizes.weights must be a non-empty array");
        std::vector<std::pair<std::uint32_t, double>> weights;
        weights.reserve(table.size());
        for (const auto& entry : table) {
            require_object(entry, "model.sizes.weights entry");
            check_keys(entry, {"size", "weight"}, "model.sizes.weights entry");
            weights.emplace_back(
                static_cast<std::uint32_t>(get_uint(entry, "size", "model.sizes.weights")),
                get_double(entry, "weight", "model.sizes.weights"));
        }
        // cuts default to the table's own support
        std::uint32_t lo = weights.front().first, hi = weights.front().first;
        for (const auto& [size, weight] : weights) {
            lo = std::min(lo, size);
            hi = std::max(hi, size);
        }
        if (j.contains("lower_cut"))
            lo = static_cast<std::uint32_t>(get_uint(j, "lower_cut", "model.sizes"));
        if (j.contains("upper_cut"))
            hi = static_cast<std::uint32_t>(get_uint(j, "upper_cut", "model.sizes"));
        return SizeSpec::empirical(std::move(weights), lo, hi);
    }
    throw invalid_parameter("model.sizes.kind must be 'fixed', 'poisson' or 'empirical'");
}

json sizes_to_json(const SizeSpec& s) {
    switch (s.kind) {
        case SizeSpec::Kind::fixed: return json{{"kind", "fixed"}, {"size", s.fixed_size}};
        case SizeSpec::Kind::poisson_conditioned:
            return json{{"kind", "poisson"},
                        {"lambda", s.lambda},
                        {"lower_cut", s.lower_cut},
                        {"upper_cut", s.upper_cut}};
        case SizeSpec::Kind::empirical: {
            json table = json::array();
            for (const auto& [size, weight] : s.weights)
                table.push_back(json{{"size", size}, {"weight", weight}});
            return json{{"kind", "empirical"},
                        {"weights", std::move(table)},
                        {"lower_cut", s.lower_cut},
                        {"upper_cut", s.upper_cut}};
        }
    }
    throw invalid_parameter("sizes_to_json: unhandled size law kind");
}

json rate_entry_json(const mc::RateEntry& e) {
    return json{{"count", e.count}, {"n", e.n}, {"rate", e.rate}, {"half_width", e.half_width}};
}

} // namespace

mc::TrialConfig parse_trial_config(const json& doc) {
    require_object(doc, "config");
    const json& schema = require_key(doc, "schema", "config");
    if (!schema.is_number_integer() && !schema.is_number_unsigned())
        throw invalid_parameter("config.schema must be an integer");
    if (schema.get<std::int64_t>() != kConfigSchema)
        throw invalid_parameter("config.schema must be " + std::to_string(kConfigSchema));
    check_keys(doc,
               {"schema", "model", "good_event", "decoder", "target_rule", "fixed_target",
                "noise", "n_trials", "envelope_c_factor", "resample_per_trial"},
               "config");

    const json& model = require_object(require_key(doc, "model", "config"), "config.model");
    check_keys(model, {"n_features", "n_strokes", "n_concepts", "kappa", "sizes"}, "model");
    auto sizes = parse_sizes(require_key(model, "sizes", "model"));

    mc::TrialConfig cfg;
    cfg.params = ModelParams::make(get_uint(model, "n_features", "model"),
                                   get_uint(model, "n_strokes", "model"),
                                   get_uint(model, "n_concepts", "model"),
                                   get_double(model, "kappa", "model"), std::move(sizes));

    const json& ge = require_object(require_key(doc, "good_event", "config"), "config.good_event");
    check_keys(ge, {"delta", "rho"}, "good_event");
    const json& delta = require_key(ge, "delta", "good_event");
    const auto rho = static_cast<std::uint32_t>(get_uint(ge, "rho", "good_event"));
    if (delta.is_object()) {
        check_keys(delta, {"num", "den"}, "good_event.delta");
        cfg.good_event = GoodEventParams::ratio(
            static_cast<std::int64_t>(get_uint(delta, "num", "good_event.delta")),
            static_cast<std::int64_t>(get_uint(delta, "den", "good_event.delta")), rho);
    } else if (delta.is_number()) {
        cfg.good_event = GoodEventParams::real(delta.get<double>(), rho);
    } else {
        throw invalid_parameter("good_event.delta must be a number or a {num, den} object");
    }

    const json& dec = require_object(require_key(doc, "decoder", "config"), "config.decoder");
    const auto score = get_string(dec, "score", "decoder");
    if (score == "plain") {
        check_keys(dec, {"score", "window"}, "decoder");
        cfg.decoder.kind = ScoreKind::plain();
    } else if (score == "normalised") {
        check_keys(dec, {"score", "window"}, "decoder");
        cfg.decoder.kind = ScoreKind::normalised();
    } else if (score == "penalised") {
        check_keys(dec, {"score", "a", "b", "window"}, "decoder");
        cfg.decoder.kind =
            ScoreKind::penalised(get_double(dec, "a", "decoder"), get_double(dec, "b", "decoder"));
    } else {
        throw invalid_parameter("decoder.score must be 'plain', 'penalised' or 'normalised'");
    }
    if (dec.contains("window")) {
        const json& win = require_object(dec.at("window"), "decoder.window");
        check_keys(win, {"lower", "upper"}, "decoder.window");
        cfg.decoder.has_window = true;
        cfg.decoder.lower = static_cast<std::uint32_t>(get_uint(win, "lower", "decoder.window"));
        cfg.decoder.upper = static_cast<std::uint32_t>(get_uint(win, "upper", "decoder.window"));
    }

    const auto rule = get_string(doc, "target_rule", "config");
    if (rule == "fixed") {
        cfg.target_rule = mc::TargetRule::fixed;
    } else if (rule == "uniform") {
        cfg.target_rule = mc::TargetRule::uniform;
    } else if (rule == "all") {
        cfg.target_rule = mc::TargetRule::all;
    } else {
        throw invalid_parameter("target_rule must be 'fixed', 'uniform' or 'all'");
    }
    if (cfg.target_rule == mc::TargetRule::fixed) {
        cfg.fixed_target = static_cast<std::uint32_t>(get_uint(doc, "fixed_target", "config"));
    } else if (doc.contains("fixed_target")) {
        throw invalid_parameter("fixed_target only applies when target_rule is 'fixed'");
    }

    if (doc.contains("noise")) {
        const json& noise = require_object(doc.at("noise"), "config.noise");
        check_keys(noise, {"delete_prob", "insert_prob"}, "noise");
        if (noise.contains("delete_prob"))
            cfg.noise.delete_prob = get_double(noise, "delete_prob", "noise");
        if (noise.contains("insert_prob"))
            cfg.noise.insert_prob = get_double(noise, "insert_prob", "noise");
    }

    cfg.n_trials = get_uint(doc, "n_trials", "config");
    if (doc.contains("envelope_c_factor"))
        cfg.envelope_c_factor = get_double(doc, "envelope_c_factor", "config");
    if (doc.contains("resample_per_trial"))
        cfg.resample_per_trial = get_bool(doc, "resample_per_trial", "config");

    cfg.validate();
    return cfg;
}

mc::TrialConfig load_trial_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_parameter("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw invalid_parameter("config file " + path + " is not valid JSON: " + e.what());
    }
    return parse_trial_config(doc);
}

json trial_config_to_json(const mc::TrialConfig& cfg) {
    json model = {{"n_features", cfg.params.n_features},
                  {"n_strokes", cfg.params.n_strokes},
                  {"n_concepts", cfg.params.n_concepts},
                  {"kappa", cfg.params.kappa},
                  {"sizes", sizes_to_json(cfg.params.sizes)}};

    json delta;
    if (cfg.good_event.has_ratio())
        delta = json{{"num", cfg.good_event.delta_num}, {"den", cfg.good_event.delta_den}};
    else
        delta = cfg.good_event.delta;
    json good_event = {{"delta", std::move(delta)}, {"rho", cfg.good_event.rho}};

    json decoder;
    switch (cfg.decoder.kind.rule) {
        case ScoreRule::plain: decoder["score"] = "plain"; break;
        case ScoreRule::normalised: decoder["score"] = "normalised"; break;
        case ScoreRule::penalised:
            decoder["score"] = "penalised";
            decoder["a"] = cfg.decoder.kind.a;
            decoder["b"] = cfg.decoder.kind.b;
            break;
    }
    if (cfg.decoder.has_window)
        decoder["window"] = json{{"lower", cfg.decoder.lower}, {"upper", cfg.decoder.upper}};

    json doc = {{"schema", kConfigSchema},
                {"model", std::move(model)},
                {"good_event", std::move(good_event)},
                {"decoder", std::move(decoder)},
                {"n_trials", cfg.n_trials},
                {"envelope_c_factor", cfg.envelope_c_factor},
                {"resample_per_trial", cfg.resample_per_trial}};
    switch (cfg.target_rule) {
        case mc::TargetRule::fixed:
            doc["target_rule"] = "fixed";
            doc["fixed_target"] = cfg.fixed_target;
            break;
        case mc::TargetRule::uniform: doc["target_rule"] = "uniform"; break;
        case mc::TargetRule::all: doc["target_rule"] = "all"; break;
    }
    if (cfg.noise.enabled())
        doc["noise"] = json{{"delete_prob", cfg.noise.delete_prob},
                            {"insert_prob", cfg.noise.insert_prob}};
    return doc;
}

json report_payload(const mc::ExperimentReport& report) {
    json rates = {{"success", rate_entry_json(report.success)},
                  {"good_event", rate_entry_json(report.good_event)},
                  {"overlap_tail", rate_entry_json(report.overlap_tail)},
                  {"exact_recovery", rate_entry_json(report.exact_recovery)},
                  {"in_window", rate_entry_json(report.in_window)},
                  {"window_empty", rate_entry_json(report.window_empty)},
                  {"duplicate_target", rate_entry_json(report.duplicate_target)}};

    json bounds = json::object();
    for (const auto& [key, value] : report.bound_values) bounds[key] = value;

    json comparisons = json::array();
    for (const auto& c : report.comparisons)
        comparisons.push_back(json{{"name", c.name},
                                   {"empirical", c.empirical},
                                   {"bound", c.bound},
                                   {"sigma", c.sigma},
                                   {"pass", c.pass}});

    json payload = {{"mode", report.mode},
                    {"master_seed", report.config.master_seed},
                    {"noise_extension", report.noise_extension},
                    {"config", trial_config_to_json(report.config)},
                    {"rates", std::move(rates)},
                    {"bounds", std::move(bounds)},
                    {"comparisons", std::move(comparisons)}};
    if (!report.per_size_failure.empty()) {
        json per = json::object();
        for (const auto& [size, entry] : report.per_size_failure)
            per[std::to_string(size)] = rate_entry_json(entry);
        payload["per_size_failure"] = std::move(per);
    }
    return payload;
}

std::string canonical_payload(const mc::ExperimentReport& report) {
    return report_payload(report).dump();
}

json report_document(const mc::ExperimentReport& report,
                     const std::vector<std::pair<std::string, std::string>>& artifacts) {
    json doc = report_payload(report);
    doc["schema"] = 1;

    char stamp[32] = {0};
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

    json listed = json::array();
    for (const auto& [name, crc] : artifacts)
        listed.push_back(json{{"name", name}, {"crc32", crc}});

    doc["manifest"] = json{{"tool", kToolVersion},
                           {"generated_at", stamp},
                           {"wall_clock_seconds", report.wall_clock_seconds},
                           {"payload_crc32", crc32_hex(canonical_payload(report))},
                           {"artifacts", std::move(listed)}};
    return doc;
}

std::string crc32_hex(const std::string& bytes) {
    const auto crc = ::crc32(0UL, reinterpret_cast<const Bytef*>(bytes.data()),
                             static_cast<uInt>(bytes.size()));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

std::string trials_csv(const std::vector<mc::TrialResult>& trials) {
    std::string out =
        "trial,target,decoded,correct,false_negatives,false_positives,target_size,"
        "good_event,t_star,target_in_window,window_empty,duplicate_target,"
        "exact_recovery,exact_recovery_used\n";
    const auto flag = [](bool b) { return b ? '1' : '0'; };
    for (std::size_t k = 0; k < trials.size(); ++k) {
        const auto& r = trials[k];
        out += std::to_string(k);
        out += ',';
        out += std::to_string(r.target);
        out += ',';
        out += std::to_string(r.decoded);
        out += ',';
        out += flag(r.correct);
        out += ',';
        out += std::to_string(r.err.false_negatives);
        out += ',';
        out += std::to_string(r.err.false_positives);
        out += ',';
        out += std::to_string(r.target_size);
        out += ',';
        out += flag(r.good_event_held);
        out += ',';
        out += std::to_string(r.t_star);
        out += ',';
        out += flag(r.target_in_window);
        out += ',';
        out += flag(r.window_empty);
        out += ',';
        out += flag(r.had_duplicate_target);
        out += ',';
        out += flag(r.exact_recovery);
        out += ',';
        out += flag(r.exact_recovery_used);
        out += '\n';
    }
    return out;
}

std::string grid_csv_header() {
    return "param,value,n_trials,success_rate,success_half_width,good_event_rate,"
           "overlap_tail_rate,exact_recovery_rate,in_window_rate,window_empty_rate,"
           "duplicate_target_rate,margin_t,failure_bound,good_event_bound,overlap_bound\n";
}

std::string grid_csv_row(const std::string& param, double value,
                         const mc::ExperimentReport& report) {
    const auto& bv = report.bound_values;
    const auto pick = [&](const char* fixed_key, const char* window_key) -> std::string {
        if (bv.count(fixed_key)) return format_number(bv.at(fixed_key));
        if (bv.count(window_key)) return format_number(bv.at(window_key));
        return {};
    };
    std::string out = param;
    out += ',';
    out += format_number(value);
    out += ',';
    out += std::to_string(report.success.n);
    out += ',' + format_number(report.success.rate);
    out += ',' + format_number(report.success.half_width);
    out += ',' + format_number(report.good_event.rate);
    out += ',' + format_number(report.overlap_tail.rate);
    out += ',' + format_number(report.exact_recovery.rate);
    out += ',' + format_number(report.in_window.rate);
    out += ',' + format_number(report.window_empty.rate);
    out += ',' + format_number(report.duplicate_target.rate);
    out += ',';
    if (bv.count("margin_t")) out += format_number(bv.at("margin_t"));
    out += ',' + pick("failure_total", "failure_or_out_of_window");
    out += ',' + pick("good_event_total", "good_event_window");
    out += ',' + pick("overlap_tail", "overlap_tail_window");
    out += '\n';
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace scmem::io
