#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seo/corpus.hpp"
#include "seo/engagement.hpp"
#include "seo/error.hpp"
#include "seo/fusion.hpp"
#include "seo/ontology.hpp"
#include "seo/parallel.hpp"
#include "seo/policy.hpp"
#include "seo/risk.hpp"
#include "seo/simulate.hpp"
#include "seo/state.hpp"
#include "seo/text_metrics.hpp"
#include "seo/tracking.hpp"

namespace {

using json = nlohmann::json;
using namespace seo;

constexpr const char* kSchemaVersion = "1";

struct GlobalOptions {
    std::string ontology_path;
    bool custom_ontology = false;
    std::string format = "table";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool strict = false;
};

// Final diagnostic text for stderr, already carrying file:line context.
struct CliDiagnostic {
    std::string text;
};

template <typename Fn>
auto with_file(const std::string& file, Fn fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::ostringstream msg;
        msg << file << ':';
        if (e.line() != 0) msg << e.line() << ':';
        msg << ' ' << error_code_name(e.code()) << ": " << e.message();
        throw CliDiagnostic{msg.str()};
    }
}

OntologyRegistry load_registry(const GlobalOptions& g) {
    std::string path = g.ontology_path;
    if (path.empty())
        if (const char* env = std::getenv("SEO_ONTOLOGY")) path = env;
    if (path.empty()) return OntologyRegistry::builtin();
    return with_file(path, [&] { return OntologyRegistry::load_file(path, g.custom_ontology); });
}

Corpus load_corpus(const std::string& path, const OntologyRegistry& reg,
                   const GlobalOptions& g) {
    return with_file(path, [&] {
        return parse_corpus_file(path, reg, ParseOptions{g.strict});
    });
}

json envelope(const GlobalOptions& g, const char* command) {
    json e;
    e["schema_version"] = kSchemaVersion;
    e["seed"] = g.seed;
    e["command"] = command;
    return e;
}

std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void emit_json(const json& report) { std::cout << report.dump() << '\n'; }

void print_kv(const char* key, const std::string& value) {
    std::printf("%-28s %s\n", key, value.c_str());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliDiagnostic{path + ": cannot open for writing"};
    return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const GlobalOptions& g, const std::string& file) {
    const auto reg = load_registry(g);
    const Corpus corpus = load_corpus(file, reg, g);
    std::size_t turns = 0, doctor_turns = 0, labeled = 0;
    for (const auto& d : corpus.dialogues) {
        turns += d.turns.size();
        for (const auto& t : d.turns)
            if (t.speaker == Speaker::Doctor) {
                ++doctor_turns;
                if (t.labeled()) ++labeled;
            }
    }
    json report = envelope(g, "validate");
    report["file"] = file;
    report["ok"] = true;
    report["dialogues"] = corpus.size();
    report["turns"] = turns;
    report["doctor_turns"] = doctor_turns;
    report["labeled_doctor_turns"] = labeled;
    if (g.format == "json") {
        emit_json(report);
    } else {
        std::printf("ok: %zu dialogues, %zu turns (%zu doctor, %zu labeled) in %s\n",
                    corpus.size(), turns, doctor_turns, labeled, file.c_str());
        std::printf("seed: %llu\n", static_cast<unsigned long long>(g.seed));
    }
    return 0;
}

json stats_to_json(const CorpusStats& s) {
    json j;
    j["n_dialogues"] = s.n_dialogues;
    j["avg_turns"] = s.avg_turns;
    j["avg_utterances"] = {{"total", s.avg_utterances_total},
                           {"doctor", s.avg_utterances_doctor},
                           {"patient", s.avg_utterances_patient}};
    j["intent_totals"] = {{"tod", s.intents_tod},
                          {"chitchat", s.intents_chitchat},
                          {"total", s.intents_tod + s.intents_chitchat}};
    j["labeled_doctor_utterances"] = s.labeled_doctor_utterances;
    j["avg_intents"] = {{"tod", s.avg_intents_tod},
                        {"chitchat", s.avg_intents_chitchat},
                        {"overall", s.avg_intents_overall}};
    j["per_leaf_counts"] = s.per_leaf_counts;
    j["transitions"]["topics"] = s.transitions.topics;
    j["transitions"]["topic_counts"] = s.transitions.topic_counts;
    j["transitions"]["topic_rows_normalized"] =
        TransitionCounts::row_normalized(s.transitions.topic_counts);
    j["transitions"]["strategies"] = s.transitions.strategies;
    j["transitions"]["strategy_counts"] = s.transitions.strategy_counts;
    return j;
}

void print_matrix(const json& labels, const json& counts) {
    std::printf("%-18s", "");
    for (const auto& l : labels) {
        const std::string name = l.get<std::string>();
        std::printf(" %8s", name.substr(0, 8).c_str());
    }
    std::printf("\n");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::printf("%-18s", labels[i].get<std::string>().substr(0, 18).c_str());
        for (const auto& v : counts[i])
            std::printf(" %8s",
                        v.is_number_integer()
                            ? std::to_string(v.get<std::int64_t>()).c_str()
                            : fmt(v.get<double>(), 3).c_str());
        std::printf("\n");
    }
}

int cmd_stats(const GlobalOptions& g, const std::string& file, bool singleton) {
    const auto reg = load_registry(g);
    const Corpus corpus = load_corpus(file, reg, g);
    const CorpusStats stats =
        with_file(file, [&] { return compute_stats(corpus, reg, singleton); });
    json report = envelope(g, "stats");
    report["file"] = file;
    report.update(stats_to_json(stats));
    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    print_kv("seed:", std::to_string(g.seed));
    print_kv("dialogues:", std::to_string(stats.n_dialogues));
    print_kv("avg turns:", fmt(stats.avg_turns, 2));
    print_kv("avg utterances (t/d/p):", fmt(stats.avg_utterances_total, 2) + " / " +
                                            fmt(stats.avg_utterances_doctor, 2) + " / " +
                                            fmt(stats.avg_utterances_patient, 2));
    print_kv("intent totals (tod/cc):", std::to_string(stats.intents_tod) + " / " +
                                            std::to_string(stats.intents_chitchat));
    print_kv("labeled doctor utts:", std::to_string(stats.labeled_doctor_utterances));
    print_kv("avg intents (tod/cc/all):", fmt(stats.avg_intents_tod, 2) + " / " +
                                              fmt(stats.avg_intents_chitchat, 2) + " / " +
                                              fmt(stats.avg_intents_overall, 2));
    std::printf("\nper-leaf counts (nonzero):\n");
    for (const auto& [leaf, count] : stats.per_leaf_counts)
        if (count > 0) std::printf("  %-44s %8lld\n", leaf.c_str(),
                                   static_cast<long long>(count));
    std::printf("\ntopic transition counts:\n");
    print_matrix(report["transitions"]["topics"], report["transitions"]["topic_counts"]);
    std::printf("\nstrategy transition counts:\n");
    print_matrix(report["transitions"]["strategies"],
                 report["transitions"]["strategy_counts"]);
    return 0;
}

int cmd_track(const GlobalOptions& g, const std::string& corpus_path,
              const std::string& tracker, const std::string& lexicon_path,
              std::size_t window, const std::string& emit, const std::string& out_path) {
    const auto reg = load_registry(g);
    const Corpus corpus = load_corpus(corpus_path, reg, g);
    TrackOptions opts;
    opts.tracker = tracker == "gold" ? TrackerKind::Gold : TrackerKind::Lexical;
    opts.window_pairs = window;
    std::optional<Lexicon> lexicon;
    if (!lexicon_path.empty())
        lexicon = with_file(lexicon_path,
                            [&] { return Lexicon::load_file(lexicon_path, reg); });
    if (opts.tracker == TrackerKind::Lexical && !lexicon)
        throw CliDiagnostic{"--tracker lexical requires --lexicon"};

    const auto deltas =
        run_tracker(corpus, reg, lexicon ? &*lexicon : nullptr, opts);
    const bool full = emit == "state";
    if (out_path.empty()) {
        write_state_predictions(std::cout, deltas, reg, full);
        return 0;
    }
    auto out = open_out(out_path);
    write_state_predictions(out, deltas, reg, full);
    json report = envelope(g, "track");
    report["tracker"] = tracker;
    report["emit"] = emit;
    report["dialogues"] = deltas.size();
    report["out"] = out_path;
    if (g.format == "json")
        emit_json(report);
    else
        std::printf("tracked %zu dialogues -> %s (%s rows, %s tracker)\n",
                    deltas.size(), out_path.c_str(), emit.c_str(), tracker.c_str());
    return 0;
}

int cmd_eval_dst(const GlobalOptions& g, const std::string& pred_path,
                 const std::string& gold_path, bool per_dialogue) {
    const auto reg = load_registry(g);
    const Corpus gold = load_corpus(gold_path, reg, g);
    const auto gold_states = replay_corpus(gold, reg);
    const auto pred_states = with_file(pred_path, [&] {
        return load_state_predictions_file(pred_path, gold, reg);
    });
    const DstEvalReport r = evaluate_dst(pred_states, gold_states);

    json report = envelope(g, "eval-dst");
    report["pred"] = pred_path;
    report["gold"] = gold_path;
    report["jga"] = r.jga;
    report["slot_accuracy"] = r.slot_accuracy;
    report["symptom_f1"] = {{"precision", r.symptom_precision},
                            {"recall", r.symptom_recall},
                            {"f1", r.symptom_f1},
                            {"tp", r.tp},
                            {"fp", r.fp},
                            {"fn", r.fn}};
    report["turns"] = r.turns_total;
    if (per_dialogue) {
        json rows = json::array();
        for (const auto& bd : r.per_dialogue)
            rows.push_back({{"dialogue_id", bd.dialogue_id},
                            {"jga", bd.jga},
                            {"slot_accuracy", bd.slot_accuracy},
                            {"final_tp", bd.final_tp},
                            {"final_fp", bd.final_fp},
                            {"final_fn", bd.final_fn}});
        report["per_dialogue"] = std::move(rows);
    }
    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    print_kv("seed:", std::to_string(g.seed));
    print_kv("turns evaluated:", std::to_string(r.turns_total));
    print_kv("JGA:", fmt(r.jga));
    print_kv("slot accuracy:", fmt(r.slot_accuracy));
    print_kv("symptom precision:", fmt(r.symptom_precision));
    print_kv("symptom recall:", fmt(r.symptom_recall));
    print_kv("symptom F1:", fmt(r.symptom_f1));
    return 0;
}

int cmd_eval_intents(const GlobalOptions& g, const std::string& pred_path,
                     const std::string& gold_path, bool per_label) {
    const auto reg = load_registry(g);
    const Corpus gold = load_corpus(gold_path, reg, g);
    const PredictionSet pred = with_file(pred_path, [&] {
        return load_predictions_file(pred_path, reg, &gold);
    });
    const MultilabelReport r = evaluate_multilabel(pred, gold, reg);

    json report = envelope(g, "eval-intents");
    report["pred"] = pred_path;
    report["gold"] = gold_path;
    report["predictor"] = pred.predictor_id;
    report["turns_evaluated"] = r.turns_evaluated;
    report["micro"] = {{"precision", r.micro_precision},
                       {"recall", r.micro_recall},
                       {"f1", r.micro_f1}};
    report["macro"] = {{"precision", r.macro_precision},
                       {"recall", r.macro_recall},
                       {"f1", r.macro_f1}};
    report["weighted"] = {{"precision", r.weighted_precision},
                          {"recall", r.weighted_recall},
                          {"f1", r.weighted_f1}};
    if (per_label) {
        json labels = json::object();
        for (const auto& [id, c] : r.per_label)
            labels[id] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"support", c.support}};
        report["per_label"] = std::move(labels);
    }
    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    print_kv("seed:", std::to_string(g.seed));
    print_kv("predictor:", pred.predictor_id);
    print_kv("turns evaluated:", std::to_string(r.turns_evaluated));
    std::printf("%-10s %10s %10s %10s\n", "average", "precision", "recall", "f1");
    std::printf("%-10s %10s %10s %10s\n", "micro", fmt(r.micro_precision, 4).c_str(),
                fmt(r.micro_recall, 4).c_str(), fmt(r.micro_f1, 4).c_str());
    std::printf("%-10s %10s %10s %10s\n", "macro", fmt(r.macro_precision, 4).c_str(),
                fmt(r.macro_recall, 4).c_str(), fmt(r.macro_f1, 4).c_str());
    std::printf("%-10s %10s %10s %10s\n", "weighted", fmt(r.weighted_precision, 4).c_str(),
                fmt(r.weighted_recall, 4).c_str(), fmt(r.weighted_f1, 4).c_str());
    return 0;
}

int cmd_fuse(const GlobalOptions& g, const std::string& mode, std::size_t threshold,
             const std::vector<std::string>& pred_paths, const std::string& out_path) {
    const auto reg = load_registry(g);
    std::vector<PredictionSet> preds;
    preds.reserve(pred_paths.size());
    for (const auto& path : pred_paths)
        preds.push_back(
            with_file(path, [&] { return load_predictions_file(path, reg); }));
    const PredictionSet fused =
        mode == "recall" ? fuse_recall(preds) : fuse_precision(preds, threshold);
    if (out_path.empty()) {
        write_predictions(std::cout, fused);
        return 0;
    }
    auto out = open_out(out_path);
    write_predictions(out, fused);
    json report = envelope(g, "fuse");
    report["mode"] = mode;
    if (mode == "precision") report["threshold"] = threshold;
    report["predictor"] = fused.predictor_id;
    report["turns"] = fused.turns.size();
    report["out"] = out_path;
    if (g.format == "json")
        emit_json(report);
    else
        std::printf("fused %zu turns -> %s (%s)\n", fused.turns.size(),
                    out_path.c_str(), fused.predictor_id.c_str());
    return 0;
}

int cmd_eval_text(const GlobalOptions& g, const std::string& pairs_path,
                  const std::string& metrics_csv, const std::string& rouge_mode,
                  bool per_pair) {
    const auto pairs =
        with_file(pairs_path, [&] { return load_text_pairs_file(pairs_path); });
    const TextEvalReport r = evaluate_text(pairs);

    std::set<std::string> metrics;
    std::stringstream ss(metrics_csv);
    std::string item;
    while (std::getline(ss, item, ',')) metrics.insert(item);

    json report = envelope(g, "eval-text");
    report["pairs_file"] = pairs_path;
    report["pairs"] = pairs.size();
    if (metrics.count("bleu2"))
        report["bleu2"] = {{"mean", r.bleu2_mean}, {"pooled", r.bleu2_pooled}};
    if (metrics.count("rougeL")) {
        report["rouge_l"] = {{"mean", r.rouge_l_mean}, {"pooled", r.rouge_l_pooled}};
        report["rouge_l"]["reported"] =
            rouge_mode == "pooled" ? r.rouge_l_pooled : r.rouge_l_mean;
    }
    if (metrics.count("meteor")) report["meteor"] = {{"mean", r.meteor_mean}};
    if (metrics.count("dist2")) report["dist2"] = r.dist2_value;
    if (per_pair) {
        json rows = json::array();
        for (const auto& p : r.pairs) {
            json row = {{"dialogue_id", p.dialogue_id}, {"turn_index", p.turn_index}};
            if (metrics.count("bleu2")) row["bleu2"] = p.bleu2;
            if (metrics.count("rougeL")) row["rouge_l"] = p.rouge_l;
            if (metrics.count("meteor")) row["meteor"] = p.meteor;
            rows.push_back(std::move(row));
        }
        report["per_pair"] = std::move(rows);
    }
    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    print_kv("seed:", std::to_string(g.seed));
    print_kv("pairs:", std::to_string(pairs.size()));
    if (metrics.count("bleu2"))
        print_kv("BLEU-2 (mean/pooled):",
                 fmt(r.bleu2_mean, 4) + " / " + fmt(r.bleu2_pooled, 4));
    if (metrics.count("rougeL"))
        print_kv("ROUGE-L (mean/pooled):",
                 fmt(r.rouge_l_mean, 4) + " / " + fmt(r.rouge_l_pooled, 4));
    if (metrics.count("meteor")) print_kv("METEOR (mean):", fmt(r.meteor_mean, 4));
    if (metrics.count("dist2")) print_kv("DIST-2:", fmt(r.dist2_value, 4));
    return 0;
}

int cmd_eval_engagement(const GlobalOptions& g, const std::string& corpus_path,
                        const std::string& pred_intents_path,
                        const std::string& pred_states_path,
                        const std::string& iqr_windows_csv, std::size_t rqr_window,
                        bool inclusive, const std::string& empathy_csv,
                        const std::string& scale, bool audit) {
    const auto reg = load_registry(g);
    const Corpus corpus = load_corpus(corpus_path, reg, g);

    std::optional<PredictionSet> pred_intents;
    if (!pred_intents_path.empty())
        pred_intents = with_file(pred_intents_path, [&] {
            return load_predictions_file(pred_intents_path, reg, &corpus);
        });
    std::optional<std::map<std::string, std::vector<DialogueState>>> pred_states;
    if (!pred_states_path.empty())
        pred_states = with_file(pred_states_path, [&] {
            return load_state_predictions_file(pred_states_path, corpus, reg);
        });

    std::vector<std::size_t> iqr_windows;
    {
        std::stringstream ss(iqr_windows_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            iqr_windows.push_back(static_cast<std::size_t>(std::stoull(item)));
        if (iqr_windows.empty()) iqr_windows = {3, 5};
    }

    EngagementConfig cfg;
    cfg.rqr_window = rqr_window;
    cfg.window_inclusive_current = inclusive;
    if (!empathy_csv.empty()) {
        IntentSet es;
        std::stringstream ss(empathy_csv);
        std::string item;
        while (std::getline(ss, item, ',')) es.insert(reg.resolve(item));
        cfg.empathy_set = std::move(es);
    }

    EngagementInputs inputs;
    inputs.corpus = &corpus;
    inputs.registry = &reg;
    inputs.intents = pred_intents ? &*pred_intents : nullptr;
    inputs.states = pred_states ? &*pred_states : nullptr;
    inputs.jobs = g.jobs;

    const double factor = scale == "percent" ? 100.0 : 1.0;
    json iqr_values = json::object();
    json iqr_counts = json::object();
    std::optional<EngagementReport> first;
    for (std::size_t w : iqr_windows) {
        cfg.iqr_window = w;
        EngagementReport r = compute_engagement(inputs, cfg);
        iqr_values[std::to_string(w)] = r.iqr * factor;
        iqr_counts[std::to_string(w)] = r.in_depth_total;
        if (!first) first = std::move(r);
    }

    json report = envelope(g, "eval-engagement");
    report["file"] = corpus_path;
    report["scale"] = scale;
    report["windows"] = {{"iqr", iqr_windows}, {"rqr", rqr_window}};
    report["window_inclusive_current"] = inclusive;
    report["iqr"] = iqr_values;
    report["rqr"] = first->rqr * factor;
    report["err"] = first->err * factor;
    report["totals"] = {{"doctor_turns", first->doctor_turn_total},
                        {"in_depth", iqr_counts},
                        {"repeated", first->repeated_total},
                        {"empathy_turns", first->empathy_turn_total}};
    json rows = json::array();
    for (const auto& de : first->per_dialogue) {
        json row = {{"dialogue_id", de.dialogue_id},
                    {"doctor_turns", de.doctor_turns},
                    {"in_depth", de.in_depth_count},
                    {"repeated", de.repeated_count},
                    {"empathy_turns", de.empathy_turns}};
        if (audit) {
            json turns = json::array();
            for (const auto& te : de.turns)
                turns.push_back({{"turn", te.turn_index},
                                 {"iq", te.in_depth},
                                 {"rq", te.repeated},
                                 {"e", te.empathy}});
            row["turns"] = std::move(turns);
        }
        rows.push_back(std::move(row));
    }
    report["per_dialogue"] = std::move(rows);

    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    const double present = scale == "percent" ? 1.0 : 100.0; // tables show x100
    print_kv("seed:", std::to_string(g.seed));
    print_kv("doctor turns:", std::to_string(first->doctor_turn_total));
    for (std::size_t w : iqr_windows)
        print_kv(("IQR (i=" + std::to_string(w) + ", x100):").c_str(),
                 fmt(iqr_values[std::to_string(w)].get<double>() * present, 2));
    print_kv("RQR (x100):", fmt(first->rqr * factor * present, 2));
    print_kv("ERR (x100):", fmt(first->err * factor * present, 2));
    return 0;
}

int cmd_simulate(const GlobalOptions& g, const std::string& policy_path,
                 const std::string& from_corpus, double smoothing,
                 const std::string& profiles_path, std::size_t sample_count,
                 const std::string& templates_path,
                 std::optional<std::size_t> max_turns,
                 std::optional<double> min_coverage,
                 std::optional<double> repeat_prob,
                 const std::string& save_policy, const std::string& out_path) {
    const auto reg = load_registry(g);

    PolicyModel policy;
    if (!policy_path.empty()) {
        policy = with_file(policy_path,
                           [&] { return PolicyModel::load_file(policy_path, reg); });
    } else {
        const Corpus corpus = load_corpus(from_corpus, reg, g);
        policy = estimate_policy(corpus, reg, smoothing);
    }
    if (max_turns) policy.max_turns = *max_turns;
    if (min_coverage) policy.min_coverage = *min_coverage;
    if (repeat_prob) policy.repeat_prob = *repeat_prob;
    policy.validate();
    if (!save_policy.empty()) policy.save_file(save_policy);

    std::vector<PatientProfile> profiles;
    if (!profiles_path.empty())
        profiles = with_file(profiles_path,
                             [&] { return load_profiles_file(profiles_path, reg); });
    else
        profiles = sample_profiles(sample_count, g.seed, reg);

    const ResponseTemplates templates =
        templates_path.empty()
            ? ResponseTemplates::builtin(reg)
            : with_file(templates_path, [&] {
                  return ResponseTemplates::load_file(templates_path, reg);
              });

    // One independent session per profile, seeded off the profile index.
    std::vector<std::size_t> indices(profiles.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    const auto dialogues = parallel_map(indices, g.jobs, [&](std::size_t i) {
        return simulate(policy, profiles[i], g.seed + i, templates, reg);
    });
    Corpus corpus;
    corpus.dialogues = dialogues;

    if (out_path.empty()) {
        write_corpus(corpus, reg, std::cout);
        return 0;
    }
    auto out = open_out(out_path);
    write_corpus(corpus, reg, out);
    json report = envelope(g, "simulate");
    report["dialogues"] = corpus.size();
    report["out"] = out_path;
    report["policy_source"] = policy_path.empty() ? from_corpus : policy_path;
    if (g.format == "json")
        emit_json(report);
    else
        std::printf("simulated %zu dialogues -> %s\n", corpus.size(), out_path.c_str());
    return 0;
}

int cmd_risk(const GlobalOptions& g, const std::string& corpus_path,
             const std::string& rules_path, bool eval) {
    const auto reg = load_registry(g);
    const Corpus corpus = load_corpus(corpus_path, reg, g);
    const RiskRuleTable rules =
        rules_path.empty()
            ? RiskRuleTable{}
            : with_file(rules_path, [&] { return RiskRuleTable::load_file(rules_path); });
    const RiskEvalReport r = evaluate_risk(corpus, reg, rules, eval);

    json report = envelope(g, "risk");
    report["file"] = corpus_path;
    json labels = json::array();
    for (const auto& [id, label] : r.predicted)
        labels.push_back({{"dialogue_id", id}, {"risk", risk_label_name(label)}});
    report["labels"] = std::move(labels);
    if (eval) {
        json classes = json::array();
        for (int c = 0; c < 4; ++c) {
            const auto& pc = r.per_class[c];
            classes.push_back({{"class", risk_label_name(static_cast<RiskLabel>(c))},
                               {"precision", pc.precision},
                               {"recall", pc.recall},
                               {"f1", pc.f1},
                               {"support", pc.support}});
        }
        report["eval"] = {{"classes", std::move(classes)},
                          {"avg_precision", r.avg_precision},
                          {"avg_recall", r.avg_recall},
                          {"avg_f1", r.avg_f1},
                          {"accuracy", r.accuracy}};
    }
    if (g.format == "json") {
        emit_json(report);
        return 0;
    }
    print_kv("seed:", std::to_string(g.seed));
    print_kv("dialogues:", std::to_string(r.predicted.size()));
    if (eval) {
        std::printf("%-10s %10s %10s %10s %8s\n", "severity", "precision", "recall",
                    "f1", "support");
        for (int c = 0; c < 4; ++c) {
            const auto& pc = r.per_class[c];
            std::printf("%-10s %10s %10s %10s %8lld\n",
                        risk_label_name(static_cast<RiskLabel>(c)),
                        fmt(pc.precision, 2).c_str(), fmt(pc.recall, 2).c_str(),
                        fmt(pc.f1, 2).c_str(), static_cast<long long>(pc.support));
        }
        std::printf("%-10s %10s %10s %10s\n", "average", fmt(r.avg_precision, 2).c_str(),
                    fmt(r.avg_recall, 2).c_str(), fmt(r.avg_f1, 2).c_str());
        print_kv("accuracy:", fmt(r.accuracy, 4));
    } else {
        for (const auto& [id, label] : r.predicted)
            std::printf("%-32s %s\n", id.c_str(), risk_label_name(label));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    GlobalOptions g;
    CLI::App app{"SEO toolkit: depression-diagnosis dialogue parsing, tracking, "
                 "evaluation and simulation"};
    app.require_subcommand(1);
    app.add_option("--ontology", g.ontology_path,
                   "Ontology override file (or env SEO_ONTOLOGY)");
    app.add_flag("--custom-ontology", g.custom_ontology,
                 "Allow the override file to change the leaf count");
    app.add_option("--format", g.format, "Report format")
        ->check(CLI::IsMember({"json", "table"}));
    app.add_option("--seed", g.seed, "Master seed, echoed in reports");
    app.add_option("--jobs", g.jobs, "Per-dialogue parallelism")
        ->check(CLI::PositiveNumber);
    app.add_flag("--strict", g.strict, "Enforce speaker alternation when parsing");

    std::string c_file;
    auto* c_validate = app.add_subcommand("validate", "Parse and validate a corpus");
    c_validate->add_option("file", c_file, "Corpus (JSON Lines)")->required();

    std::string s_file;
    bool s_singleton = false;
    auto* c_stats = app.add_subcommand("stats", "Corpus statistics and transitions");
    c_stats->add_option("file", s_file, "Corpus (JSON Lines)")->required();
    c_stats->add_flag("--singleton-transitions", s_singleton,
                      "Count only singleton-topic turn pairs");

    std::string t_corpus, t_tracker = "gold", t_lexicon, t_emit = "delta", t_out;
    std::size_t t_window = 3;
    auto* c_track = app.add_subcommand("track", "Run a tracker over a corpus");
    c_track->add_option("corpus", t_corpus)->required();
    c_track->add_option("--tracker", t_tracker, "Tracker")
        ->check(CLI::IsMember({"gold", "lexical"}));
    c_track->add_option("--lexicon", t_lexicon, "Keyword lexicon (TSV)");
    c_track->add_option("--window", t_window, "History window in turn-pairs");
    c_track->add_option("--emit", t_emit, "Row payload")
        ->check(CLI::IsMember({"delta", "state"}));
    c_track->add_option("--out", t_out, "Write rows here instead of stdout");

    std::string ed_pred, ed_gold;
    bool ed_breakdown = false;
    auto* c_eval_dst = app.add_subcommand("eval-dst", "JGA / slot accuracy / symptom F1");
    c_eval_dst->add_option("--pred", ed_pred, "Prediction file")->required();
    c_eval_dst->add_option("--gold", ed_gold, "Gold corpus")->required();
    c_eval_dst->add_flag("--per-dialogue", ed_breakdown, "Include per-dialogue rows");

    std::string ei_pred, ei_gold;
    bool ei_labels = false;
    auto* c_eval_intents =
        app.add_subcommand("eval-intents", "Multi-label intent P/R/F1");
    c_eval_intents->add_option("--pred", ei_pred, "Prediction file")->required();
    c_eval_intents->add_option("--gold", ei_gold, "Gold corpus")->required();
    c_eval_intents->add_flag("--per-label", ei_labels, "Include per-label counts");

    std::string f_mode = "recall", f_out;
    std::size_t f_threshold = 2;
    std::vector<std::string> f_preds;
    auto* c_fuse = app.add_subcommand("fuse", "Combine intent predictions");
    c_fuse->add_option("--mode", f_mode, "Fusion rule")
        ->check(CLI::IsMember({"recall", "precision"}));
    c_fuse->add_option("--threshold", f_threshold, "Vote threshold (precision mode)");
    c_fuse->add_option("--pred", f_preds, "Two or more prediction files")
        ->required()
        ->expected(2, 64);
    c_fuse->add_option("--out", f_out, "Write fused rows here instead of stdout");

    std::string et_pairs, et_metrics = "bleu2,rougeL,meteor,dist2", et_rouge = "mean";
    bool et_per_pair = false;
    auto* c_eval_text = app.add_subcommand("eval-text", "Generation metrics");
    c_eval_text->add_option("--pairs", et_pairs, "candidate/reference rows")->required();
    c_eval_text->add_option("--metrics", et_metrics, "Comma list")
        ->check([](const std::string& v) -> std::string {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                if (item != "bleu2" && item != "rougeL" && item != "meteor" &&
                    item != "dist2")
                    return "unknown metric '" + item + "'";
            return {};
        });
    c_eval_text->add_option("--rouge-mode", et_rouge, "Reported ROUGE-L aggregation")
        ->check(CLI::IsMember({"mean", "pooled"}));
    c_eval_text->add_flag("--per-pair", et_per_pair, "Include per-pair rows");

    std::string ee_corpus, ee_pred_intents, ee_pred_states, ee_iqr = "3,5";
    std::string ee_es, ee_scale = "unit";
    std::size_t ee_rqr = 3;
    bool ee_inclusive = false, ee_audit = false;
    auto* c_eval_eng = app.add_subcommand("eval-engagement", "IQR / RQR / ERR");
    c_eval_eng->add_option("corpus", ee_corpus)->required();
    c_eval_eng->add_option("--pred-intents", ee_pred_intents,
                           "Intent predictions replacing gold labels");
    c_eval_eng->add_option("--pred-states", ee_pred_states,
                           "State predictions replacing gold replay");
    c_eval_eng->add_option("--iqr-window", ee_iqr, "Comma list of windows");
    c_eval_eng->add_option("--rqr-window", ee_rqr, "Repeat window");
    c_eval_eng->add_flag("--inclusive-window", ee_inclusive,
                         "Topic window includes the current turn");
    c_eval_eng->add_option("--empathy-set", ee_es, "Override ES (comma list of ids)");
    c_eval_eng->add_option("--scale", ee_scale, "Report scale")
        ->check(CLI::IsMember({"unit", "percent"}));
    c_eval_eng->add_flag("--audit", ee_audit, "Include per-turn IQ/RQ/E sets");

    std::string sim_policy, sim_from_corpus, sim_profiles, sim_templates,
        sim_save_policy, sim_out;
    double sim_smoothing = 1.0;
    std::size_t sim_sample = 0;
    std::optional<std::size_t> sim_max_turns;
    std::optional<double> sim_min_coverage, sim_repeat;
    auto* c_sim = app.add_subcommand("simulate", "Generate annotated dialogues");
    auto* o_policy = c_sim->add_option("--policy", sim_policy, "Policy JSON file");
    auto* o_from = c_sim->add_option("--from-corpus", sim_from_corpus,
                                     "Estimate the policy from this corpus");
    o_policy->excludes(o_from);
    c_sim->add_option("--smoothing", sim_smoothing, "Laplace smoothing for estimation");
    auto* o_profiles = c_sim->add_option("--profiles", sim_profiles, "Profiles file");
    auto* o_sample =
        c_sim->add_option("--sample", sim_sample, "Sample this many profiles");
    o_profiles->excludes(o_sample);
    c_sim->add_option("--templates", sim_templates, "Response template JSON");
    c_sim->add_option("--max-turns", sim_max_turns, "Override policy max turns");
    c_sim->add_option("--min-coverage", sim_min_coverage,
                      "Override policy coverage stop rule");
    c_sim->add_option("--repeat-prob", sim_repeat, "Override policy repeat probability");
    c_sim->add_option("--save-policy", sim_save_policy, "Write the effective policy");
    c_sim->add_option("--out", sim_out, "Write dialogues here instead of stdout");

    std::string r_corpus, r_rules;
    bool r_eval = false;
    auto* c_risk = app.add_subcommand("risk", "Rule-based severity labels");
    c_risk->add_option("--corpus", r_corpus, "Corpus (JSON Lines)")->required();
    c_risk->add_option("--rules", r_rules, "Rule table JSON");
    c_risk->add_flag("--eval", r_eval, "Compare against gold risk labels");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_validate->parsed()) return cmd_validate(g, c_file);
        if (c_stats->parsed()) return cmd_stats(g, s_file, s_singleton);
        if (c_track->parsed())
            return cmd_track(g, t_corpus, t_tracker, t_lexicon, t_window, t_emit, t_out);
        if (c_eval_dst->parsed()) return cmd_eval_dst(g, ed_pred, ed_gold, ed_breakdown);
        if (c_eval_intents->parsed())
            return cmd_eval_intents(g, ei_pred, ei_gold, ei_labels);
        if (c_fuse->parsed()) return cmd_fuse(g, f_mode, f_threshold, f_preds, f_out);
        if (c_eval_text->parsed())
            return cmd_eval_text(g, et_pairs, et_metrics, et_rouge, et_per_pair);
        if (c_eval_eng->parsed())
            return cmd_eval_engagement(g, ee_corpus, ee_pred_intents, ee_pred_states,
                                       ee_iqr, ee_rqr, ee_inclusive, ee_es, ee_scale,
                                       ee_audit);
        if (c_sim->parsed()) {
            if (sim_policy.empty() && sim_from_corpus.empty()) {
                std::cerr << "seo: simulate needs --policy or --from-corpus\n";
                return 2;
            }
            if (sim_profiles.empty() && sim_sample == 0) {
                std::cerr << "seo: simulate needs --profiles or --sample N\n";
                return 2;
            }
            return cmd_simulate(g, sim_policy, sim_from_corpus, sim_smoothing,
                                sim_profiles, sim_sample, sim_templates, sim_max_turns,
                                sim_min_coverage, sim_repeat, sim_save_policy, sim_out);
        }
        if (c_risk->parsed()) return cmd_risk(g, r_corpus, r_rules, r_eval);
    } catch (const CliDiagnostic& d) {
        std::cerr << "seo: " << d.text << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "seo: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "seo: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
