#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cep/checkpoint.hpp"
#include "cep/cli.hpp"
#include "cep/dataio.hpp"
#include "cep/error.hpp"
#include "cep/experiment.hpp"
#include "cep/inference.hpp"
#include "cep/mlp.hpp"
#include "cep/purenn.hpp"
#include "cep/rules.hpp"
#include "cep/training.hpp"

namespace cep::cli {
namespace {

using ojson = nlohmann::ordered_json;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
}

RuleSet load_rules(const std::string& path) { return parse_ruleset(read_text(path)); }

/// Steps of every fragment in file order (or only `seq`), as one stream.
EventStream load_stream(const std::string& path, const std::string& seq) {
    auto frags = data::load_features_csv(path);
    std::vector<double> features;
    std::vector<ClassId> gt;
    bool all_gt = true;
    std::size_t dim = 0;
    for (const auto& f : frags) {
        if (!seq.empty() && f.seq_id != seq) continue;
        dim = f.dim;
        features.insert(features.end(), f.features.begin(), f.features.end());
        if (f.gt_class)
            gt.insert(gt.end(), f.gt_class->begin(), f.gt_class->end());
        else
            all_gt = false;
    }
    if (dim == 0) throw ValidationError(seq.empty() ? "features file has no rows" : "no rows for seq_id " + seq);
    return EventStream(dim, std::move(features), all_gt ? std::optional(std::move(gt)) : std::nullopt);
}

std::vector<int> parse_folds(const std::string& spec, const data::Manifest& m) {
    if (spec == "all") {
        auto ids = m.fold_ids();
        for (int k = 1; k <= 10; ++k)
            if (std::find(ids.begin(), ids.end(), k) == ids.end())
                throw ValidationError("--folds all needs files in every fold 1..10; fold " + std::to_string(k) +
                                      " is empty");
        return ids;
    }
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            int k = std::stoi(item, &used);
            if (used != item.size() || k < 1 || k > 10) throw std::invalid_argument(item);
            out.push_back(k);
        } catch (const std::logic_error&) {
            throw ValidationError("bad fold '" + item + "' (expected 1..10 or 'all')");
        }
    }
    if (out.empty()) throw ValidationError("no folds requested");
    return out;
}

struct TrainFlags {
    std::string rules;
    std::string manifest;
    std::string folds = "all";
    std::string out;
    std::string save_model;
    train::TrainConfig cfg;
};

void add_train_flags(CLI::App* app, TrainFlags& f) {
    app->add_option("--rules", f.rules, "Rule file (.cep)")->required();
    app->add_option("--manifest", f.manifest, "Dataset manifest JSON")->required();
    app->add_option("--window", f.cfg.window, "Window size for every rule (0: as written)");
    app->add_option("--epochs", f.cfg.epochs, "Training epochs");
    app->add_option("--points", f.cfg.points_per_epoch, "Training points per epoch");
    app->add_option("--lr", f.cfg.lr, "Adam learning rate");
    app->add_option("--ratio", f.cfg.ratio, "Negatives per positive sample");
    app->add_option("--seed", f.cfg.seed, "Root random seed");
    app->add_option("--hidden", f.cfg.hidden, "Hidden layer width");
    app->add_option("--threshold", f.cfg.threshold, "Pattern decision threshold");
    app->add_option("--folds", f.folds, "Test folds: 'all' or a comma list of 1..10");
    app->add_option("--out", f.out, "Metrics JSON path (default: stdout)");
    app->add_option("--save-model", f.save_model, "Checkpoint path (suffixed .fold<k> for several folds)");
}

int cmd_train(const TrainFlags& f, experiment::ModelKind kind, std::ostream& out) {
    const RuleSet rs = load_rules(f.rules);
    const auto manifest = data::load_manifest(f.manifest);
    if (manifest.classes != rs.classes) throw ValidationError("manifest classes differ from rule classes");
    const auto folds = parse_folds(f.folds, manifest);
    const auto dataset = data::Dataset::load(manifest);

    std::vector<Checkpoint> models;
    const auto report = experiment::cross_validate(dataset, rs, f.cfg, kind, folds, 0, &models);
    const std::string json = experiment::metrics_to_json(report);
    if (f.out.empty())
        out << json << '\n';
    else
        write_text(f.out, json + "\n");

    if (!f.save_model.empty()) {
        for (std::size_t i = 0; i < models.size(); ++i) {
            std::string path = f.save_model;
            if (models.size() > 1) path += ".fold" + std::to_string(folds[i]);
            save_checkpoint(path, models[i]);
        }
    }
    return kOk;
}

struct InferFlags {
    std::string checkpoint;
    std::string features;
    std::string rules;
    std::string seq;
    std::string out;
    std::size_t window = 0;
    double h0 = 0.0;
};

/// Start/end probability series per fluent; NaN where no full window exists.
struct QuerySeries {
    std::vector<std::vector<double>> start, end;
};

QuerySeries score_stream(const Checkpoint& ckpt, const EventStream& stream, const RuleSet& rs) {
    if (stream.dim() != ckpt.classifier.input_dim())
        throw ValidationError("checkpoint expects feature dimension " + std::to_string(ckpt.classifier.input_dim()) +
                              ", stream has " + std::to_string(stream.dim()));
    if (ckpt.classifier.num_classes() != rs.num_classes())
        throw ValidationError("checkpoint class count differs from the rules");
    const std::size_t n = stream.length(), nf = rs.num_fluents();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    QuerySeries q{std::vector(nf, std::vector(n, nan)), std::vector(nf, std::vector(n, nan))};
    if (ckpt.head) {
        purenn::PureNNParams p{ckpt.classifier, *ckpt.head, ckpt.window};
        if (p.num_fluents() != nf) throw ValidationError("checkpoint fluent count differs from the rules");
        for (TimePoint t = 0; t < n; ++t) {
            if (t + 1 < p.window) continue;
            auto dist = purenn::purenn_forward(p, stream, t, p.window);
            for (FluentId f = 0; f < nf; ++f) {
                q.start[f][t] = dist[train::query_index(Polarity::Start, f, nf)];
                q.end[f][t] = dist[train::query_index(Polarity::End, f, nf)];
            }
        }
    } else {
        const auto dists = nn::classify_stream(ckpt.classifier, stream);
        for (const auto& r : rs.rules)
            for (TimePoint t = r.window - 1; t < n; ++t)
                (r.polarity == Polarity::Start ? q.start : q.end)[r.fluent][t] = pattern_prob(dists, r, t);
    }
    return q;
}

int cmd_infer(const InferFlags& f, std::ostream& out) {
    const Checkpoint ckpt = load_checkpoint(f.checkpoint);
    RuleSet rs = load_rules(f.rules);
    if (f.window) rs = rs.with_window(f.window);
    require_valid(rs);
    const EventStream stream = load_stream(f.features, f.seq);
    const auto q = score_stream(ckpt, stream, rs);

    const std::size_t nf = rs.num_fluents();
    std::vector<ProbSeries> holds;
    for (FluentId fl = 0; fl < nf; ++fl) {
        std::vector<double> init(stream.length()), term(stream.length());
        for (TimePoint t = 0; t < stream.length(); ++t) {
            init[t] = std::isnan(q.start[fl][t]) ? 0.0 : q.start[fl][t];
            term[t] = std::isnan(q.end[fl][t]) ? 0.0 : q.end[fl][t];
        }
        holds.push_back(holds_at_recursion(init, term, f.h0));
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (!f.out.empty()) {
        file.open(f.out);
        if (!file) throw IoError("cannot write " + f.out);
        sink = &file;
    }
    auto prob = [](double v) { return std::isnan(v) ? ojson(nullptr) : ojson(v); };
    for (TimePoint t = 0; t < stream.length(); ++t) {
        ojson line;
        line["t"] = t;
        ojson start = ojson::object(), end = ojson::object(), hold = ojson::object();
        for (FluentId fl = 0; fl < nf; ++fl) {
            start[rs.fluents[fl]] = prob(q.start[fl][t]);
            end[rs.fluents[fl]] = prob(q.end[fl][t]);
            hold[rs.fluents[fl]] = holds[fl][t];
        }
        line["start"] = start;
        line["end"] = end;
        line["holds"] = hold;
        *sink << line.dump() << '\n';
    }
    return kOk;
}

struct OracleFlags {
    std::string features;
    std::string rules;
    std::string query;
    std::string checkpoint;
    std::string seq;
    std::size_t window = 0;
    double h0 = 0.0;
};

int cmd_oracle(const OracleFlags& f, std::ostream& out) {
    RuleSet rs = load_rules(f.rules);
    if (f.window) rs = rs.with_window(f.window);
    require_valid(rs);
    const EventStream stream = load_stream(f.features, f.seq);

    // kind:fluent@t
    const auto colon = f.query.find(':');
    const auto at = f.query.find('@');
    if (colon == std::string::npos || at == std::string::npos || at < colon)
        throw ValidationError("query must look like start:FLUENT@T, end:FLUENT@T or holds:FLUENT@T");
    const std::string kind = f.query.substr(0, colon);
    const std::string fluent = f.query.substr(colon + 1, at - colon - 1);
    TimePoint t = 0;
    try {
        std::size_t used = 0;
        t = std::stoul(f.query.substr(at + 1), &used);
        if (used != f.query.size() - at - 1) throw std::invalid_argument("t");
    } catch (const std::logic_error&) {
        throw ValidationError("bad time point in query '" + f.query + "'");
    }
    auto fit = std::find(rs.fluents.begin(), rs.fluents.end(), fluent);
    if (fit == rs.fluents.end()) throw ValidationError("unknown fluent '" + fluent + "'");
    const FluentId fid = static_cast<FluentId>(fit - rs.fluents.begin());

    std::vector<ClassDistribution> dists;
    if (!f.checkpoint.empty()) {
        const Checkpoint ckpt = load_checkpoint(f.checkpoint);
        if (ckpt.head) throw ValidationError("the oracle needs a hybrid (classifier-only) checkpoint");
        if (ckpt.classifier.num_classes() != rs.num_classes())
            throw ValidationError("checkpoint class count differs from the rules");
        dists = nn::classify_stream(ckpt.classifier, stream);
    } else {
        if (!stream.has_ground_truth()) throw ValidationError("without --checkpoint the features need a class column");
        for (ClassId c : *stream.gt_class()) dists.push_back(ClassDistribution::one_hot(rs.num_classes(), c));
    }

    double p = 0.0;
    if (kind == "start")
        p = enumerate_oracle(dists, Polarity::Start, fid, t, rs);
    else if (kind == "end")
        p = enumerate_oracle(dists, Polarity::End, fid, t, rs);
    else if (kind == "holds")
        p = enumerate_holds_oracle(dists, rs, fid, f.h0, t);
    else
        throw ValidationError("query kind must be start, end or holds");

    ojson j;
    j["query"] = f.query;
    j["prob"] = p;
    out << j.dump() << '\n';
    return kOk;
}

struct SynthFlags {
    std::string out;
    data::SynthConfig cfg;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
    const auto generated = data::synth_generate(f.cfg);
    data::synth_write(generated, f.out);
    std::size_t steps = 0;
    for (const auto& fold : generated.folds)
        for (const auto& frag : fold) steps += frag.length();
    out << "wrote " << generated.manifest.files.size() << " files (" << steps << " steps) to " << f.out << '\n';
    return kOk;
}

int cmd_parse(const std::string& path, std::ostream& out, std::ostream& err) {
    const std::string text = read_text(path);
    try {
        out << pretty_print(parse_ruleset(text));
    } catch (const ParseError& e) {
        err << format_diagnostic(e, path) << '\n';
        return kUsage;
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Probabilistic event-calculus complex event processing"};
    app.require_subcommand(1);

    std::string parse_path;
    auto* parse = app.add_subcommand("parse", "Validate a rule file and print its canonical form");
    parse->add_option("rules,--rules", parse_path, "Rule file")->required();

    TrainFlags train_flags, baseline_flags;
    auto* train = app.add_subcommand("train", "Cross-validate the hybrid (classifier + rules) model");
    add_train_flags(train, train_flags);
    auto* baseline = app.add_subcommand("baseline", "Cross-validate the PureNN baseline");
    add_train_flags(baseline, baseline_flags);

    InferFlags infer_flags;
    auto* infer = app.add_subcommand("infer", "Per-step start/end/holdsAt probabilities as JSON lines");
    infer->add_option("--checkpoint", infer_flags.checkpoint, "Model checkpoint")->required();
    infer->add_option("--features", infer_flags.features, "Features CSV")->required();
    infer->add_option("--rules", infer_flags.rules, "Rule file")->required();
    infer->add_option("--seq", infer_flags.seq, "Only this seq_id");
    infer->add_option("--window", infer_flags.window, "Window size for every rule");
    infer->add_option("--h0", infer_flags.h0, "Initial holdsAt probability");
    infer->add_option("--out", infer_flags.out, "Output path (default: stdout)");

    OracleFlags oracle_flags;
    auto* oracle = app.add_subcommand("oracle", "Exact query probability by enumeration (small instances)");
    oracle->add_option("--features", oracle_flags.features, "Features CSV")->required();
    oracle->add_option("--rules", oracle_flags.rules, "Rule file")->required();
    oracle->add_option("--query", oracle_flags.query, "start:FLUENT@T, end:FLUENT@T or holds:FLUENT@T")->required();
    oracle->add_option("--checkpoint", oracle_flags.checkpoint, "Hybrid checkpoint (default: one-hot class column)");
    oracle->add_option("--seq", oracle_flags.seq, "Only this seq_id");
    oracle->add_option("--window", oracle_flags.window, "Window size for every rule");
    oracle->add_option("--h0", oracle_flags.h0, "Initial holdsAt probability");

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset, manifest and rules");
    synth->add_option("--out", synth_flags.out, "Output directory")->required();
    synth->add_option("--classes", synth_flags.cfg.classes, "Number of classes");
    synth->add_option("--fluents", synth_flags.cfg.fluents, "Number of fluents");
    synth->add_option("--per-class", synth_flags.cfg.per_class, "Files per class");
    synth->add_option("--dim", synth_flags.cfg.dim, "Feature dimension");
    synth->add_option("--noise", synth_flags.cfg.noise, "Gaussian noise sigma");
    synth->add_option("--seed", synth_flags.cfg.seed, "Random seed");
    synth->add_option("--window", synth_flags.cfg.window, "Window written into rules.cep");
    synth->add_option("--min-steps", synth_flags.cfg.min_steps, "Shortest file, in steps");
    synth->add_option("--max-steps", synth_flags.cfg.max_steps, "Longest file, in steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*parse) return cmd_parse(parse_path, out, err);
        if (*train) return cmd_train(train_flags, experiment::ModelKind::Hybrid, out);
        if (*baseline) return cmd_train(baseline_flags, experiment::ModelKind::PureNN, out);
        if (*infer) return cmd_infer(infer_flags, out);
        if (*oracle) return cmd_oracle(oracle_flags, out);
        if (*synth) return cmd_synth(synth_flags, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const ParseError& e) {
        err << format_diagnostic(e, "<rules>") << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace cep::cli
