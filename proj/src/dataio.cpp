#include "cep/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cep/error.hpp"
#include "cep/rng.hpp"
#include "cep/rules.hpp"

namespace cep::data {
namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

}  // namespace

std::vector<Fragment> parse_features_csv(std::string_view text) {
    std::vector<Fragment> frags;
    std::map<std::string, std::size_t, std::less<>> index;
    std::map<std::size_t, long long> last_t;

    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool has_class = false;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        auto fields = split(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() < 3 || fields[0] != "seq_id" || fields[1] != "t")
                throw DataError("header must start with seq_id,t,f0", line_no);
            has_class = fields.back() == "class";
            dim = fields.size() - 2 - (has_class ? 1 : 0);
            if (dim == 0) throw DataError("no feature columns", line_no);
            for (std::size_t d = 0; d < dim; ++d)
                if (fields[2 + d] != "f" + std::to_string(d))
                    throw DataError("expected column f" + std::to_string(d), line_no);
            continue;
        }

        const std::size_t expected = dim + 2 + (has_class ? 1 : 0);
        if (fields.size() != expected)
            throw DataError("expected " + std::to_string(expected) + " fields, found " + std::to_string(fields.size()),
                            line_no);

        long long t = 0;
        if (!parse_number(fields[1], t) || t < 0) throw DataError("bad time index '" + std::string(fields[1]) + "'", line_no);

        auto it = index.find(fields[0]);
        if (it == index.end()) {
            it = index.emplace(std::string(fields[0]), frags.size()).first;
            Fragment f;
            f.seq_id = std::string(fields[0]);
            f.dim = dim;
            if (has_class) f.gt_class.emplace();
            frags.push_back(std::move(f));
        }
        Fragment& frag = frags[it->second];
        if (auto lt = last_t.find(it->second); lt != last_t.end()) {
            if (t == lt->second) throw DataError("duplicate (seq_id, t) = (" + frag.seq_id + ", " + std::to_string(t) + ")", line_no);
            if (t < lt->second) throw DataError("time index not increasing for seq_id " + frag.seq_id, line_no);
        }
        last_t[it->second] = t;

        for (std::size_t d = 0; d < dim; ++d) {
            double v = 0.0;
            if (!parse_number(fields[2 + d], v)) throw DataError("bad number '" + std::string(fields[2 + d]) + "'", line_no);
            if (!std::isfinite(v)) throw DataError("non-finite feature value", line_no);
            frag.features.push_back(v);
        }
        if (has_class) {
            std::size_t c = 0;
            if (!parse_number(fields.back(), c)) throw DataError("bad class id '" + std::string(fields.back()) + "'", line_no);
            frag.gt_class->push_back(c);
        }
    }
    if (!header_seen) throw DataError("empty features file");
    return frags;
}

std::vector<Fragment> load_features_csv(const std::string& path) {
    try {
        return parse_features_csv(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

std::string format_features_csv(std::span<const Fragment> fragments) {
    if (fragments.empty()) throw ValidationError("no fragments to write");
    const std::size_t dim = fragments.front().dim;
    const bool has_class = fragments.front().gt_class.has_value();
    for (const auto& f : fragments)
        if (f.dim != dim || f.gt_class.has_value() != has_class)
            throw ValidationError("fragments disagree on dimension or class column");

    std::string out = "seq_id,t";
    for (std::size_t d = 0; d < dim; ++d) out += ",f" + std::to_string(d);
    if (has_class) out += ",class";
    out += '\n';
    for (const auto& f : fragments) {
        for (std::size_t t = 0; t < f.length(); ++t) {
            out += f.seq_id;
            out += ',';
            out += std::to_string(t);
            for (std::size_t d = 0; d < dim; ++d) {
                out += ',';
                append_double(out, f.features[t * dim + d]);
            }
            if (has_class) out += "," + std::to_string((*f.gt_class)[t]);
            out += '\n';
        }
    }
    return out;
}

void save_features_csv(const std::string& path, std::span<const Fragment> fragments) {
    write_file(path, format_features_csv(fragments));
}

std::vector<int> Manifest::fold_ids() const {
    std::set<int> s;
    for (const auto& f : files) s.insert(f.fold);
    return {s.begin(), s.end()};
}

Manifest parse_manifest(std::string_view json_text, std::string base_dir) {
    using nlohmann::json;
    try {
        json j = json::parse(json_text);
        Manifest m;
        m.base_dir = std::move(base_dir);
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.dim = j.at("dim").get<std::size_t>();
        if (m.dim == 0) throw ValidationError("manifest: dim must be positive");
        for (const auto& e : j.at("files")) {
            ManifestEntry entry;
            entry.id = e.at("id").is_string() ? e.at("id").get<std::string>() : e.at("id").dump();
            entry.path = e.at("path").get<std::string>();
            const auto& c = e.at("class");
            if (c.is_string()) {
                auto it = std::find(m.classes.begin(), m.classes.end(), c.get<std::string>());
                if (it == m.classes.end()) throw ValidationError("manifest: unknown class " + c.get<std::string>());
                entry.class_id = static_cast<ClassId>(it - m.classes.begin());
            } else {
                entry.class_id = c.get<ClassId>();
                if (entry.class_id >= m.classes.size()) throw ValidationError("manifest: class id out of range");
            }
            entry.fold = e.at("fold").get<int>();
            if (entry.fold < 1 || entry.fold > 10) throw ValidationError("manifest: fold must be in 1..10");
            m.files.push_back(std::move(entry));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
}

Manifest load_manifest(const std::string& path) {
    auto dir = fs::path(path).parent_path();
    return parse_manifest(read_file(path), dir.empty() ? "." : dir.string());
}

std::string format_manifest(const Manifest& m) {
    using nlohmann::json;
    json files = json::array();
    for (const auto& f : m.files)
        files.push_back({{"id", f.id}, {"path", f.path}, {"class", m.classes.at(f.class_id)}, {"fold", f.fold}});
    return json{{"classes", m.classes}, {"dim", m.dim}, {"files", files}}.dump(1) + "\n";
}

void save_manifest(const std::string& path, const Manifest& m) { write_file(path, format_manifest(m)); }

Dataset Dataset::load(const Manifest& manifest) {
    Dataset ds;
    ds.manifest_ = manifest;
    std::map<std::string, std::vector<Fragment>> by_path;
    for (const auto& entry : manifest.files) {
        auto full = (fs::path(manifest.base_dir) / entry.path).string();
        auto it = by_path.find(full);
        if (it == by_path.end()) it = by_path.emplace(full, load_features_csv(full)).first;
        auto frag = std::find_if(it->second.begin(), it->second.end(),
                                 [&](const Fragment& f) { return f.seq_id == entry.id; });
        if (frag == it->second.end()) throw DataError(full + ": no rows for seq_id " + entry.id);
        if (frag->dim != manifest.dim)
            throw DataError(full + ": dimension " + std::to_string(frag->dim) + " differs from manifest dim " +
                            std::to_string(manifest.dim));
        if (frag->gt_class)
            for (ClassId c : *frag->gt_class)
                if (c >= manifest.classes.size()) throw DataError(full + ": class id out of range");
        ds.fragments_.push_back(*frag);
    }
    return ds;
}

std::vector<std::size_t> assembly_order(const Manifest& manifest, std::span<const int> folds, std::uint64_t seed) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < manifest.files.size(); ++i)
        if (std::find(folds.begin(), folds.end(), manifest.files[i].fold) != folds.end()) order.push_back(i);
    if (order.empty()) throw ValidationError("empty selection: no files in the requested folds");
    Rng rng(seed);
    seeded_shuffle(order.begin(), order.end(), rng);
    return order;
}

EventStream assemble_sequence(const Dataset& data, std::span<const int> folds, std::uint64_t seed, const RuleSet& rs) {
    const Manifest& m = data.manifest();
    std::vector<double> features;
    std::vector<ClassId> gt;
    for (std::size_t i : assembly_order(m, folds, seed)) {
        const Fragment& f = data.fragment(i);
        features.insert(features.end(), f.features.begin(), f.features.end());
        if (f.gt_class)
            gt.insert(gt.end(), f.gt_class->begin(), f.gt_class->end());
        else
            gt.insert(gt.end(), f.length(), m.files[i].class_id);
    }
    if (gt.empty()) throw ValidationError("empty selection: selected files have no steps");
    EventStream stream(m.dim, std::move(features), std::move(gt));
    stream.set_events(annotate_ground_truth(stream, rs));
    return stream;
}

EventStream assemble_sequence(const Manifest& manifest, std::span<const int> folds, std::uint64_t seed,
                              const RuleSet& rs) {
    return assemble_sequence(Dataset::load(manifest), folds, seed, rs);
}

RuleSet synth_ruleset(std::size_t classes, std::size_t fluents, std::size_t window) {
    if (classes < 2 * fluents) throw ValidationError("synthetic data needs classes >= 2 * fluents");
    RuleSet rs;
    for (std::size_t c = 0; c < classes; ++c) rs.classes.push_back("c" + std::to_string(c));
    for (std::size_t f = 0; f < fluents; ++f) {
        rs.fluents.push_back("fluent" + std::to_string(f));
        rs.rules.push_back({f, Polarity::Start, 2 * f, 2, window});
        rs.rules.push_back({f, Polarity::End, 2 * f + 1, 2, window});
    }
    require_valid(rs);
    return rs;
}

SynthData synth_generate(const SynthConfig& cfg) {
    if (cfg.fluents == 0 || cfg.classes < 2 * cfg.fluents)
        throw ValidationError("synthetic data needs fluents >= 1 and classes >= 2 * fluents");
    if (cfg.dim < cfg.classes) throw ValidationError("synthetic data needs dim >= classes");
    if (cfg.per_class == 0) throw ValidationError("synthetic data needs per_class >= 1");
    if (cfg.min_steps == 0 || cfg.min_steps > cfg.max_steps) throw ValidationError("invalid duration range");
    if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) throw ValidationError("noise must be finite and >= 0");

    SynthData out;
    out.rules = synth_ruleset(cfg.classes, cfg.fluents, cfg.window);
    out.manifest.classes = out.rules.classes;
    out.manifest.dim = cfg.dim;
    out.folds.resize(10);

    // Fold assignment: seeded shuffle of all files, then round robin.
    std::vector<std::size_t> files(cfg.classes * cfg.per_class);
    for (std::size_t i = 0; i < files.size(); ++i) files[i] = i;
    Rng fold_rng(sub_seed(cfg.seed, "synth-folds"));
    seeded_shuffle(files.begin(), files.end(), fold_rng);
    std::vector<int> fold_of(files.size());
    for (std::size_t r = 0; r < files.size(); ++r) fold_of[files[r]] = static_cast<int>(r % 10) + 1;

    Rng rng(sub_seed(cfg.seed, "synth-features"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < files.size(); ++i) {
        const ClassId c = i / cfg.per_class;
        const std::size_t steps = cfg.min_steps + uniform_index(rng, cfg.max_steps - cfg.min_steps + 1);
        Fragment f;
        f.seq_id = "s" + std::to_string(i);
        f.dim = cfg.dim;
        f.gt_class = std::vector<ClassId>(steps, c);
        f.features.resize(steps * cfg.dim);
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t d = 0; d < cfg.dim; ++d)
                f.features[t * cfg.dim + d] = (d == c ? 1.0 : 0.0) + cfg.noise * gauss(rng);
        const int fold = fold_of[i];
        char name[16];
        std::snprintf(name, sizeof name, "fold%02d.csv", fold);
        out.manifest.files.push_back({f.seq_id, name, c, fold});
        out.folds[static_cast<std::size_t>(fold - 1)].push_back(std::move(f));
    }
    return out;
}

Manifest synth_write(const SynthData& data, const std::string& dir) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < data.folds.size(); ++k) {
        if (data.folds[k].empty()) continue;
        char name[16];
        std::snprintf(name, sizeof name, "fold%02zu.csv", k + 1);
        save_features_csv((fs::path(dir) / name).string(), data.folds[k]);
    }
    save_manifest((fs::path(dir) / "manifest.json").string(), data.manifest);
    write_file((fs::path(dir) / "rules.cep").string(), pretty_print(data.rules));
    Manifest m = data.manifest;
    m.base_dir = dir;
    return m;
}

}  // namespace cep::data
