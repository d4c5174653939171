#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cep/core.hpp"

namespace cep::data {

/// Consecutive steps of one source file (one seq_id in a features CSV).
struct Fragment {
    std::string seq_id;
    std::size_t dim = 0;
    std::vector<double> features;  // length x dim, row-major
    std::optional<std::vector<ClassId>> gt_class;

    std::size_t length() const noexcept { return dim ? features.size() / dim : 0; }
    bool operator==(const Fragment&) const = default;
};

/// Features CSV: header `seq_id,t,f0,...,f{D-1}[,class]`, one row per step.
/// Rows of a seq_id must have strictly increasing t. Fragments are returned
/// in order of first appearance. Errors carry the offending line number.
std::vector<Fragment> parse_features_csv(std::string_view text);
std::vector<Fragment> load_features_csv(const std::string& path);

/// Inverse of parse_features_csv (t restarts at 0 per fragment); numbers use
/// shortest round-trip formatting.
std::string format_features_csv(std::span<const Fragment> fragments);
void save_features_csv(const std::string& path, std::span<const Fragment> fragments);

struct ManifestEntry {
    std::string id;    // seq_id inside the features file
    std::string path;  // relative to the manifest's directory
    ClassId class_id = 0;
    int fold = 1;      // 1..10

    bool operator==(const ManifestEntry&) const = default;
};

/// JSON: {"classes": [...], "dim": D, "files": [{"id","path","class","fold"}]}.
/// "class" may be a class name or an integer id.
struct Manifest {
    std::vector<std::string> classes;
    std::size_t dim = 0;
    std::vector<ManifestEntry> files;
    std::string base_dir;  // where relative paths resolve; not serialised

    std::vector<int> fold_ids() const;  // distinct, ascending
    bool operator==(const Manifest&) const = default;
};

Manifest parse_manifest(std::string_view json_text, std::string base_dir = ".");
Manifest load_manifest(const std::string& path);
std::string format_manifest(const Manifest& m);
void save_manifest(const std::string& path, const Manifest& m);

/// Every fragment referenced by a manifest, loaded once.
class Dataset {
public:
    static Dataset load(const Manifest& manifest);

    const Manifest& manifest() const noexcept { return manifest_; }
    const Fragment& fragment(std::size_t file_index) const { return fragments_.at(file_index); }

private:
    Manifest manifest_;
    std::vector<Fragment> fragments_;  // parallel to manifest.files
};

/// Concatenates the files of the selected folds in a seeded random order.
/// Frame labels come from the features file when present, otherwise from the
/// manifest class. Complex-event labels are derived with `rs`.
EventStream assemble_sequence(const Dataset& data, std::span<const int> folds, std::uint64_t seed, const RuleSet& rs);
EventStream assemble_sequence(const Manifest& manifest, std::span<const int> folds, std::uint64_t seed,
                              const RuleSet& rs);

/// File order used by assemble_sequence (indices into manifest.files).
std::vector<std::size_t> assembly_order(const Manifest& manifest, std::span<const int> folds, std::uint64_t seed);

struct SynthConfig {
    std::size_t classes = 10;
    std::size_t fluents = 5;
    std::size_t per_class = 50;  // files per class
    std::size_t dim = 16;
    double noise = 0.1;
    std::uint64_t seed = 1;
    std::size_t min_steps = 1;   // per-file duration range
    std::size_t max_steps = 4;
    std::size_t window = 3;      // written into the generated rules
};

/// Fluent i starts on repeat(c{2i}) and ends on repeat(c{2i+1}), count=2.
RuleSet synth_ruleset(std::size_t classes, std::size_t fluents, std::size_t window);

struct SynthData {
    Manifest manifest;
    std::vector<std::vector<Fragment>> folds;  // fragments per fold, folds[0] is fold 1
    RuleSet rules;
};

/// Desk-scale stand-in for the audio dataset: each step of a file of class c
/// is one-hot(c) in the first `classes` dimensions plus N(0, noise^2) on every
/// dimension. Files are spread round-robin over 10 folds after a seeded shuffle.
SynthData synth_generate(const SynthConfig& cfg);

/// Writes fold01.csv..fold10.csv, manifest.json and rules.cep into `dir`.
Manifest synth_write(const SynthData& data, const std::string& dir);

}  // namespace cep::data
