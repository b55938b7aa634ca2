#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mscluster/error.hpp"
#include "mscluster/evalmetrics.hpp"
#include "mscluster/partition.hpp"
#include "mscluster/scan.hpp"

namespace mscluster {

// Flat `key = value` configuration. Blank lines and lines starting with '#'
// are ignored. Relative paths are resolved against the config file's folder.
struct PipelineConfig {
    std::filesystem::path corpus;     // JSONL records
    std::filesystem::path vectors;    // optional imported vectors; TF-iDF when empty
    std::filesystem::path stopwords;  // optional; built-in list when empty
    std::filesystem::path workdir;
    std::size_t k = 13;
    double t_min = 0.01;
    double t_max = 100.0;
    std::size_t t_points = 400;
    std::size_t runs = 500;
    std::size_t top_m = 50;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    SelectOptions select;
    bool evaluate = true;
    std::size_t top_words = 10;
    std::size_t ngram_top = 5;

    // Sets one key from text; throws ValidationError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {});
    // Canonical text form; parse_config(to_text()) round-trips.
    std::string to_text() const;
    void validate() const;
};

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
PipelineConfig load_config(const std::filesystem::path& path);

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct StageStatus {
    std::string name;
    bool skipped = false;
};

// Runs ingest -> vectors -> graph -> scan -> select -> evaluate -> export.
// A stage is skipped when its recorded input hash matches and its outputs are
// unchanged on disk. Holds <workdir>/.lock for the duration.
std::vector<StageStatus> run_pipeline(const PipelineConfig& cfg,
                                      const std::function<void(const std::string&)>& log = {});

// Selected levels: <dir>/levels.json plus one partition CSV per level.
void save_levels(const ScanResult& sr, const std::vector<RobustLevel>& levels, const std::filesystem::path& path);
std::vector<RobustLevel> load_levels(const std::filesystem::path& path);

struct SankeyLayer {
    std::string name;
    std::vector<std::size_t> sizes;
    std::vector<std::string> labels;  // only for an external-label layer
};

struct SankeyFlow {
    std::size_t from_layer = 0;
    int from = 0;
    int to = 0;
    std::size_t weight = 0;
};

struct SankeyFlows {
    std::vector<SankeyLayer> layers;
    std::vector<SankeyFlow> flows;  // sorted by (from_layer, from, to)
};

// Flow counts between consecutive layers; external labels, when given, form
// the last layer.
SankeyFlows export_sankey(std::span<const Partition> levels, std::span<const std::string> names,
                          const Labelling* labels = nullptr);
std::string sankey_json(const SankeyFlows& flows);

// Fraction of clusters in layer `boundary` whose largest outgoing flow
// carries at least `dominance` of the cluster.
double quasi_hierarchy_fraction(const SankeyFlows& flows, std::size_t boundary, double dominance = 0.95);

// Plain-text summary of the selected levels in a pipeline workdir.
std::string summarize_levels(const std::filesystem::path& workdir, std::size_t ngram_top = 5);

}  // namespace mscluster
