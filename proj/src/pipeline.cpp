#include "mscluster/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unistd.h>

#include "mscluster/corpus.hpp"
#include "mscluster/diffusion.hpp"
#include "mscluster/simgraph.hpp"
#include "mscluster/util.hpp"
#include "mscluster/vectors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mscluster {

// ---- configuration ----------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_unsigned(std::string_view key, std::string_view v) {
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ValidationError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                              std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    double out = 0;
    if (!parse_double(v, out) || !std::isfinite(out)) {
        throw ValidationError("config key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ValidationError("config key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

fs::path resolve(std::string_view v, const fs::path& base) {
    fs::path p{std::string(v)};
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
    const std::string_view v = trim(value);
    if (key == "corpus") corpus = resolve(v, base);
    else if (key == "vectors") vectors = resolve(v, base);
    else if (key == "stopwords") stopwords = resolve(v, base);
    else if (key == "workdir") workdir = resolve(v, base);
    else if (key == "k") k = parse_unsigned<std::size_t>(key, v);
    else if (key == "t_min") t_min = parse_real(key, v);
    else if (key == "t_max") t_max = parse_real(key, v);
    else if (key == "t_points") t_points = parse_unsigned<std::size_t>(key, v);
    else if (key == "runs") runs = parse_unsigned<std::size_t>(key, v);
    else if (key == "top_m") top_m = parse_unsigned<std::size_t>(key, v);
    else if (key == "seed") seed = parse_unsigned<std::uint64_t>(key, v);
    else if (key == "threads") threads = parse_unsigned<unsigned>(key, v);
    else if (key == "plateau_span") select.min_plateau_decades = parse_real(key, v);
    else if (key == "vi_dip_quantile") select.vi_dip_quantile = parse_real(key, v);
    else if (key == "plateau_eps") {
        if (v == "auto") select.plateau_eps.reset();
        else select.plateau_eps = parse_real(key, v);
    } else if (key == "evaluate") evaluate = parse_bool(key, v);
    else if (key == "top_words") top_words = parse_unsigned<std::size_t>(key, v);
    else if (key == "ngram_top") ngram_top = parse_unsigned<std::size_t>(key, v);
    else throw ValidationError("unknown config key '" + std::string(key) + "'");
}

std::string PipelineConfig::to_text() const {
    std::ostringstream out;
    out << "corpus = " << corpus.string() << '\n'
        << "vectors = " << vectors.string() << '\n'
        << "stopwords = " << stopwords.string() << '\n'
        << "workdir = " << workdir.string() << '\n'
        << "k = " << k << '\n'
        << "t_min = " << format_double(t_min) << '\n'
        << "t_max = " << format_double(t_max) << '\n'
        << "t_points = " << t_points << '\n'
        << "runs = " << runs << '\n'
        << "top_m = " << top_m << '\n'
        << "seed = " << seed << '\n'
        << "threads = " << threads << '\n'
        << "plateau_span = " << format_double(select.min_plateau_decades) << '\n'
        << "vi_dip_quantile = " << format_double(select.vi_dip_quantile) << '\n'
        << "plateau_eps = " << (select.plateau_eps ? format_double(*select.plateau_eps) : std::string("auto")) << '\n'
        << "evaluate = " << (evaluate ? "true" : "false") << '\n'
        << "top_words = " << top_words << '\n'
        << "ngram_top = " << ngram_top << '\n';
    return out.str();
}

void PipelineConfig::validate() const {
    if (corpus.empty()) throw ValidationError("config: 'corpus' is required");
    if (!fs::is_regular_file(corpus)) throw ValidationError("config: corpus file not found: " + corpus.string());
    if (!vectors.empty() && !fs::is_regular_file(vectors)) {
        throw ValidationError("config: vectors file not found: " + vectors.string());
    }
    if (!stopwords.empty() && !fs::is_regular_file(stopwords)) {
        throw ValidationError("config: stop-word file not found: " + stopwords.string());
    }
    if (workdir.empty()) throw ValidationError("config: 'workdir' is required");
    if (k < 1) throw ValidationError("config: k must be >= 1");
    if (!(t_min > 0.0) || !(t_max >= t_min)) throw ValidationError("config: need 0 < t_min <= t_max");
    if (t_points < 1) throw ValidationError("config: t_points must be >= 1");
    if (top_m < 2 || runs < top_m) throw ValidationError("config: need runs >= top_m >= 2");
    if (!(select.min_plateau_decades >= 0.0)) throw ValidationError("config: plateau_span must be >= 0");
    if (!(select.vi_dip_quantile >= 0.0 && select.vi_dip_quantile <= 1.0)) {
        throw ValidationError("config: vi_dip_quantile must lie in [0, 1]");
    }
    if (select.plateau_eps && !(*select.plateau_eps > 0.0)) throw ValidationError("config: plateau_eps must be > 0");
    if (top_words < 2) throw ValidationError("config: top_words must be >= 2");
}

PipelineConfig parse_config(std::string_view text, const fs::path& base) {
    PipelineConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        try {
            cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1), base);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    return parse_config(read_file(path), fs::absolute(path).parent_path());
}

// ---- levels -----------------------------------------------------------------

void save_levels(const ScanResult& sr, const std::vector<RobustLevel>& levels, const fs::path& path) {
    json j;
    auto& arr = j["levels"] = json::array();
    for (const auto& l : levels) {
        if (l.index >= sr.size()) throw DimensionError("level index outside the scan");
        arr.push_back({{"index", l.index},
                       {"t", l.t},
                       {"C", l.num_clusters},
                       {"stability", l.stability},
                       {"vi_ensemble", l.vi_ensemble},
                       {"plateau_begin", l.plateau_begin},
                       {"plateau_end", l.plateau_end},
                       {"plateau_t_begin", sr.points[l.plateau_begin].t},
                       {"plateau_t_end", sr.points[l.plateau_end].t},
                       {"plateau_decades", l.plateau_decades}});
    }
    write_file(path, j.dump(2) + "\n");
}

std::vector<RobustLevel> load_levels(const fs::path& path) {
    std::vector<RobustLevel> out;
    try {
        const auto j = json::parse(read_file(path));
        for (const auto& e : j.at("levels")) {
            RobustLevel l;
            l.index = e.at("index").get<std::size_t>();
            l.t = e.at("t").get<double>();
            l.num_clusters = e.at("C").get<int>();
            l.stability = e.at("stability").get<double>();
            l.vi_ensemble = e.at("vi_ensemble").get<double>();
            l.plateau_begin = e.at("plateau_begin").get<std::size_t>();
            l.plateau_end = e.at("plateau_end").get<std::size_t>();
            l.plateau_decades = e.at("plateau_decades").get<double>();
            out.push_back(l);
        }
    } catch (const json::exception& e) {
        throw Error("invalid levels file " + path.string() + ": " + e.what());
    }
    return out;
}

// ---- Sankey -----------------------------------------------------------------

SankeyFlows export_sankey(std::span<const Partition> levels, std::span<const std::string> names,
                          const Labelling* labels) {
    if (!names.empty() && names.size() != levels.size()) throw DimensionError("one layer name per partition expected");
    std::vector<const Partition*> layers;
    for (const auto& p : levels) layers.push_back(&p);
    if (labels) layers.push_back(&labels->partition);
    if (layers.empty()) throw ValidationError("Sankey export needs at least one layer");
    const std::size_t n = layers.front()->size();
    for (const auto* p : layers) {
        if (p->size() != n) throw DimensionError("Sankey layers cover different node sets");
    }

    SankeyFlows out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        SankeyLayer layer;
        if (l < levels.size()) layer.name = names.empty() ? "level " + std::to_string(l) : names[l];
        else {
            layer.name = "labels";
            layer.labels = labels->names;
        }
        layer.sizes = layers[l]->cluster_sizes();
        out.layers.push_back(std::move(layer));
    }
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        std::map<std::pair<int, int>, std::size_t> counts;
        for (std::size_t i = 0; i < n; ++i) ++counts[{(*layers[l])[i], (*layers[l + 1])[i]}];
        for (const auto& [cell, w] : counts) out.flows.push_back({l, cell.first, cell.second, w});
    }
    return out;
}

double quasi_hierarchy_fraction(const SankeyFlows& flows, std::size_t boundary, double dominance) {
    if (boundary + 1 >= flows.layers.size()) throw ValidationError("no such Sankey layer boundary");
    const auto& sizes = flows.layers[boundary].sizes;
    std::vector<std::size_t> largest(sizes.size(), 0);
    for (const auto& f : flows.flows) {
        if (f.from_layer == boundary) {
            auto& m = largest[static_cast<std::size_t>(f.from)];
            m = std::max(m, f.weight);
        }
    }
    std::size_t dominated = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (static_cast<double>(largest[c]) >= dominance * static_cast<double>(sizes[c])) ++dominated;
    }
    return sizes.empty() ? 0.0 : static_cast<double>(dominated) / static_cast<double>(sizes.size());
}

std::string sankey_json(const SankeyFlows& flows) {
    json j;
    auto& layers = j["layers"] = json::array();
    for (const auto& layer : flows.layers) {
        json clusters = json::array();
        for (std::size_t c = 0; c < layer.sizes.size(); ++c) {
            json entry{{"id", c}, {"size", layer.sizes[c]}};
            if (!layer.labels.empty()) entry["label"] = layer.labels[c];
            clusters.push_back(std::move(entry));
        }
        layers.push_back({{"name", layer.name}, {"clusters", std::move(clusters)}});
    }
    auto& arr = j["flows"] = json::array();
    for (const auto& f : flows.flows) {
        arr.push_back({{"from_layer", f.from_layer}, {"from", f.from}, {"to", f.to}, {"weight", f.weight}});
    }
    auto& qh = j["quasi_hierarchy"] = json::array();
    for (std::size_t b = 0; b + 1 < flows.layers.size(); ++b) qh.push_back(quasi_hierarchy_fraction(flows, b));
    return j.dump(2) + "\n";
}

// ---- pipeline ---------------------------------------------------------------

namespace {

constexpr const char* kTokens = "tokens.jsonl";
constexpr const char* kVectors = "vectors.txt";
constexpr const char* kVocabulary = "vocabulary.txt";
constexpr const char* kGraph = "graph.txt";
constexpr const char* kScan = "scan";
constexpr const char* kLevels = "levels.json";
constexpr const char* kEval = "eval";
constexpr const char* kSankey = "sankey.json";
constexpr const char* kReport = "report.txt";
constexpr const char* kManifest = "stages.json";
constexpr const char* kMetadata = "metadata.json";

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class WorkdirLock {
public:
    explicit WorkdirLock(const fs::path& dir) : path_(dir / ".lock") {
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) {
            throw Error("workdir " + dir.string() + " is locked by another run (delete " + path_.string() +
                        " if it is stale)");
        }
        std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
        std::fclose(f);
    }
    ~WorkdirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    WorkdirLock(const WorkdirLock&) = delete;
    WorkdirLock& operator=(const WorkdirLock&) = delete;

private:
    fs::path path_;
};

// Content hashes of the named outputs; directories are expanded recursively.
json hash_outputs(const fs::path& workdir, const std::vector<std::string>& outputs) {
    json h = json::object();
    for (const auto& rel : outputs) {
        const fs::path p = workdir / rel;
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (e.is_regular_file()) files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) h[fs::relative(f, workdir).generic_string()] = sha256_file(f);
        } else if (fs::is_regular_file(p)) {
            h[rel] = sha256_file(p);
        } else {
            h[rel] = nullptr;
        }
    }
    return h;
}

class Runner {
public:
    Runner(const PipelineConfig& cfg, const std::function<void(const std::string&)>& log) : cfg_(cfg), log_(log) {
        const fs::path m = cfg_.workdir / kManifest;
        if (fs::is_regular_file(m)) {
            try {
                manifest_ = json::parse(read_file(m));
            } catch (const json::exception&) {
                manifest_ = json::object();
            }
        }
        const fs::path meta = cfg_.workdir / kMetadata;
        if (fs::is_regular_file(meta)) {
            try {
                metadata_ = json::parse(read_file(meta));
            } catch (const json::exception&) {
                metadata_ = json::object();
            }
        }
    }

    // Output hash of an earlier stage, as recorded in the manifest.
    std::string outputs_of(const std::string& stage) const {
        return manifest_.contains(stage) ? manifest_[stage]["outputs"].dump() : std::string("none");
    }

    template <class Fn>
    void stage(const std::string& name, const std::string& key, const std::vector<std::string>& outputs, Fn&& fn) {
        const std::string input = sha256_hex(name + "\n" + key);
        if (manifest_.contains(name) && manifest_[name]["input"] == input &&
            manifest_[name]["outputs"] == hash_outputs(cfg_.workdir, outputs)) {
            bool complete = true;
            for (const auto& [_, v] : manifest_[name]["outputs"].items()) complete = complete && !v.is_null();
            if (complete) {
                if (log_) log_(name + ": up to date");
                status_.push_back({name, true});
                return;
            }
        }
        if (log_) log_(name + ": running");
        try {
            fn();
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
        manifest_[name] = {{"input", input}, {"outputs", hash_outputs(cfg_.workdir, outputs)}};
        metadata_["stages"][name] = {{"completed_at", utc_now()}};
        write_file(cfg_.workdir / kManifest, manifest_.dump(2) + "\n");
        write_file(cfg_.workdir / kMetadata, metadata_.dump(2) + "\n");
        status_.push_back({name, false});
    }

    json& metadata() { return metadata_; }
    std::vector<StageStatus> status() const { return status_; }

private:
    const PipelineConfig& cfg_;
    const std::function<void(const std::string&)>& log_;
    json manifest_ = json::object();
    json metadata_ = json::object();
    std::vector<StageStatus> status_;
};

std::string level_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "level_%02zu", i);
    return buf;
}

}  // namespace

std::vector<StageStatus> run_pipeline(const PipelineConfig& cfg, const std::function<void(const std::string&)>& log) {
    cfg.validate();
    fs::create_directories(cfg.workdir);
    WorkdirLock lock(cfg.workdir);
    const fs::path wd = cfg.workdir;
    write_file(wd / "config.txt", cfg.to_text());
    Runner run(cfg, log);

    const std::string stop_key = cfg.stopwords.empty() ? "builtin:" + StopWords::builtin().version()
                                                       : "file:" + sha256_file(cfg.stopwords);
    run.stage("ingest", sha256_file(cfg.corpus) + "\n" + stop_key, {kTokens}, [&] {
        const StopWords sw = cfg.stopwords.empty() ? StopWords::builtin() : StopWords::load(cfg.stopwords);
        const Corpus c = ingest_file(cfg.corpus, sw, cfg.threads);
        std::ostringstream out;
        write_tokens(c, out);
        write_file(wd / kTokens, out.str());
        run.metadata()["corpus"] = {{"source", c.meta.source}, {"ingested_at", c.meta.timestamp},
                                    {"config_hash", c.meta.config_hash}, {"documents", c.size()}};
    });

    const bool imported = !cfg.vectors.empty();
    const std::string vec_out = imported ? kVectors : kVocabulary;
    run.stage("vectors", run.outputs_of("ingest") + "\n" + (imported ? "import:" + sha256_file(cfg.vectors) : "tfidf"),
              {vec_out}, [&] {
                  const Corpus c = read_tokens_file(wd / kTokens);
                  if (imported) {
                      const auto ids = c.ids();
                      export_vectors(import_vectors(cfg.vectors, ids), wd / kVectors);
                  } else {
                      const VectorSet vs = tfidf_vectorize(c);
                      std::string text;
                      for (const auto& w : vs.vocabulary) text += w + "\n";
                      write_file(wd / kVocabulary, text);
                  }
              });

    run.stage("graph", run.outputs_of("vectors") + "\n" + run.outputs_of("ingest") + "\nk=" + std::to_string(cfg.k),
              {kGraph}, [&] {
                  const Corpus c = read_tokens_file(wd / kTokens);
                  const VectorSet vs = imported ? import_vectors(wd / kVectors, c.ids()) : tfidf_vectorize(c);
                  const SimilarityGraph g = build_mst_knn(cosine_similarity_matrix(vs), cfg.k);
                  write_graph(g, wd / kGraph);
              });

    std::ostringstream scan_key;
    scan_key << run.outputs_of("graph") << "\nt_min=" << format_double(cfg.t_min) << " t_max=" << format_double(cfg.t_max)
             << " t_points=" << cfg.t_points << " runs=" << cfg.runs << " top_m=" << cfg.top_m << " seed=" << cfg.seed;
    run.stage("scan", scan_key.str(), {kScan}, [&] {
        const Corpus c = read_tokens_file(wd / kTokens);
        const SimilarityGraph g = read_graph(wd / kGraph);
        const DiffusionOperator op(g);
        ScanOptions opts;
        opts.times = log_time_grid(cfg.t_min, cfg.t_max, cfg.t_points);
        opts.runs = cfg.runs;
        opts.top_m = cfg.top_m;
        opts.seed = cfg.seed;
        opts.threads = cfg.threads;
        // One line per finished time point, so an interrupted sweep leaves
        // its partial results behind. Removed once the scan is saved.
        const fs::path progress_path = wd / "scan_progress.jsonl";
        std::ofstream progress(progress_path, std::ios::binary | std::ios::trunc);
        opts.on_time_done = [&](std::size_t i, const Partition& p, double vi) {
            json line = {{"index", i},
                         {"t", opts.times[i]},
                         {"C", p.num_clusters()},
                         {"stability", std::isfinite(p.stability) ? json(p.stability) : json(nullptr)},
                         {"vi_ensemble", vi},
                         {"partition", p.assignment()}};
            progress << line.dump() << '\n' << std::flush;
            if (log) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "scan: t[%zu] = %.4g  C = %d  VI(t) = %.4f", i, opts.times[i],
                              p.num_clusters(), vi);
                log(buf);
            }
        };
        const ScanResult sr = scan(op, opts);
        progress.close();
        fs::remove_all(wd / kScan);
        save_scan(sr, wd / kScan, c.ids());
        fs::remove(progress_path);
    });

    std::ostringstream select_key;
    select_key << run.outputs_of("scan") << "\nspan=" << format_double(cfg.select.min_plateau_decades)
               << " quantile=" << format_double(cfg.select.vi_dip_quantile)
               << " eps=" << (cfg.select.plateau_eps ? format_double(*cfg.select.plateau_eps) : "auto");
    run.stage("select", select_key.str(), {kLevels}, [&] {
        const ScanResult sr = load_scan(wd / kScan);
        save_levels(sr, select_robust(sr, cfg.select), wd / kLevels);
    });

    if (cfg.evaluate) {
        run.stage("evaluate",
                  run.outputs_of("select") + "\n" + run.outputs_of("scan") + "\n" + run.outputs_of("ingest") +
                      "\ntop_words=" + std::to_string(cfg.top_words),
                  {kEval}, [&] {
                      const Corpus c = read_tokens_file(wd / kTokens);
                      const ScanResult sr = load_scan(wd / kScan);
                      const auto levels = load_levels(wd / kLevels);
                      const WordStats stats(c.documents);
                      const bool labelled = std::all_of(c.documents.begin(), c.documents.end(),
                                                        [](const Document& d) { return d.category.has_value(); });
                      fs::remove_all(wd / kEval);
                      fs::create_directories(wd / kEval);
                      for (std::size_t i = 0; i < levels.size(); ++i) {
                          const Partition& p = sr.points[levels[i].index].optimum;
                          const MetricReport r = evaluate_partition(p, c.documents, stats, cfg.top_words);
                          write_file(wd / kEval / (level_name(i) + ".json"), metric_report_json(r));
                          if (labelled) {
                              const Labelling lab = corpus_labelling(c.documents);
                              write_contingency_csv(zscore_contingency(p, lab.partition),
                                                    wd / kEval / (level_name(i) + "_contingency.csv"), lab.names);
                          }
                      }
                  });
    }

    run.stage("export",
              run.outputs_of("select") + "\n" + run.outputs_of("scan") + "\n" + run.outputs_of("ingest") + "\n" +
                  run.outputs_of("evaluate") + "\nngram_top=" + std::to_string(cfg.ngram_top),
              {kSankey, kReport}, [&] {
                  const Corpus c = read_tokens_file(wd / kTokens);
                  const ScanResult sr = load_scan(wd / kScan);
                  const auto levels = load_levels(wd / kLevels);
                  std::vector<Partition> parts;
                  std::vector<std::string> names;
                  for (std::size_t i = 0; i < levels.size(); ++i) {
                      parts.push_back(sr.points[levels[i].index].optimum);
                      names.push_back(level_name(i));
                  }
                  const bool labelled = std::all_of(c.documents.begin(), c.documents.end(),
                                                    [](const Document& d) { return d.category.has_value(); });
                  const Labelling lab = corpus_labelling(c.documents);
                  if (!parts.empty() || labelled) {
                      write_file(wd / kSankey, sankey_json(export_sankey(parts, names, labelled ? &lab : nullptr)));
                  } else {
                      write_file(wd / kSankey, "{\n  \"layers\": [],\n  \"flows\": [],\n  \"quasi_hierarchy\": []\n}\n");
                  }
                  write_file(wd / kReport, summarize_levels(wd, cfg.ngram_top));
              });
    return run.status();
}

// ---- report -----------------------------------------------------------------

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

std::string summarize_levels(const fs::path& workdir, std::size_t ngram_top) {
    for (const char* required : {kTokens, kLevels}) {
        if (!fs::is_regular_file(workdir / required)) throw IoError("missing artefact: " + (workdir / required).string());
    }
    if (!fs::is_regular_file(workdir / kScan / "scan.json")) {
        throw IoError("missing artefact: " + (workdir / kScan / "scan.json").string());
    }
    const Corpus c = read_tokens_file(workdir / kTokens);
    const ScanResult sr = load_scan(workdir / kScan);
    const auto levels = load_levels(workdir / kLevels);

    std::ostringstream out;
    out << "Markov Stability summary\n";
    out << "documents: " << c.size() << "\n";
    out << "time points: " << sr.size() << " (t = " << fmt("%.4g", sr.points.front().t) << " .. "
        << fmt("%.4g", sr.points.back().t) << ")\n";
    out << "runs per time: " << sr.runs << ", top_m: " << sr.top_m << ", seed: " << sr.seed << "\n";
    if (levels.empty()) {
        out << "\nNo robust level found.\n";
        return out.str();
    }
    out << "robust levels: " << levels.size() << "\n";

    std::vector<Partition> parts;
    for (const auto& l : levels) parts.push_back(sr.points[l.index].optimum);
    if (parts.size() > 1) {
        const SankeyFlows flows = export_sankey(parts, {});
        out << "quasi-hierarchy (clusters with a >=95% parent):";
        for (std::size_t b = 0; b + 1 < parts.size(); ++b) out << ' ' << fmt("%.3f", quasi_hierarchy_fraction(flows, b));
        out << "\n";
    }

    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& l = levels[i];
        out << "\n" << level_name(i) << ": t = " << fmt("%.6g", l.t) << ", C = " << l.num_clusters
            << ", stability = " << fmt("%.6f", l.stability) << ", VI(t) = " << fmt("%.6f", l.vi_ensemble)
            << ", plateau t = " << fmt("%.4g", sr.points[l.plateau_begin].t) << " .. "
            << fmt("%.4g", sr.points[l.plateau_end].t) << " (" << fmt("%.3f", l.plateau_decades) << " decades)\n";

        const fs::path report = workdir / kEval / (level_name(i) + ".json");
        std::vector<ClusterTopWords> top;
        if (fs::is_regular_file(report)) {
            const MetricReport r = parse_metric_report(read_file(report));
            out << "  NMI = " << (r.nmi ? fmt("%.4f", *r.nmi) : std::string("n/a")) << ", PMI = " << fmt("%.4f", r.pmi)
                << "\n";
            top = r.clusters;
        }
        const auto members = parts[i].members();
        for (std::size_t k = 0; k < members.size(); ++k) {
            out << "  cluster " << k << " (" << members[k].size() << " documents)";
            if (k < top.size() && !top[k].words.empty()) {
                out << ": ";
                for (std::size_t w = 0; w < top[k].words.size(); ++w) out << (w ? ", " : "") << top[k].words[w];
            }
            out << "\n";
            std::vector<const Document*> docs;
            for (auto m : members[k]) docs.push_back(&c.documents[m]);
            for (int n : {2, 3}) {
                const auto grams = ngram_summary(docs, n, ngram_top);
                if (grams.empty()) continue;
                out << "    " << (n == 2 ? "bigrams: " : "trigrams: ");
                for (std::size_t g = 0; g < grams.size(); ++g) {
                    out << (g ? "; " : "") << grams[g].ngram << " (" << grams[g].count << ")";
                }
                out << "\n";
            }
        }
    }
    return out.str();
}

}  // namespace mscluster
