#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mscluster/corpus.hpp"
#include "mscluster/diffusion.hpp"
#include "mscluster/evalmetrics.hpp"
#include "mscluster/pipeline.hpp"
#include "mscluster/scan.hpp"
#include "mscluster/simgraph.hpp"
#include "mscluster/util.hpp"
#include "mscluster/vectors.hpp"

namespace fs = std::filesystem;
using namespace mscluster;

namespace {

struct ScanFlags {
    double t_min = 0.01;
    double t_max = 100.0;
    std::size_t t_points = 400;
    std::size_t runs = 500;
    std::size_t top_m = 50;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct SelectFlags {
    std::optional<double> plateau_eps;
    double plateau_span = 0.5;
    double vi_dip_quantile = 0.5;

    SelectOptions options() const {
        SelectOptions o;
        o.plateau_eps = plateau_eps;
        o.min_plateau_decades = plateau_span;
        o.vi_dip_quantile = vi_dip_quantile;
        return o;
    }
};

void add_scan_flags(CLI::App* app, ScanFlags& f) {
    app->add_option("--t-min", f.t_min, "Smallest Markov time")->capture_default_str();
    app->add_option("--t-max", f.t_max, "Largest Markov time")->capture_default_str();
    app->add_option("--t-points", f.t_points, "Number of log-spaced times")->capture_default_str();
    app->add_option("--runs", f.runs, "Louvain runs per time")->capture_default_str();
    app->add_option("--top-m", f.top_m, "Best runs kept for VI(t)")->capture_default_str();
    app->add_option("--seed", f.seed, "Base seed")->capture_default_str();
    app->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_select_flags(CLI::App* app, SelectFlags& f) {
    app->add_option("--plateau-eps", f.plateau_eps, "VI(t,t') plateau threshold (default 0.05 log N)");
    app->add_option("--plateau-span", f.plateau_span, "Minimum plateau length in decades of t")->capture_default_str();
    app->add_option("--vi-quantile", f.vi_dip_quantile, "VI(t) dips must lie at or below this quantile")
        ->capture_default_str();
}

StopWords load_stopwords(const std::string& path) {
    return path.empty() ? StopWords::builtin() : StopWords::load(path);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale document clustering with Markov Stability"};
    app.require_subcommand(1);

    // ingest
    std::string in_path, out_path, stop_path;
    unsigned threads = 0;
    auto* ingest_cmd = app.add_subcommand("ingest", "Tokenise, stem and filter a JSONL corpus");
    ingest_cmd->add_option("input", in_path, "JSONL records with id, text and optional category")->required();
    ingest_cmd->add_option("-o,--output", out_path, "Token file (JSONL)")->required();
    ingest_cmd->add_option("--stopwords", stop_path, "Stop-word list (one per line)");
    ingest_cmd->add_option("--threads", threads, "Worker threads");
    ingest_cmd->callback([&] {
        const Corpus c = ingest_file(in_path, load_stopwords(stop_path), threads);
        std::ostringstream out;
        write_tokens(c, out);
        write_file(out_path, out.str());
        std::cerr << "ingested " << c.size() << " documents (config " << c.meta.config_hash.substr(0, 12) << ")\n";
    });

    // vectorize
    std::string tokens_path;
    auto* vec_cmd = app.add_subcommand("vectorize", "TF-iDF vectors from a token file");
    vec_cmd->add_option("tokens", tokens_path, "Token file from `ingest`")->required();
    vec_cmd->add_option("-o,--output", out_path, "Vector file")->required();
    vec_cmd->callback([&] {
        const Corpus c = read_tokens_file(tokens_path);
        export_vectors(tfidf_vectorize(c), fs::path(out_path));
    });

    // import-vectors
    std::string vectors_path;
    auto* imp_cmd = app.add_subcommand("import-vectors", "Validate external vectors and align them to a corpus");
    imp_cmd->add_option("tokens", tokens_path, "Token file from `ingest`")->required();
    imp_cmd->add_option("vectors", vectors_path, "Vector file (`N d` header, then `id v1 .. vd`)")->required();
    imp_cmd->add_option("-o,--output", out_path, "Aligned vector file")->required();
    imp_cmd->callback([&] {
        const Corpus c = read_tokens_file(tokens_path);
        const auto ids = c.ids();
        export_vectors(import_vectors(fs::path(vectors_path), ids), fs::path(out_path));
    });

    // graph
    std::size_t k = 13;
    auto* graph_cmd = app.add_subcommand("graph", "MST-kNN similarity graph from vectors");
    graph_cmd->add_option("vectors", vectors_path, "Vector file")->required();
    graph_cmd->add_option("-k", k, "Nearest neighbours")->capture_default_str();
    graph_cmd->add_option("-o,--output", out_path, "Graph file")->required();
    graph_cmd->callback([&] {
        const VectorSet vs = import_vectors(fs::path(vectors_path));
        const SimilarityGraph g = build_mst_knn(cosine_similarity_matrix(vs), k);
        write_graph(g, fs::path(out_path));
        std::cerr << "graph: " << g.size() << " nodes, " << g.edges().size() << " edges\n";
    });

    // scan
    std::string graph_path, ids_path;
    ScanFlags sf;
    auto* scan_cmd = app.add_subcommand("scan", "Markov time sweep with Louvain ensembles");
    scan_cmd->add_option("graph", graph_path, "Graph file")->required();
    scan_cmd->add_option("-o,--output", out_path, "Scan directory")->required();
    scan_cmd->add_option("--tokens", tokens_path, "Token file, to label partitions with document ids");
    add_scan_flags(scan_cmd, sf);
    scan_cmd->callback([&] {
        const SimilarityGraph g = read_graph(fs::path(graph_path));
        const DiffusionOperator op(g);
        ScanOptions o;
        o.times = log_time_grid(sf.t_min, sf.t_max, sf.t_points);
        o.runs = sf.runs;
        o.top_m = sf.top_m;
        o.seed = sf.seed;
        o.threads = sf.threads;
        o.on_time_done = [&](std::size_t i, const Partition& p, double vi) {
            std::fprintf(stderr, "t[%zu] = %.4g  C = %d  VI(t) = %.4f\n", i, o.times[i], p.num_clusters(), vi);
        };
        const ScanResult sr = scan(op, o);
        std::vector<std::string> ids;
        if (!tokens_path.empty()) ids = read_tokens_file(tokens_path).ids();
        save_scan(sr, out_path, ids);
    });

    // select
    std::string scan_dir;
    SelectFlags sel;
    auto* select_cmd = app.add_subcommand("select", "Pick robust levels from a scan");
    select_cmd->add_option("scan", scan_dir, "Scan directory")->required();
    select_cmd->add_option("-o,--output", out_path, "Levels file (JSON)")->required();
    add_select_flags(select_cmd, sel);
    select_cmd->callback([&] {
        const ScanResult sr = load_scan(scan_dir);
        const auto levels = select_robust(sr, sel.options());
        save_levels(sr, levels, out_path);
        for (const auto& l : levels) {
            std::fprintf(stderr, "level: t = %.4g  C = %d  plateau %.3f decades\n", l.t, l.num_clusters,
                         l.plateau_decades);
        }
        if (levels.empty()) std::cerr << "no robust level found\n";
    });

    // evaluate
    std::string levels_path;
    std::size_t top_words = 10;
    auto* eval_cmd = app.add_subcommand("evaluate", "PMI, NMI and contingency tables for selected levels");
    eval_cmd->add_option("tokens", tokens_path, "Token file")->required();
    eval_cmd->add_option("scan", scan_dir, "Scan directory")->required();
    eval_cmd->add_option("levels", levels_path, "Levels file")->required();
    eval_cmd->add_option("-o,--output", out_path, "Output directory")->required();
    eval_cmd->add_option("--top-words", top_words, "Top words per cluster")->capture_default_str();
    eval_cmd->callback([&] {
        const Corpus c = read_tokens_file(tokens_path);
        const ScanResult sr = load_scan(scan_dir);
        const auto levels = load_levels(levels_path);
        const WordStats stats(c.documents);
        const Labelling lab = corpus_labelling(c.documents);
        const bool labelled = std::all_of(c.documents.begin(), c.documents.end(),
                                          [](const Document& d) { return d.category.has_value(); });
        fs::create_directories(out_path);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const Partition& p = sr.points.at(levels[i].index).optimum;
            const MetricReport r = evaluate_partition(p, c.documents, stats, top_words);
            char name[32];
            std::snprintf(name, sizeof name, "level_%02zu", i);
            write_file(fs::path(out_path) / (std::string(name) + ".json"), metric_report_json(r));
            if (labelled) {
                write_contingency_csv(zscore_contingency(p, lab.partition),
                                      fs::path(out_path) / (std::string(name) + "_contingency.csv"), lab.names);
            }
        }
    });

    // sankey
    bool with_labels = false;
    auto* sankey_cmd = app.add_subcommand("sankey", "Flow table between selected levels");
    sankey_cmd->add_option("scan", scan_dir, "Scan directory")->required();
    sankey_cmd->add_option("levels", levels_path, "Levels file")->required();
    sankey_cmd->add_option("-o,--output", out_path, "Sankey JSON ('-' for stdout)");
    sankey_cmd->add_option("--tokens", tokens_path, "Token file; with --labels adds the category layer");
    sankey_cmd->add_flag("--labels", with_labels, "Append external categories as the last layer");
    sankey_cmd->callback([&] {
        const ScanResult sr = load_scan(scan_dir);
        const auto levels = load_levels(levels_path);
        std::vector<Partition> parts;
        for (const auto& l : levels) parts.push_back(sr.points.at(l.index).optimum);
        std::optional<Labelling> lab;
        if (with_labels) {
            if (tokens_path.empty()) throw ValidationError("--labels needs --tokens");
            lab = corpus_labelling(read_tokens_file(tokens_path).documents);
        }
        write_text(out_path, sankey_json(export_sankey(parts, {}, lab ? &*lab : nullptr)));
    });

    // report
    std::string workdir;
    std::size_t ngram_top = 5;
    auto* report_cmd = app.add_subcommand("report", "Text summary of a pipeline workdir");
    report_cmd->add_option("workdir", workdir, "Pipeline workdir")->required();
    report_cmd->add_option("-o,--output", out_path, "Output file ('-' for stdout)");
    report_cmd->add_option("--ngram-top", ngram_top, "n-grams listed per cluster")->capture_default_str();
    report_cmd->callback([&] { write_text(out_path, summarize_levels(workdir, ngram_top)); });

    // run
    std::string config_path;
    std::vector<std::string> overrides;
    ScanFlags rf;
    SelectFlags rs;
    std::string corpus_override, vectors_override, workdir_override;
    std::optional<std::size_t> k_override;
    auto* run_cmd = app.add_subcommand("run", "Full pipeline from a config file");
    run_cmd->add_option("config", config_path, "Config file (key = value lines)");
    run_cmd->add_option("--set", overrides, "Override a config key: --set key=value");
    run_cmd->add_option("--corpus", corpus_override, "Corpus JSONL");
    run_cmd->add_option("--vectors", vectors_override, "Imported vector file");
    run_cmd->add_option("--workdir", workdir_override, "Working directory");
    run_cmd->add_option("-k", k_override, "Nearest neighbours");
    add_scan_flags(run_cmd, rf);
    add_select_flags(run_cmd, rs);
    run_cmd->callback([&] {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        const fs::path cwd = fs::current_path();
        if (!corpus_override.empty()) cfg.set("corpus", corpus_override, cwd);
        if (!vectors_override.empty()) cfg.set("vectors", vectors_override, cwd);
        if (!workdir_override.empty()) cfg.set("workdir", workdir_override, cwd);
        if (k_override) cfg.k = *k_override;
        auto given = [&](const char* flag) { return run_cmd->count(flag) > 0; };
        if (given("--t-min")) cfg.t_min = rf.t_min;
        if (given("--t-max")) cfg.t_max = rf.t_max;
        if (given("--t-points")) cfg.t_points = rf.t_points;
        if (given("--runs")) cfg.runs = rf.runs;
        if (given("--top-m")) cfg.top_m = rf.top_m;
        if (given("--seed")) cfg.seed = rf.seed;
        if (given("--threads")) cfg.threads = rf.threads;
        if (given("--plateau-eps")) cfg.select.plateau_eps = rs.plateau_eps;
        if (given("--plateau-span")) cfg.select.min_plateau_decades = rs.plateau_span;
        if (given("--vi-quantile")) cfg.select.vi_dip_quantile = rs.vi_dip_quantile;
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1), cwd);
        }
        const auto status = run_pipeline(cfg, [](const std::string& msg) { std::cerr << msg << '\n'; });
        std::size_t skipped = 0;
        for (const auto& s : status) skipped += s.skipped ? 1 : 0;
        std::cerr << "done: " << status.size() - skipped << " stage(s) run, " << skipped << " up to date\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
