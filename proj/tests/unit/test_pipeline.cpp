#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "mscluster/pipeline.hpp"
#include "synthetic.hpp"

using namespace mscluster;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("mscluster_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Three-topic corpus written as JSONL.
fs::path write_corpus(const fs::path& dir, int docs = 60) {
    const auto c = testsupport::topic_corpus(docs, 3, 5, 20, 40, 30, 0.6);
    const fs::path p = dir / "corpus.jsonl";
    std::ofstream out(p);
    for (const auto& d : c.documents) {
        out << nlohmann::json{{"id", d.id}, {"text", d.raw_text}, {"category", *d.category}}.dump() << '\n';
    }
    return p;
}

PipelineConfig small_config(const fs::path& dir) {
    PipelineConfig cfg;
    cfg.corpus = write_corpus(dir);
    cfg.workdir = dir / "work";
    cfg.k = 5;
    cfg.t_points = 20;
    cfg.runs = 10;
    cfg.top_m = 4;
    cfg.seed = 2;
    return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config("# comment\n\ncorpus = c.jsonl\nworkdir=w\nk = 9\nt_min = 0.1\nplateau_eps = auto\n"
                                  "plateau_span = 0.75\nevaluate = false\n",
                                  "/base");
    CHECK(cfg.corpus == fs::path("/base/c.jsonl"));
    CHECK(cfg.workdir == fs::path("/base/w"));
    CHECK(cfg.k == 9);
    CHECK(cfg.t_min == 0.1);
    CHECK_FALSE(cfg.select.plateau_eps.has_value());
    CHECK(cfg.select.min_plateau_decades == 0.75);
    CHECK_FALSE(cfg.evaluate);
    CHECK(cfg.runs == 500);

    const auto again = parse_config(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());

    CHECK_THROWS_AS(parse_config("nonsense = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("k = many\n"), ParseError);
    try {
        parse_config("k = 3\nno equals sign\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    PipelineConfig bad;
    bad.corpus = "c";
    bad.workdir = "w";
    bad.runs = 3;
    bad.top_m = 5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("pipeline end to end, then incremental") {
    const auto dir = fresh_dir("pipeline");
    const PipelineConfig cfg = small_config(dir);
    std::vector<std::string> log;
    const auto first = run_pipeline(cfg, [&](const std::string& s) { log.push_back(s); });
    REQUIRE(first.size() == 7);
    for (const auto& s : first) CHECK_FALSE(s.skipped);
    const fs::path wd = cfg.workdir;
    for (const char* f : {"tokens.jsonl", "vocabulary.txt", "graph.txt", "scan/scan.json", "levels.json",
                          "sankey.json", "report.txt", "stages.json", "metadata.json", "config.txt"}) {
        CHECK_MESSAGE(fs::exists(wd / f), f);
    }
    CHECK_FALSE(fs::exists(wd / ".lock"));
    CHECK_FALSE(fs::exists(wd / "scan_progress.jsonl"));

    const auto levels = load_levels(wd / "levels.json");
    REQUIRE_FALSE(levels.empty());
    const ScanResult sr = load_scan(wd / "scan");
    CHECK(sr.size() == 20);
    CHECK(fs::exists(wd / "eval" / "level_00.json"));
    CHECK(fs::exists(wd / "eval" / "level_00_contingency.csv"));
    const auto report = parse_metric_report(slurp(wd / "eval" / "level_00.json"));
    CHECK(report.nmi.has_value());

    const std::string sankey = slurp(wd / "sankey.json");
    const std::string text = slurp(wd / "report.txt");
    const std::string stages = slurp(wd / "stages.json");
    const auto second = run_pipeline(cfg);
    for (const auto& s : second) CHECK(s.skipped);
    CHECK(slurp(wd / "sankey.json") == sankey);
    CHECK(slurp(wd / "report.txt") == text);
    CHECK(slurp(wd / "stages.json") == stages);
    CHECK(summarize_levels(wd) == summarize_levels(wd));

    // a later-stage change only reruns what depends on it
    PipelineConfig changed = cfg;
    changed.select.min_plateau_decades = 0.4;
    const auto third = run_pipeline(changed);
    CHECK(third[0].skipped);
    CHECK(third[3].skipped);
    CHECK_FALSE(third[4].skipped);

    // a touched output is regenerated
    fs::remove(wd / "graph.txt");
    const auto fourth = run_pipeline(changed);
    CHECK_FALSE(fourth[2].skipped);
    fs::remove_all(dir);
}

TEST_CASE("pipeline failures name their stage") {
    const auto dir = fresh_dir("pipeline_fail");
    PipelineConfig cfg = small_config(dir);
    cfg.k = 60;
    try {
        run_pipeline(cfg);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "graph");
    }
    CHECK_FALSE(fs::exists(cfg.workdir / ".lock"));

    cfg.k = 5;
    std::ofstream(cfg.workdir / ".lock") << "held";
    CHECK_THROWS_AS(run_pipeline(cfg), Error);
    fs::remove(cfg.workdir / ".lock");

    cfg.corpus = dir / "missing.jsonl";
    CHECK_THROWS(run_pipeline(cfg));
    fs::remove_all(dir);
}

TEST_CASE("sankey flows") {
    SUBCASE("identical layers give a diagonal") {
        const Partition p(std::vector<int>{0, 0, 1, 2, 2, 2});
        const std::vector<Partition> parts{p, p};
        const std::vector<std::string> names{"a", "b"};
        const auto f = export_sankey(parts, names);
        REQUIRE(f.layers.size() == 2);
        CHECK(f.layers[0].sizes == std::vector<std::size_t>{2, 1, 3});
        REQUIRE(f.flows.size() == 3);
        for (const auto& fl : f.flows) CHECK(fl.from == fl.to);
        CHECK(quasi_hierarchy_fraction(f, 0) == 1.0);
    }
    SUBCASE("flows conserve documents") {
        // coarse sizes 44/17/12/7/3 against an 8-way split
        std::vector<int> coarse;
        int id = 0;
        for (int size : {44, 17, 12, 7, 3}) {
            coarse.insert(coarse.end(), static_cast<std::size_t>(size), id++);
        }
        std::vector<int> fine(coarse.size());
        for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = static_cast<int>(i % 8);
        std::vector<std::string> cats;
        for (std::size_t i = 0; i < fine.size(); ++i) cats.push_back(i % 2 ? "odd" : "even");
        const Labelling lab = make_labelling(cats);
        const std::vector<Partition> parts{Partition(coarse), Partition(fine)};
        const std::vector<std::string> names{"coarse", "fine"};
        const auto f = export_sankey(parts, names, &lab);
        REQUIRE(f.layers.size() == 3);
        CHECK(f.layers[2].labels == std::vector<std::string>{"even", "odd"});
        for (std::size_t layer = 0; layer < 2; ++layer) {
            std::size_t total = 0;
            std::vector<std::size_t> out(f.layers[layer].sizes.size(), 0);
            for (const auto& fl : f.flows) {
                if (fl.from_layer != layer) continue;
                total += fl.weight;
                out[static_cast<std::size_t>(fl.from)] += fl.weight;
            }
            CHECK(total == 83);
            CHECK(out == f.layers[layer].sizes);
        }
        CHECK(std::is_sorted(f.flows.begin(), f.flows.end(), [](const SankeyFlow& a, const SankeyFlow& b) {
            return std::tie(a.from_layer, a.from, a.to) < std::tie(b.from_layer, b.from, b.to);
        }));
        const auto j = nlohmann::json::parse(sankey_json(f));
        CHECK(j["layers"].size() == 3);
        CHECK(j.contains("flows"));
    }
    SUBCASE("nested partitions form a hierarchy") {
        const auto h = testsupport::planted_hierarchy();
        const std::vector<Partition> parts{h.level27, h.level9, h.level3};
        const std::vector<std::string> names{"27", "9", "3"};
        const auto f = export_sankey(parts, names);
        CHECK(quasi_hierarchy_fraction(f, 0) == 1.0);
        CHECK(quasi_hierarchy_fraction(f, 1) == 1.0);
        std::vector<int> shuffled(270);
        for (int i = 0; i < 270; ++i) shuffled[static_cast<std::size_t>(i)] = i % 3;
        const std::vector<Partition> mixed{h.level9, Partition(shuffled)};
        CHECK(quasi_hierarchy_fraction(export_sankey(mixed, std::vector<std::string>{"a", "b"}), 0) == 0.0);
    }
}

TEST_CASE("report of a run without levels") {
    const auto dir = fresh_dir("pipeline_empty");
    PipelineConfig cfg = small_config(dir);
    cfg.select.min_plateau_decades = 100.0;
    run_pipeline(cfg);
    CHECK(load_levels(cfg.workdir / "levels.json").empty());
    CHECK(summarize_levels(cfg.workdir).find("No robust level found.") != std::string::npos);
    fs::remove(cfg.workdir / "levels.json");
    CHECK_THROWS_AS(summarize_levels(cfg.workdir), IoError);
    fs::remove_all(dir);
}
