#include <doctest.h>

#include <random>
#include <sstream>

#include "mscluster/corpus.hpp"
#include "mscluster/error.hpp"
#include "mscluster/stemmer.hpp"

using namespace mscluster;

namespace {

Corpus ingest_text(const std::string& text, unsigned threads = 1) {
    std::istringstream in(text);
    return ingest(in, StopWords::builtin(), "<test>", threads);
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& t : v) s += (s.empty() ? "" : " ") + t;
    return s;
}

}  // namespace

TEST_CASE("preprocess examples") {
    const auto& sw = StopWords::builtin();
    CHECK(preprocess("Patient fell from the bed.", sw) == std::vector<std::string>{"patient", "fell", "bed"});
    CHECK(preprocess("1234 !!", sw).empty());
    CHECK(preprocess("running runner runs", sw) == std::vector<std::string>{"run", "runner", "run"});
    CHECK(preprocess("", sw).empty());
}

TEST_CASE("tokenize strips punctuation and drops letterless tokens") {
    CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("(x-ray) 12:30 3rd --") == std::vector<std::string>{"x-ray", "3rd"});
    CHECK(tokenize("tab\tand\nnewline") == std::vector<std::string>{"tab", "and", "newline"});
    // U+00A0 no-break space separates tokens; curly quotes are stripped
    CHECK(tokenize("a\xC2\xA0" "b \xE2\x80\x9Cquoted\xE2\x80\x9D") == std::vector<std::string>{"a", "b", "quoted"});
}

TEST_CASE("stop-words are removed after stemming") {
    const auto& sw = StopWords::builtin();
    CHECK(sw.contains("the"));
    CHECK(sw.version().size() == 64);
    for (const auto& w : {"the", "was", "being", "doing", "ourselves", "having"}) {
        CAPTURE(w);
        CHECK(preprocess(w, sw).empty());
    }
    const auto custom = StopWords::from_words(std::vector<std::string>{"walking"});
    CHECK(custom.contains("walk"));
    CHECK(preprocess("walked walks", custom).empty());
}

TEST_CASE("no output token is a stop-word and output is deterministic") {
    const auto& sw = StopWords::builtin();
    std::mt19937_64 rng(5);
    std::vector<std::string> pool(sw.words().begin(), sw.words().end());
    for (const char* w : {"patient", "fell", "nurse", "medication", "dose", "alarm", "Being", "THE", "runs"}) {
        pool.emplace_back(w);
    }
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        for (int k = 0; k < 15; ++k) text += pool[rng() % pool.size()] + (k % 4 == 0 ? ", " : " ");
        const auto toks = preprocess(text, sw);
        for (const auto& t : toks) CHECK_FALSE(sw.contains(t));
        CHECK(preprocess(text, sw) == toks);
    }
}

TEST_CASE("re-preprocessing: tokenisation and filtering are idempotent, stemming is not") {
    const auto& sw = StopWords::builtin();
    const auto once = preprocess("The nurse administered medication; patient fell twice.", sw);
    CHECK(tokenize(join(once)) == once);
    for (const auto& t : once) CHECK_FALSE(sw.contains(t));
    // Porter is not idempotent on its own output
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("agre") == "agr");
}

TEST_CASE("ingest keeps order and raw text") {
    const Corpus c = ingest_text(
        "{\"id\":\"a\",\"text\":\"Patient fell.\"}\n"
        "{\"id\":\"b\",\"text\":\"Wrong dose given\",\"category\":\"meds\"}\n"
        "\n"
        "{\"id\":\"c\",\"text\":\"  spaces  \"}\n");
    REQUIRE(c.size() == 3);
    CHECK(c.ids() == std::vector<std::string>{"a", "b", "c"});
    CHECK(c.documents[0].raw_text == "Patient fell.");
    CHECK(c.documents[2].raw_text == "  spaces  ");
    CHECK_FALSE(c.documents[0].category.has_value());
    CHECK(c.documents[1].category == "meds");
    CHECK(c.meta.source == "<test>");
    CHECK(c.meta.config_hash.size() == 64);
}

TEST_CASE("ingest errors name the line") {
    try {
        ingest_text("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        ingest_text("{\"id\":\"a\",\"text\":\"x\"}\n{not json\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ingest_text("{\"id\":\"r1\",\"text\":\"x\"}\n{\"id\":\"r1\",\"text\":\"y\"}\n"), ValidationError);
    CHECK_THROWS_AS(ingest_text(""), ValidationError);
    CHECK_THROWS_AS(ingest_text("{\"id\":5,\"text\":\"x\"}\n"), ParseError);
}

TEST_CASE("ingest result does not depend on thread count") {
    std::string text;
    for (int i = 0; i < 300; ++i) {
        text += "{\"id\":\"r" + std::to_string(i) + "\",\"text\":\"Report " + std::to_string(i) +
                ": patients were falling and nurses administered doses\"}\n";
    }
    const Corpus a = ingest_text(text, 1);
    const Corpus b = ingest_text(text, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.documents[i].tokens == b.documents[i].tokens);
    CHECK(a.meta.config_hash == b.meta.config_hash);
}

TEST_CASE("token dump round-trips") {
    const Corpus c = ingest_text(
        "{\"id\":\"a\",\"text\":\"Patient fell.\",\"category\":\"falls\"}\n{\"id\":\"b\",\"text\":\"dose\"}\n");
    std::ostringstream out;
    write_tokens(c, out);
    std::istringstream in(out.str());
    const Corpus back = read_tokens(in);
    REQUIRE(back.size() == 2);
    CHECK(back.documents[0].tokens == c.documents[0].tokens);
    CHECK(back.documents[0].category == "falls");
    CHECK_FALSE(back.documents[1].category.has_value());
}

TEST_CASE("ngram_summary") {
    std::vector<Document> docs(1);
    docs[0].tokens = {"a", "b", "c"};
    CHECK(ngram_summary(docs, 2, 5) == std::vector<NgramCount>{{"a b", 1}, {"b c", 1}});
    CHECK(ngram_summary(docs, 3, 5) == std::vector<NgramCount>{{"a b c", 1}});

    std::vector<Document> twice(2);
    twice[0].tokens = twice[1].tokens = {"x", "y"};
    CHECK(ngram_summary(twice, 2, 1) == std::vector<NgramCount>{{"x y", 2}});

    // no n-gram spans a document boundary
    std::vector<Document> split(2);
    split[0].tokens = {"p"};
    split[1].tokens = {"q"};
    CHECK(ngram_summary(split, 2, 5).empty());

    // ties are lexicographic, higher counts first
    std::vector<Document> mixed(1);
    mixed[0].tokens = {"z", "y", "z", "y", "b", "a"};
    const auto top = ngram_summary(mixed, 2, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0] == NgramCount{"z y", 2});
    CHECK(top[1] == NgramCount{"b a", 1});
    CHECK(top[2] == NgramCount{"y b", 1});

    CHECK_THROWS_AS(ngram_summary(docs, 4, 5), ValidationError);
    CHECK_THROWS_AS(ngram_summary(std::span<const Document>{}, 2, 5), ValidationError);
}
