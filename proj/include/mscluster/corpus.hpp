#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mscluster {

struct Document {
    std::string id;
    std::string raw_text;
    std::vector<std::string> tokens;
    std::optional<std::string> category;
};

// Stop-word list. Words are kept both as loaded and stemmed, since removal
// happens after stemming.
class StopWords {
public:
    StopWords() = default;

    static StopWords from_words(std::span<const std::string> words, std::string version = "custom");
    static StopWords parse(std::string_view text, std::string version);
    static StopWords load(const std::filesystem::path& path);
    // The list shipped in assets/stopwords_en.txt, compiled in.
    static const StopWords& builtin();

    bool contains(std::string_view stemmed_token) const;
    const std::set<std::string, std::less<>>& words() const { return words_; }
    const std::set<std::string, std::less<>>& stemmed() const { return stemmed_; }
    // Content hash of the loaded list; part of the preprocessing config hash.
    const std::string& version() const { return version_; }

private:
    std::set<std::string, std::less<>> words_;
    std::set<std::string, std::less<>> stemmed_;
    std::string version_;
};

struct CorpusMeta {
    std::string source;
    std::string timestamp;
    std::string config_hash;
};

struct Corpus {
    std::vector<Document> documents;
    StopWords stopwords;
    CorpusMeta meta;

    std::size_t size() const { return documents.size(); }
    std::vector<std::string> ids() const;
};

// Whitespace split, leading/trailing punctuation stripped, lower-cased;
// tokens without any letter are dropped. No stemming.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> preprocess(std::string_view raw_text, const StopWords& stopwords);

// Reads the JSONL interchange format and preprocesses every record.
// Throws ParseError (with line number) or ValidationError (duplicate id, empty input).
Corpus ingest(std::istream& in, const StopWords& stopwords, std::string source = "<stream>",
              unsigned threads = 0);
Corpus ingest_file(const std::filesystem::path& path, const StopWords& stopwords, unsigned threads = 0);

// JSONL dump with `id`, `tokens` and (when present) `category` per line.
void write_tokens(const Corpus& corpus, std::ostream& out);
// Reads a write_tokens dump back; raw_text is left empty.
Corpus read_tokens(std::istream& in, std::string source = "<stream>");
Corpus read_tokens_file(const std::filesystem::path& path);

struct NgramCount {
    std::string ngram;
    std::size_t count;

    bool operator==(const NgramCount&) const = default;
};

std::vector<NgramCount> ngram_summary(std::span<const Document* const> docs, int n, std::size_t top);
std::vector<NgramCount> ngram_summary(std::span<const Document> docs, int n, std::size_t top);

}  // namespace mscluster
