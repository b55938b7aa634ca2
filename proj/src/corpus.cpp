#include "mscluster/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mscluster/error.hpp"
#include "mscluster/stemmer.hpp"
#include "mscluster/util.hpp"

namespace mscluster {

namespace detail {
extern const char* const kBuiltinStopwords;
}

namespace {

// Decodes one UTF-8 code point starting at text[i]; advances i. Invalid
// bytes decode as themselves so no input is ever lost.
char32_t next_code_point(std::string_view text, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= text.size()) return -1;
        const auto b = static_cast<unsigned char>(text[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0) {
        if (int c1 = cont(1); c1 >= 0) {
            i += 2;
            return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
        }
    } else if ((b0 & 0xF0) == 0xE0) {
        int c1 = cont(1), c2 = cont(2);
        if (c1 >= 0 && c2 >= 0) {
            i += 3;
            return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
        }
    } else if ((b0 & 0xF8) == 0xF0) {
        int c1 = cont(1), c2 = cont(2), c3 = cont(3);
        if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
            i += 4;
            return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
                   char32_t(c3);
        }
    }
    ++i;
    return b0;
}

bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB ||
           c == 0xBF || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x3001 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F);
}

// Anything outside ASCII that is neither space nor punctuation counts as a
// letter; non-English text is out of scope but must not be dropped silently.
bool is_letter(char32_t c) {
    if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    return !is_space(c) && !is_punct(c);
}

struct CodePointSpan {
    std::size_t begin;
    std::size_t end;
    char32_t cp;
};

bool has_letter(std::string_view token) {
    std::size_t i = 0;
    while (i < token.size()) {
        if (is_letter(next_code_point(token, i))) return true;
    }
    return false;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

std::string now_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

}  // namespace

StopWords StopWords::from_words(std::span<const std::string> words, std::string version) {
    StopWords sw;
    for (const auto& w : words) {
        std::string lower = to_lower_ascii(w);
        if (lower.empty()) continue;
        sw.stemmed_.insert(stem_token(lower));
        sw.words_.insert(std::move(lower));
    }
    sw.version_ = std::move(version);
    return sw;
}

StopWords StopWords::parse(std::string_view text, std::string version) {
    std::vector<std::string> words;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto fields = split_fields(line);
        if (fields.empty() || fields.front().starts_with('#')) continue;
        for (auto f : fields) {
            if (!f.empty() && f.back() == '\r') f.remove_suffix(1);
            if (!f.empty()) words.emplace_back(f);
        }
    }
    return from_words(words, std::move(version));
}

StopWords StopWords::load(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    return parse(text, sha256_hex(text));
}

const StopWords& StopWords::builtin() {
    static const StopWords sw = [] {
        std::string_view text = detail::kBuiltinStopwords;
        return parse(text, sha256_hex(text));
    }();
    return sw;
}

bool StopWords::contains(std::string_view stemmed_token) const {
    return stemmed_.find(stemmed_token) != stemmed_.end();
}

std::vector<std::string> Corpus::ids() const {
    std::vector<std::string> out;
    out.reserve(documents.size());
    for (const auto& d : documents) out.push_back(d.id);
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        // Collect one whitespace-delimited chunk as code point spans.
        std::vector<CodePointSpan> chunk;
        while (i < text.size()) {
            const std::size_t start = i;
            const char32_t cp = next_code_point(text, i);
            if (is_space(cp)) {
                if (!chunk.empty()) break;
                continue;
            }
            chunk.push_back({start, i, cp});
        }
        std::size_t lo = 0;
        std::size_t hi = chunk.size();
        while (lo < hi && is_punct(chunk[lo].cp)) ++lo;
        while (hi > lo && is_punct(chunk[hi - 1].cp)) --hi;
        if (lo == hi) continue;
        std::string_view raw = text.substr(chunk[lo].begin, chunk[hi - 1].end - chunk[lo].begin);
        if (!has_letter(raw)) continue;
        tokens.push_back(to_lower_ascii(raw));
    }
    return tokens;
}

std::vector<std::string> preprocess(std::string_view raw_text, const StopWords& stopwords) {
    std::vector<std::string> out;
    for (auto& token : tokenize(raw_text)) {
        std::string stemmed = stem_token(token);
        if (stemmed.empty() || !has_letter(stemmed) || stopwords.contains(stemmed)) continue;
        out.push_back(std::move(stemmed));
    }
    return out;
}

Corpus ingest(std::istream& in, const StopWords& stopwords, std::string source, unsigned threads) {
    Corpus corpus;
    corpus.stopwords = stopwords;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!record.is_object()) throw ParseError("record is not a JSON object", line_no);
        auto id = record.find("id");
        if (id == record.end() || !id->is_string()) {
            throw ParseError("missing or non-string 'id' field", line_no);
        }
        auto text = record.find("text");
        if (text == record.end() || !text->is_string()) {
            throw ParseError("missing or non-string 'text' field", line_no);
        }
        Document doc;
        doc.id = id->get<std::string>();
        doc.raw_text = text->get<std::string>();
        if (auto cat = record.find("category"); cat != record.end() && !cat->is_null()) {
            if (!cat->is_string()) throw ParseError("non-string 'category' field", line_no);
            doc.category = cat->get<std::string>();
        }
        if (!seen.insert(doc.id).second) {
            throw ValidationError("duplicate document id '" + doc.id + "' at line " +
                                  std::to_string(line_no));
        }
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty()) throw ValidationError("corpus is empty");

    parallel_for(
        corpus.documents.size(),
        [&](std::size_t i) {
            corpus.documents[i].tokens = preprocess(corpus.documents[i].raw_text, corpus.stopwords);
        },
        threads);

    corpus.meta.source = std::move(source);
    corpus.meta.timestamp = now_utc();
    corpus.meta.config_hash = sha256_hex("tokenizer=v1;stemmer=porter+snowball;stopwords=" +
                                         stopwords.version());
    return corpus;
}

Corpus ingest_file(const std::filesystem::path& path, const StopWords& stopwords, unsigned threads) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    return ingest(in, stopwords, path.string(), threads);
}

void write_tokens(const Corpus& corpus, std::ostream& out) {
    for (const auto& doc : corpus.documents) {
        nlohmann::json j{{"id", doc.id}, {"tokens", doc.tokens}};
        if (doc.category) j["category"] = *doc.category;
        out << j.dump() << '\n';
    }
}

Corpus read_tokens(std::istream& in, std::string source) {
    Corpus corpus;
    corpus.meta.source = std::move(source);
    std::set<std::string, std::less<>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Document doc;
        try {
            const auto j = nlohmann::json::parse(line);
            doc.id = j.at("id").get<std::string>();
            doc.tokens = j.at("tokens").get<std::vector<std::string>>();
            if (j.contains("category") && !j["category"].is_null()) doc.category = j["category"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("token file: ") + e.what(), line_no);
        }
        if (!seen.insert(doc.id).second) throw ValidationError("duplicate id '" + doc.id + "' in token file");
        corpus.documents.push_back(std::move(doc));
    }
    if (corpus.documents.empty()) throw ValidationError("token file contains no documents");
    return corpus;
}

Corpus read_tokens_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_tokens(in, path.string());
}

std::vector<NgramCount> ngram_summary(std::span<const Document* const> docs, int n, std::size_t top) {
    if (n != 2 && n != 3) throw ValidationError("n-gram order must be 2 or 3");
    if (docs.empty()) throw ValidationError("n-gram summary over an empty document set");
    std::map<std::string, std::size_t> counts;
    const auto un = static_cast<std::size_t>(n);
    for (const Document* doc : docs) {
        const auto& toks = doc->tokens;
        for (std::size_t i = 0; i + un <= toks.size(); ++i) {
            std::string gram = toks[i];
            for (std::size_t k = 1; k < un; ++k) {
                gram += ' ';
                gram += toks[i + k];
            }
            ++counts[gram];
        }
    }
    std::vector<NgramCount> ranked;
    ranked.reserve(counts.size());
    for (auto& [gram, c] : counts) ranked.push_back({gram, c});
    // counts is ordered lexicographically, so a stable sort keeps that as tie-break.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const NgramCount& a, const NgramCount& b) { return a.count > b.count; });
    if (ranked.size() > top) ranked.resize(top);
    return ranked;
}

std::vector<NgramCount> ngram_summary(std::span<const Document> docs, int n, std::size_t top) {
    std::vector<const Document*> ptrs;
    ptrs.reserve(docs.size());
    for (const auto& d : docs) ptrs.push_back(&d);
    return ngram_summary(std::span<const Document* const>(ptrs), n, top);
}

}  // namespace mscluster
