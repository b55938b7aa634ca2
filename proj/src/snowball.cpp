#include "mscluster/stemmer.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace mscluster {
namespace {

// Vowels after the prelude; a 'Y' marks a consonantal y and is not a vowel.
bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool ends_with(std::string_view w, std::string_view s) {
    return w.size() >= s.size() && w.substr(w.size() - s.size()) == s;
}

// Start of the region after the first non-vowel following a vowel, at or after `from`.
int region_after(std::string_view w, int from) {
    const int n = static_cast<int>(w.size());
    for (int i = from + 1; i < n; ++i) {
        if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
    }
    return n;
}

// Short syllable ending at position `end` (exclusive).
bool short_syllable(std::string_view w, int end) {
    if (end >= 3) {
        const char c = w[end - 1];
        if (!is_vowel(c) && c != 'w' && c != 'x' && c != 'Y' && is_vowel(w[end - 2]) &&
            !is_vowel(w[end - 3])) {
            return true;
        }
    }
    return end == 2 && is_vowel(w[0]) && !is_vowel(w[1]);
}

bool has_vowel(std::string_view w, int end) {
    return std::any_of(w.begin(), w.begin() + end, is_vowel);
}

// Longest suffix from `suffixes` that `w` ends with, or an empty view.
template <std::size_t N>
std::string_view longest_suffix(std::string_view w, const std::array<std::string_view, N>& suffixes) {
    std::string_view best;
    for (auto s : suffixes) {
        if (s.size() > best.size() && ends_with(w, s)) best = s;
    }
    return best;
}

struct Snowball {
    std::string w;
    int p1 = 0;
    int p2 = 0;

    int size() const { return static_cast<int>(w.size()); }
    int start_of(std::string_view suffix) const { return size() - static_cast<int>(suffix.size()); }
    bool in_r1(std::string_view suffix) const { return start_of(suffix) >= p1; }
    bool in_r2(std::string_view suffix) const { return start_of(suffix) >= p2; }

    void replace(std::string_view suffix, std::string_view with) {
        w.resize(w.size() - suffix.size());
        w.append(with);
    }

    void prelude() {
        if (!w.empty() && w[0] == '\'') w.erase(0, 1);
        if (!w.empty() && w[0] == 'y') w[0] = 'Y';
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';
        }
    }

    void mark_regions() {
        static constexpr std::array<std::string_view, 3> prefixes{"gener", "commun", "arsen"};
        p1 = -1;
        for (auto pre : prefixes) {
            if (w.starts_with(pre)) {
                p1 = static_cast<int>(pre.size());
                break;
            }
        }
        if (p1 < 0) p1 = region_after(w, 0);
        p2 = region_after(w, p1);
    }

    void step0() {
        static constexpr std::array<std::string_view, 3> s{"'s'", "'s", "'"};
        auto m = longest_suffix(w, s);
        if (!m.empty()) replace(m, "");
    }

    void step1a() {
        static constexpr std::array<std::string_view, 6> s{"sses", "ied", "ies", "s", "us", "ss"};
        auto m = longest_suffix(w, s);
        if (m == "sses") {
            replace(m, "ss");
        } else if (m == "ied" || m == "ies") {
            replace(m, start_of(m) > 1 ? "i" : "ie");
        } else if (m == "s") {
            if (has_vowel(w, size() - 2)) replace(m, "");
        }
    }

    void step1b() {
        static constexpr std::array<std::string_view, 6> s{"eed", "eedly", "ed", "edly", "ing", "ingly"};
        auto m = longest_suffix(w, s);
        if (m.empty()) return;
        if (m == "eed" || m == "eedly") {
            if (in_r1(m)) replace(m, "ee");
            return;
        }
        if (!has_vowel(w, start_of(m))) return;
        replace(m, "");
        static constexpr std::array<std::string_view, 12> tails{
            "at", "bl", "iz", "bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt"};
        auto t = longest_suffix(w, tails);
        if (t == "at" || t == "bl" || t == "iz") {
            w.push_back('e');
        } else if (!t.empty()) {
            w.pop_back();
        } else if (size() == p1 && short_syllable(w, size())) {
            w.push_back('e');
        }
    }

    void step1c() {
        if (size() > 2 && (w.back() == 'y' || w.back() == 'Y') && !is_vowel(w[w.size() - 2])) {
            w.back() = 'i';
        }
    }

    void step2() {
        static constexpr std::array<std::string_view, 24> s{
            "tional", "enci",  "anci",  "abli",    "entli", "izer",    "ization", "ational",
            "ation",  "ator",  "alism", "aliti",   "alli",  "fulness", "ousli",   "ousness",
            "iveness", "iviti", "biliti", "bli",   "ogi",   "fulli",   "lessli",  "li"};
        static const std::pair<std::string_view, std::string_view> repl[] = {
            {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},  {"abli", "able"},
            {"entli", "ent"},   {"izer", "ize"},    {"ization", "ize"}, {"ational", "ate"},
            {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},   {"aliti", "al"},
            {"alli", "al"},     {"fulness", "ful"}, {"ousli", "ous"},  {"ousness", "ous"},
            {"iveness", "ive"}, {"iviti", "ive"},   {"biliti", "ble"}, {"bli", "ble"},
            {"fulli", "ful"},   {"lessli", "less"}};
        auto m = longest_suffix(w, s);
        if (m.empty() || !in_r1(m)) return;
        if (m == "ogi") {
            if (start_of(m) > 0 && w[start_of(m) - 1] == 'l') replace(m, "og");
            return;
        }
        if (m == "li") {
            static constexpr std::string_view valid_li = "cdeghkmnrt";
            if (start_of(m) > 0 && valid_li.find(w[start_of(m) - 1]) != std::string_view::npos) {
                replace(m, "");
            }
            return;
        }
        for (const auto& [from, to] : repl) {
            if (from == m) {
                replace(m, to);
                return;
            }
        }
    }

    void step3() {
        static constexpr std::array<std::string_view, 9> s{
            "tional", "ational", "alize", "icate", "iciti", "ical", "ful", "ness", "ative"};
        auto m = longest_suffix(w, s);
        if (m.empty() || !in_r1(m)) return;
        if (m == "tional") {
            replace(m, "tion");
        } else if (m == "ational") {
            replace(m, "ate");
        } else if (m == "alize") {
            replace(m, "al");
        } else if (m == "icate" || m == "iciti" || m == "ical") {
            replace(m, "ic");
        } else if (m == "ful" || m == "ness") {
            replace(m, "");
        } else if (m == "ative" && in_r2(m)) {
            replace(m, "");
        }
    }

    void step4() {
        static constexpr std::array<std::string_view, 18> s{
            "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement",
            "ment", "ent", "ism",  "ate", "iti", "ous",  "ive",  "ize", "ion"};
        auto m = longest_suffix(w, s);
        if (m.empty() || !in_r2(m)) return;
        if (m == "ion") {
            const int at = start_of(m);
            if (at > 0 && (w[at - 1] == 's' || w[at - 1] == 't')) replace(m, "");
            return;
        }
        replace(m, "");
    }

    void step5() {
        if (w.empty()) return;
        if (w.back() == 'e') {
            if (in_r2("e") || (in_r1("e") && !short_syllable(w, size() - 1))) w.pop_back();
        } else if (w.back() == 'l') {
            if (in_r2("l") && size() >= 2 && w[w.size() - 2] == 'l') w.pop_back();
        }
    }

    void postlude() { std::replace(w.begin(), w.end(), 'Y', 'y'); }
};

std::string_view exception1(std::string_view word) {
    static constexpr std::pair<std::string_view, std::string_view> table[] = {
        {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},    {"lying", "lie"},
        {"tying", "tie"},    {"idly", "idl"},    {"gently", "gentl"}, {"ugly", "ugli"},
        {"early", "earli"},  {"only", "onli"},   {"singly", "singl"}, {"sky", "sky"},
        {"news", "news"},    {"howe", "howe"},   {"atlas", "atlas"},  {"cosmos", "cosmos"},
        {"bias", "bias"},    {"andes", "andes"}};
    for (const auto& [from, to] : table) {
        if (from == word) return to;
    }
    return {};
}

bool exception2(std::string_view word) {
    static constexpr std::string_view table[] = {
        "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed"};
    return std::find(std::begin(table), std::end(table), word) != std::end(table);
}

}  // namespace

std::string snowball_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    if (auto e = exception1(word); !e.empty()) return std::string(e);

    Snowball s{std::string(word)};
    s.prelude();
    s.mark_regions();
    s.step0();
    s.step1a();
    if (exception2(s.w)) return s.w;
    s.step1b();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    s.postlude();
    return s.w;
}

}  // namespace mscluster
