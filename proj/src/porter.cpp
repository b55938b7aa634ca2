#include "mscluster/stemmer.hpp"

namespace mscluster {
namespace {

// Direct transcription of the reference implementation. `k` is the index of
// the last character of the current stem, `j` a general offset set by ends().
class PorterState {
public:
    explicit PorterState(std::string_view w) : b_(w), k_(static_cast<int>(w.size()) - 1) {}

    std::string run() {
        if (k_ <= 1) {
            return b_;
        }
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    bool cons(int i) const {
        switch (b_[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !cons(i - 1);
        default:
            return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool doublec(int j) const {
        if (j < 1) return false;
        if (b_[j] != b_[j - 1]) return false;
        return cons(j);
    }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b_[i];
        return !(ch == 'w' || ch == 'x' || ch == 'y');
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s) {
            return false;
        }
        j_ = k_ - len;
        return true;
    }

    void setto(std::string_view s) {
        const auto len = static_cast<int>(s.size());
        b_.resize(static_cast<std::size_t>(j_ + 1));
        b_.append(s);
        k_ = j_ + len;
    }

    void r(std::string_view s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (b_[k_] == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                setto("i");
            } else if (b_[k_ - 1] != 's') {
                --k_;
            }
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) {
                setto("ate");
            } else if (ends("bl")) {
                setto("ble");
            } else if (ends("iz")) {
                setto("ize");
            } else if (doublec(k_)) {
                --k_;
                const char ch = b_[k_];
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                setto("e");
            }
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
    }

    // Tries each (suffix, replacement) pair in order; the first matching
    // suffix ends the step whether or not the measure condition held.
    template <std::size_t N>
    void replace_first(const std::pair<std::string_view, std::string_view> (&rules)[N]) {
        for (const auto& [suffix, repl] : rules) {
            if (ends(suffix)) {
                r(repl);
                return;
            }
        }
    }

    void step2() {
        using R = std::pair<std::string_view, std::string_view>;
        switch (b_[k_ - 1]) {
        case 'a': {
            static constexpr R rules[] = {{"ational", "ate"}, {"tional", "tion"}};
            replace_first(rules);
            break;
        }
        case 'c': {
            static constexpr R rules[] = {{"enci", "ence"}, {"anci", "ance"}};
            replace_first(rules);
            break;
        }
        case 'e': {
            static constexpr R rules[] = {{"izer", "ize"}};
            replace_first(rules);
            break;
        }
        case 'l': {
            static constexpr R rules[] = {
                {"bli", "ble"}, {"alli", "al"}, {"entli", "ent"}, {"eli", "e"}, {"ousli", "ous"}};
            replace_first(rules);
            break;
        }
        case 'o': {
            static constexpr R rules[] = {{"ization", "ize"}, {"ation", "ate"}, {"ator", "ate"}};
            replace_first(rules);
            break;
        }
        case 's': {
            static constexpr R rules[] = {
                {"alism", "al"}, {"iveness", "ive"}, {"fulness", "ful"}, {"ousness", "ous"}};
            replace_first(rules);
            break;
        }
        case 't': {
            static constexpr R rules[] = {{"aliti", "al"}, {"iviti", "ive"}, {"biliti", "ble"}};
            replace_first(rules);
            break;
        }
        case 'g': {
            static constexpr R rules[] = {{"logi", "log"}};
            replace_first(rules);
            break;
        }
        default:
            break;
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void step3() {
        using R = std::pair<std::string_view, std::string_view>;
        switch (b_[k_]) {
        case 'e': {
            static constexpr R rules[] = {{"icate", "ic"}, {"ative", ""}, {"alize", "al"}};
            replace_first(rules);
            break;
        }
        case 'i': {
            static constexpr R rules[] = {{"iciti", "ic"}};
            replace_first(rules);
            break;
        }
        case 'l': {
            static constexpr R rules[] = {{"ical", "ic"}, {"ful", ""}};
            replace_first(rules);
            break;
        }
        case 's': {
            static constexpr R rules[] = {{"ness", ""}};
            replace_first(rules);
            break;
        }
        default:
            break;
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    bool ends_any(std::initializer_list<std::string_view> suffixes) {
        for (auto s : suffixes) {
            if (ends(s)) return true;
        }
        return false;
    }

    void step4() {
        bool matched = false;
        switch (b_[k_ - 1]) {
        case 'a': matched = ends("al"); break;
        case 'c': matched = ends_any({"ance", "ence"}); break;
        case 'e': matched = ends("er"); break;
        case 'i': matched = ends("ic"); break;
        case 'l': matched = ends_any({"able", "ible"}); break;
        case 'n': matched = ends_any({"ant", "ement", "ment", "ent"}); break;
        case 'o':
            if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) {
                matched = true;
            } else {
                matched = ends("ou");
            }
            break;
        case 's': matched = ends("ism"); break;
        case 't': matched = ends_any({"ate", "iti"}); break;
        case 'u': matched = ends("ous"); break;
        case 'v': matched = ends("ive"); break;
        case 'z': matched = ends("ize"); break;
        default: break;
        }
        if (matched && m() > 1) k_ = j_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void step5() {
        j_ = k_;
        if (b_[k_] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (b_[k_] == 'l' && doublec(k_) && m() > 1) --k_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    std::string b_;
    int k_;
    int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
    return PorterState(word).run();
}

std::string stem_token(std::string_view word) {
    std::string porter = porter_stem(word);
    if (porter == word) {
        std::string snow = snowball_stem(word);
        if (snow != word) return snow;
    }
    return porter;
}

}  // namespace mscluster
