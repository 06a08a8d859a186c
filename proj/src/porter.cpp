#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace styleobf {

namespace {

bool is_vowel(const std::string& w, int i) {
    switch (w[static_cast<std::size_t>(i)]) {
        case 'a':
        case 'e':
        case 'i':
        case 'o':
        case 'u':
            return true;
        case 'y':
            return i > 0 && !is_vowel(w, i - 1);
        default:
            return false;
    }
}

// Number of VC sequences in the stem.
int measure(const std::string& w) {
    int n = static_cast<int>(w.size());
    int i = 0;
    while (i < n && !is_vowel(w, i)) ++i;
    int m = 0;
    while (i < n) {
        while (i < n && is_vowel(w, i)) ++i;
        if (i == n) break;
        ++m;
        while (i < n && !is_vowel(w, i)) ++i;
    }
    return m;
}

bool contains_vowel(const std::string& w) {
    for (int i = 0; i < static_cast<int>(w.size()); ++i)
        if (is_vowel(w, i)) return true;
    return false;
}

bool double_consonant(const std::string& w) {
    int n = static_cast<int>(w.size());
    if (n < 2) return false;
    return w[n - 1] == w[n - 2] && !is_vowel(w, n - 1);
}

// Stem ends consonant-vowel-consonant where the final consonant is not w, x, y.
bool cvc(const std::string& w) {
    int n = static_cast<int>(w.size());
    if (n < 3) return false;
    if (is_vowel(w, n - 1) || !is_vowel(w, n - 2) || is_vowel(w, n - 3)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const std::string& suf) {
    return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

std::string stem_part(const std::string& w, const std::string& suf) {
    return w.substr(0, w.size() - suf.size());
}

// Replace suffix when the remaining stem's measure exceeds the threshold.
bool replace_if(std::string& w, const std::string& suf, const std::string& rep,
                int min_measure) {
    if (!ends_with(w, suf)) return false;
    std::string stem = stem_part(w, suf);
    if (measure(stem) > min_measure) w = stem + rep;
    return true;
}

}  // namespace

std::string porter_stem(const std::string& word) {
    std::string w;
    for (char c : word) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w.size() <= 2) return w;

    // Step 1a
    if (ends_with(w, "sses"))
        w = stem_part(w, "es");
    else if (ends_with(w, "ies"))
        w = stem_part(w, "es");
    else if (!ends_with(w, "ss") && ends_with(w, "s"))
        w = stem_part(w, "s");

    // Step 1b
    bool step1b_extra = false;
    if (ends_with(w, "eed")) {
        if (measure(stem_part(w, "eed")) > 0) w = stem_part(w, "d");
    } else if (ends_with(w, "ed") && contains_vowel(stem_part(w, "ed"))) {
        w = stem_part(w, "ed");
        step1b_extra = true;
    } else if (ends_with(w, "ing") && contains_vowel(stem_part(w, "ing"))) {
        w = stem_part(w, "ing");
        step1b_extra = true;
    }
    if (step1b_extra) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz"))
            w += "e";
        else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                 !ends_with(w, "z"))
            w.pop_back();
        else if (measure(w) == 1 && cvc(w))
            w += "e";
    }

    // Step 1c
    if (ends_with(w, "y") && contains_vowel(stem_part(w, "y"))) w.back() = 'i';

    // Step 2
    static const std::vector<std::pair<std::string, std::string>> step2 = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"}};
    for (const auto& [suf, rep] : step2)
        if (replace_if(w, suf, rep, 0)) break;

    // Step 3
    static const std::vector<std::pair<std::string, std::string>> step3 = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""}};
    for (const auto& [suf, rep] : step3)
        if (replace_if(w, suf, rep, 0)) break;

    // Step 4
    static const std::vector<std::string> step4 = {
        "al",  "ance", "ence", "er",   "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ou",   "ism",  "ate",  "iti", "ous",  "ive",  "ize"};
    for (const std::string& suf : step4) {
        if (!ends_with(w, suf)) continue;
        std::string stem = stem_part(w, suf);
        if (measure(stem) > 1) w = stem;
        break;
    }
    if (ends_with(w, "ion")) {
        std::string stem = stem_part(w, "ion");
        if (measure(stem) > 1 && (ends_with(stem, "s") || ends_with(stem, "t"))) w = stem;
    }

    // Step 5a
    if (ends_with(w, "e")) {
        std::string stem = stem_part(w, "e");
        int m = measure(stem);
        if (m > 1 || (m == 1 && !cvc(stem))) w = stem;
    }
    // Step 5b
    if (measure(w) > 1 && double_consonant(w) && ends_with(w, "l")) w.pop_back();

    return w;
}

}  // namespace styleobf
