#include "styleobf/textdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace styleobf {

int StyleTable::add(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    index_[name] = idx;
    return idx;
}

int StyleTable::index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw std::invalid_argument("StyleTable: unknown style '" + name + "'");
    return it->second;
}

const std::string& StyleTable::name(int index) const {
    if (index < 0 || index >= size())
        throw std::invalid_argument("StyleTable: index out of range");
    return names_[index];
}

namespace {

// Single-byte punctuation detached by the tokenizer.
bool is_punct_byte(char c) {
    static const std::string punct = ".,;:!?'\"()";
    return punct.find(c) != std::string::npos;
}

// Em dash U+2014 in UTF-8.
const std::string kEmDash = "\xe2\x80\x94";

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < text.size();) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            flush();
            ++i;
        } else if (text.compare(i, kEmDash.size(), kEmDash) == 0) {
            flush();
            out.push_back(kEmDash);
            i += kEmDash.size();
        } else if (is_punct_byte(text[i])) {
            flush();
            out.push_back(std::string(1, text[i]));
            ++i;
        } else {
            cur.push_back(text[i]);
            ++i;
        }
    }
    flush();
    return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

Vocab Vocab::build(const std::vector<VerseRecord>& records, const StyleTable& styles,
                   int min_count) {
    if (min_count < 1) throw std::invalid_argument("Vocab::build: min_count must be >= 1");
    Vocab v;
    v.tokens_ = {"<pad>", "<unk>", "<bos>", "<eos>"};
    v.num_styles_ = styles.size();
    for (const std::string& s : styles.names()) v.tokens_.push_back("<2" + s + ">");

    std::map<std::string, long> counts;
    for (const VerseRecord& r : records)
        for (const std::string& t : r.tokens) ++counts[t];
    // Frequency-descending, ties broken lexicographically, for a stable layout.
    std::vector<std::pair<std::string, long>> sorted(counts.begin(), counts.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (const auto& [tok, n] : sorted)
        if (n >= min_count) v.tokens_.push_back(tok);

    for (int i = 0; i < v.size(); ++i) v.index_[v.tokens_[i]] = i;
    return v;
}

int Vocab::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || id >= size()) throw std::invalid_argument("Vocab: id out of range");
    return tokens_[id];
}

int Vocab::transfer_token(int style_index) const {
    if (style_index < 0 || style_index >= num_styles_)
        throw std::invalid_argument("Vocab: style index out of range");
    return 4 + style_index;
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const std::string& t : tokens) out.push_back(id(t));
    return out;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int i : ids) out.push_back(token(i));
    return out;
}

void Vocab::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("Vocab::save: cannot open " + path);
    for (const std::string& t : tokens_) f << t << '\n';
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("Vocab::load: cannot open " + path);
    Vocab v;
    std::string line;
    while (std::getline(f, line)) v.tokens_.push_back(line);
    if (v.size() < 4 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>" ||
        v.tokens_[2] != "<bos>" || v.tokens_[3] != "<eos>")
        throw std::runtime_error("Vocab::load: reserved tokens missing in " + path);
    int n = 0;
    for (int i = 4; i < v.size(); ++i) {
        const std::string& t = v.tokens_[i];
        if (t.size() > 3 && t.rfind("<2", 0) == 0 && t.back() == '>')
            ++n;
        else
            break;
    }
    v.num_styles_ = n;
    for (int i = 0; i < v.size(); ++i) v.index_[v.tokens_[i]] = i;
    return v;
}

std::vector<PairExample> make_pairs(const std::vector<VerseRecord>& records,
                                    const StyleTable& styles) {
    std::map<std::string, std::vector<const VerseRecord*>> groups;
    for (const VerseRecord& r : records) {
        auto& g = groups[r.verse_key];
        for (const VerseRecord* prev : g)
            if (prev->style == r.style)
                throw std::invalid_argument("make_pairs: duplicate style '" + r.style +
                                         "' under verse key '" + r.verse_key + "'");
        g.push_back(&r);
    }
    std::vector<PairExample> pairs;
    for (const auto& [key, g] : groups) {
        for (const VerseRecord* src : g) {
            for (const VerseRecord* tgt : g) {
                if (src == tgt) continue;
                PairExample p;
                p.source = src->tokens;
                p.target = tgt->tokens;
                p.source_style = styles.index(src->style);
                p.target_style = styles.index(tgt->style);
                p.verse_key = key;
                pairs.push_back(std::move(p));
            }
        }
    }
    return pairs;
}

std::vector<PairExample> make_ae_examples(const std::vector<VerseRecord>& records,
                                          const StyleTable& styles) {
    std::vector<PairExample> out;
    out.reserve(records.size());
    for (const VerseRecord& r : records) {
        PairExample p;
        p.source = r.tokens;
        p.target = r.tokens;
        p.source_style = p.target_style = styles.index(r.style);
        p.verse_key = r.verse_key;
        out.push_back(std::move(p));
    }
    return out;
}

DataSplit split(const std::vector<PairExample>& pairs,
                const std::array<double, 3>& fractions, std::uint64_t seed) {
    double total = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw std::invalid_argument("split: fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");

    std::set<std::string> keyset;
    for (const PairExample& p : pairs) keyset.insert(p.verse_key);
    std::vector<std::string> keys(keyset.begin(), keyset.end());
    if (keys.size() < 3)
        throw std::invalid_argument("split: fewer verse keys than partitions");

    std::mt19937_64 rng(seed);
    std::shuffle(keys.begin(), keys.end(), rng);

    std::size_t k = keys.size();
    std::size_t n_train = static_cast<std::size_t>(std::floor(fractions[0] * k));
    std::size_t n_dev = static_cast<std::size_t>(std::floor(fractions[1] * k));
    if (n_train == 0) n_train = 1;
    if (n_dev == 0) n_dev = 1;
    if (n_train + n_dev >= k) n_train = k - n_dev - 1;
    std::map<std::string, int> part;  // 0 train, 1 dev, 2 test
    for (std::size_t i = 0; i < k; ++i)
        part[keys[i]] = i < n_train ? 0 : (i < n_train + n_dev ? 1 : 2);

    DataSplit out;
    for (const PairExample& p : pairs) {
        switch (part.at(p.verse_key)) {
            case 0: out.train.push_back(p); break;
            case 1: out.dev.push_back(p); break;
            default: out.test.push_back(p); break;
        }
    }
    return out;
}

std::vector<VerseRecord> read_corpus_tsv(const std::string& path, StyleTable& styles) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_corpus_tsv: cannot open " + path);
    std::vector<VerseRecord> out;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw std::invalid_argument("read_corpus_tsv: malformed line " +
                                     std::to_string(lineno) + " in " + path);
        VerseRecord r;
        r.verse_key = line.substr(0, t1);
        r.style = line.substr(t1 + 1, t2 - t1 - 1);
        r.tokens = tokenize(line.substr(t2 + 1));
        if (r.verse_key.empty())
            throw std::invalid_argument("read_corpus_tsv: empty verse key at line " +
                                     std::to_string(lineno));
        if (r.tokens.empty())
            throw std::invalid_argument("read_corpus_tsv: empty text at line " +
                                     std::to_string(lineno));
        styles.add(r.style);
        out.push_back(std::move(r));
    }
    return out;
}

void write_corpus_tsv(const std::string& path, const std::vector<VerseRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_corpus_tsv: cannot open " + path);
    for (const VerseRecord& r : records)
        f << r.verse_key << '\t' << r.style << '\t' << detokenize(r.tokens) << '\n';
}

std::vector<VerseRecord> make_toy_corpus(int num_styles, int num_verses,
                                         std::uint64_t seed, StyleTable& styles) {
    if (num_styles < 2 || num_verses < 3)
        throw std::invalid_argument("make_toy_corpus: need >= 2 styles and >= 3 verses");
    static const std::vector<std::string> words = {
        "sun",  "moon", "river", "stone", "tree",  "bird",  "wind", "fire",
        "rain", "road", "house", "field", "light", "night", "day",  "sea",
        "hill", "star", "cloud", "grass", "door",  "voice", "hand", "eye"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len(4, 8);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(words.size()) - 1);
    std::vector<std::string> style_names;
    for (int s = 0; s < num_styles; ++s) {
        std::string name = "style" + std::string(1, static_cast<char>('a' + s));
        style_names.push_back(name);
        styles.add(name);
    }
    std::vector<VerseRecord> out;
    for (int v = 0; v < num_verses; ++v) {
        int n = len(rng);
        std::vector<std::string> base;
        for (int i = 0; i < n; ++i) base.push_back(words[pick(rng)]);
        for (int s = 0; s < num_styles; ++s) {
            VerseRecord r;
            r.verse_key = "toy:" + std::to_string(v);
            r.style = style_names[s];
            r.tokens = base;
            // Style identity is carried by a single injected marker token.
            std::uniform_int_distribution<int> pos(0, n);
            r.tokens.insert(r.tokens.begin() + pos(rng),
                            "mk" + std::string(1, static_cast<char>('a' + s)));
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace styleobf
