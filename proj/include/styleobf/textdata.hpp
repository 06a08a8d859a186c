#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace styleobf {

/// Symbolic style names with dense indices, ordered by first registration.
class StyleTable {
public:
    int add(const std::string& name);
    int index(const std::string& name) const;  // throws on unknown name
    const std::string& name(int index) const;
    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
};

struct VerseRecord {
    std::string verse_key;  // opaque book+chapter+verse identifier
    std::string style;
    std::vector<std::string> tokens;
};

struct PairExample {
    std::vector<std::string> source;
    std::vector<std::string> target;
    int source_style = -1;
    int target_style = -1;
    std::string verse_key;
};

struct DataSplit {
    std::vector<PairExample> train, dev, test;
};

/// Token and index bookkeeping. Indices 0..3 are PAD/UNK/BOS/EOS, followed by
/// one <2{stylename}> transfer token per style, then corpus tokens.
class Vocab {
public:
    static constexpr int kPad = 0, kUnk = 1, kBos = 2, kEos = 3;

    static Vocab build(const std::vector<VerseRecord>& records,
                       const StyleTable& styles, int min_count);

    int id(const std::string& token) const;  // kUnk for out-of-vocab
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    int num_styles() const { return num_styles_; }
    int transfer_token(int style_index) const;

    std::vector<int> encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;

    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
    int num_styles_ = 0;
};

/// Whitespace split with every punctuation mark from .,;:!?'"() and the em
/// dash detached as its own token. Case is preserved.
std::vector<std::string> tokenize(const std::string& text);

/// Space-joins tokens; the inverse of tokenize up to whitespace around
/// detached punctuation.
std::string detokenize(const std::vector<std::string>& tokens);

/// All ordered cross-style pairs within each verse key. A complete k-style
/// group yields k*(k-1) pairs. Throws on a duplicated style under one key.
std::vector<PairExample> make_pairs(const std::vector<VerseRecord>& records,
                                    const StyleTable& styles);

/// One target==source pair per record.
std::vector<PairExample> make_ae_examples(const std::vector<VerseRecord>& records,
                                          const StyleTable& styles);

/// Partitions by verse key so no key is shared across train/dev/test.
/// Fractions must be positive and sum to 1 within 1e-9.
DataSplit split(const std::vector<PairExample>& pairs,
                const std::array<double, 3>& fractions, std::uint64_t seed);

/// One record per line: verse_key<TAB>style<TAB>text, UTF-8, no header.
std::vector<VerseRecord> read_corpus_tsv(const std::string& path, StyleTable& styles);
void write_corpus_tsv(const std::string& path, const std::vector<VerseRecord>& records);

/// Deterministic synthetic corpus: per-style marker tokens injected into
/// otherwise shared random sentences. Used by the toy preset and tests.
std::vector<VerseRecord> make_toy_corpus(int num_styles, int num_verses,
                                         std::uint64_t seed, StyleTable& styles);

}  // namespace styleobf
