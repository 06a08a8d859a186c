#pragma once

#include <optional>
#include <string>
#include <vector>

#include "styleobf/adversary.hpp"
#include "styleobf/embeddings.hpp"

namespace styleobf {

using Sentence = std::vector<std::string>;

/// Clipped n-gram match count and candidate n-gram total, corpus level.
struct PrecisionStats {
    long matches = 0;
    long total = 0;
};

PrecisionStats clipped_precision(const std::vector<Sentence>& candidates,
                                 const std::vector<Sentence>& references, int order);

/// Corpus BLEU-4 in [0, 100]: geometric mean of clipped 1..4-gram precisions
/// with uniform weights times the brevity penalty. With smoothing off a zero
/// precision at any order yields 0; add-one smoothing applies to n > 1.
double bleu4(const std::vector<Sentence>& candidates,
             const std::vector<Sentence>& references, bool smooth = false);

/// Classic Porter stemmer.
std::string porter_stem(const std::string& word);

/// Two-stage (exact, then stemmed) unigram alignment with the classic
/// parameters: F = 10PR / (P + 9R), penalty = 0.5 * (chunks / m)^3,
/// score = F * (1 - penalty) * 100.
double meteor_lite(const Sentence& candidate, const Sentence& reference);

double meteor_lite_corpus(const std::vector<Sentence>& candidates,
                          const std::vector<Sentence>& references);

/// accuracy - p, both in [0, 1].
double delta_accuracy(double accuracy, double chance);

struct EvalReport {
    double bleu_src = 0;     // <- direction, vs source
    double meteor_src = 0;
    std::optional<double> bleu_tgt;  // -> direction, vs target (S2S only)
    std::optional<double> meteor_tgt;
    double mean_wmd = 0;
    long wmd_pairs = 0;
    long wmd_undefined = 0;  // pairs with no embeddable tokens on a side
    long wmd_skipped_tokens = 0;
    double adversary_accuracy = 0;
    double chance = 0;
    double delta_acc = 0;
    std::optional<double> perplexity;

    std::string to_json() const;
    /// One aligned table row; header() gives the column line.
    static std::string table_header();
    std::string table_row(const std::string& label) const;
};

/// Full metric suite over aligned output/source (and optionally target)
/// sentence lists. Labels are the source-style ids the adversary predicts.
EvalReport evaluate(const std::vector<Sentence>& outputs,
                    const std::vector<Sentence>& sources,
                    const std::vector<Sentence>* targets,
                    const AdversaryModel& adversary, const std::vector<int>& labels,
                    const EmbeddingStore& store, double chance);

}  // namespace styleobf
