#include "styleobf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "styleobf/wmd.hpp"

namespace styleobf {

using json = nlohmann::json;

namespace {

std::map<std::string, long> ngram_counts(const Sentence& s, int order) {
    std::map<std::string, long> out;
    if (static_cast<int>(s.size()) < order) return out;
    for (std::size_t i = 0; i + order <= s.size(); ++i) {
        std::string key = s[i];
        for (int k = 1; k < order; ++k) key += "\x1f" + s[i + k];
        ++out[key];
    }
    return out;
}

}  // namespace

PrecisionStats clipped_precision(const std::vector<Sentence>& candidates,
                                 const std::vector<Sentence>& references, int order) {
    if (candidates.size() != references.size())
        throw std::invalid_argument("clipped_precision: list length mismatch");
    PrecisionStats st;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto cand = ngram_counts(candidates[i], order);
        auto ref = ngram_counts(references[i], order);
        for (const auto& [g, c] : cand) {
            st.total += c;
            auto it = ref.find(g);
            if (it != ref.end()) st.matches += std::min(c, it->second);
        }
    }
    return st;
}

double bleu4(const std::vector<Sentence>& candidates,
             const std::vector<Sentence>& references, bool smooth) {
    if (candidates.empty()) throw std::invalid_argument("bleu4: empty corpus");
    if (candidates.size() != references.size())
        throw std::invalid_argument("bleu4: list length mismatch");
    double log_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        PrecisionStats st = clipped_precision(candidates, references, n);
        double num = static_cast<double>(st.matches);
        double den = static_cast<double>(st.total);
        if (smooth && n > 1) {
            num += 1.0;
            den += 1.0;
        }
        if (num <= 0.0 || den <= 0.0) return 0.0;
        log_sum += 0.25 * std::log(num / den);
    }
    long c = 0, r = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        c += static_cast<long>(candidates[i].size());
        r += static_cast<long>(references[i].size());
    }
    if (c == 0) return 0.0;
    double bp = c >= r ? 1.0
                       : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return 100.0 * bp * std::exp(log_sum);
}

namespace {

// Greedy stage alignment: candidate positions left to right, preferring the
// reference slot right after the previous match to keep chunks contiguous.
void align_stage(const std::vector<std::string>& cand_keys,
                 const std::vector<std::string>& ref_keys,
                 std::vector<int>& cand_match, std::vector<bool>& ref_used) {
    int last_ref = -1;
    for (std::size_t i = 0; i < cand_keys.size(); ++i) {
        if (cand_match[i] >= 0) continue;
        int chosen = -1;
        if (last_ref + 1 < static_cast<int>(ref_keys.size()) && !ref_used[last_ref + 1] &&
            ref_keys[last_ref + 1] == cand_keys[i])
            chosen = last_ref + 1;
        else
            for (std::size_t j = 0; j < ref_keys.size(); ++j)
                if (!ref_used[j] && ref_keys[j] == cand_keys[i]) {
                    chosen = static_cast<int>(j);
                    break;
                }
        if (chosen >= 0) {
            cand_match[i] = chosen;
            ref_used[chosen] = true;
            last_ref = chosen;
        }
    }
}

}  // namespace

double meteor_lite(const Sentence& candidate, const Sentence& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    std::vector<int> cand_match(candidate.size(), -1);
    std::vector<bool> ref_used(reference.size(), false);

    align_stage(candidate, reference, cand_match, ref_used);

    std::vector<std::string> cand_stems, ref_stems;
    for (const std::string& t : candidate) cand_stems.push_back(porter_stem(t));
    for (const std::string& t : reference) ref_stems.push_back(porter_stem(t));
    align_stage(cand_stems, ref_stems, cand_match, ref_used);

    long m = 0;
    for (int r : cand_match)
        if (r >= 0) ++m;
    if (m == 0) return 0.0;

    long chunks = 0;
    int prev_cand = -2, prev_ref = -2;
    for (std::size_t i = 0; i < cand_match.size(); ++i) {
        if (cand_match[i] < 0) continue;
        if (static_cast<int>(i) != prev_cand + 1 || cand_match[i] != prev_ref + 1) ++chunks;
        prev_cand = static_cast<int>(i);
        prev_ref = cand_match[i];
    }

    double P = static_cast<double>(m) / static_cast<double>(candidate.size());
    double R = static_cast<double>(m) / static_cast<double>(reference.size());
    double F = 10.0 * P * R / (P + 9.0 * R);
    double penalty =
        0.5 * std::pow(static_cast<double>(chunks) / static_cast<double>(m), 3.0);
    return F * (1.0 - penalty) * 100.0;
}

double meteor_lite_corpus(const std::vector<Sentence>& candidates,
                          const std::vector<Sentence>& references) {
    if (candidates.empty()) throw std::invalid_argument("meteor_lite_corpus: empty corpus");
    if (candidates.size() != references.size())
        throw std::invalid_argument("meteor_lite_corpus: list length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        sum += meteor_lite(candidates[i], references[i]);
    return sum / static_cast<double>(candidates.size());
}

double delta_accuracy(double accuracy, double chance) {
    if (accuracy < 0.0 || accuracy > 1.0 || chance < 0.0 || chance > 1.0)
        throw std::invalid_argument("delta_accuracy: inputs must be in [0, 1]");
    return accuracy - chance;
}

std::string EvalReport::to_json() const {
    json j{{"bleu_src", bleu_src},
           {"meteor_src", meteor_src},
           {"mean_wmd", mean_wmd},
           {"wmd_pairs", wmd_pairs},
           {"wmd_undefined", wmd_undefined},
           {"wmd_skipped_tokens", wmd_skipped_tokens},
           {"adversary_accuracy", adversary_accuracy},
           {"chance", chance},
           {"delta_acc", delta_acc}};
    if (bleu_tgt) j["bleu_tgt"] = *bleu_tgt;
    if (meteor_tgt) j["meteor_tgt"] = *meteor_tgt;
    if (perplexity) j["ppl"] = *perplexity;
    return j.dump();
}

std::string EvalReport::table_header() {
    std::ostringstream os;
    os << std::left << std::setw(16) << "model" << std::right << std::setw(8) << "PPL"
       << std::setw(8) << "BLEU<" << std::setw(8) << "MTR<" << std::setw(8) << "BLEU>"
       << std::setw(8) << "MTR>" << std::setw(8) << "WMD" << std::setw(9) << "dACC";
    return os.str();
}

std::string EvalReport::table_row(const std::string& label) const {
    std::ostringstream os;
    os << std::left << std::setw(16) << label << std::right << std::fixed
       << std::setprecision(2);
    if (perplexity)
        os << std::setw(8) << *perplexity;
    else
        os << std::setw(8) << "-";
    os << std::setw(8) << bleu_src << std::setw(8) << meteor_src;
    if (bleu_tgt)
        os << std::setw(8) << *bleu_tgt;
    else
        os << std::setw(8) << "-";
    if (meteor_tgt)
        os << std::setw(8) << *meteor_tgt;
    else
        os << std::setw(8) << "-";
    os << std::setw(8) << mean_wmd << std::setw(9) << 100.0 * delta_acc;
    return os.str();
}

EvalReport evaluate(const std::vector<Sentence>& outputs,
                    const std::vector<Sentence>& sources,
                    const std::vector<Sentence>* targets,
                    const AdversaryModel& adversary, const std::vector<int>& labels,
                    const EmbeddingStore& store, double chance) {
    if (outputs.size() != sources.size() || outputs.size() != labels.size())
        throw std::invalid_argument("evaluate: misaligned input lists");
    if (targets && targets->size() != outputs.size())
        throw std::invalid_argument("evaluate: misaligned target list");
    if (outputs.empty()) throw std::invalid_argument("evaluate: empty corpus");

    EvalReport rep;
    rep.bleu_src = bleu4(outputs, sources, true);
    rep.meteor_src = meteor_lite_corpus(outputs, sources);
    if (targets) {
        rep.bleu_tgt = bleu4(outputs, *targets, true);
        rep.meteor_tgt = meteor_lite_corpus(outputs, *targets);
    }

    double wmd_sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        try {
            WmdResult w = wmd(outputs[i], sources[i], store);
            wmd_sum += w.distance;
            rep.wmd_pairs += 1;
            rep.wmd_skipped_tokens +=
                static_cast<long>(w.skipped_a) + static_cast<long>(w.skipped_b);
        } catch (const std::invalid_argument&) {
            rep.wmd_undefined += 1;
        }
    }
    rep.mean_wmd = rep.wmd_pairs > 0 ? wmd_sum / static_cast<double>(rep.wmd_pairs) : 0.0;

    rep.adversary_accuracy = accuracy(adversary, outputs, labels);
    rep.chance = chance;
    rep.delta_acc = delta_accuracy(rep.adversary_accuracy, chance);
    return rep;
}

}  // namespace styleobf
