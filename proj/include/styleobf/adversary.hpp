#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "styleobf/tensor.hpp"

namespace styleobf {

struct AdversaryConfig {
    int dim = 100;
    std::vector<int> orders = {1, 2};  // n-gram orders
    std::int64_t buckets = 1000000;    // hashed n-gram table size
    double learning_rate = 0.01;
    int epochs = 20;
    int num_classes = 0;
    std::uint64_t seed = 1;
    bool linear_lr_decay = true;  // decay to 0 across all updates

    void validate() const;
    std::string to_json() const;
    static AdversaryConfig from_json(const std::string& j);
};

/// 64-bit FNV-1a over the UTF-8 bytes of a string.
std::uint64_t fnv1a64(const std::string& s);

/// Linear classifier over averaged embeddings of unigram ids and hashed
/// higher-order n-gram buckets.
class AdversaryModel {
public:
    AdversaryModel(AdversaryConfig cfg, std::vector<std::string> vocab);

    const AdversaryConfig& config() const { return cfg_; }

    /// Feature indices for one sentence: in-vocab unigrams by dictionary id,
    /// n-grams of order >= 2 hashed into [vocab, vocab + buckets).
    std::vector<std::int64_t> featurize(const std::vector<std::string>& tokens) const;

    RowVec scores(const std::vector<std::string>& tokens) const;
    int predict(const std::vector<std::string>& tokens) const;

    void save(const std::string& path) const;
    static AdversaryModel load(const std::string& path);

    Mat& embeddings() { return embed_; }
    Mat& output_weights() { return out_W_; }

private:
    friend AdversaryModel train_adversary(const std::vector<std::vector<std::string>>&,
                                          const std::vector<int>&,
                                          const AdversaryConfig&);
    AdversaryConfig cfg_;
    std::vector<std::string> vocab_;
    std::map<std::string, int> dict_;
    Mat embed_;  // (vocab + buckets) x dim
    Mat out_W_;  // dim x classes
};

/// SGD on softmax cross-entropy, fastText-style: per-example updates with
/// linear learning-rate decay to zero. Deterministic under cfg.seed.
AdversaryModel train_adversary(const std::vector<std::vector<std::string>>& sentences,
                               const std::vector<int>& labels,
                               const AdversaryConfig& cfg);

double accuracy(const AdversaryModel& model,
                const std::vector<std::vector<std::string>>& sentences,
                const std::vector<int>& labels);

/// Multinomial logistic probe over dense vectors, used to measure how much
/// style signal survives in context vectors.
struct LinearProbe {
    Mat W;     // dim x classes
    RowVec b;  // 1 x classes
    int predict(const RowVec& x) const;
};

LinearProbe train_probe(const Mat& inputs, const std::vector<int>& labels,
                        int num_classes, int epochs, double lr, std::uint64_t seed);

double probe_accuracy(const LinearProbe& probe, const Mat& inputs,
                      const std::vector<int>& labels);

}  // namespace styleobf
