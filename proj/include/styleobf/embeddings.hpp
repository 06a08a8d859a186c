#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace styleobf {

/// Token -> vector table in word2vec text format ("token v1 ... vd" per
/// line, optional "count dim" header). Out-of-store tokens are skipped by
/// the consumers.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    std::size_t size() const { return vecs_.size(); }
    bool contains(const std::string& token) const { return vecs_.count(token) > 0; }
    const Eigen::VectorXd& at(const std::string& token) const;
    void insert(const std::string& token, Eigen::VectorXd vec);

    static EmbeddingStore load(const std::string& path);
    void save(const std::string& path) const;

    /// Deterministic pseudo-random unit vectors per token, for toy runs and
    /// tests where real pretrained vectors are beside the point.
    static EmbeddingStore synthetic(const std::vector<std::string>& tokens, int dim,
                                    std::uint64_t seed);

private:
    int dim_ = 0;
    std::map<std::string, Eigen::VectorXd> vecs_;
};

}  // namespace styleobf
