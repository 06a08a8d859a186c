#pragma once

#include <string>
#include <vector>

#include "styleobf/embeddings.hpp"
#include "styleobf/tensor.hpp"

namespace styleobf {

/// Optimal flow between the two normalized bag-of-words distributions.
struct TransportPlan {
    Mat flow;                       // m x n, non-negative
    Eigen::VectorXd source_marginals;  // length m, sums to 1
    Eigen::VectorXd target_marginals;  // length n, sums to 1
};

struct WmdResult {
    double distance = 0;
    TransportPlan plan;
    std::size_t skipped_a = 0;  // tokens without embeddings, per side
    std::size_t skipped_b = 0;
};

/// Exact Word Mover's Distance: minimum-cost transport between the two
/// sentences' nBOW marginals with Euclidean ground costs, solved to
/// optimality by successive-shortest-path min-cost flow on the scaled
/// integer instance. Verifies marginal feasibility and the word-centroid
/// lower bound on every solve. Throws when either side has no embeddable
/// token.
WmdResult wmd(const std::vector<std::string>& sentence_a,
              const std::vector<std::string>& sentence_b,
              const EmbeddingStore& store);

/// Exact minimum-cost transportation with integer supplies/demands given
/// directly; cost(i, j) from the dense matrix. Shared by wmd() and exposed
/// for direct testing.
double min_cost_transport(const std::vector<long>& supplies,
                          const std::vector<long>& demands, const Mat& costs,
                          Mat* flow_out = nullptr);

}  // namespace styleobf
