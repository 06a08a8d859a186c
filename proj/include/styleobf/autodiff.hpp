#pragma once

#include <functional>
#include <random>
#include <vector>

#include "styleobf/tensor.hpp"

namespace styleobf::ad {

class Tape;

/// Handle into a Tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    int idx = -1;
};

/// Reverse-mode tape. Ops evaluate eagerly at construction and record a pull
/// closure; backward() replays the closures in reverse construction order,
/// which is a reverse topological order of the graph.
class Tape {
public:
    /// Differentiable input (parameter or activation fed from outside).
    Var leaf(Mat value);
    /// Non-differentiable value; backward never writes into it.
    Var constant(Mat value);

    const Mat& value(Var v) const { return nodes_[check(v)].value; }
    const Mat& grad(Var v) const { return nodes_[check(v)].grad; }
    bool needs_grad(Var v) const { return nodes_[check(v)].needs_grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Backward from a 1x1 root with seed gradient 1.
    void backward(Var root);
    void backward(Var root, const Mat& seed);

    // Used by op implementations.
    Var record(Mat value, bool needs_grad, std::function<void(Tape&)> pull);
    Mat& grad_ref(Var v) { return nodes_[check(v)].grad; }
    void accumulate(Var v, const Mat& g);

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(Tape&)> pull;
        bool needs_grad;
    };

    int check(Var v) const;
    std::vector<Node> nodes_;
};

// Elementwise and linear-algebra ops. All validate shapes and throw
// std::invalid_argument naming the offending op on mismatch.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);   // elementwise
Var cdiv(Var a, Var b);  // elementwise a ./ b
Var matmul(Var a, Var b);
Var scale(Var a, double s);
Var add_rowwise(Var a, Var bias);  // bias is 1 x cols, broadcast over rows
Var sigmoid(Var a);
Var tanh_op(Var a);
Var exp_op(Var a);
Var cols(Var a, Eigen::Index first, Eigen::Index count);
Var hcat(const std::vector<Var>& parts);
Var vcat(const std::vector<Var>& parts);
Var colsum(Var a);  // 1 x cols, sum over rows
Var sum(Var a);     // 1 x 1
Var softmax_rows(Var a);  // softmax along each row

/// Selects rows of a by index (embedding lookup). Backward scatters, with
/// additive accumulation for repeated indices.
Var gather_rows(Var a, const std::vector<int>& ids);

/// Multiplies row r of a by s(r, 0); s is rows x 1.
Var mul_colwise(Var a, Var s);

/// Row softmax restricted to entries where mask != 0; masked entries get
/// weight 0. Each row must have at least one unmasked entry.
Var masked_softmax_rows(Var a, const Mat& mask);

/// Gradient reversal: identity forward, -lambda * upstream on backward.
Var grl(Var a, double lambda);

/// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
/// Identity when !training. Requires 0 <= p < 1.
Var dropout(Var a, double p, bool training, std::mt19937_64& rng);

/// Weighted sum of per-row softmax cross-entropies: for each row b,
/// weight[b] * (logsumexp(logits_b) - logits_b[target[b]]). Returns 1x1.
Var cross_entropy_sum(Var logits, const std::vector<int>& targets,
                      const std::vector<double>& weights);

}  // namespace styleobf::ad
