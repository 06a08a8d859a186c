#pragma once

#include <map>
#include <string>

#include "styleobf/tensor.hpp"

namespace styleobf {

/// Per-parameter Adam moments plus the shared step counter and hyperparameters.
struct AdamState {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long t = 0;
    std::map<std::string, Mat> m;
    std::map<std::string, Mat> v;
};

class Adam {
public:
    explicit Adam(AdamState state = {}) : state_(std::move(state)) {}

    /// One bias-corrected Adam update over named (parameter, gradient) pairs.
    /// Rejects the whole step if any gradient is non-finite.
    void step(const std::map<std::string, std::pair<Mat*, const Mat*>>& params);

    /// Multiplicative learning-rate decay, factor in (0, 1].
    void decay_lr(double factor);

    AdamState& state() { return state_; }
    const AdamState& state() const { return state_; }

private:
    AdamState state_;
};

/// Scales all gradients in place so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(std::map<std::string, Mat>& grads, double max_norm);

}  // namespace styleobf
