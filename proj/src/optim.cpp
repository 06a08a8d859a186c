#include "styleobf/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace styleobf {

void Adam::step(const std::map<std::string, std::pair<Mat*, const Mat*>>& params) {
    for (const auto& [name, pg] : params) {
        if (!pg.second->allFinite())
            throw std::runtime_error("Adam::step: non-finite gradient for '" + name +
                                     "', step rejected");
        if (pg.first->rows() != pg.second->rows() || pg.first->cols() != pg.second->cols())
            throw std::invalid_argument("Adam::step: gradient shape mismatch for '" +
                                        name + "'");
    }
    state_.t += 1;
    double bc1 = 1.0 - std::pow(state_.beta1, static_cast<double>(state_.t));
    double bc2 = 1.0 - std::pow(state_.beta2, static_cast<double>(state_.t));
    for (const auto& [name, pg] : params) {
        Mat& p = *pg.first;
        const Mat& g = *pg.second;
        Mat& m = state_.m.try_emplace(name, Mat::Zero(p.rows(), p.cols())).first->second;
        Mat& v = state_.v.try_emplace(name, Mat::Zero(p.rows(), p.cols())).first->second;
        m = state_.beta1 * m + (1.0 - state_.beta1) * g;
        v = state_.beta2 * v + (1.0 - state_.beta2) * g.cwiseProduct(g);
        Mat mhat = m / bc1;
        Mat vhat = v / bc2;
        p.array() -= state_.alpha * mhat.array() / (vhat.array().sqrt() + state_.eps);
    }
}

void Adam::decay_lr(double factor) {
    if (factor <= 0.0 || factor > 1.0)
        throw std::invalid_argument("Adam::decay_lr: factor must be in (0, 1]");
    state_.alpha *= factor;
}

double clip_global_norm(std::map<std::string, Mat>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, g] : grads) sq += g.squaredNorm();
    double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        double s = max_norm / norm;
        for (auto& [name, g] : grads) g *= s;
    }
    return norm;
}

}  // namespace styleobf
