#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace styleobf {

// Dense double-precision matrix. Row vectors (1 x n) are used for biases and
// single-example activations; batches stack examples as rows.
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols,
                          const std::string& who) {
    if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument(who + ": expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ", got " +
                                    std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
    }
}

}  // namespace styleobf
