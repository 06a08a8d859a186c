#include "styleobf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace styleobf::ad {

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()));
    }
}

Tape& same_tape(Var a, Var b, const char* op) {
    if (a.tape == nullptr || a.tape != b.tape)
        throw std::invalid_argument(std::string(op) + ": vars from different tapes");
    return *a.tape;
}

// Index the next record() call will get.
Var next_var(Tape& t) { return Var{&t, static_cast<int>(t.size())}; }

}  // namespace

int Tape::check(Var v) const {
    if (v.tape != this || v.idx < 0 || v.idx >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("Tape: invalid Var handle");
    return v.idx;
}

Var Tape::record(Mat value, bool needs_grad, std::function<void(Tape&)> pull) {
    if (!value.allFinite())
        throw std::invalid_argument("Tape: non-finite value produced at node " +
                                    std::to_string(nodes_.size()));
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.pull = std::move(pull);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value) { return record(std::move(value), true, nullptr); }
Var Tape::constant(Mat value) { return record(std::move(value), false, nullptr); }

void Tape::accumulate(Var v, const Mat& g) {
    Node& n = nodes_[check(v)];
    if (!n.needs_grad) return;
    n.grad += g;
}

void Tape::backward(Var root) {
    const Mat& out = value(root);
    if (out.rows() != 1 || out.cols() != 1)
        throw std::invalid_argument("Tape::backward: implicit seed requires a 1x1 root");
    backward(root, Mat::Ones(1, 1));
}

void Tape::backward(Var root, const Mat& seed) {
    int r = check(root);
    const Mat& out = nodes_[r].value;
    if (seed.rows() != out.rows() || seed.cols() != out.cols())
        throw std::invalid_argument("Tape::backward: seed gradient shape mismatch");
    for (Node& n : nodes_) {
        if (n.needs_grad)
            n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        else
            n.grad.resize(0, 0);
    }
    nodes_[r].grad = seed;
    for (int i = r; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.needs_grad && n.pull) n.pull(*this);
    }
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b, "add");
    check_same_shape(t.value(a), t.value(b), "add");
    Var out = next_var(t);
    return t.record(t.value(a) + t.value(b), t.needs_grad(a) || t.needs_grad(b),
                    [a, b, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out));
                        tp.accumulate(b, tp.grad(out));
                    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b, "sub");
    check_same_shape(t.value(a), t.value(b), "sub");
    Var out = next_var(t);
    return t.record(t.value(a) - t.value(b), t.needs_grad(a) || t.needs_grad(b),
                    [a, b, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out));
                        tp.accumulate(b, -tp.grad(out));
                    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b, "mul");
    check_same_shape(t.value(a), t.value(b), "mul");
    Var out = next_var(t);
    return t.record(t.value(a).cwiseProduct(t.value(b)),
                    t.needs_grad(a) || t.needs_grad(b), [a, b, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out).cwiseProduct(tp.value(b)));
                        tp.accumulate(b, tp.grad(out).cwiseProduct(tp.value(a)));
                    });
}

Var cdiv(Var a, Var b) {
    Tape& t = same_tape(a, b, "cdiv");
    check_same_shape(t.value(a), t.value(b), "cdiv");
    Var out = next_var(t);
    return t.record(t.value(a).cwiseQuotient(t.value(b)),
                    t.needs_grad(a) || t.needs_grad(b), [a, b, out](Tape& tp) {
                        const Mat& g = tp.grad(out);
                        tp.accumulate(a, g.cwiseQuotient(tp.value(b)));
                        tp.accumulate(b, -g.cwiseProduct(tp.value(out))
                                              .cwiseQuotient(tp.value(b)));
                    });
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b, "matmul");
    if (t.value(a).cols() != t.value(b).rows())
        throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                    std::to_string(t.value(a).cols()) + " vs " +
                                    std::to_string(t.value(b).rows()) + ")");
    Var out = next_var(t);
    return t.record(t.value(a) * t.value(b), t.needs_grad(a) || t.needs_grad(b),
                    [a, b, out](Tape& tp) {
                        const Mat& g = tp.grad(out);
                        tp.accumulate(a, g * tp.value(b).transpose());
                        tp.accumulate(b, tp.value(a).transpose() * g);
                    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    return t.record(t.value(a) * s, t.needs_grad(a),
                    [a, s, out](Tape& tp) { tp.accumulate(a, tp.grad(out) * s); });
}

Var add_rowwise(Var a, Var bias) {
    Tape& t = same_tape(a, bias, "add_rowwise");
    const Mat& bv = t.value(bias);
    if (bv.rows() != 1 || bv.cols() != t.value(a).cols())
        throw std::invalid_argument("add_rowwise: bias must be 1x" +
                                    std::to_string(t.value(a).cols()));
    Var out = next_var(t);
    Mat v = t.value(a);
    v.rowwise() += bv.row(0);
    return t.record(std::move(v), t.needs_grad(a) || t.needs_grad(bias),
                    [a, bias, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out));
                        tp.accumulate(bias, tp.grad(out).colwise().sum());
                    });
}

Var sigmoid(Var a) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    Mat y = (1.0 / (1.0 + (-t.value(a).array()).exp())).matrix();
    return t.record(std::move(y), t.needs_grad(a), [a, out](Tape& tp) {
        const Mat& yv = tp.value(out);
        Mat d = yv.array() * (1.0 - yv.array());
        tp.accumulate(a, tp.grad(out).cwiseProduct(d));
    });
}

Var tanh_op(Var a) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    return t.record(t.value(a).array().tanh().matrix(), t.needs_grad(a),
                    [a, out](Tape& tp) {
                        const Mat& yv = tp.value(out);
                        Mat d = 1.0 - yv.array().square();
                        tp.accumulate(a, tp.grad(out).cwiseProduct(d));
                    });
}

Var exp_op(Var a) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    return t.record(t.value(a).array().exp().matrix(), t.needs_grad(a),
                    [a, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out).cwiseProduct(tp.value(out)));
                    });
}

Var cols(Var a, Eigen::Index first, Eigen::Index count) {
    Tape& t = *a.tape;
    const Mat& v = t.value(a);
    if (first < 0 || count < 1 || first + count > v.cols())
        throw std::invalid_argument("cols: block [" + std::to_string(first) + ", " +
                                    std::to_string(first + count) + ") out of range");
    Var out = next_var(t);
    return t.record(v.middleCols(first, count), t.needs_grad(a),
                    [a, first, count, out](Tape& tp) {
                        Mat g = Mat::Zero(tp.value(a).rows(), tp.value(a).cols());
                        g.middleCols(first, count) = tp.grad(out);
                        tp.accumulate(a, g);
                    });
}

Var hcat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("hcat: no inputs");
    Tape& t = *parts.front().tape;
    Eigen::Index rows = t.value(parts.front()).rows();
    Eigen::Index total = 0;
    bool ng = false;
    for (Var p : parts) {
        same_tape(parts.front(), p, "hcat");
        if (t.value(p).rows() != rows)
            throw std::invalid_argument("hcat: row count mismatch");
        total += t.value(p).cols();
        ng = ng || t.needs_grad(p);
    }
    Mat v(rows, total);
    Eigen::Index off = 0;
    for (Var p : parts) {
        v.middleCols(off, t.value(p).cols()) = t.value(p);
        off += t.value(p).cols();
    }
    Var out = next_var(t);
    std::vector<Var> ps = parts;
    return t.record(std::move(v), ng, [ps, out](Tape& tp) {
        Eigen::Index o = 0;
        for (Var p : ps) {
            Eigen::Index c = tp.value(p).cols();
            tp.accumulate(p, tp.grad(out).middleCols(o, c));
            o += c;
        }
    });
}

Var vcat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("vcat: no inputs");
    Tape& t = *parts.front().tape;
    Eigen::Index colsn = t.value(parts.front()).cols();
    Eigen::Index total = 0;
    bool ng = false;
    for (Var p : parts) {
        same_tape(parts.front(), p, "vcat");
        if (t.value(p).cols() != colsn)
            throw std::invalid_argument("vcat: column count mismatch");
        total += t.value(p).rows();
        ng = ng || t.needs_grad(p);
    }
    Mat v(total, colsn);
    Eigen::Index off = 0;
    for (Var p : parts) {
        v.middleRows(off, t.value(p).rows()) = t.value(p);
        off += t.value(p).rows();
    }
    Var out = next_var(t);
    std::vector<Var> ps = parts;
    return t.record(std::move(v), ng, [ps, out](Tape& tp) {
        Eigen::Index o = 0;
        for (Var p : ps) {
            Eigen::Index r = tp.value(p).rows();
            tp.accumulate(p, tp.grad(out).middleRows(o, r));
            o += r;
        }
    });
}

Var colsum(Var a) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    return t.record(t.value(a).colwise().sum(), t.needs_grad(a),
                    [a, out](Tape& tp) {
                        Eigen::Index r = tp.value(a).rows();
                        tp.accumulate(a, tp.grad(out).replicate(r, 1));
                    });
}

Var sum(Var a) {
    Tape& t = *a.tape;
    Var out = next_var(t);
    Mat v(1, 1);
    v(0, 0) = t.value(a).sum();
    return t.record(std::move(v), t.needs_grad(a), [a, out](Tape& tp) {
        double g = tp.grad(out)(0, 0);
        tp.accumulate(a, Mat::Constant(tp.value(a).rows(), tp.value(a).cols(), g));
    });
}

Var softmax_rows(Var a) {
    Tape& t = *a.tape;
    const Mat& x = t.value(a);
    Mat y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        Eigen::ArrayXd e = (x.row(r).array() - x.row(r).maxCoeff()).exp();
        y.row(r) = (e / e.sum()).matrix();
    }
    Var out = next_var(t);
    return t.record(std::move(y), t.needs_grad(a), [a, out](Tape& tp) {
        const Mat& yv = tp.value(out);
        const Mat& g = tp.grad(out);
        Mat d(yv.rows(), yv.cols());
        for (Eigen::Index r = 0; r < yv.rows(); ++r) {
            double dot = g.row(r).dot(yv.row(r));
            d.row(r) = yv.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
        }
        tp.accumulate(a, d);
    });
}

Var gather_rows(Var a, const std::vector<int>& ids) {
    Tape& t = *a.tape;
    const Mat& x = t.value(a);
    for (int id : ids)
        if (id < 0 || id >= x.rows())
            throw std::invalid_argument("gather_rows: row index out of range");
    Mat v(static_cast<Eigen::Index>(ids.size()), x.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = x.row(ids[i]);
    Var out = next_var(t);
    return t.record(std::move(v), t.needs_grad(a), [a, ids, out](Tape& tp) {
        Mat g = Mat::Zero(tp.value(a).rows(), tp.value(a).cols());
        const Mat& go = tp.grad(out);
        for (std::size_t i = 0; i < ids.size(); ++i)
            g.row(ids[i]) += go.row(static_cast<Eigen::Index>(i));
        tp.accumulate(a, g);
    });
}

Var mul_colwise(Var a, Var s) {
    Tape& t = same_tape(a, s, "mul_colwise");
    const Mat& sv = t.value(s);
    if (sv.cols() != 1 || sv.rows() != t.value(a).rows())
        throw std::invalid_argument("mul_colwise: scale must be rows x 1");
    Var out = next_var(t);
    Mat v = t.value(a).array().colwise() * sv.col(0).array();
    return t.record(std::move(v), t.needs_grad(a) || t.needs_grad(s),
                    [a, s, out](Tape& tp) {
                        const Mat& g = tp.grad(out);
                        const Mat& sv2 = tp.value(s);
                        tp.accumulate(a, (g.array().colwise() * sv2.col(0).array()).matrix());
                        tp.accumulate(s, g.cwiseProduct(tp.value(a)).rowwise().sum());
                    });
}

Var masked_softmax_rows(Var a, const Mat& mask) {
    Tape& t = *a.tape;
    const Mat& x = t.value(a);
    check_same_shape(x, mask, "masked_softmax_rows");
    Mat y = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            if (mask(r, c) != 0.0) mx = std::max(mx, x(r, c));
        if (!std::isfinite(mx))
            throw std::invalid_argument("masked_softmax_rows: fully masked row " +
                                        std::to_string(r));
        double denom = 0.0;
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            if (mask(r, c) != 0.0) denom += std::exp(x(r, c) - mx);
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            if (mask(r, c) != 0.0) y(r, c) = std::exp(x(r, c) - mx) / denom;
    }
    Var out = next_var(t);
    return t.record(std::move(y), t.needs_grad(a), [a, out](Tape& tp) {
        const Mat& yv = tp.value(out);
        const Mat& g = tp.grad(out);
        Mat d(yv.rows(), yv.cols());
        for (Eigen::Index r = 0; r < yv.rows(); ++r) {
            double dot = g.row(r).dot(yv.row(r));
            d.row(r) = yv.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
        }
        tp.accumulate(a, d);
    });
}

Var grl(Var a, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("grl: lambda must be non-negative");
    Tape& t = *a.tape;
    Var out = next_var(t);
    return t.record(t.value(a), t.needs_grad(a), [a, lambda, out](Tape& tp) {
        tp.accumulate(a, -lambda * tp.grad(out));
    });
}

Var dropout(Var a, double p, bool training, std::mt19937_64& rng) {
    if (p < 0.0 || p >= 1.0)
        throw std::invalid_argument("dropout: p must be in [0, 1)");
    Tape& t = *a.tape;
    if (!training || p == 0.0) {
        Var out = next_var(t);
        return t.record(t.value(a), t.needs_grad(a), [a, out](Tape& tp) {
            tp.accumulate(a, tp.grad(out));
        });
    }
    const Mat& x = t.value(a);
    Mat mask(x.rows(), x.cols());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double keep_scale = 1.0 / (1.0 - p);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            mask(r, c) = u(rng) < p ? 0.0 : keep_scale;
    Var out = next_var(t);
    return t.record(x.cwiseProduct(mask), t.needs_grad(a),
                    [a, mask, out](Tape& tp) {
                        tp.accumulate(a, tp.grad(out).cwiseProduct(mask));
                    });
}

Var cross_entropy_sum(Var logits, const std::vector<int>& targets,
                      const std::vector<double>& weights) {
    Tape& t = *logits.tape;
    const Mat& x = t.value(logits);
    if (static_cast<Eigen::Index>(targets.size()) != x.rows() ||
        targets.size() != weights.size())
        throw std::invalid_argument("cross_entropy_sum: targets/weights must match rows");
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (targets[i] < 0 || targets[i] >= x.cols())
            throw std::invalid_argument("cross_entropy_sum: target index out of range");
    double loss = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double mx = x.row(r).maxCoeff();
        double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
        loss += weights[r] * (lse - x(r, targets[r]));
    }
    Var out = next_var(t);
    Mat v(1, 1);
    v(0, 0) = loss;
    return t.record(std::move(v), t.needs_grad(logits),
                    [logits, targets, weights, out](Tape& tp) {
                        const Mat& xv = tp.value(logits);
                        double g = tp.grad(out)(0, 0);
                        Mat d(xv.rows(), xv.cols());
                        for (Eigen::Index r = 0; r < xv.rows(); ++r) {
                            Eigen::ArrayXd e =
                                (xv.row(r).array() - xv.row(r).maxCoeff()).exp();
                            d.row(r) = (e / e.sum()).matrix();
                            d(r, targets[r]) -= 1.0;
                            d.row(r) *= g * weights[r];
                        }
                        tp.accumulate(logits, d);
                    });
}

}  // namespace styleobf::ad
