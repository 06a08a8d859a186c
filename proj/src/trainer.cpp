#include "styleobf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace styleobf {

using json = nlohmann::json;

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (learning_rate <= 0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (decay_factor <= 0 || decay_factor > 1)
        throw std::invalid_argument("TrainConfig: decay_factor must be in (0, 1]");
}

void TrainLog::write_jsonl(std::ostream& os) const {
    for (const EpochLog& e : epochs) {
        json j{{"epoch", e.epoch},       {"train_loss", e.train_loss},
               {"dev_loss", e.dev_loss}, {"dev_ppl", e.dev_ppl},
               {"lr", e.learning_rate}};
        if (e.style_accuracy >= 0) j["style_accuracy"] = e.style_accuracy;
        os << j.dump() << '\n';
    }
}

void TrainLog::write_jsonl(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("TrainLog: cannot open " + path);
    write_jsonl(f);
}

namespace {

Batch encode_batch(const std::vector<const PairExample*>& group, const Vocab& vocab) {
    Batch b;
    for (const PairExample* p : group) {
        b.source.push_back(vocab.encode(p->source));
        b.target.push_back(vocab.encode(p->target));
        b.source_style.push_back(p->source_style);
        b.target_style.push_back(p->target_style);
    }
    return b;
}

}  // namespace

std::vector<Batch> make_batches(const std::vector<PairExample>& pairs, const Vocab& vocab,
                                int batch_size, std::mt19937_64& rng) {
    if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
    std::vector<const PairExample*> order;
    order.reserve(pairs.size());
    for (const PairExample& p : pairs) order.push_back(&p);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Batch> out;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        std::size_t n = std::min<std::size_t>(batch_size, order.size() - i);
        out.push_back(encode_batch(
            std::vector<const PairExample*>(order.begin() + i, order.begin() + i + n),
            vocab));
    }
    return out;
}

std::vector<Batch> make_eval_batches(const std::vector<PairExample>& pairs,
                                     const Vocab& vocab, int batch_size) {
    std::vector<const PairExample*> order;
    for (const PairExample& p : pairs) order.push_back(&p);
    std::vector<Batch> out;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        std::size_t n = std::min<std::size_t>(batch_size, order.size() - i);
        out.push_back(encode_batch(
            std::vector<const PairExample*>(order.begin() + i, order.begin() + i + n),
            vocab));
    }
    return out;
}

EvalStats evaluate_loss(const Model& model, const std::vector<PairExample>& pairs,
                        const Vocab& vocab, int batch_size) {
    if (pairs.empty()) throw std::invalid_argument("evaluate_loss: empty pair list");
    std::mt19937_64 rng(0);  // unused: dropout is off in eval mode
    double loss_sum = 0, ce_sum = 0, tokens = 0;
    double tok_correct = 0;
    double style_correct = 0, style_total = 0;
    bool has_head = false;
    for (const Batch& b : make_eval_batches(pairs, vocab, batch_size)) {
        TrainGraph g = model.build_train_graph(b, false, rng);
        double n = static_cast<double>(b.source.size());
        loss_sum += g.tape->value(g.loss)(0, 0) * n;
        ce_sum += g.tape->value(g.recon_loss_sum)(0, 0);
        tokens += g.token_count;
        for (std::size_t i = 0; i < g.flat_targets.size(); ++i) {
            if (g.flat_weights[i] == 0.0) continue;
            Eigen::Index arg;
            g.step_logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
            if (static_cast<int>(arg) == g.flat_targets[i]) tok_correct += 1;
        }
        if (g.has_style_head) {
            has_head = true;
            for (Eigen::Index r = 0; r < g.style_logits.rows(); ++r) {
                Eigen::Index arg;
                g.style_logits.row(r).maxCoeff(&arg);
                if (static_cast<int>(arg) == b.source_style[r]) style_correct += 1;
                style_total += 1;
            }
        }
    }
    EvalStats s;
    s.loss = loss_sum / static_cast<double>(pairs.size());
    s.recon_ce = ce_sum / tokens;
    s.token_accuracy = tok_correct / tokens;
    s.style_accuracy = has_head ? style_correct / style_total : -1;
    return s;
}

std::pair<int, int> early_stop_point(const std::vector<double>& dev_losses,
                                     int patience) {
    if (patience < 1) throw std::invalid_argument("early_stop_point: patience must be >= 1");
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0, since_best = 0;
    for (std::size_t i = 0; i < dev_losses.size(); ++i) {
        if (dev_losses[i] < best) {
            best = dev_losses[i];
            best_epoch = static_cast<int>(i) + 1;
            since_best = 0;
        } else if (++since_best >= patience) {
            return {static_cast<int>(i) + 1, best_epoch};
        }
    }
    return {static_cast<int>(dev_losses.size()), best_epoch};
}

double perplexity(const Model& model, const std::vector<PairExample>& pairs,
                  const Vocab& vocab, int batch_size) {
    return std::exp(evaluate_loss(model, pairs, vocab, batch_size).recon_ce);
}

TrainLog train(Model& model, const std::vector<PairExample>& train_pairs,
               const std::vector<PairExample>& dev_pairs, const Vocab& vocab,
               const TrainConfig& cfg, std::ostream* progress) {
    cfg.validate();
    if (train_pairs.empty() || dev_pairs.empty())
        throw std::invalid_argument("train: train and dev partitions must be non-empty");

    std::mt19937_64 rng(cfg.seed);
    AdamState st;
    st.alpha = cfg.learning_rate;
    Adam adam(st);

    TrainLog log;
    std::map<std::string, Mat> best_params = model.params();
    double best_dev = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    std::vector<double> dev_losses;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double train_loss_sum = 0, train_examples = 0;
        try {
            for (Batch& b : make_batches(train_pairs, vocab, cfg.batch_size, rng)) {
                TrainGraph g = model.build_train_graph(b, true, rng);
                g.tape->backward(g.loss);
                std::map<std::string, Mat> grads = g.leaf_gradients();
                if (cfg.grad_clip_norm > 0) clip_global_norm(grads, cfg.grad_clip_norm);
                std::map<std::string, std::pair<Mat*, const Mat*>> upd;
                for (auto& [name, grad] : grads)
                    upd.emplace(name, std::make_pair(&model.params().at(name), &grad));
                adam.step(upd);
                double n = static_cast<double>(b.source.size());
                train_loss_sum += g.tape->value(g.loss)(0, 0) * n;
                train_examples += n;
            }
        } catch (const std::exception& e) {
            if (progress) *progress << "training diverged at epoch " << epoch << ": "
                                    << e.what() << "\n";
            log.diverged = true;
            break;
        }

        EvalStats dev = evaluate_loss(model, dev_pairs, vocab, cfg.batch_size);
        EpochLog el;
        el.epoch = epoch;
        el.train_loss = train_loss_sum / train_examples;
        el.dev_loss = dev.loss;
        el.dev_ppl = std::exp(dev.recon_ce);
        el.style_accuracy = dev.style_accuracy;
        el.learning_rate = adam.state().alpha;
        log.epochs.push_back(el);
        if (progress)
            *progress << "epoch " << epoch << " train_loss=" << el.train_loss
                      << " dev_loss=" << el.dev_loss << " dev_ppl=" << el.dev_ppl
                      << " lr=" << el.learning_rate << "\n";

        dev_losses.push_back(dev.loss);
        auto [stop_epoch, best_so_far] = early_stop_point(dev_losses, cfg.patience);
        if (best_so_far == epoch) {
            best_dev = dev.loss;
            best_epoch = epoch;
            best_params = model.params();
        }
        // early_stop_point returns stop_epoch == size() both on exhaustion and
        // on running out of data, so test the patience budget explicitly.
        if (stop_epoch == epoch && epoch - best_so_far >= cfg.patience) break;
        adam.decay_lr(cfg.decay_factor);
    }

    model.params() = best_params;
    log.best_epoch = best_epoch;
    log.best_dev_loss = best_dev;
    return log;
}

}  // namespace styleobf
