#include "styleobf/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "styleobf/checkpoint.hpp"

namespace styleobf {

using json = nlohmann::json;

void AdversaryConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("AdversaryConfig: dim must be >= 1");
    if (buckets < 1) throw std::invalid_argument("AdversaryConfig: buckets must be >= 1");
    if (orders.empty()) throw std::invalid_argument("AdversaryConfig: orders must be non-empty");
    for (int o : orders)
        if (o < 1) throw std::invalid_argument("AdversaryConfig: orders must be >= 1");
    if (epochs < 1) throw std::invalid_argument("AdversaryConfig: epochs must be >= 1");
    if (learning_rate <= 0)
        throw std::invalid_argument("AdversaryConfig: learning_rate must be > 0");
    if (num_classes < 2)
        throw std::invalid_argument("AdversaryConfig: num_classes must be >= 2");
}

std::string AdversaryConfig::to_json() const {
    json j{{"dim", dim},         {"orders", orders},
           {"buckets", buckets}, {"learning_rate", learning_rate},
           {"epochs", epochs},   {"num_classes", num_classes},
           {"seed", seed},       {"linear_lr_decay", linear_lr_decay}};
    return j.dump();
}

AdversaryConfig AdversaryConfig::from_json(const std::string& s) {
    json j = json::parse(s);
    AdversaryConfig c;
    c.dim = j.at("dim");
    c.orders = j.at("orders").get<std::vector<int>>();
    c.buckets = j.at("buckets");
    c.learning_rate = j.at("learning_rate");
    c.epochs = j.at("epochs");
    c.num_classes = j.at("num_classes");
    c.seed = j.at("seed");
    c.linear_lr_decay = j.at("linear_lr_decay");
    return c;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

AdversaryModel::AdversaryModel(AdversaryConfig cfg, std::vector<std::string> vocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
    cfg_.validate();
    for (std::size_t i = 0; i < vocab_.size(); ++i)
        dict_[vocab_[i]] = static_cast<int>(i);
    std::int64_t rows = static_cast<std::int64_t>(vocab_.size()) + cfg_.buckets;
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> u(-1.0 / cfg_.dim, 1.0 / cfg_.dim);
    embed_.resize(rows, cfg_.dim);
    for (Eigen::Index r = 0; r < embed_.rows(); ++r)
        for (Eigen::Index c = 0; c < embed_.cols(); ++c) embed_(r, c) = u(rng);
    out_W_ = Mat::Zero(cfg_.dim, cfg_.num_classes);
}

std::vector<std::int64_t> AdversaryModel::featurize(
    const std::vector<std::string>& tokens) const {
    if (tokens.empty())
        throw std::invalid_argument("AdversaryModel::featurize: empty sentence");
    std::vector<std::int64_t> feats;
    std::int64_t vs = static_cast<std::int64_t>(vocab_.size());
    for (int order : cfg_.orders) {
        if (order == 1) {
            for (const std::string& t : tokens) {
                auto it = dict_.find(t);
                if (it != dict_.end()) feats.push_back(it->second);
            }
        } else {
            for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
                std::string joined = tokens[i];
                for (int k = 1; k < order; ++k) joined += " " + tokens[i + k];
                feats.push_back(vs + static_cast<std::int64_t>(
                                         fnv1a64(joined) %
                                         static_cast<std::uint64_t>(cfg_.buckets)));
            }
        }
    }
    return feats;
}

RowVec AdversaryModel::scores(const std::vector<std::string>& tokens) const {
    std::vector<std::int64_t> feats = featurize(tokens);
    RowVec hidden = RowVec::Zero(cfg_.dim);
    if (!feats.empty()) {
        for (std::int64_t f : feats) hidden += embed_.row(f);
        hidden /= static_cast<double>(feats.size());
    }
    return hidden * out_W_;
}

int AdversaryModel::predict(const std::vector<std::string>& tokens) const {
    Eigen::Index arg;
    scores(tokens).maxCoeff(&arg);
    return static_cast<int>(arg);
}

AdversaryModel train_adversary(const std::vector<std::vector<std::string>>& sentences,
                               const std::vector<int>& labels,
                               const AdversaryConfig& cfg) {
    if (sentences.size() != labels.size())
        throw std::invalid_argument("train_adversary: sentences/labels size mismatch");
    if (sentences.empty()) throw std::invalid_argument("train_adversary: empty training set");
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2)
        throw std::invalid_argument("train_adversary: need at least 2 classes present");
    for (int l : labels)
        if (l < 0 || l >= cfg.num_classes)
            throw std::invalid_argument("train_adversary: label out of range");

    std::set<std::string> vocab_set;
    for (const auto& s : sentences) vocab_set.insert(s.begin(), s.end());
    AdversaryModel model(cfg, {vocab_set.begin(), vocab_set.end()});

    std::mt19937_64 rng(cfg.seed + 1);
    std::vector<std::size_t> order(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double total_updates = static_cast<double>(cfg.epochs) *
                           static_cast<double>(sentences.size());
    double done = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            double lr = cfg.linear_lr_decay
                            ? cfg.learning_rate * (1.0 - done / total_updates)
                            : cfg.learning_rate;
            done += 1;
            std::vector<std::int64_t> feats = model.featurize(sentences[idx]);
            if (feats.empty()) continue;
            RowVec hidden = RowVec::Zero(cfg.dim);
            for (std::int64_t f : feats) hidden += model.embeddings().row(f);
            hidden /= static_cast<double>(feats.size());
            RowVec sc = hidden * model.output_weights();
            RowVec p = (sc.array() - sc.maxCoeff()).exp();
            p /= p.sum();
            p(labels[idx]) -= 1.0;  // d loss / d scores
            RowVec ghidden = p * model.output_weights().transpose();
            model.output_weights() -= lr * hidden.transpose() * p;
            RowVec step = (lr / static_cast<double>(feats.size())) * ghidden;
            for (std::int64_t f : feats) model.embeddings().row(f) -= step;
        }
    }
    return model;
}

double accuracy(const AdversaryModel& model,
                const std::vector<std::vector<std::string>>& sentences,
                const std::vector<int>& labels) {
    if (sentences.empty())
        throw std::invalid_argument("accuracy: empty evaluation set");
    if (sentences.size() != labels.size())
        throw std::invalid_argument("accuracy: sentences/labels size mismatch");
    double correct = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i)
        if (model.predict(sentences[i]) == labels[i]) correct += 1;
    return correct / static_cast<double>(sentences.size());
}

void AdversaryModel::save(const std::string& path) const {
    TensorBundle b;
    json meta;
    meta["kind"] = "adversary";
    meta["config"] = json::parse(cfg_.to_json());
    meta["vocab"] = vocab_;
    b.config_json = meta.dump();
    b.tensors.emplace("embed", embed_);
    b.tensors.emplace("out_W", out_W_);
    save_bundle(path, b);
}

AdversaryModel AdversaryModel::load(const std::string& path) {
    TensorBundle b = load_bundle(path);
    json meta = json::parse(b.config_json);
    if (meta.value("kind", "") != "adversary")
        throw std::runtime_error("AdversaryModel::load: '" + path +
                                 "' is not an adversary checkpoint");
    AdversaryConfig cfg = AdversaryConfig::from_json(meta.at("config").dump());
    AdversaryModel m(cfg, meta.at("vocab").get<std::vector<std::string>>());
    m.embed_ = b.tensors.at("embed");
    m.out_W_ = b.tensors.at("out_W");
    return m;
}

int LinearProbe::predict(const RowVec& x) const {
    Eigen::Index arg;
    (x * W + b).maxCoeff(&arg);
    return static_cast<int>(arg);
}

LinearProbe train_probe(const Mat& inputs, const std::vector<int>& labels,
                        int num_classes, int epochs, double lr, std::uint64_t seed) {
    if (inputs.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("train_probe: inputs/labels size mismatch");
    LinearProbe probe;
    probe.W = Mat::Zero(inputs.cols(), num_classes);
    probe.b = RowVec::Zero(num_classes);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            RowVec x = inputs.row(static_cast<Eigen::Index>(idx));
            RowVec sc = x * probe.W + probe.b;
            RowVec p = (sc.array() - sc.maxCoeff()).exp();
            p /= p.sum();
            p(labels[idx]) -= 1.0;
            probe.W -= lr * x.transpose() * p;
            probe.b -= lr * p;
        }
    }
    return probe;
}

double probe_accuracy(const LinearProbe& probe, const Mat& inputs,
                      const std::vector<int>& labels) {
    double correct = 0;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r)
        if (probe.predict(inputs.row(r)) == labels[static_cast<std::size_t>(r)]) correct += 1;
    return correct / static_cast<double>(inputs.rows());
}

}  // namespace styleobf
