#include "styleobf/embeddings.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace styleobf {

const Eigen::VectorXd& EmbeddingStore::at(const std::string& token) const {
    auto it = vecs_.find(token);
    if (it == vecs_.end())
        throw std::invalid_argument("EmbeddingStore: no vector for '" + token + "'");
    return it->second;
}

void EmbeddingStore::insert(const std::string& token, Eigen::VectorXd vec) {
    if (dim_ == 0) dim_ = static_cast<int>(vec.size());
    if (vec.size() != dim_)
        throw std::invalid_argument("EmbeddingStore: dimension mismatch for '" + token +
                                    "'");
    vecs_[token] = std::move(vec);
}

EmbeddingStore EmbeddingStore::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("EmbeddingStore::load: cannot open " + path);
    EmbeddingStore store;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string token;
        iss >> token;
        std::vector<double> vals;
        double v;
        while (iss >> v) vals.push_back(v);
        if (first && vals.size() == 1) {
            // "count dim" header line
            first = false;
            continue;
        }
        first = false;
        if (vals.empty())
            throw std::runtime_error("EmbeddingStore::load: malformed line in " + path);
        Eigen::VectorXd vec(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i)
            vec(static_cast<Eigen::Index>(i)) = vals[i];
        store.insert(token, std::move(vec));
    }
    return store;
}

void EmbeddingStore::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("EmbeddingStore::save: cannot open " + path);
    f << vecs_.size() << ' ' << dim_ << '\n';
    for (const auto& [tok, vec] : vecs_) {
        f << tok;
        for (Eigen::Index i = 0; i < vec.size(); ++i) f << ' ' << vec(i);
        f << '\n';
    }
}

EmbeddingStore EmbeddingStore::synthetic(const std::vector<std::string>& tokens, int dim,
                                         std::uint64_t seed) {
    EmbeddingStore store(dim);
    for (const std::string& t : tokens) {
        std::mt19937_64 rng(seed ^ (std::hash<std::string>{}(t) | 1));
        std::normal_distribution<double> n(0.0, 1.0);
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = n(rng);
        v.normalize();
        store.insert(t, std::move(v));
    }
    return store;
}

}  // namespace styleobf
