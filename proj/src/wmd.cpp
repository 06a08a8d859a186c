#include "styleobf/wmd.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace styleobf {

double min_cost_transport(const std::vector<long>& supplies,
                          const std::vector<long>& demands, const Mat& costs,
                          Mat* flow_out) {
    int m = static_cast<int>(supplies.size());
    int n = static_cast<int>(demands.size());
    if (costs.rows() != m || costs.cols() != n)
        throw std::invalid_argument("min_cost_transport: cost matrix shape mismatch");
    long total_s = std::accumulate(supplies.begin(), supplies.end(), 0L);
    long total_d = std::accumulate(demands.begin(), demands.end(), 0L);
    if (total_s != total_d)
        throw std::invalid_argument("min_cost_transport: supplies and demands disagree");

    // Node layout: 0 = source, 1..m lefts, m+1..m+n rights, m+n+1 = sink.
    int N = m + n + 2, src = 0, snk = m + n + 1;
    struct Edge {
        int to;
        long cap;
        double cost;
        int rev;
    };
    std::vector<std::vector<Edge>> g(N);
    auto add_edge = [&](int a, int b, long cap, double cost) {
        g[a].push_back({b, cap, cost, static_cast<int>(g[b].size())});
        g[b].push_back({a, 0, -cost, static_cast<int>(g[a].size()) - 1});
    };
    for (int i = 0; i < m; ++i) add_edge(src, 1 + i, supplies[i], 0.0);
    for (int j = 0; j < n; ++j) add_edge(1 + m + j, snk, demands[j], 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) add_edge(1 + i, 1 + m + j, total_s, costs(i, j));

    Mat flow = Mat::Zero(m, n);
    double total_cost = 0.0;
    long remaining = total_s;
    const double inf = std::numeric_limits<double>::infinity();
    while (remaining > 0) {
        // Bellman-Ford shortest path in the residual graph.
        std::vector<double> dist(N, inf);
        std::vector<int> pv(N, -1), pe(N, -1);
        dist[src] = 0.0;
        for (int it = 0; it < N; ++it) {
            bool changed = false;
            for (int v = 0; v < N; ++v) {
                if (dist[v] == inf) continue;
                for (int e = 0; e < static_cast<int>(g[v].size()); ++e) {
                    const Edge& ed = g[v][e];
                    if (ed.cap > 0 && dist[v] + ed.cost < dist[ed.to] - 1e-15) {
                        dist[ed.to] = dist[v] + ed.cost;
                        pv[ed.to] = v;
                        pe[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (dist[snk] == inf)
            throw std::runtime_error("min_cost_transport: no augmenting path (infeasible)");
        long push = remaining;
        for (int v = snk; v != src; v = pv[v]) push = std::min(push, g[pv[v]][pe[v]].cap);
        for (int v = snk; v != src; v = pv[v]) {
            Edge& ed = g[pv[v]][pe[v]];
            ed.cap -= push;
            g[v][ed.rev].cap += push;
            if (pv[v] >= 1 && pv[v] <= m && v >= 1 + m && v <= m + n)
                flow(pv[v] - 1, v - 1 - m) += static_cast<double>(push);
            if (v >= 1 && v <= m && pv[v] >= 1 + m && pv[v] <= m + n)
                flow(v - 1, pv[v] - 1 - m) -= static_cast<double>(push);
        }
        total_cost += dist[snk] * static_cast<double>(push);
        remaining -= push;
    }
    if (flow_out) *flow_out = flow;
    return total_cost;
}

namespace {

struct Bow {
    std::vector<std::string> tokens;  // unique, embeddable
    std::vector<long> counts;
    std::size_t skipped = 0;
};

Bow make_bow(const std::vector<std::string>& sentence, const EmbeddingStore& store) {
    Bow b;
    std::map<std::string, long> counts;
    for (const std::string& t : sentence) {
        if (store.contains(t))
            ++counts[t];
        else
            ++b.skipped;
    }
    for (const auto& [tok, c] : counts) {
        b.tokens.push_back(tok);
        b.counts.push_back(c);
    }
    return b;
}

}  // namespace

WmdResult wmd(const std::vector<std::string>& sentence_a,
              const std::vector<std::string>& sentence_b,
              const EmbeddingStore& store) {
    Bow a = make_bow(sentence_a, store);
    Bow b = make_bow(sentence_b, store);
    if (a.tokens.empty() || b.tokens.empty())
        throw std::invalid_argument(std::string("wmd: ") +
                                    (a.tokens.empty() ? "first" : "second") +
                                    " sentence has no embeddable tokens");

    int m = static_cast<int>(a.tokens.size());
    int n = static_cast<int>(b.tokens.size());
    long ta = std::accumulate(a.counts.begin(), a.counts.end(), 0L);
    long tb = std::accumulate(b.counts.begin(), b.counts.end(), 0L);

    Mat costs(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            costs(i, j) = (store.at(a.tokens[i]) - store.at(b.tokens[j])).norm();

    // Scale marginals to a common integer total of ta * tb flow units.
    std::vector<long> supplies(m), demands(n);
    for (int i = 0; i < m; ++i) supplies[i] = a.counts[i] * tb;
    for (int j = 0; j < n; ++j) demands[j] = b.counts[j] * ta;

    Mat flow_units;
    double units = static_cast<double>(ta) * static_cast<double>(tb);
    double cost = min_cost_transport(supplies, demands, costs, &flow_units) / units;

    WmdResult res;
    res.distance = cost;
    res.skipped_a = a.skipped;
    res.skipped_b = b.skipped;
    res.plan.flow = flow_units / units;
    res.plan.source_marginals.resize(m);
    res.plan.target_marginals.resize(n);
    for (int i = 0; i < m; ++i)
        res.plan.source_marginals(i) = static_cast<double>(a.counts[i]) / ta;
    for (int j = 0; j < n; ++j)
        res.plan.target_marginals(j) = static_cast<double>(b.counts[j]) / tb;

    // Feasibility of the returned plan.
    for (int i = 0; i < m; ++i)
        if (std::abs(res.plan.flow.row(i).sum() - res.plan.source_marginals(i)) > 1e-9)
            throw std::runtime_error("wmd: transport plan violates source marginals");
    for (int j = 0; j < n; ++j)
        if (std::abs(res.plan.flow.col(j).sum() - res.plan.target_marginals(j)) > 1e-9)
            throw std::runtime_error("wmd: transport plan violates target marginals");

    // Word-centroid lower bound.
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(store.dim());
    Eigen::VectorXd cb = Eigen::VectorXd::Zero(store.dim());
    for (int i = 0; i < m; ++i) ca += res.plan.source_marginals(i) * store.at(a.tokens[i]);
    for (int j = 0; j < n; ++j) cb += res.plan.target_marginals(j) * store.at(b.tokens[j]);
    if (cost < (ca - cb).norm() - 1e-9)
        throw std::runtime_error("wmd: solution below the centroid lower bound");

    return res;
}

}  // namespace styleobf
