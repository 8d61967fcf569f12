#include "hiconn/subgraph.hpp"

#include <algorithm>
#include <numeric>

namespace hiconn {

Matrix induced_adjacency(const Matrix& a, std::span<const std::size_t> nodes) {
    Matrix out(nodes.size(), nodes.size());
    for (std::size_t r = 0; r < nodes.size(); ++r)
        for (std::size_t c = 0; c < nodes.size(); ++c) out(r, c) = a(nodes[r], nodes[c]);
    return out;
}

SubgraphView induced_subgraph(const ConnectomeGraph& g, std::span<const std::size_t> nodes) {
    Matrix feats(nodes.size(), g.features.cols);
    for (std::size_t r = 0; r < nodes.size(); ++r)
        std::copy_n(g.features.data.begin() + static_cast<std::ptrdiff_t>(nodes[r] * g.features.cols),
                    g.features.cols, feats.data.begin() + static_cast<std::ptrdiff_t>(r * g.features.cols));
    return SubgraphView{induced_adjacency(g.adjacency, nodes), Tensor(std::move(feats))};
}

NeighborScores score_neighbors(const ConnectomeGraph& g, std::size_t i, const NeighborScorer& scorer) {
    if (scorer.weight.rows() != g.features.cols || scorer.weight.cols() != 1) {
        throw DimensionError("score_neighbors: scorer weight " + shape_string(scorer.weight.rows(), scorer.weight.cols()) +
                             " does not match feature width " + std::to_string(g.features.cols));
    }
    NeighborScores out;
    out.neighbors = g.neighbors(i);
    if (out.neighbors.empty()) return out;
    Tensor rows = induced_subgraph(g, out.neighbors).features;
    Tensor logits = transpose(matmul(rows, scorer.weight));
    out.probs = softmax_rows(logits);
    return out;
}

RegionalSubgraphPair extract_regional_pair(const Subject& subject, std::size_t i, const NeighborScorer& scorer_sc,
                                           const NeighborScorer& scorer_mc, std::size_t k) {
    NeighborScores s_sc = score_neighbors(subject.sc, i, scorer_sc);
    NeighborScores s_mc = score_neighbors(subject.mc, i, scorer_mc);

    std::vector<std::size_t> pool;
    std::set_union(s_sc.neighbors.begin(), s_sc.neighbors.end(), s_mc.neighbors.begin(), s_mc.neighbors.end(),
                   std::back_inserter(pool));

    RegionalSubgraphPair pair;
    pair.center = i;
    pair.node_set.push_back(i);

    if (pool.empty()) {
        pair.row_scale = Tensor::row({1.0});
    } else {
        auto positions = [&](const std::vector<std::size_t>& own) {
            std::vector<std::ptrdiff_t> idx(pool.size(), -1);
            for (std::size_t u = 0; u < pool.size(); ++u) {
                auto it = std::lower_bound(own.begin(), own.end(), pool[u]);
                if (it != own.end() && *it == pool[u]) idx[u] = it - own.begin();
            }
            return idx;
        };
        Tensor summed;
        for (const NeighborScores* s : {&s_sc, &s_mc}) {
            if (!s->probs.defined()) continue;
            Tensor spread = pick(s->probs, positions(s->neighbors));
            summed = summed.defined() ? add(summed, spread) : spread;
        }
        Tensor combined = scale(summed, 0.5);

        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        const Matrix& cv = combined.value();
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cv.data[a] != cv.data[b]) return cv.data[a] > cv.data[b];
            return pool[a] < pool[b];
        });
        order.resize(std::min(k, order.size()));

        std::vector<std::ptrdiff_t> take{-1};
        for (std::size_t u : order) {
            pair.node_set.push_back(pool[u]);
            take.push_back(static_cast<std::ptrdiff_t>(u));
        }
        std::vector<double> center_one(take.size(), 0.0);
        center_one[0] = 1.0;
        pair.row_scale = add(pick(combined, take), Tensor::row(std::move(center_one)));
    }

    pair.sc = induced_subgraph(subject.sc, pair.node_set);
    pair.mc = induced_subgraph(subject.mc, pair.node_set);
    if (pair.node_set.size() > 1) {
        pair.sc.features = scale_rows(pair.sc.features, pair.row_scale);
        pair.mc.features = scale_rows(pair.mc.features, pair.row_scale);
    }
    return pair;
}

}  // namespace hiconn
