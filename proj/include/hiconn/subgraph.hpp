#pragma once

// Learned one-hop regional subgraphs shared across both modalities.

#include <cstddef>
#include <span>
#include <vector>

#include "hiconn/connectome.hpp"
#include "hiconn/tensor.hpp"

namespace hiconn {

/// Induced subgraph over an ordered node set: adjacency is data, features may
/// carry a gradient path (e.g. neighbour scores scaling the rows).
struct SubgraphView {
    Matrix adjacency;
    Tensor features;

    std::size_t nodes() const { return adjacency.rows; }
};

Matrix induced_adjacency(const Matrix& a, std::span<const std::size_t> nodes);

/// Induced subgraph with the unscaled feature rows of `nodes`.
SubgraphView induced_subgraph(const ConnectomeGraph& g, std::span<const std::size_t> nodes);

/// Linear scorer over node features followed by a softmax across neighbours.
struct NeighborScorer {
    Tensor weight;  // d x 1
};

struct NeighborScores {
    std::vector<std::size_t> neighbors;  // ascending node indices
    Tensor probs;                        // 1 x |neighbors|; undefined when isolated
};

NeighborScores score_neighbors(const ConnectomeGraph& g, std::size_t i, const NeighborScorer& scorer);

struct RegionalSubgraphPair {
    std::size_t center = 0;
    std::vector<std::size_t> node_set;  // center first, then selected neighbours
    /// Per-node multipliers applied to feature rows: 1 for the center, the
    /// combined neighbour score otherwise.
    Tensor row_scale;
    SubgraphView sc;
    SubgraphView mc;
};

/// Picks node i plus its top-k neighbours by the mean of the two modality scores
/// over the union of both one-hop neighbourhoods (ties broken by lower index).
/// Feature rows of selected neighbours are scaled by their score so the scorers
/// receive gradient through the encoder.
RegionalSubgraphPair extract_regional_pair(const Subject& subject, std::size_t i, const NeighborScorer& scorer_sc,
                                           const NeighborScorer& scorer_mc, std::size_t k);

}  // namespace hiconn
