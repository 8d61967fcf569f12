#pragma once

// Personalized modular partition: a soft module assignment computed per subject
// from regional embeddings over the morphological graph, thresholded into
// (possibly overlapping) module subgraphs and trained through a two-modality
// soft modularity loss.

#include <string>
#include <vector>

#include "hiconn/connectome.hpp"
#include "hiconn/subgraph.hpp"
#include "hiconn/tensor.hpp"
#include "json.hpp"

namespace hiconn {

/// One message-passing layer: S = softmax_rows(Â_mc Z_r W).
struct AssignmentNetwork {
    Tensor w;  // d x K

    std::size_t modules() const { return w.cols(); }
    Tensor assign(const Tensor& z_r, const Matrix& a_mc) const;
};

struct ModularPartition {
    Matrix s;  // N x K snapshot of the assignment
    double threshold = 0.0;
    /// modules[k] = nodes assigned to module k (ascending); may be empty.
    std::vector<std::vector<std::size_t>> modules;

    /// Indices of non-empty modules, ascending.
    std::vector<std::size_t> retained() const;
};

/// Membership S[i][k] > t. A node above threshold nowhere joins its argmax
/// module (lowest k on ties).
ModularPartition threshold_partition(const Matrix& s, double t);

/// Contiguous equal-size partition of n nodes into k modules, with one-hot S.
ModularPartition contiguous_partition(std::size_t n, std::size_t k);

struct ModularSubgraphPair {
    std::size_t module = 0;
    std::vector<std::size_t> node_set;
    SubgraphView sc;
    SubgraphView mc;
};

/// Induced subgraphs of both modalities for every retained module.
std::vector<ModularSubgraphPair> build_modular_pairs(const Subject& subject, const ModularPartition& partition);

/// q = Tr(S^T (A - b b^T / 2w) S) / 2w with b the degree vector and 2w = sum(A).
/// Zero (and gradient-free) when the graph has no edges.
Tensor modularity(const Tensor& s, const Matrix& a);

/// -(q(S, A_sc) + q(S, A_mc)) with one shared assignment.
Tensor modularity_loss(const Tensor& s, const Subject& subject);

nlohmann::json partition_dump(const std::string& subject_id, const ModularPartition& partition);

}  // namespace hiconn
