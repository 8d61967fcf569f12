#pragma once

// Multimodal interaction: a shared-weight graph encoder applied to both
// modalities, fused by cross-modal attention (morphological queries attend to
// structural keys and values).

#include "hiconn/subgraph.hpp"
#include "hiconn/tensor.hpp"

namespace hiconn {

/// D^{-1/2} (A + I) D^{-1/2}, D the degree matrix of A + I.
Matrix normalized_adjacency(const Matrix& a);

/// Two rounds of H <- ReLU(Â H W_l). One parameter set serves both modalities.
struct SiameseEncoder {
    Tensor w1;  // d_in x d
    Tensor w2;  // d x d

    Tensor encode(const SubgraphView& g) const;
    std::size_t input_dim() const { return w1.rows(); }
    std::size_t output_dim() const { return w2.cols(); }
};

struct CrossModalAttention {
    Tensor wq, wk, wv;  // d x d, applied row-wise as Z W^T

    /// softmax(Q K^T / sqrt(d_k)) with Q = Z_mc Wq^T and K = Z_sc Wk^T.
    Tensor weights(const Tensor& z_sc, const Tensor& z_mc) const;
    Tensor values(const Tensor& z_sc) const;
    /// Fused rows: weights(z_sc, z_mc) * values(z_sc).
    Tensor forward(const Tensor& z_sc, const Tensor& z_mc) const;
};

enum class Pooling { center_row, mean };

/// Fusion used after encoding. `attention` is the full module; `mean` averages
/// the two embeddings elementwise (ablation without interaction).
enum class Fusion { attention, mean };

struct MimOutput {
    Tensor z_sc;
    Tensor z_mc;
    Tensor fused;   // |V| x d
    Tensor pooled;  // 1 x d
};

MimOutput mim_forward(const SubgraphView& sc, const SubgraphView& mc, const SiameseEncoder& encoder,
                      const CrossModalAttention& attn, Pooling pooling, Fusion fusion = Fusion::attention);

}  // namespace hiconn
