#include "hiconn/mim.hpp"

#include <cmath>

namespace hiconn {

Matrix normalized_adjacency(const Matrix& a) {
    const std::size_t n = a.rows;
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;
        for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double w = a(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = inv_sqrt_deg[i] * w * inv_sqrt_deg[j];
        }
    return out;
}

Tensor SiameseEncoder::encode(const SubgraphView& g) const {
    if (g.features.cols() != input_dim()) {
        throw ContractError("encode: feature width " + std::to_string(g.features.cols()) +
                            " does not match encoder input " + std::to_string(input_dim()));
    }
    if (g.features.rows() != g.nodes()) {
        throw ContractError("encode: " + std::to_string(g.features.rows()) + " feature rows for " +
                            std::to_string(g.nodes()) + " nodes");
    }
    Tensor a_hat(normalized_adjacency(g.adjacency));
    Tensor h = relu(matmul(a_hat, matmul(g.features, w1)));
    return relu(matmul(a_hat, matmul(h, w2)));
}

Tensor CrossModalAttention::weights(const Tensor& z_sc, const Tensor& z_mc) const {
    if (z_sc.shape() != z_mc.shape()) {
        throw ContractError("cross_attention: embeddings " + shape_string(z_sc.rows(), z_sc.cols()) + " and " +
                            shape_string(z_mc.rows(), z_mc.cols()) + " differ");
    }
    Tensor q = matmul(z_mc, transpose(wq));
    Tensor k = matmul(z_sc, transpose(wk));
    double d_k = static_cast<double>(wk.rows());
    return softmax_rows(scale(matmul(q, transpose(k)), 1.0 / std::sqrt(d_k)));
}

Tensor CrossModalAttention::values(const Tensor& z_sc) const { return matmul(z_sc, transpose(wv)); }

Tensor CrossModalAttention::forward(const Tensor& z_sc, const Tensor& z_mc) const {
    return matmul(weights(z_sc, z_mc), values(z_sc));
}

MimOutput mim_forward(const SubgraphView& sc, const SubgraphView& mc, const SiameseEncoder& encoder,
                      const CrossModalAttention& attn, Pooling pooling, Fusion fusion) {
    MimOutput out;
    out.z_sc = encoder.encode(sc);
    out.z_mc = encoder.encode(mc);
    out.fused = fusion == Fusion::attention ? attn.forward(out.z_sc, out.z_mc)
                                            : scale(add(out.z_sc, out.z_mc), 0.5);
    if (pooling == Pooling::center_row) {
        const std::size_t first = 0;
        out.pooled = gather_rows(out.fused, std::span<const std::size_t>(&first, 1));
    } else {
        out.pooled = mean_axis(out.fused, 0);
    }
    return out;
}

}  // namespace hiconn
