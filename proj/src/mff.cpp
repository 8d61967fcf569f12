#include "hiconn/mff.hpp"

namespace hiconn {

Tensor retained_assignment(const Tensor& assignment, const ModularPartition& partition) {
    std::vector<std::size_t> keep = partition.retained();
    if (keep.empty()) throw ContractError("retained_assignment: no retained modules");
    return normalize_rows(gather_cols(assignment, keep));
}

Tensor upsample_modular(const Tensor& z_m, const Tensor& s_retained, const FusionHead& head) {
    if (z_m.rows() == 0 || s_retained.cols() == 0) {
        throw ContractError("upsample_modular: no retained modules");
    }
    if (s_retained.cols() != z_m.rows()) {
        throw DimensionError("upsample_modular: assignment " + shape_string(s_retained.rows(), s_retained.cols()) +
                             " does not match " + std::to_string(z_m.rows()) + " module rows");
    }
    Tensor broadcast = matmul(s_retained, z_m);
    return matmul(relu(matmul(broadcast, head.up1)), head.up2);
}

ThresholdParts compute_threshold(const Tensor& z_m_up, const FusionHead& head) {
    ThresholdParts t;
    t.pooled = global_average_pool(abs(z_m_up));
    t.gate = sigmoid(add_row(matmul(t.pooled, head.wa), head.ba));
    t.tau = mul(t.gate, t.pooled);
    return t;
}

Tensor soft_threshold(const Tensor& z_r, const Tensor& tau) { return shrink(z_r, tau); }

Tensor fuse_global(const Tensor& z_r_pure, const Tensor& z_m) {
    if (z_r_pure.cols() != z_m.cols()) {
        throw ContractError("fuse_global: feature widths " + std::to_string(z_r_pure.cols()) + " and " +
                            std::to_string(z_m.cols()) + " differ");
    }
    return mean_axis(concat_rows(z_r_pure, z_m), 0);
}

}  // namespace hiconn
