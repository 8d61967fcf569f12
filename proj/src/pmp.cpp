#include "hiconn/pmp.hpp"

#include <algorithm>

#include "hiconn/mim.hpp"

namespace hiconn {

Tensor AssignmentNetwork::assign(const Tensor& z_r, const Matrix& a_mc) const {
    if (z_r.rows() != a_mc.rows) {
        throw ContractError("compute_assignment: " + std::to_string(z_r.rows()) + " embedding rows for a " +
                            std::to_string(a_mc.rows) + "-node graph");
    }
    if (z_r.cols() != w.rows()) {
        throw ContractError("compute_assignment: embedding width " + std::to_string(z_r.cols()) +
                            " does not match assignment weight " + shape_string(w.rows(), w.cols()));
    }
    Tensor a_hat(normalized_adjacency(a_mc));
    return softmax_rows(matmul(a_hat, matmul(z_r, w)));
}

std::vector<std::size_t> ModularPartition::retained() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < modules.size(); ++k)
        if (!modules[k].empty()) out.push_back(k);
    return out;
}

ModularPartition threshold_partition(const Matrix& s, double t) {
    ModularPartition p;
    p.s = s;
    p.threshold = t;
    p.modules.assign(s.cols, {});
    for (std::size_t i = 0; i < s.rows; ++i) {
        bool placed = false;
        std::size_t best = 0;
        for (std::size_t k = 0; k < s.cols; ++k) {
            if (s(i, k) > t) {
                p.modules[k].push_back(i);
                placed = true;
            }
            if (s(i, k) > s(i, best)) best = k;
        }
        if (!placed && s.cols > 0) p.modules[best].push_back(i);
    }
    return p;
}

ModularPartition contiguous_partition(std::size_t n, std::size_t k) {
    ModularPartition p;
    p.s = Matrix(n, k);
    p.threshold = 0.5;
    p.modules.assign(k, {});
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = i * k / n;
        p.s(i, m) = 1.0;
        p.modules[m].push_back(i);
    }
    return p;
}

std::vector<ModularSubgraphPair> build_modular_pairs(const Subject& subject, const ModularPartition& partition) {
    if (partition.s.rows != subject.nodes()) {
        throw ContractError("build_modular_pairs: partition covers " + std::to_string(partition.s.rows) +
                            " nodes, subject has " + std::to_string(subject.nodes()));
    }
    std::vector<ModularSubgraphPair> pairs;
    for (std::size_t k : partition.retained()) {
        const auto& nodes = partition.modules[k];
        pairs.push_back({k, nodes, induced_subgraph(subject.sc, nodes), induced_subgraph(subject.mc, nodes)});
    }
    return pairs;
}

Tensor modularity(const Tensor& s, const Matrix& a) {
    if (a.rows != a.cols || s.rows() != a.rows) {
        throw DimensionError("modularity: assignment " + shape_string(s.rows(), s.cols()) + " vs adjacency " +
                             shape_string(a.rows, a.cols));
    }
    const std::size_t n = a.rows;
    std::vector<double> degree(n, 0.0);
    double two_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) degree[i] += a(i, j);
        two_w += degree[i];
    }
    if (two_w <= 0.0) return Tensor::scalar(0.0);

    // Tr(S^T A S) - |b^T S|^2 / 2w, each term summed in the same order as 2w so a
    // single all-ones module cancels exactly.
    Tensor s_a_s = sum_all(mul(s, matmul(Tensor(a), s)));
    Tensor b_s = matmul(Tensor(Matrix(1, n, std::move(degree))), s);
    Tensor null_model = sum_all(mul(b_s, scale(b_s, 1.0 / two_w)));
    return scale(sub(s_a_s, null_model), 1.0 / two_w);
}

Tensor modularity_loss(const Tensor& s, const Subject& subject) {
    return scale(add(modularity(s, subject.sc.adjacency), modularity(s, subject.mc.adjacency)), -1.0);
}

nlohmann::json partition_dump(const std::string& subject_id, const ModularPartition& partition) {
    nlohmann::json modules = nlohmann::json::array();
    for (std::size_t k : partition.retained()) modules.push_back(partition.modules[k]);
    return {{"subject", subject_id}, {"threshold", partition.threshold}, {"modules", modules}};
}

}  // namespace hiconn
