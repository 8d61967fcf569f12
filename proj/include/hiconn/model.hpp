#pragma once

// End-to-end hierarchical model: regional interaction (subgraph + MIM), personal
// modular partition, modular interaction, multiscale fusion, MLP classifier.

#include <cstdint>
#include <string>
#include <vector>

#include "hiconn/config.hpp"
#include "hiconn/connectome.hpp"
#include "hiconn/mff.hpp"
#include "hiconn/mim.hpp"
#include "hiconn/pmp.hpp"
#include "hiconn/subgraph.hpp"
#include "json.hpp"

namespace hiconn {

enum class Variant { full, no_mim, no_pmp, no_mff };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct Classifier {
    Tensor w1, b1;  // d x hidden, 1 x hidden
    Tensor w2, b2;  // hidden x 2, 1 x 2

    Tensor forward(const Tensor& z_g) const;
};

struct Model {
    std::size_t atlas_size = 0;
    TrainConfig config;
    Variant variant = Variant::full;

    NeighborScorer scorer_sc;
    NeighborScorer scorer_mc;
    SiameseEncoder encoder;
    CrossModalAttention attention;
    AssignmentNetwork assignment;
    FusionHead fusion;
    Classifier classifier;

    /// Glorot-uniform weights, zero biases, drawn from `init_seed`.
    static Model initialize(std::size_t atlas_size, const TrainConfig& config, Variant variant, std::uint64_t init_seed);

    /// Parameter handles in a fixed order (shared storage with the model).
    std::vector<Tensor> parameters() const;
    std::vector<std::string> parameter_names() const;

    /// Snapshot / restore of every parameter value.
    std::vector<Matrix> values() const;
    void load_values(const std::vector<Matrix>& values);
    /// Independent copy with fresh parameter storage.
    Model clone() const;
};

struct ForwardResult {
    Tensor logits;      // 1 x 2
    Tensor z_global;    // 1 x d
    Tensor z_regional;  // N x d
    Tensor z_modular;   // K' x d
    Tensor assignment;  // N x K
    Tensor modularity_loss;
    ModularPartition partition;
    std::vector<std::vector<std::size_t>> regional_sets;
};

ForwardResult forward_subject(const Subject& subject, const Model& model);

/// eta1 * CE(softmax(logits), y) + eta2 * L_q.
Tensor total_loss(const Tensor& logits, int label, const Tensor& modularity_loss, const TrainConfig& config);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace hiconn
