#include "hiconn/model.hpp"

#include <cmath>
#include <random>

namespace hiconn {

using nlohmann::json;

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(fan_in, fan_out);
    for (double& v : m.data) v = dist(rng);
    return Tensor(std::move(m), true);
}

Tensor bias(std::size_t n) { return Tensor::zeros(1, n, true); }

Tensor copy_param(const Tensor& t) { return Tensor(t.value(), true); }

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_mim: return "no-MIM";
        case Variant::no_pmp: return "no-PMP";
        case Variant::no_mff: return "no-MFF";
    }
    return "unknown";
}

Variant variant_from_name(const std::string& name) {
    for (Variant v : {Variant::full, Variant::no_mim, Variant::no_pmp, Variant::no_mff})
        if (variant_name(v) == name) return v;
    throw ValidationError("unknown model variant " + name);
}

Tensor Classifier::forward(const Tensor& z_g) const {
    Tensor hidden = relu(add_row(matmul(z_g, w1), b1));
    return add_row(matmul(hidden, w2), b2);
}

Model Model::initialize(std::size_t atlas_size, const TrainConfig& config, Variant variant, std::uint64_t init_seed) {
    config.validate();
    std::mt19937_64 rng(init_seed);
    const std::size_t n = atlas_size;
    const std::size_t d = config.embed_dim;
    Model m;
    m.atlas_size = atlas_size;
    m.config = config;
    m.variant = variant;
    m.scorer_sc.weight = glorot(n, 1, rng);
    m.scorer_mc.weight = glorot(n, 1, rng);
    m.encoder.w1 = glorot(n, d, rng);
    m.encoder.w2 = glorot(d, d, rng);
    m.attention.wq = glorot(d, d, rng);
    m.attention.wk = glorot(d, d, rng);
    m.attention.wv = glorot(d, d, rng);
    m.assignment.w = glorot(d, config.modules, rng);
    m.fusion.up1 = glorot(d, d, rng);
    m.fusion.up2 = glorot(d, d, rng);
    m.fusion.wa = glorot(d, d, rng);
    m.fusion.ba = bias(d);
    m.classifier.w1 = glorot(d, config.classifier_hidden, rng);
    m.classifier.b1 = bias(config.classifier_hidden);
    m.classifier.w2 = glorot(config.classifier_hidden, 2, rng);
    m.classifier.b2 = bias(2);
    return m;
}

std::vector<Tensor> Model::parameters() const {
    return {scorer_sc.weight, scorer_mc.weight, encoder.w1,    encoder.w2,    attention.wq,  attention.wk,
            attention.wv,     assignment.w,     fusion.up1,    fusion.up2,    fusion.wa,     fusion.ba,
            classifier.w1,    classifier.b1,    classifier.w2, classifier.b2};
}

std::vector<std::string> Model::parameter_names() const {
    return {"scorer_sc.w", "scorer_mc.w", "encoder.w1", "encoder.w2", "attention.wq", "attention.wk",
            "attention.wv", "assignment.w", "fusion.up1", "fusion.up2", "fusion.wa",   "fusion.ba",
            "classifier.w1", "classifier.b1", "classifier.w2", "classifier.b2"};
}

std::vector<Matrix> Model::values() const {
    std::vector<Matrix> out;
    for (const Tensor& p : parameters()) out.push_back(p.value());
    return out;
}

void Model::load_values(const std::vector<Matrix>& values) {
    std::vector<Tensor> params = parameters();
    if (values.size() != params.size()) {
        throw ContractError("load_values: expected " + std::to_string(params.size()) + " parameters, got " +
                            std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (values[i].rows != params[i].rows() || values[i].cols != params[i].cols()) {
            throw ContractError("load_values: shape mismatch for " + parameter_names()[i]);
        }
        params[i].mutable_value() = values[i];
    }
}

Model Model::clone() const {
    Model m = *this;
    m.scorer_sc.weight = copy_param(scorer_sc.weight);
    m.scorer_mc.weight = copy_param(scorer_mc.weight);
    m.encoder.w1 = copy_param(encoder.w1);
    m.encoder.w2 = copy_param(encoder.w2);
    m.attention.wq = copy_param(attention.wq);
    m.attention.wk = copy_param(attention.wk);
    m.attention.wv = copy_param(attention.wv);
    m.assignment.w = copy_param(assignment.w);
    m.fusion.up1 = copy_param(fusion.up1);
    m.fusion.up2 = copy_param(fusion.up2);
    m.fusion.wa = copy_param(fusion.wa);
    m.fusion.ba = copy_param(fusion.ba);
    m.classifier.w1 = copy_param(classifier.w1);
    m.classifier.b1 = copy_param(classifier.b1);
    m.classifier.w2 = copy_param(classifier.w2);
    m.classifier.b2 = copy_param(classifier.b2);
    return m;
}

ForwardResult forward_subject(const Subject& subject, const Model& model) {
    if (subject.nodes() != model.atlas_size) {
        throw ContractError("forward_subject: subject " + subject.id + " has " + std::to_string(subject.nodes()) +
                            " nodes, model expects " + std::to_string(model.atlas_size));
    }
    const TrainConfig& cfg = model.config;
    const Fusion fusion = model.variant == Variant::no_mim ? Fusion::mean : Fusion::attention;
    ForwardResult out;

    std::vector<Tensor> regional;
    regional.reserve(subject.nodes());
    for (std::size_t i = 0; i < subject.nodes(); ++i) {
        RegionalSubgraphPair pair =
            extract_regional_pair(subject, i, model.scorer_sc, model.scorer_mc, cfg.neighbor_budget);
        regional.push_back(
            mim_forward(pair.sc, pair.mc, model.encoder, model.attention, Pooling::center_row, fusion).pooled);
        out.regional_sets.push_back(std::move(pair.node_set));
    }
    out.z_regional = concat_rows(regional);

    if (model.variant == Variant::no_pmp) {
        out.partition = contiguous_partition(subject.nodes(), cfg.modules);
        out.assignment = Tensor(out.partition.s);
        out.modularity_loss = Tensor::scalar(0.0);
    } else {
        out.assignment = model.assignment.assign(out.z_regional, subject.mc.adjacency);
        out.partition = threshold_partition(out.assignment.value(), cfg.threshold);
        out.modularity_loss = modularity_loss(out.assignment, subject);
    }

    std::vector<Tensor> modular;
    for (const ModularSubgraphPair& pair : build_modular_pairs(subject, out.partition)) {
        modular.push_back(mim_forward(pair.sc, pair.mc, model.encoder, model.attention, Pooling::mean, fusion).pooled);
    }
    out.z_modular = concat_rows(modular);

    if (model.variant == Variant::no_mff) {
        out.z_global = fuse_global(out.z_regional, out.z_modular);
    } else {
        Tensor z_up = upsample_modular(out.z_modular, retained_assignment(out.assignment, out.partition), model.fusion);
        ThresholdParts th = compute_threshold(z_up, model.fusion);
        out.z_global = fuse_global(soft_threshold(out.z_regional, th.tau), out.z_modular);
    }
    out.logits = model.classifier.forward(out.z_global);
    return out;
}

Tensor total_loss(const Tensor& logits, int label, const Tensor& modularity_loss, const TrainConfig& config) {
    Tensor task = cross_entropy(logits, static_cast<std::size_t>(label));
    return add(scale(task, config.eta1), scale(modularity_loss, config.eta2));
}

json model_to_json(const Model& model) {
    json params = json::object();
    std::vector<Tensor> ps = model.parameters();
    std::vector<std::string> names = model.parameter_names();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        params[names[i]] = {{"rows", ps[i].rows()}, {"cols", ps[i].cols()}, {"data", ps[i].value().data}};
    }
    return {{"atlas_size", model.atlas_size},
            {"variant", variant_name(model.variant)},
            {"config", to_json(model.config)},
            {"parameters", params}};
}

Model model_from_json(const json& j) {
    try {
        TrainConfig cfg = config_from_json(j.at("config"));
        Model m = Model::initialize(j.at("atlas_size").get<std::size_t>(), cfg,
                                    variant_from_name(j.at("variant").get<std::string>()), 0);
        std::vector<Matrix> values;
        for (const std::string& name : m.parameter_names()) {
            const json& p = j.at("parameters").at(name);
            values.emplace_back(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>(),
                                p.at("data").get<std::vector<double>>());
        }
        m.load_values(values);
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace hiconn
