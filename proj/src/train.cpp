#include "hiconn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "hiconn/adam.hpp"

namespace hiconn {

using nlohmann::json;

namespace {

int predict(const Tensor& logits) { return logits.value().data[1] > logits.value().data[0] ? 1 : 0; }

json to_json(const LossParts& l) { return {{"task", l.task}, {"modularity", l.modularity}, {"total", l.total}}; }

LossParts mean_of(const std::vector<LossParts>& parts) {
    LossParts m;
    if (parts.empty()) return m;
    for (const LossParts& p : parts) {
        m.task += p.task;
        m.modularity += p.modularity;
        m.total += p.total;
    }
    double n = static_cast<double>(parts.size());
    m.task /= n;
    m.modularity /= n;
    m.total /= n;
    return m;
}

}  // namespace

std::vector<const Subject*> select(const Dataset& dataset, const std::vector<std::string>& ids) {
    std::vector<const Subject*> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) out.push_back(&dataset.by_id(id));
    return out;
}

LossParts evaluate_loss(const Model& model, const Subject& subject) {
    NoGradScope no_grad;
    ForwardResult fwd = forward_subject(subject, model);
    LossParts l;
    l.task = cross_entropy(fwd.logits, static_cast<std::size_t>(subject.label_index())).item();
    l.modularity = fwd.modularity_loss.item();
    l.total = total_loss(fwd.logits, subject.label_index(), fwd.modularity_loss, model.config).item();
    return l;
}

Metrics evaluate(const Model& model, std::span<const Subject* const> subjects) {
    NoGradScope no_grad;
    Confusion c;
    for (const Subject* s : subjects) c.add(s->label_index(), predict(forward_subject(*s, model).logits));
    return metrics_from_confusion(c);
}

TrainResult train(const Dataset& dataset, const DatasetSplit& split, const TrainConfig& config, Variant variant) {
    config.validate();
    if (split.train.empty()) throw ValidationError("train: empty training partition");
    if (split.val.empty()) throw ValidationError("train: empty validation partition");
    const auto start = std::chrono::steady_clock::now();

    std::vector<const Subject*> train_set = select(dataset, split.train);
    std::vector<const Subject*> val_set = select(dataset, split.val);
    std::vector<const Subject*> test_set = select(dataset, split.test);

    Model model = Model::initialize(dataset.atlas_size, config, variant, config.seed);
    std::vector<Tensor> params = model.parameters();
    AdamState adam(params, config.learning_rate);
    std::seed_seq order_seed{config.seed, std::uint64_t{0x5eed0dd}};
    std::mt19937_64 order_rng(order_seed);

    RunRecord record;
    record.config = config;
    record.variant = variant;
    record.split = split;
    std::vector<Matrix> best_values = model.values();
    double best_f1 = -1.0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<const Subject*> order = train_set;
        std::shuffle(order.begin(), order.end(), order_rng);
        std::vector<LossParts> epoch_steps;
        for (const Subject* s : order) {
            for (Tensor& p : params) p.zero_grad();
            Tape tape;
            LossParts parts;
            Tensor loss;
            {
                TapeScope scope(tape);
                ForwardResult fwd = forward_subject(*s, model);
                Tensor task = cross_entropy(fwd.logits, static_cast<std::size_t>(s->label_index()));
                loss = add(scale(task, config.eta1), scale(fwd.modularity_loss, config.eta2));
                parts.task = task.item();
                parts.modularity = fwd.modularity_loss.item();
                parts.total = loss.item();
            }
            tape.backward(loss);
            adam_step(params, adam);
            record.steps.push_back({epoch, s->id, parts});
            epoch_steps.push_back(parts);
        }

        EpochRecord er;
        er.epoch = epoch;
        er.train = mean_of(epoch_steps);
        std::vector<LossParts> val_losses;
        for (const Subject* s : val_set) val_losses.push_back(evaluate_loss(model, *s));
        er.val = mean_of(val_losses);
        er.val_metrics = evaluate(model, val_set);
        if (er.val_metrics.f1 > best_f1) {
            best_f1 = er.val_metrics.f1;
            record.best_epoch = epoch;
            record.best_val = er.val_metrics;
            best_values = model.values();
        }
        record.epochs.push_back(er);
    }

    model.load_values(best_values);
    record.test = evaluate(model, test_set);
    {
        NoGradScope no_grad;
        for (const Subject* s : test_set) record.partitions.push_back(partition_dump(s->id, forward_subject(*s, model).partition));
    }
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(model), std::move(record)};
}

json to_json(const RunRecord& r) {
    json epochs = json::array();
    for (const EpochRecord& e : r.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"train", to_json(e.train)},
                          {"val", to_json(e.val)},
                          {"val_metrics", to_json(e.val_metrics)}});
    }
    json steps = json::array();
    for (const StepRecord& s : r.steps) {
        steps.push_back({{"epoch", s.epoch}, {"subject", s.subject}, {"loss", to_json(s.loss)}});
    }
    return {{"config", to_json(r.config)},
            {"variant", variant_name(r.variant)},
            {"split", {{"seed", r.split.seed}, {"train", r.split.train}, {"val", r.split.val}, {"test", r.split.test}}},
            {"epochs", epochs},
            {"steps", steps},
            {"best_epoch", r.best_epoch},
            {"best_val", to_json(r.best_val)},
            {"test", to_json(r.test)},
            {"partitions", r.partitions}};
}

std::string serialize(const RunRecord& r) { return to_json(r).dump(1) + "\n"; }

std::string digest(const RunRecord& r) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : serialize(r)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hiconn
