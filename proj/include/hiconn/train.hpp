#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiconn/config.hpp"
#include "hiconn/connectome.hpp"
#include "hiconn/metrics.hpp"
#include "hiconn/model.hpp"
#include "json.hpp"

namespace hiconn {

struct LossParts {
    double task = 0.0;
    double modularity = 0.0;
    double total = 0.0;
};

struct StepRecord {
    std::size_t epoch = 0;
    std::string subject;
    LossParts loss;
};

struct EpochRecord {
    std::size_t epoch = 0;
    LossParts train;  // mean over the epoch's steps
    LossParts val;    // mean over validation subjects, no update
    Metrics val_metrics;
};

struct RunRecord {
    TrainConfig config;
    Variant variant = Variant::full;
    DatasetSplit split;
    std::vector<EpochRecord> epochs;
    std::vector<StepRecord> steps;
    std::size_t best_epoch = 0;
    Metrics best_val;
    Metrics test;
    std::vector<nlohmann::json> partitions;  // test subjects at the selected checkpoint
    /// Kept out of the serialized record so identical runs serialize identically.
    double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const RunRecord& r);
/// Canonical serialized form.
std::string serialize(const RunRecord& r);
/// FNV-1a 64-bit digest of serialize(r), hex.
std::string digest(const RunRecord& r);

struct TrainResult {
    Model model;  // parameters of the selected checkpoint
    RunRecord record;
};

/// Per-subject Adam steps over a seeded shuffle each epoch; the checkpoint with
/// the best validation F1 (earliest on ties) is restored before testing.
TrainResult train(const Dataset& dataset, const DatasetSplit& split, const TrainConfig& config,
                  Variant variant = Variant::full);

/// Losses of one subject without recording a tape.
LossParts evaluate_loss(const Model& model, const Subject& subject);

/// Argmax predictions over the subjects.
Metrics evaluate(const Model& model, std::span<const Subject* const> subjects);

std::vector<const Subject*> select(const Dataset& dataset, const std::vector<std::string>& ids);

}  // namespace hiconn
