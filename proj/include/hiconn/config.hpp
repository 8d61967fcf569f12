#pragma once

#include <cstdint>
#include <filesystem>

#include "json.hpp"

namespace hiconn {

struct TrainConfig {
    std::uint64_t seed = 0;
    double learning_rate = 1e-4;
    double eta1 = 0.5;  // task loss weight
    double eta2 = 0.2;  // modularity loss weight
    std::size_t epochs = 200;
    std::size_t embed_dim = 32;
    std::size_t modules = 8;
    double threshold = 1.5 / 8.0;
    std::size_t neighbor_budget = 5;
    std::size_t classifier_hidden = 64;

    /// Throws ValidationError on non-positive fields or loss weights outside (0, 1].
    void validate() const;
};

/// Missing fields keep their defaults; a missing threshold becomes 1.5 / modules.
TrainConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig read_config(const std::filesystem::path& path);

}  // namespace hiconn
