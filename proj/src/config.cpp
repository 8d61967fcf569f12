#include "hiconn/config.hpp"

#include <fstream>

#include "hiconn/connectome.hpp"

namespace hiconn {

using nlohmann::json;

void TrainConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ValidationError(std::string("config: ") + name + " must be positive");
    };
    positive(learning_rate, "learning_rate");
    positive(static_cast<double>(epochs), "epochs");
    positive(static_cast<double>(embed_dim), "embed_dim");
    positive(static_cast<double>(neighbor_budget), "neighbor_budget");
    positive(static_cast<double>(classifier_hidden), "classifier_hidden");
    if (modules < 2) throw ValidationError("config: modules must be at least 2");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("config: threshold must lie in (0, 1)");
    if (!(eta1 > 0.0 && eta1 <= 1.0)) throw ValidationError("config: eta1 must lie in (0, 1]");
    if (!(eta2 > 0.0 && eta2 <= 1.0)) throw ValidationError("config: eta2 must lie in (0, 1]");
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.eta1 = j.value("eta1", c.eta1);
        c.eta2 = j.value("eta2", c.eta2);
        c.epochs = j.value("epochs", c.epochs);
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.modules = j.value("modules", c.modules);
        c.threshold = j.contains("threshold") ? j.at("threshold").get<double>() : 1.5 / static_cast<double>(c.modules);
        c.neighbor_budget = j.value("neighbor_budget", c.neighbor_budget);
        c.classifier_hidden = j.value("classifier_hidden", c.classifier_hidden);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"seed", c.seed},
            {"learning_rate", c.learning_rate},
            {"eta1", c.eta1},
            {"eta2", c.eta2},
            {"epochs", c.epochs},
            {"embed_dim", c.embed_dim},
            {"modules", c.modules},
            {"threshold", c.threshold},
            {"neighbor_budget", c.neighbor_budget},
            {"classifier_hidden", c.classifier_hidden}};
}

TrainConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    try {
        return config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed config " + path.string() + ": " + e.what());
    }
}

}  // namespace hiconn
