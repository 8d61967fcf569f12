#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

namespace hiconn {

/// Positive class is label 1 (mutant).
struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    void add(int truth, int predicted);
};

/// Accuracy and F1 in percent. F1 is 0 when precision + recall is 0.
struct Metrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    Confusion confusion;
};

Metrics metrics_from_confusion(const Confusion& c);

/// "ACC=94.00 F1=72.73"
std::string format_metrics(const Metrics& m);

nlohmann::json to_json(const Metrics& m);

}  // namespace hiconn
