#include "hiconn/metrics.hpp"

#include <cstdio>

namespace hiconn {

void Confusion::add(int truth, int predicted) {
    if (truth == 1) {
        ++(predicted == 1 ? tp : fn);
    } else {
        ++(predicted == 1 ? fp : tn);
    }
}

Metrics metrics_from_confusion(const Confusion& c) {
    Metrics m;
    m.confusion = c;
    if (c.total() > 0) m.accuracy = 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    double precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    double recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    if (precision + recall > 0.0) m.f1 = 100.0 * 2.0 * precision * recall / (precision + recall);
    return m;
}

std::string format_metrics(const Metrics& m) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "ACC=%.2f F1=%.2f", m.accuracy, m.f1);
    return buf;
}

nlohmann::json to_json(const Metrics& m) {
    const Confusion& c = m.confusion;
    return {{"accuracy", m.accuracy},
            {"f1", m.f1},
            {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}}};
}

}  // namespace hiconn
