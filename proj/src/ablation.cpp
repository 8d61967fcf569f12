#include "hiconn/ablation.hpp"

#include <cmath>
#include <cstdio>

#include "hiconn/train.hpp"

namespace hiconn {

namespace {

void summarize(AblationRow& row) {
    const double n = static_cast<double>(row.runs.size());
    if (row.runs.empty()) return;
    for (const Metrics& m : row.runs) {
        row.acc_mean += m.accuracy;
        row.f1_mean += m.f1;
    }
    row.acc_mean /= n;
    row.f1_mean /= n;
    if (row.runs.size() < 2) return;
    double acc_ss = 0.0, f1_ss = 0.0;
    for (const Metrics& m : row.runs) {
        acc_ss += (m.accuracy - row.acc_mean) * (m.accuracy - row.acc_mean);
        f1_ss += (m.f1 - row.f1_mean) * (m.f1 - row.f1_mean);
    }
    row.acc_sd = std::sqrt(acc_ss / (n - 1.0));
    row.f1_sd = std::sqrt(f1_ss / (n - 1.0));
}

}  // namespace

std::vector<AblationRow> ablate(const Dataset& dataset, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                                std::span<const Variant> variants) {
    std::vector<AblationRow> rows;
    for (Variant v : variants) {
        AblationRow row;
        row.variant = v;
        rows.push_back(row);
    }
    for (std::uint64_t seed : seeds) {
        DatasetSplit split = stratified_split(dataset.subjects, seed);
        TrainConfig cfg = config;
        cfg.seed = seed;
        for (AblationRow& row : rows) row.runs.push_back(train(dataset, split, cfg, row.variant).record.test);
    }
    for (AblationRow& row : rows) summarize(row);
    return rows;
}

std::string ablation_tsv(const std::vector<AblationRow>& rows) {
    std::string out = "variant\tACC\tF1\tACC_sd\tF1_sd\n";
    char buf[160];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s\t%.2f\t%.2f\t%.2f\t%.2f\n", variant_name(r.variant).c_str(), r.acc_mean,
                      r.f1_mean, r.acc_sd, r.f1_sd);
        out += buf;
    }
    return out;
}

}  // namespace hiconn
