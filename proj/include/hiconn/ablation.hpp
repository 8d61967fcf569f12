#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiconn/config.hpp"
#include "hiconn/connectome.hpp"
#include "hiconn/metrics.hpp"
#include "hiconn/model.hpp"

namespace hiconn {

struct AblationRow {
    Variant variant = Variant::full;
    std::vector<Metrics> runs;  // one per seed, seed order
    double acc_mean = 0.0, f1_mean = 0.0;
    double acc_sd = 0.0, f1_sd = 0.0;  // sample standard deviation; 0 for one run
};

inline constexpr Variant kAllVariants[] = {Variant::no_mim, Variant::no_pmp, Variant::no_mff, Variant::full};

/// For each seed: stratified split and training seeded by it, then test metrics
/// per variant. Every variant sees the same seeds.
std::vector<AblationRow> ablate(const Dataset& dataset, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                                std::span<const Variant> variants = kAllVariants);

/// Header `variant\tACC\tF1\tACC_sd\tF1_sd`, one row per variant, two decimals.
std::string ablation_tsv(const std::vector<AblationRow>& rows);

}  // namespace hiconn
