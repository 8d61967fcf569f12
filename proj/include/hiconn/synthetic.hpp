#pragma once

// Planted-partition surrogate for paired SC/MC cohorts.
//
// Each subject perturbs a shared contiguous module template (every node moves to
// a random module with probability `reassign`). SC edges appear with p_in inside
// a module and p_out across, weighted |Normal(mu, sigma)|. MC is the
// max-normalized SC plus symmetric noise of scale `mc_noise` on every SC edge and
// on a p_out fraction of non-edges. Label-1 subjects have their intra-module
// weights in the first `effect_modules` modules scaled by (1 + delta) in both
// modalities, with the MC noise there shrunk by the same factor.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hiconn/connectome.hpp"
#include "json.hpp"

namespace hiconn {

struct SyntheticSpec {
    std::size_t n_subjects = 100;
    std::size_t atlas_size = 40;
    std::size_t modules = 4;
    double p_in = 0.3;
    double p_out = 0.05;
    double mu_in = 1.0;
    double mu_out = 0.5;
    double sigma = 0.2;
    double mc_noise = 0.1;
    double delta = 1.0;
    double prevalence = 0.3;
    double reassign = 0.1;
    std::size_t effect_modules = 1;

    /// Throws ValidationError on an unusable spec.
    void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& s);
SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);

struct SyntheticCohort {
    Dataset dataset;
    /// Per subject, the planted module of every node.
    std::vector<std::vector<std::size_t>> planted;
};

SyntheticCohort generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Generates and writes the cohort in the manifest + CSV format.
SyntheticCohort generate_synthetic_to(const std::filesystem::path& dir, const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace hiconn
