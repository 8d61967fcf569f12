#pragma once

// Central finite-difference check of every parameter gradient of the total loss.

#include <cstdint>
#include <string>
#include <vector>

#include "hiconn/config.hpp"
#include "hiconn/connectome.hpp"
#include "hiconn/model.hpp"

namespace hiconn {

struct GradCheckEntry {
    std::string parameter;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    GradCheckEntry worst;
    /// Largest relative error per parameter group, in parameter order.
    std::vector<GradCheckEntry> per_parameter;
    /// True when no probe changed the discrete structure (subgraph membership,
    /// module partition) of the forward pass.
    bool structure_stable = true;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Six-node paired subject with two planted communities and distinct SC / MC.
Subject toy_subject();

/// Small configuration sized for exhaustive probing.
TrainConfig toy_config(std::uint64_t seed);

GradCheckReport gradient_check(const Subject& subject, Model& model, double h = 1e-5);

}  // namespace hiconn
