#pragma once

// Multiscale feature fusion: modular representations set a per-feature soft
// threshold that shrinks the regional representations, and both scales are
// averaged into one global vector.

#include <vector>

#include "hiconn/pmp.hpp"
#include "hiconn/tensor.hpp"

namespace hiconn {

struct FusionHead {
    Tensor up1;  // d x d
    Tensor up2;  // d x d
    Tensor wa;   // d x d
    Tensor ba;   // 1 x d
};

/// Columns of the assignment for the retained modules, each row rescaled to sum
/// to 1. Differentiable in the assignment.
Tensor retained_assignment(const Tensor& assignment, const ModularPartition& partition);

/// ReLU((S_ret Z_m) up1) up2: module vectors broadcast to regions by assignment
/// weight, then two feature-space linear layers.
Tensor upsample_modular(const Tensor& z_m, const Tensor& s_retained, const FusionHead& head);

struct ThresholdParts {
    Tensor pooled;  // T = column means of |Z_m'|
    Tensor gate;    // a = sigmoid(T Wa + ba)
    Tensor tau;     // a ⊙ T
};

ThresholdParts compute_threshold(const Tensor& z_m_up, const FusionHead& head);

/// Elementwise shrinkage of z_r toward zero by the per-feature threshold tau.
Tensor soft_threshold(const Tensor& z_r, const Tensor& tau);

/// Mean over the rows of concat(z_r', z_m).
Tensor fuse_global(const Tensor& z_r_pure, const Tensor& z_m);

}  // namespace hiconn
