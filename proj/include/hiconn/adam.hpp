#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hiconn/tensor.hpp"

namespace hiconn {

struct AdamState {
    std::int64_t step_count = 0;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    /// Zero moments shaped like each parameter.
    AdamState(std::span<const Tensor> params, double lr);
};

/// One bias-corrected Adam update of params in place, using grads[i] for params[i].
void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state);

/// Same as above with each parameter's accumulated gradient.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace hiconn
