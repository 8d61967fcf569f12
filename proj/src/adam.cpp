#include "hiconn/adam.hpp"

#include <cmath>
#include <string>

namespace hiconn {

AdamState::AdamState(std::span<const Tensor> params, double lr) : learning_rate(lr) {
    first_moment.reserve(params.size());
    second_moment.reserve(params.size());
    for (const Tensor& p : params) {
        first_moment.emplace_back(p.rows(), p.cols());
        second_moment.emplace_back(p.rows(), p.cols());
    }
}

void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ContractError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                            std::to_string(grads.size()) + " gradients and " +
                            std::to_string(state.first_moment.size()) + " moment slots");
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Matrix& g = grads[p];
        if (g.rows != params[p].rows() || g.cols != params[p].cols() || state.first_moment[p].size() != g.size()) {
            throw ContractError("adam_step: gradient " + shape_string(g.rows, g.cols) + " does not match parameter " +
                                shape_string(params[p].rows(), params[p].cols()));
        }
    }

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& w = params[p].mutable_value();
        Matrix& m = state.first_moment[p];
        Matrix& v = state.second_moment[p];
        const Matrix& g = grads[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
            v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
            double m_hat = m.data[i] / correction1;
            double v_hat = v.data[i] / correction2;
            w.data[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void adam_step(std::span<Tensor> params, AdamState& state) {
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (const Tensor& p : params) grads.push_back(p.grad());
    adam_step(params, grads, state);
}

}  // namespace hiconn
