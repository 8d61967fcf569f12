#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hiconn/adam.hpp"
#include "hiconn/tensor.hpp"
#include "oracles.hpp"

using namespace hiconn;

namespace {

// Runs `build` on a fresh leaf holding x, backpropagates, returns d/dx.
Matrix analytic_gradient(const std::function<Tensor(const Tensor&)>& build, const Matrix& x) {
    Tensor leaf(x, true);
    Tape tape;
    Tensor loss;
    {
        TapeScope scope(tape);
        loss = build(leaf);
    }
    tape.backward(loss);
    return leaf.grad();
}

double value_of(const std::function<Tensor(const Tensor&)>& build, const Matrix& x) {
    return build(Tensor(x)).item();
}

void expect_gradient_matches(const std::function<Tensor(const Tensor&)>& build, const Matrix& x, double tol = 1e-4) {
    Matrix analytic = analytic_gradient(build, x);
    Matrix numeric = oracle::numeric_gradient([&](const Matrix& m) { return value_of(build, m); }, x);
    EXPECT_LT(oracle::max_rel_error(analytic, numeric), tol);
}

// Fixed random weighting so every output entry matters to the scalar loss.
Tensor weighted_sum(const Tensor& y, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sum_all(mul(y, Tensor(oracle::random_matrix(y.rows(), y.cols(), rng))));
}

}  // namespace

TEST(Matmul, IdentityAndZero) {
    Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(matmul(Tensor(Matrix::identity(2)), Tensor(m)).value(), m);
    EXPECT_EQ(matmul(Tensor(Matrix::identity(2)), Tensor(Matrix(2, 2))).value(), Matrix(2, 2));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
    try {
        matmul(Tensor(Matrix(2, 3)), Tensor(Matrix(2, 3)));
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    }
}

TEST(Matmul, GradientOfSumWrtLeft) {
    Matrix b = Matrix::from_rows({{3}, {4}});
    auto build = [&](const Tensor& a) { return sum_all(matmul(a, Tensor(b))); };
    Matrix g = analytic_gradient(build, Matrix::from_rows({{1, 2}}));
    Matrix n = oracle::numeric_gradient([&](const Matrix& m) { return value_of(build, m); }, Matrix::from_rows({{1, 2}}),
                                        1e-6);
    EXPECT_DOUBLE_EQ(g(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(g(0, 1), 4.0);
    EXPECT_NEAR(n(0, 0), 3.0, 1e-8);
    EXPECT_NEAR(n(0, 1), 4.0, 1e-8);
}

TEST(Softmax, Examples) {
    Matrix a = softmax_rows(Tensor(Matrix::from_rows({{0, 0}}))).value();
    EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
    Matrix b = softmax_rows(Tensor(Matrix::from_rows({{1000, 1000, 1000}}))).value();
    for (double v : b.data) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
    Matrix c = softmax_rows(Tensor(Matrix::from_rows({{0, std::log(3.0)}}))).value();
    EXPECT_NEAR(c(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(c(0, 1), 0.75, 1e-15);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix x = oracle::random_matrix(4, 5, rng, -20.0, 20.0);
        Matrix y = softmax_rows(Tensor(x)).value();
        Matrix shifted = x;
        for (std::size_t i = 0; i < x.rows; ++i) {
            double c = shift(rng);
            for (std::size_t j = 0; j < x.cols; ++j) shifted(i, j) += c;
        }
        Matrix ys = softmax_rows(Tensor(shifted)).value();
        for (std::size_t i = 0; i < y.rows; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < y.cols; ++j) {
                total += y(i, j);
                EXPECT_NEAR(y(i, j), ys(i, j), 1e-12);
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Elementwise, Examples) {
    EXPECT_DOUBLE_EQ(sigmoid(Tensor::scalar(0.0)).item(), 0.5);
    Matrix r = relu(Tensor::row({-1, 2})).value();
    EXPECT_EQ(r, Matrix::from_rows({{0, 2}}));
    Matrix g = analytic_gradient([](const Tensor& x) { return sum_all(abs(x)); }, Matrix::from_rows({{-2, 3}}));
    EXPECT_EQ(g, Matrix::from_rows({{-1, 1}}));
}

TEST(Elementwise, ScalarBroadcastAndMismatch) {
    Matrix y = add(Tensor(Matrix::from_rows({{1, 2}, {3, 4}})), Tensor::scalar(10)).value();
    EXPECT_EQ(y, Matrix::from_rows({{11, 12}, {13, 14}}));
    EXPECT_THROW(add(Tensor(Matrix(2, 2)), Tensor(Matrix(1, 2))), DimensionError);
}

TEST(Reduce, Examples) {
    Matrix x = Matrix::from_rows({{1, 3}, {5, 7}});
    EXPECT_EQ(mean_axis(Tensor(x), 0).value(), Matrix::from_rows({{3, 5}}));
    EXPECT_EQ(sum_axis(Tensor(x), 1).value(), Matrix::from_rows({{4}, {12}}));
    Matrix row = Matrix::from_rows({{1.5, -2, 7}});
    EXPECT_EQ(global_average_pool(Tensor(row)).value(), row);
    EXPECT_THROW(sum_axis(Tensor(x), 2), DimensionError);
}

TEST(Concat, Examples) {
    Matrix y = concat_rows(Tensor::row({1, 2}), Tensor::row({3, 4})).value();
    EXPECT_EQ(y, Matrix::from_rows({{1, 2}, {3, 4}}));
    Matrix x = Matrix::from_rows({{5, 6}, {7, 8}});
    EXPECT_EQ(concat_rows(Tensor(Matrix(0, 2)), Tensor(x)).value(), x);
    EXPECT_THROW(concat_rows(Tensor(Matrix(1, 2)), Tensor(Matrix(1, 3))), DimensionError);
}

TEST(Backward, LeafAndFanOut) {
    Tensor x = Tensor::scalar(1.7, true);
    {
        Tape tape;
        Tensor loss;
        {
            TapeScope scope(tape);
            loss = scale(x, 1.0);
        }
        tape.backward(loss);
        EXPECT_DOUBLE_EQ(x.grad()(0, 0), 1.0);
    }
    x.zero_grad();
    Tape tape;
    Tensor loss;
    {
        TapeScope scope(tape);
        loss = add(x, x);
    }
    tape.backward(loss);
    EXPECT_DOUBLE_EQ(x.grad()(0, 0), 2.0);
}

TEST(Backward, NonScalarLossIsContractError) {
    Tensor x(Matrix(2, 2, 1.0), true);
    Tape tape;
    Tensor y;
    {
        TapeScope scope(tape);
        y = scale(x, 2.0);
    }
    EXPECT_THROW(tape.backward(y), ContractError);
}

TEST(Backward, SharedSubexpressionMatchesExpandedTree) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix x = oracle::random_matrix(3, 3, rng);
        Matrix w = oracle::random_matrix(3, 3, rng);
        // Shared: h is built once and consumed three times.
        auto shared = [&](const Tensor& a) {
            Tensor h = sigmoid(matmul(a, Tensor(w)));
            return sum_all(add(mul(h, h), matmul(h, a)));
        };
        // Expanded: every use rebuilds h from scratch.
        auto expanded = [&](const Tensor& a) {
            Tensor h1 = sigmoid(matmul(a, Tensor(w)));
            Tensor h2 = sigmoid(matmul(a, Tensor(w)));
            Tensor h3 = sigmoid(matmul(a, Tensor(w)));
            return sum_all(add(mul(h1, h2), matmul(h3, a)));
        };
        Matrix g1 = analytic_gradient(shared, x);
        Matrix g2 = analytic_gradient(expanded, x);
        for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1.data[i], g2.data[i], 1e-12);
    }
}

TEST(Backward, NoTapeMeansNoRecording) {
    Tensor x(Matrix(2, 2, 1.0), true);
    Tape tape;
    {
        TapeScope scope(tape);
        NoGradScope off;
        scale(x, 3.0);
    }
    EXPECT_EQ(tape.size(), 0u);
}

// Random-input gradient agreement for each differentiable operation.
class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesFiniteDifferences) {
    const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
    std::mt19937_64 rng(seed);
    Matrix x = oracle::random_matrix(3, 4, rng);
    // Keep abs/relu/shrink probes away from their kinks.
    for (double& v : x.data)
        if (std::fabs(v) < 0.05) v += 0.1;
    Matrix w = oracle::random_matrix(4, 2, rng);
    Matrix other = oracle::random_matrix(3, 4, rng);
    Matrix tau = oracle::random_matrix(1, 4, rng, 0.0, 0.3);
    std::vector<std::size_t> rows{2, 0, 2};
    std::vector<std::size_t> cols{3, 1};
    std::vector<std::ptrdiff_t> picks{1, -1, 3};
    std::vector<std::size_t> row0{0}, row1{1};

    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(matmul(a, Tensor(w)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(transpose(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(mul(a, Tensor(other)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(sub(Tensor(other), a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(mul(a, Tensor::scalar(0.3)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(sigmoid(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(relu(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(abs(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(softmax_rows(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(sum_axis(a, 0), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(sum_axis(a, 1), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(mean_axis(a, 1), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(global_average_pool(a), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(concat_rows(a, Tensor(other)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(gather_rows(a, rows), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(gather_cols(a, cols), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(normalize_rows(abs(a)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(pick(gather_rows(a, row0), picks), seed); },
                            x);
    expect_gradient_matches(
        [&](const Tensor& a) { return weighted_sum(scale_rows(a, Tensor::row({0.5, -1.0, 2.0})), seed); }, x);
    expect_gradient_matches(
        [&](const Tensor& a) { return weighted_sum(add_row(a, gather_rows(a, row1)), seed); }, x);
    expect_gradient_matches([&](const Tensor& a) { return weighted_sum(shrink(a, Tensor(tau)), seed); }, x);
    expect_gradient_matches(
        [&](const Tensor& a) { return cross_entropy(gather_rows(a, row1), static_cast<std::size_t>(seed % 4)); }, x);
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradient, ::testing::Range(1, 9));

TEST(Finite, LargeInputsStayFinite) {
    Matrix x = Matrix::from_rows({{800, -800, 1e300}, {-1e300, 0, 700}});
    for (const Tensor& y : {softmax_rows(Tensor(x)), sigmoid(Tensor(x)), relu(Tensor(x)), abs(Tensor(x))})
        for (double v : y.value().data) EXPECT_TRUE(std::isfinite(v));
    EXPECT_TRUE(std::isfinite(cross_entropy(Tensor::row({1e300, -1e300}), 1).item()));
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradient) {
    Tensor w(Matrix::from_rows({{1.0, -2.0, 0.5}}), true);
    std::vector<Tensor> params{w};
    AdamState state(params, 0.01);
    std::vector<Matrix> grads{Matrix::from_rows({{3.0, -0.2, 0.0}})};
    adam_step(params, grads, state);
    EXPECT_NEAR(w.value()(0, 0), 1.0 - 0.01, 1e-9);
    EXPECT_NEAR(w.value()(0, 1), -2.0 + 0.01, 1e-9);
    EXPECT_EQ(w.value()(0, 2), 0.5);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Tensor w(Matrix::from_rows({{1.0, 2.0}}), true);
    std::vector<Tensor> params{w};
    AdamState state(params, 0.1);
    std::vector<Matrix> grads{Matrix(1, 2)};
    for (int i = 0; i < 5; ++i) adam_step(params, grads, state);
    EXPECT_EQ(w.value(), Matrix::from_rows({{1.0, 2.0}}));
}

TEST(Adam, ConvergesOnQuadratic) {
    Tensor w = Tensor::scalar(0.0, true);
    std::vector<Tensor> params{w};
    AdamState state(params, 0.1);
    for (int i = 0; i < 200; ++i) {
        w.zero_grad();
        Tape tape;
        Tensor loss;
        {
            TapeScope scope(tape);
            Tensor d = sub(w, Tensor::scalar(3.0));
            loss = mul(d, d);
        }
        tape.backward(loss);
        adam_step(params, state);
    }
    EXPECT_LT(std::fabs(w.item() - 3.0), 0.05);
}

TEST(Adam, ShapeMismatchIsContractError) {
    Tensor w(Matrix(1, 2), true);
    std::vector<Tensor> params{w};
    AdamState state(params, 0.1);
    std::vector<Matrix> grads{Matrix(2, 1)};
    EXPECT_THROW(adam_step(params, grads, state), ContractError);
}
