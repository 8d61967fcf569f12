#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hiconn/mim.hpp"
#include "oracles.hpp"

using namespace hiconn;

namespace {

SiameseEncoder encoder_from(const Matrix& w1, const Matrix& w2) { return {Tensor(w1, true), Tensor(w2, true)}; }

CrossModalAttention attention_from(std::mt19937_64& rng, std::size_t d) {
    return {Tensor(oracle::random_matrix(d, d, rng), true), Tensor(oracle::random_matrix(d, d, rng), true),
            Tensor(oracle::random_matrix(d, d, rng), true)};
}

SubgraphView view(const Matrix& a, const Matrix& x) { return {a, Tensor(x)}; }

// softmax(Q K^T / sqrt(d)) V with Q = Z_mc Wq^T, K = Z_sc Wk^T, V = Z_sc Wv^T.
Matrix hand_attention(const Matrix& z_sc, const Matrix& z_mc, const CrossModalAttention& attn) {
    using namespace oracle;
    Matrix q = matmul(z_mc, transpose(attn.wq.value()));
    Matrix k = matmul(z_sc, transpose(attn.wk.value()));
    Matrix v = matmul(z_sc, transpose(attn.wv.value()));
    Matrix logits = matmul(q, transpose(k));
    for (double& x : logits.data) x /= std::sqrt(static_cast<double>(attn.wk.rows()));
    return matmul(softmax_rows(logits), v);
}

Matrix path3() { return Matrix::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}); }

}  // namespace

TEST(NormalizedAdjacency, PathHandValues) {
    Matrix h = normalized_adjacency(path3());
    // Degrees with self-loop: 2, 3, 2.
    EXPECT_NEAR(h(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(h(1, 1), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(h(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
    EXPECT_EQ(h(0, 2), 0.0);
    EXPECT_EQ(normalized_adjacency(Matrix(1, 1)), Matrix::identity(1));
}

TEST(Encode, SingletonIsTwoDenseLayers) {
    std::mt19937_64 rng(1);
    Matrix w1 = oracle::random_matrix(3, 4, rng), w2 = oracle::random_matrix(4, 4, rng);
    Matrix x = Matrix::from_rows({{0.5, -1.0, 2.0}});
    Matrix expected = oracle::relu(oracle::matmul(oracle::relu(oracle::matmul(x, w1)), w2));
    Matrix got = encoder_from(w1, w2).encode(view(Matrix(1, 1), x)).value();
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], expected.data[i], 1e-14);
}

TEST(Encode, ZeroFeaturesGiveZeroEmbeddings) {
    std::mt19937_64 rng(2);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(3, 4, rng), oracle::random_matrix(4, 4, rng));
    EXPECT_EQ(enc.encode(view(path3(), Matrix(3, 3))).value(), Matrix(3, 4));
}

TEST(Encode, ThreeNodePathHandComputed) {
    Matrix w1 = Matrix::from_rows({{1, 0}, {0, 1}, {1, -1}});
    Matrix w2 = Matrix::from_rows({{1, 2}, {-1, 1}});
    Matrix x = path3();
    // Hand evaluation with Â from the path degrees (2, 3, 2).
    const double a = 0.5, b = 1.0 / std::sqrt(6.0), c = 1.0 / 3.0;
    Matrix hat = Matrix::from_rows({{a, b, 0}, {b, c, b}, {0, b, a}});
    // XW1 rows: node0 (0,1), node1 (2,-1), node2 (0,1).
    Matrix xw = Matrix::from_rows({{0, 1}, {2, -1}, {0, 1}});
    Matrix h1(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = hat(i, 0) * xw(0, j) + hat(i, 1) * xw(1, j) + hat(i, 2) * xw(2, j);
            h1(i, j) = s > 0 ? s : 0;
        }
    Matrix hw(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        hw(i, 0) = h1(i, 0) * 1 + h1(i, 1) * -1;
        hw(i, 1) = h1(i, 0) * 2 + h1(i, 1) * 1;
    }
    Matrix expected(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = hat(i, 0) * hw(0, j) + hat(i, 1) * hw(1, j) + hat(i, 2) * hw(2, j);
            expected(i, j) = s > 0 ? s : 0;
        }
    Matrix got = encoder_from(w1, w2).encode(view(path3(), x)).value();
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], expected.data[i], 1e-14);
}

TEST(Encode, FeatureWidthMismatch) {
    std::mt19937_64 rng(3);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(4, 2, rng), oracle::random_matrix(2, 2, rng));
    EXPECT_THROW(enc.encode(view(path3(), Matrix(3, 3))), ContractError);
}

TEST(Attention, SingleNodeReturnsValue) {
    std::mt19937_64 rng(4);
    CrossModalAttention attn = attention_from(rng, 3);
    Tensor z_sc = Tensor::row({0.3, -0.2, 1.0}), z_mc = Tensor::row({2.0, 0.5, -1.0});
    EXPECT_EQ(attn.weights(z_sc, z_mc).value(), Matrix::from_rows({{1.0}}));
    Matrix v = attn.values(z_sc).value(), z = attn.forward(z_sc, z_mc).value();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(z.data[i], v.data[i], 1e-15);
}

TEST(Attention, IdenticalKeysGiveCommonValueRow) {
    std::mt19937_64 rng(5);
    CrossModalAttention attn = attention_from(rng, 3);
    Matrix z_sc = Matrix::from_rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
    Matrix z_mc = oracle::random_matrix(3, 3, rng);
    Matrix v = attn.values(Tensor(z_sc)).value();
    Matrix z = attn.forward(Tensor(z_sc), Tensor(z_mc)).value();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(z(i, j), v(0, j), 1e-14);
}

TEST(Attention, ThreeNodeHandComputed) {
    std::mt19937_64 rng(6);
    CrossModalAttention attn = attention_from(rng, 4);
    Matrix z_sc = oracle::random_matrix(3, 4, rng), z_mc = oracle::random_matrix(3, 4, rng);
    Matrix expected = hand_attention(z_sc, z_mc, attn);
    Matrix got = attn.forward(Tensor(z_sc), Tensor(z_mc)).value();
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.data[i], expected.data[i], 1e-13);
}

TEST(Attention, ShapeMismatch) {
    std::mt19937_64 rng(7);
    CrossModalAttention attn = attention_from(rng, 2);
    EXPECT_THROW(attn.forward(Tensor(Matrix(3, 2)), Tensor(Matrix(2, 2))), ContractError);
}

TEST(Attention, RowsStochasticAndOutputsInsideValueHull) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + trial % 7, d = 2 + trial % 5;
        CrossModalAttention attn = attention_from(rng, d);
        Tensor z_sc(oracle::random_matrix(n, d, rng, -3, 3)), z_mc(oracle::random_matrix(n, d, rng, -3, 3));
        Matrix w = attn.weights(z_sc, z_mc).value();
        Matrix v = attn.values(z_sc).value();
        Matrix z = attn.forward(z_sc, z_mc).value();
        double vmax = 0.0;
        for (double x : v.data) vmax = std::max(vmax, std::fabs(x));
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) total += w(i, j);
            EXPECT_NEAR(total, 1.0, 1e-12);
            for (std::size_t j = 0; j < d; ++j) EXPECT_LE(std::fabs(z(i, j)), vmax + 1e-12);
        }
    }
}

TEST(Mim, IdenticalModalitiesAreBitIdentical) {
    std::mt19937_64 rng(9);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(5, 4, rng), oracle::random_matrix(4, 4, rng));
    CrossModalAttention attn = attention_from(rng, 4);
    Matrix a = oracle::random_graph(5, 0.6, rng);
    Matrix x = oracle::random_matrix(5, 5, rng);
    MimOutput out = mim_forward(view(a, x), view(a, x), enc, attn, Pooling::mean);
    EXPECT_EQ(out.z_sc.value(), out.z_mc.value());
    EXPECT_EQ(out.fused.value(), attn.forward(out.z_sc, out.z_sc).value());
}

TEST(Mim, SingletonRegionIsProjectedEmbedding) {
    std::mt19937_64 rng(10);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(3, 3, rng), oracle::random_matrix(3, 3, rng));
    CrossModalAttention attn = attention_from(rng, 3);
    Matrix x_sc = Matrix::from_rows({{1, 0.5, 0.2}}), x_mc = Matrix::from_rows({{0.1, 0.9, 0.4}});
    MimOutput out = mim_forward(view(Matrix(1, 1), x_sc), view(Matrix(1, 1), x_mc), enc, attn, Pooling::center_row);
    Matrix expected = oracle::matmul(out.z_sc.value(), oracle::transpose(attn.wv.value()));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(out.pooled.value()(0, j), expected(0, j), 1e-15);
}

TEST(Mim, MeanPoolingAveragesFusedRows) {
    std::mt19937_64 rng(11);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(4, 3, rng), oracle::random_matrix(3, 3, rng));
    CrossModalAttention attn = attention_from(rng, 3);
    Matrix a_sc = oracle::random_graph(4, 0.7, rng), a_mc = oracle::random_graph(4, 0.7, rng);
    MimOutput out =
        mim_forward(view(a_sc, oracle::random_matrix(4, 4, rng)), view(a_mc, oracle::random_matrix(4, 4, rng)), enc,
                    attn, Pooling::mean);
    Matrix rows = hand_attention(out.z_sc.value(), out.z_mc.value(), attn);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = (rows(0, j) + rows(1, j) + rows(2, j) + rows(3, j)) / 4.0;
        EXPECT_NEAR(out.pooled.value()(0, j), m, 1e-14);
    }
}

TEST(Mim, NoInteractionFusionIsElementwiseMean) {
    std::mt19937_64 rng(12);
    SiameseEncoder enc = encoder_from(oracle::random_matrix(3, 3, rng), oracle::random_matrix(3, 3, rng));
    CrossModalAttention attn = attention_from(rng, 3);
    Matrix a = oracle::random_graph(3, 0.9, rng);
    MimOutput out = mim_forward(view(a, oracle::random_matrix(3, 3, rng)), view(a, oracle::random_matrix(3, 3, rng)),
                                enc, attn, Pooling::mean, Fusion::mean);
    for (std::size_t i = 0; i < out.fused.numel(); ++i)
        EXPECT_DOUBLE_EQ(out.fused.value().data[i], 0.5 * (out.z_sc.value().data[i] + out.z_mc.value().data[i]));
}

TEST(Mim, PermutationEquivariance) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5, d = 3;
        SiameseEncoder enc = encoder_from(oracle::random_matrix(n, d, rng), oracle::random_matrix(d, d, rng));
        CrossModalAttention attn = attention_from(rng, d);
        Matrix a_sc = oracle::random_graph(n, 0.6, rng), a_mc = oracle::random_graph(n, 0.6, rng);
        Matrix x_sc = oracle::random_matrix(n, n, rng), x_mc = oracle::random_matrix(n, n, rng);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto permute_rows = [&](const Matrix& m) {
            Matrix out(m.rows, m.cols);
            for (std::size_t i = 0; i < m.rows; ++i)
                for (std::size_t j = 0; j < m.cols; ++j) out(perm[i], j) = m(i, j);
            return out;
        };
        auto permute_graph = [&](const Matrix& m) {
            Matrix out(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) out(perm[i], perm[j]) = m(i, j);
            return out;
        };
        MimOutput base = mim_forward(view(a_sc, x_sc), view(a_mc, x_mc), enc, attn, Pooling::mean);
        MimOutput moved = mim_forward(view(permute_graph(a_sc), permute_rows(x_sc)),
                                      view(permute_graph(a_mc), permute_rows(x_mc)), enc, attn, Pooling::mean);
        Matrix expected = permute_rows(base.fused.value());
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(moved.fused.value().data[i], expected.data[i], 1e-12);
        for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(moved.pooled.value()(0, j), base.pooled.value()(0, j), 1e-12);
    }
}

TEST(Mim, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(14);
    const std::size_t n = 4, d = 3;
    SiameseEncoder enc = encoder_from(oracle::random_matrix(n, d, rng), oracle::random_matrix(d, d, rng));
    CrossModalAttention attn = attention_from(rng, d);
    Matrix a_sc = oracle::random_graph(n, 0.8, rng), a_mc = oracle::random_graph(n, 0.8, rng);
    Matrix x_sc = oracle::random_matrix(n, n, rng, 0, 1), x_mc = oracle::random_matrix(n, n, rng, 0, 1);
    Matrix mix = oracle::random_matrix(1, d, rng);

    std::vector<Tensor> params{enc.w1, enc.w2, attn.wq, attn.wk, attn.wv};
    auto loss = [&] {
        MimOutput out = mim_forward(view(a_sc, x_sc), view(a_mc, x_mc), enc, attn, Pooling::mean);
        return sum_all(mul(out.pooled, Tensor(mix)));
    };
    Tape tape;
    Tensor l;
    {
        TapeScope scope(tape);
        l = loss();
    }
    tape.backward(l);
    for (Tensor& p : params) {
        Matrix analytic = p.grad();
        Matrix original = p.value();
        Matrix numeric = oracle::numeric_gradient(
            [&](const Matrix& m) {
                p.mutable_value() = m;
                double v = loss().item();
                p.mutable_value() = original;
                return v;
            },
            original);
        EXPECT_LT(oracle::max_rel_error(analytic, numeric), 1e-4);
    }
}
