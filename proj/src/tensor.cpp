#include "hiconn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace hiconn {

namespace {

thread_local Tape* g_active_tape = nullptr;

std::string shape_of(const Tensor& t) { return shape_string(t.rows(), t.cols()); }

// Wraps a computed value and records the backward rule when the tape is live.
Tensor emit(Matrix value, std::vector<Tensor> inputs, Tape::BackwardFn backward) {
    Tape* tape = Tape::active();
    bool track = tape != nullptr &&
                 std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    Tensor out(std::move(value), track);
    if (track) tape->record(std::move(inputs), out, std::move(backward));
    return out;
}

void accumulate(Tensor& t, const Matrix& g) {
    if (t.requires_grad()) t.accumulate_grad(g);
}

Matrix matmul_raw(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* crow = c.data.data() + i * c.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = a.data[i * a.cols + k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// a^T * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + k * a.cols;
        const double* brow = b.data.data() + k * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.data.data() + i * c.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

// a * b^T without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.data.data() + j * b.cols;
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            c.data[i * c.cols + j] = s;
        }
    }
    return c;
}

// f maps values, dfdx gives the local derivative at the input value.
template <typename F, typename D>
Tensor unary(const Tensor& x, F f, D dfdx) {
    Matrix out = x.value();
    for (double& v : out.data) v = f(v);
    Tensor xin = x;
    auto rule = [xin, dfdx](const Matrix& g) mutable {
        Matrix gx(g.rows, g.cols);
        const Matrix& xv = xin.value();
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] = g.data[i] * dfdx(xv.data[i]);
        accumulate(xin, gx);
    };
    return emit(std::move(out), {x}, std::move(rule));
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix / Tensor basics
// ---------------------------------------------------------------------------

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c) {
        throw DimensionError("matrix data length " + std::to_string(data.size()) + " does not match shape " +
                             shape_string(r, c));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    m.rows = rows.size();
    m.cols = rows.size() == 0 ? 0 : rows.begin()->size();
    for (const auto& row : rows) {
        if (row.size() != m.cols) throw DimensionError("ragged matrix literal");
        m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string shape_string(std::size_t rows, std::size_t cols) {
    std::ostringstream os;
    os << '[' << rows << 'x' << cols << ']';
    return os.str();
}

Tensor::Tensor(Matrix value, bool requires_grad) : impl_(std::make_shared<TensorImpl>()) {
    impl_->value = std::move(value);
    impl_->requires_grad = requires_grad;
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad)
    : Tensor(Matrix(rows, cols, std::move(values)), requires_grad) {}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    return Tensor(Matrix(rows, cols), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return Tensor(Matrix(1, 1, std::vector<double>{v}), requires_grad); }

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
    std::size_t n = values.size();
    return Tensor(Matrix(1, n, std::move(values)), requires_grad);
}

double Tensor::item() const {
    if (!is_scalar()) throw DimensionError("item() on non-scalar tensor " + shape_of(*this));
    return impl_->value.data[0];
}

Matrix Tensor::grad() const {
    if (impl_->grad.empty()) return Matrix(rows(), cols());
    return impl_->grad;
}

void Tensor::accumulate_grad(const Matrix& g) {
    if (g.rows != rows() || g.cols != cols()) {
        throw DimensionError("gradient " + shape_string(g.rows, g.cols) + " does not match tensor " + shape_of(*this));
    }
    if (impl_->grad.empty()) {
        impl_->grad = g;
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) impl_->grad.data[i] += g.data[i];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

void Tape::record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward) {
    records_.push_back(Record{std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || !loss.is_scalar()) {
        throw ContractError("backward requires a scalar loss, got " +
                            (loss.defined() ? shape_of(loss) : std::string("undefined tensor")));
    }
    Tensor seed = loss;
    seed.accumulate_grad(Matrix(1, 1, 1.0));
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (!it->output.has_grad()) continue;
        it->backward(it->output.grad());
    }
}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions disagree for " + shape_of(a) + " and " + shape_of(b));
    }
    Tensor ain = a, bin = b;
    return emit(matmul_raw(a.value(), b.value()), {a, b}, [ain, bin](const Matrix& g) mutable {
        if (ain.requires_grad()) ain.accumulate_grad(matmul_a_bt(g, bin.value()));
        if (bin.requires_grad()) bin.accumulate_grad(matmul_at_b(ain.value(), g));
    });
}

Tensor transpose(const Tensor& x) {
    const Matrix& v = x.value();
    Matrix out(v.cols, v.rows);
    for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t j = 0; j < v.cols; ++j) out(j, i) = v(i, j);
    Tensor xin = x;
    return emit(std::move(out), {x}, [xin](const Matrix& g) mutable {
        Matrix gx(g.cols, g.rows);
        for (std::size_t i = 0; i < g.rows; ++i)
            for (std::size_t j = 0; j < g.cols; ++j) gx(j, i) = g(i, j);
        accumulate(xin, gx);
    });
}

Tensor binary(Elementwise kind, const Tensor& a, const Tensor& b) {
    bool same = a.rows() == b.rows() && a.cols() == b.cols();
    if (!same && !a.is_scalar() && !b.is_scalar()) {
        throw DimensionError("elementwise: incompatible shapes " + shape_of(a) + " and " + shape_of(b));
    }
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    bool a_bcast = !same && a.is_scalar();
    bool b_bcast = !same && b.is_scalar();
    std::size_t rows = a_bcast ? b.rows() : a.rows();
    std::size_t cols = a_bcast ? b.cols() : a.cols();
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = av.data[a_bcast ? 0 : i];
        double y = bv.data[b_bcast ? 0 : i];
        switch (kind) {
            case Elementwise::add: out.data[i] = x + y; break;
            case Elementwise::sub: out.data[i] = x - y; break;
            case Elementwise::mul: out.data[i] = x * y; break;
        }
    }
    Tensor ain = a, bin = b;
    return emit(std::move(out), {a, b}, [=](const Matrix& g) mutable {
        Matrix ga(ain.rows(), ain.cols());
        Matrix gb(bin.rows(), bin.cols());
        const Matrix& x = ain.value();
        const Matrix& y = bin.value();
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::size_t ia = a_bcast ? 0 : i;
            std::size_t ib = b_bcast ? 0 : i;
            switch (kind) {
                case Elementwise::add:
                    ga.data[ia] += g.data[i];
                    gb.data[ib] += g.data[i];
                    break;
                case Elementwise::sub:
                    ga.data[ia] += g.data[i];
                    gb.data[ib] -= g.data[i];
                    break;
                case Elementwise::mul:
                    ga.data[ia] += g.data[i] * y.data[ib];
                    gb.data[ib] += g.data[i] * x.data[ia];
                    break;
            }
        }
        accumulate(ain, ga);
        accumulate(bin, gb);
    });
}

Tensor scale(const Tensor& x, double factor) {
    return unary(x, [factor](double v) { return v * factor; }, [factor](double) { return factor; });
}

Tensor sigmoid(const Tensor& x) {
    auto f = [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        double e = std::exp(v);
        return e / (1.0 + e);
    };
    return unary(x, f, [f](double v) {
        double s = f(v);
        return s * (1.0 - s);
    });
}

Tensor relu(const Tensor& x) {
    return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& x) {
    return unary(x, [](double v) { return std::fabs(v); },
                 [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor softmax_rows(const Tensor& x) {
    const Matrix& v = x.value();
    Matrix out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.rows; ++i) {
        const double* row = v.data.data() + i * v.cols;
        double* orow = out.data.data() + i * v.cols;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < v.cols; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < v.cols; ++j) {
            orow[j] = std::exp(row[j] - mx);
            total += orow[j];
        }
        for (std::size_t j = 0; j < v.cols; ++j) orow[j] /= total;
    }
    Tensor xin = x;
    Matrix y = out;
    return emit(std::move(out), {x}, [xin, y](const Matrix& g) mutable {
        Matrix gx(g.rows, g.cols);
        for (std::size_t i = 0; i < g.rows; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols; ++j) dot += g(i, j) * y(i, j);
            for (std::size_t j = 0; j < g.cols; ++j) gx(i, j) = y(i, j) * (g(i, j) - dot);
        }
        accumulate(xin, gx);
    });
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.value().data) s += v;
    Tensor xin = x;
    return emit(Matrix(1, 1, s), {x}, [xin](const Matrix& g) mutable {
        accumulate(xin, Matrix(xin.rows(), xin.cols(), g.data[0]));
    });
}

Tensor sum_axis(const Tensor& x, int axis) {
    if (axis != 0 && axis != 1) throw DimensionError("sum_axis: invalid axis " + std::to_string(axis));
    const Matrix& v = x.value();
    Matrix out = axis == 0 ? Matrix(1, v.cols) : Matrix(v.rows, 1);
    for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t j = 0; j < v.cols; ++j) out.data[axis == 0 ? j : i] += v(i, j);
    Tensor xin = x;
    return emit(std::move(out), {x}, [xin, axis](const Matrix& g) mutable {
        Matrix gx(xin.rows(), xin.cols());
        for (std::size_t i = 0; i < gx.rows; ++i)
            for (std::size_t j = 0; j < gx.cols; ++j) gx(i, j) = g.data[axis == 0 ? j : i];
        accumulate(xin, gx);
    });
}

Tensor mean_axis(const Tensor& x, int axis) {
    if (axis != 0 && axis != 1) throw DimensionError("mean_axis: invalid axis " + std::to_string(axis));
    std::size_t count = axis == 0 ? x.rows() : x.cols();
    if (count == 0) throw DimensionError("mean_axis: empty reduction over " + shape_of(x));
    return scale(sum_axis(x, axis), 1.0 / static_cast<double>(count));
}

Tensor global_average_pool(const Tensor& x) { return mean_axis(x, 0); }

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    std::array<Tensor, 2> parts{a, b};
    return concat_rows(std::span<const Tensor>(parts));
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: no operands");
    std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const Tensor& p : parts) {
        if (p.cols() != cols && p.rows() != 0) {
            throw DimensionError("concat_rows: column mismatch " + shape_of(parts.front()) + " vs " + shape_of(p));
        }
        rows += p.rows();
    }
    // An empty 0 x d operand is allowed to carry a stale column count.
    for (const Tensor& p : parts) {
        if (p.rows() != 0) {
            cols = p.cols();
            break;
        }
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
        std::copy(p.value().data.begin(), p.value().data.end(), out.data.begin() + offset);
        offset += p.value().size();
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    std::vector<Tensor> captured = inputs;
    return emit(std::move(out), std::move(inputs), [captured, cols](const Matrix& g) mutable {
        std::size_t off = 0;
        for (Tensor& p : captured) {
            std::size_t n = p.rows() * cols;
            if (p.requires_grad()) {
                Matrix gp(p.rows(), cols,
                          std::vector<double>(g.data.begin() + static_cast<std::ptrdiff_t>(off),
                                              g.data.begin() + static_cast<std::ptrdiff_t>(off + n)));
                p.accumulate_grad(gp);
            }
            off += n;
        }
    });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
    const Matrix& v = x.value();
    Matrix out(indices.size(), v.cols);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        if (indices[r] >= v.rows) {
            throw DimensionError("gather_rows: index " + std::to_string(indices[r]) + " out of range for " +
                                 shape_of(x));
        }
        std::copy_n(v.data.begin() + static_cast<std::ptrdiff_t>(indices[r] * v.cols), v.cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(r * v.cols));
    }
    Tensor xin = x;
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return emit(std::move(out), {x}, [xin, idx](const Matrix& g) mutable {
        Matrix gx(xin.rows(), xin.cols());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t j = 0; j < g.cols; ++j) gx(idx[r], j) += g(r, j);
        accumulate(xin, gx);
    });
}

Tensor gather_cols(const Tensor& x, std::span<const std::size_t> indices) {
    const Matrix& v = x.value();
    Matrix out(v.rows, indices.size());
    for (std::size_t c = 0; c < indices.size(); ++c) {
        if (indices[c] >= v.cols) {
            throw DimensionError("gather_cols: index " + std::to_string(indices[c]) + " out of range for " +
                                 shape_of(x));
        }
        for (std::size_t r = 0; r < v.rows; ++r) out(r, c) = v(r, indices[c]);
    }
    Tensor xin = x;
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    return emit(std::move(out), {x}, [xin, idx](const Matrix& g) mutable {
        Matrix gx(xin.rows(), xin.cols());
        for (std::size_t r = 0; r < g.rows; ++r)
            for (std::size_t c = 0; c < idx.size(); ++c) gx(r, idx[c]) += g(r, c);
        accumulate(xin, gx);
    });
}

Tensor normalize_rows(const Tensor& x) {
    const Matrix& v = x.value();
    Matrix out = v;
    std::vector<double> sums(v.rows, 0.0);
    for (std::size_t i = 0; i < v.rows; ++i) {
        for (std::size_t j = 0; j < v.cols; ++j) sums[i] += v(i, j);
        if (!(sums[i] > 0.0)) throw ContractError("normalize_rows: row " + std::to_string(i) + " has no positive mass");
        for (std::size_t j = 0; j < v.cols; ++j) out(i, j) /= sums[i];
    }
    Tensor xin = x;
    Matrix y = out;
    return emit(std::move(out), {x}, [xin, y, sums](const Matrix& g) mutable {
        Matrix gx(g.rows, g.cols);
        for (std::size_t i = 0; i < g.rows; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols; ++j) dot += g(i, j) * y(i, j);
            for (std::size_t j = 0; j < g.cols; ++j) gx(i, j) = (g(i, j) - dot) / sums[i];
        }
        accumulate(xin, gx);
    });
}

Tensor pick(const Tensor& x, std::span<const std::ptrdiff_t> indices) {
    if (x.rows() != 1) throw DimensionError("pick: expected a 1 x m row, got " + shape_of(x));
    Matrix out(1, indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        std::ptrdiff_t k = indices[j];
        if (k >= static_cast<std::ptrdiff_t>(x.cols())) {
            throw DimensionError("pick: index " + std::to_string(k) + " out of range for " + shape_of(x));
        }
        out.data[j] = k < 0 ? 0.0 : x.value().data[static_cast<std::size_t>(k)];
    }
    Tensor xin = x;
    std::vector<std::ptrdiff_t> idx(indices.begin(), indices.end());
    return emit(std::move(out), {x}, [xin, idx](const Matrix& g) mutable {
        Matrix gx(1, xin.cols());
        for (std::size_t j = 0; j < idx.size(); ++j)
            if (idx[j] >= 0) gx.data[static_cast<std::size_t>(idx[j])] += g.data[j];
        accumulate(xin, gx);
    });
}

Tensor scale_rows(const Tensor& x, const Tensor& s) {
    if (s.rows() != 1 || s.cols() != x.rows()) {
        throw DimensionError("scale_rows: scale " + shape_of(s) + " does not match rows of " + shape_of(x));
    }
    Matrix out = x.value();
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= s.value().data[i];
    Tensor xin = x, sin = s;
    return emit(std::move(out), {x, s}, [xin, sin](const Matrix& g) mutable {
        if (xin.requires_grad()) {
            Matrix gx = g;
            for (std::size_t i = 0; i < gx.rows; ++i)
                for (std::size_t j = 0; j < gx.cols; ++j) gx(i, j) *= sin.value().data[i];
            xin.accumulate_grad(gx);
        }
        if (sin.requires_grad()) {
            Matrix gs(1, sin.cols());
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) gs.data[i] += g(i, j) * xin.value()(i, j);
            sin.accumulate_grad(gs);
        }
    });
}

Tensor add_row(const Tensor& x, const Tensor& b) {
    if (b.rows() != 1 || b.cols() != x.cols()) {
        throw DimensionError("add_row: row " + shape_of(b) + " does not match columns of " + shape_of(x));
    }
    Matrix out = x.value();
    for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += b.value().data[j];
    Tensor xin = x, bin = b;
    return emit(std::move(out), {x, b}, [xin, bin](const Matrix& g) mutable {
        accumulate(xin, g);
        if (bin.requires_grad()) {
            Matrix gb(1, bin.cols());
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) gb.data[j] += g(i, j);
            bin.accumulate_grad(gb);
        }
    });
}

Tensor shrink(const Tensor& x, const Tensor& tau) {
    if (tau.rows() != 1 || tau.cols() != x.cols()) {
        throw DimensionError("shrink: threshold " + shape_of(tau) + " does not match columns of " + shape_of(x));
    }
    const Matrix& t = tau.value();
    for (double v : t.data) {
        if (!(v >= 0.0)) throw ContractError("shrink: threshold entries must be >= 0");
    }
    Matrix out = x.value();
    // branch: +1 shrunk from above, -1 shrunk from below, 0 dead zone
    std::vector<signed char> branch(out.size(), 0);
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) {
            double z = out(i, j);
            double th = t.data[j];
            std::size_t k = i * out.cols + j;
            if (z > th) {
                out.data[k] = z - th;
                branch[k] = 1;
            } else if (z < -th) {
                out.data[k] = z + th;
                branch[k] = -1;
            } else {
                out.data[k] = 0.0;
            }
        }
    }
    Tensor xin = x, tin = tau;
    return emit(std::move(out), {x, tau}, [xin, tin, branch](const Matrix& g) mutable {
        Matrix gx(g.rows, g.cols);
        Matrix gt(1, g.cols);
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) {
                std::size_t k = i * g.cols + j;
                if (branch[k] == 0) continue;
                gx.data[k] = g.data[k];
                gt.data[j] -= branch[k] * g.data[k];
            }
        }
        accumulate(xin, gx);
        accumulate(tin, gt);
    });
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
    if (logits.rows() != 1 || label >= logits.cols()) {
        throw DimensionError("cross_entropy: label " + std::to_string(label) + " invalid for logits " +
                             shape_of(logits));
    }
    const Matrix& v = logits.value();
    double mx = *std::max_element(v.data.begin(), v.data.end());
    double total = 0.0;
    for (double z : v.data) total += std::exp(z - mx);
    double log_norm = mx + std::log(total);
    double loss = log_norm - v.data[label];
    Tensor lin = logits;
    return emit(Matrix(1, 1, loss), {logits}, [lin, label, log_norm](const Matrix& g) mutable {
        Matrix gl(1, lin.cols());
        for (std::size_t j = 0; j < gl.cols; ++j) {
            double p = std::exp(lin.value().data[j] - log_norm);
            gl.data[j] = g.data[0] * (p - (j == label ? 1.0 : 0.0));
        }
        accumulate(lin, gl);
    });
}

Tensor detach(const Tensor& x) { return Tensor(x.value(), false); }

}  // namespace hiconn
