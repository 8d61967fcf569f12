#pragma once

// Dense double-precision tensors with tape-based reverse-mode differentiation.
//
// Tensors are rank <= 2. Vectors are stored as 1 x n rows and scalars as 1 x 1.
// A Tensor is a cheap handle; copies share storage. Values are immutable once an
// operation has produced them (optimizers mutate leaf parameters between steps),
// and gradients accumulate in a separate buffer.
//
// Operations record onto the calling thread's active Tape (see TapeScope) when at
// least one input requires a gradient. Without an active tape they only compute.

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiconn {

/// Raised when operand shapes do not compose.
class DimensionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a caller breaks an operation's precondition.
class ContractError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

/// Row-major dense matrix of doubles. Plain value type used for data that never
/// needs a gradient (adjacencies, assignment snapshots) and as Tensor storage.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

std::string shape_string(std::size_t rows, std::size_t cols);

struct TensorImpl {
    Matrix value;
    Matrix grad;  // empty until a gradient flows in
    bool requires_grad = false;
};

class Tensor {
   public:
    Tensor() = default;
    explicit Tensor(Matrix value, bool requires_grad = false);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor row(std::vector<double> values, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    std::size_t rows() const { return impl_->value.rows; }
    std::size_t cols() const { return impl_->value.cols; }
    std::array<std::size_t, 2> shape() const { return {rows(), cols()}; }
    std::size_t numel() const { return impl_->value.size(); }
    bool is_scalar() const { return rows() == 1 && cols() == 1; }

    const Matrix& value() const { return impl_->value; }
    /// Mutable access for optimizers and finite-difference probes on leaves.
    Matrix& mutable_value() { return impl_->value; }
    double item() const;
    double at(std::size_t r, std::size_t c) const { return impl_->value(r, c); }

    bool requires_grad() const { return impl_->requires_grad; }
    bool has_grad() const { return !impl_->grad.empty(); }
    /// Gradient buffer; zeros of the value's shape if nothing has flowed in.
    Matrix grad() const;
    void zero_grad() { impl_->grad = Matrix(); }
    void accumulate_grad(const Matrix& g);

    bool same_node(const Tensor& other) const { return impl_ == other.impl_; }

   private:
    std::shared_ptr<TensorImpl> impl_;
};

/// Ordered record of differentiable operations. Recording order is creation
/// order, so it is topological by construction.
class Tape {
   public:
    using BackwardFn = std::function<void(const Matrix& grad_out)>;

    struct Record {
        std::vector<Tensor> inputs;
        Tensor output;
        BackwardFn backward;
    };

    void record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward);

    /// Seeds d(loss)/d(loss) = 1 and walks the records in reverse, accumulating
    /// into every requires_grad tensor reachable from the loss.
    void backward(const Tensor& loss);

    std::size_t size() const { return records_.size(); }
    const std::vector<Record>& records() const { return records_; }
    void clear() { records_.clear(); }

    /// Tape bound to the calling thread, or nullptr.
    static Tape* active();

   private:
    friend class TapeScope;
    std::vector<Record> records_;
};

/// Binds a tape to the current thread for the lifetime of the scope.
class TapeScope {
   public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

   private:
    Tape* previous_;
};

/// Disables recording for the lifetime of the scope (inference, probes).
class NoGradScope {
   public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

   private:
    Tape* previous_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

enum class Elementwise { add, sub, mul };

/// Binary elementwise op. Operands must share a shape, or one must be 1 x 1.
Tensor binary(Elementwise kind, const Tensor& a, const Tensor& b);
inline Tensor add(const Tensor& a, const Tensor& b) { return binary(Elementwise::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return binary(Elementwise::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return binary(Elementwise::mul, a, b); }

Tensor scale(const Tensor& x, double factor);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor abs(const Tensor& x);

/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& x);

Tensor sum_all(const Tensor& x);
/// axis 0 reduces over rows (result 1 x n), axis 1 over columns (result m x 1).
Tensor sum_axis(const Tensor& x, int axis);
Tensor mean_axis(const Tensor& x, int axis);
/// Column means over the row axis: m x n -> 1 x n.
Tensor global_average_pool(const Tensor& x);

Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_rows(std::span<const Tensor> parts);

/// out row r = x row indices[r]; backward scatter-adds.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
/// out column c = x column indices[c].
Tensor gather_cols(const Tensor& x, std::span<const std::size_t> indices);
/// Divides each row by its sum; rows must have a positive sum.
Tensor normalize_rows(const Tensor& x);
/// Picks entries of a 1 x m row: out[j] = x[idx[j]], or 0 where idx[j] < 0.
Tensor pick(const Tensor& x, std::span<const std::ptrdiff_t> indices);
/// Multiplies row r of x (m x n) by s[r]; s is 1 x m.
Tensor scale_rows(const Tensor& x, const Tensor& s);
/// Adds the 1 x n row b to every row of x (m x n).
Tensor add_row(const Tensor& x, const Tensor& b);

/// Soft-threshold shrinkage with a per-column threshold tau (1 x n, >= 0):
/// x - tau above tau, 0 inside [-tau, tau], x + tau below -tau.
/// Subgradient at the kinks follows the outer branch (slope 1 in x).
Tensor shrink(const Tensor& x, const Tensor& tau);

/// Cross entropy of softmax(logits) against a class index; logits is 1 x C.
Tensor cross_entropy(const Tensor& logits, std::size_t label);

/// Constant copy cut off from the tape.
Tensor detach(const Tensor& x);

}  // namespace hiconn
