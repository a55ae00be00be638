#pragma once

// Dense f64 tensors and a tape-based reverse-mode differentiator.
//
// A Tape owns every intermediate produced while it is alive. Ops append one
// node each, so node ids are already a topological order and backward() is a
// single reverse sweep. Parameters live outside the tape; their gradients are
// accumulated into Parameter::grad when backward() reaches their leaf.

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace na {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
    static Tensor identity(std::size_t n);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    // Matrix view: rank 0 is 1×1, rank 1 is a row vector.
    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double item() const;

    bool all_finite() const noexcept;
    void fill(double v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Largest absolute elementwise difference; throws DimensionError on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// A named learnable tensor with its gradient buffer.
struct Parameter {
    std::string name;
    Tensor value;
    // Accumulator written by Tape::backward through const references.
    mutable Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
    void zero_grad() const { grad = Tensor(value.shape()); }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor t);
    /// Leaf whose gradient is kept on the tape (read with grad()).
    Var variable(Tensor t);
    /// Leaf bound to a parameter; backward() adds into p.grad.
    Var parameter(const Parameter& p);

    /// Records an op output. `backward` may be empty when no input needs a gradient.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    const Tensor& value(Var v) const { return value(v.id); }
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

    /// Gradient buffer of a node, allocated (zeroed) on first access.
    Tensor& grad_buffer(std::size_t id);
    /// Gradient after backward(); zeros if the node never received one.
    Tensor grad(Var v) const;

    /// Reverse sweep from a scalar loss. Throws std::logic_error for non-scalar losses.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool has_grad = false;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        const Parameter* param = nullptr;
    };
    std::deque<Node> nodes_;
};

/// CSR matrix used for graph propagation.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    Tensor to_dense() const;
};

// ---- ops -----------------------------------------------------------------

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// x[n×d] + row vector b[d] on every row.
Var add_row(Var x, Var b);
/// Repeats a 1×d row n times.
Var broadcast_rows(Var row, std::size_t n);
Var relu(Var a);
Var softmax_rows(Var x);
Var layer_norm(Var x, Var gamma, Var beta, double eps);
Var sum(Var a);
Var mean(Var a);
/// Column means: [n×d] -> [1×d].
Var mean_rows(Var a);
/// Per-segment column means; offsets are prefix sums with offsets.front() == 0.
Var segment_mean_rows(Var a, std::span<const std::size_t> offsets);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::span<const std::size_t> idx);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
/// s · h for a sparse operator s.
Var spmm(const SparseMatrix& s, Var h);

/// Mean softmax cross-entropy of logits[n×C] against class indices.
Var cross_entropy(Var logits, std::span<const int> labels);
/// Mean binary cross-entropy of logits (any shape) against 0/1 targets.
Var bce_with_logits(Var logits, std::span<const double> targets);
Var mse(Var pred, const Tensor& target);

/// Plain (non-differentiable) helpers shared with oracles and kernels.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);

}  // namespace na
