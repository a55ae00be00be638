#include "neural_atoms/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace na {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ']';
    return os.str();
}

namespace {
std::size_t numel(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel(shape_))
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> d;
    d.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged matrix literal");
        d.insert(d.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(d));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::size_t Tensor::rows() const noexcept {
    return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const noexcept {
    if (shape_.empty()) return 1;
    return shape_.size() == 2 ? shape_[1] : shape_[0];
}

double Tensor::item() const {
    if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape_));
    return data_[0];
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw DimensionError("max_abs_diff: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Tensor SparseMatrix::to_dense() const {
    Tensor d({rows, cols});
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) d.at(r, col_idx[p]) += values[p];
    return d;
}

// ---- tape ----------------------------------------------------------------

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor t) {
    nodes_.push_back(Node{std::move(t), {}, false, false, {}, {}, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::variable(Tensor t) {
    nodes_.push_back(Node{std::move(t), {}, true, false, {}, {}, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(const Parameter& p) {
    nodes_.push_back(Node{p.value, {}, true, false, {}, {}, &p});
    return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool rg = false;
    for (std::size_t in : inputs) {
        if (in >= nodes_.size()) throw std::logic_error("tape: input recorded after its consumer");
        rg = rg || nodes_[in].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, rg, false, std::move(inputs),
                          rg ? std::move(backward) : BackwardFn{}, nullptr});
    return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(std::size_t id) {
    Node& n = nodes_.at(id);
    if (!n.has_grad) {
        n.grad = Tensor(n.value.shape());
        n.has_grad = true;
    }
    return n.grad;
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.has_grad ? n.grad : Tensor(n.value.shape());
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::logic_error("backward: loss belongs to another tape");
    if (value(loss).size() != 1)
        throw std::logic_error("backward: loss must be scalar, got shape " +
                               shape_str(value(loss).shape()));
    for (auto& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor();
    }
    grad_buffer(loss.id)[0] = 1.0;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.has_grad || !n.requires_grad) continue;
        if (n.backward) n.backward(*this, id);
        if (n.param) {
            Tensor& pg = n.param->grad;
            if (pg.shape() != n.value.shape()) pg = Tensor(n.value.shape());
            for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
        }
    }
}

}  // namespace na
