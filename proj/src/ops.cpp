#include "neural_atoms/kernels.hpp"
#include "neural_atoms/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace na {
namespace {

Tape& tape_of(Var a) {
    if (!a.tape) throw std::logic_error("op on a detached Var");
    return *a.tape;
}

Tape& same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw std::logic_error("op mixes Vars from different tapes");
    return tape_of(a);
}

// Gradient sink of an input, or nullptr when it does not require one.
Tensor* sink(Tape& t, std::size_t id) { return t.requires_grad(id) ? &t.grad_buffer(id) : nullptr; }

void require_matrix(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

const kernels::KernelTable& K() { return kernels::active(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " · " +
                             shape_str(b.shape()));
    Tensor c({a.rows(), b.cols()});
    K().gemm(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols(), false);
    return c;
}

Tensor softmax_rows(const Tensor& x) {
    require_matrix(x, "softmax_rows");
    Tensor y(x.shape());
    const std::size_t r = x.rows(), c = x.cols();
    for (std::size_t i = 0; i < r; ++i) {
        const double* xi = x.data().data() + i * c;
        double* yi = y.data().data() + i * c;
        const double mx = *std::max_element(xi, xi + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += (yi[j] = std::exp(xi[j] - mx));
        for (std::size_t j = 0; j < c; ++j) yi[j] /= s;
    }
    return y;
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    Tensor out = matmul(a.value(), b.value());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    return t.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id, m, k, n](Tape& t, std::size_t self) {
        const double* g = t.grad_buffer(self).data().data();
        if (Tensor* ga = sink(t, a))  // dA = dC · Bᵀ
            K().gemm_nt(g, t.value(b).data().data(), ga->data().data(), m, n, k, true);
        if (Tensor* gb = sink(t, b))  // dB = Aᵀ · dC
            K().gemm_tn(t.value(a).data().data(), g, gb->data().data(), k, m, n, true);
    });
}

Var matmul_nt(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_matrix(a.value(), "matmul_nt");
    require_matrix(b.value(), "matmul_nt");
    if (a.cols() != b.cols())
        throw DimensionError("matmul_nt: inner dimensions differ, " + shape_str(a.shape()) + " · " +
                             shape_str(b.shape()) + "ᵀ");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor out({m, n});
    K().gemm_nt(a.value().data().data(), b.value().data().data(), out.data().data(), m, k, n, false);
    return t.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id, m, k, n](Tape& t, std::size_t self) {
        const double* g = t.grad_buffer(self).data().data();
        if (Tensor* ga = sink(t, a))  // dA = dC · B
            K().gemm(g, t.value(b).data().data(), ga->data().data(), m, n, k, true);
        if (Tensor* gb = sink(t, b))  // dB = dCᵀ · A
            K().gemm_tn(g, t.value(a).data().data(), gb->data().data(), n, m, k, true);
    });
}

Var transpose(Var a) {
    Tape& t = tape_of(a);
    require_matrix(a.value(), "transpose");
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = a.value().at(i, j);
    return t.record(std::move(out), {a.id}, [a = a.id, r, c](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) ga.at(i, j) += g.at(j, i);
    });
}

namespace {

template <class Fwd, class Bwd>
Var binary_elementwise(Var a, Var b, const char* name, Fwd fwd, Bwd bwd) {
    Tape& t = same_tape(a, b);
    require_same(a.value(), b.value(), name);
    Tensor out(a.shape());
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
    return t.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id, bwd](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor* ga = sink(t, a);
        Tensor* gb = sink(t, b);
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        for (std::size_t i = 0; i < g.size(); ++i) bwd(g[i], av[i], bv[i], ga ? &(*ga)[i] : nullptr, gb ? &(*gb)[i] : nullptr);
    });
}

}  // namespace

Var add(Var a, Var b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb += g;
        });
}

Var sub(Var a, Var b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, double, double, double* ga, double* gb) {
            if (ga) *ga += g;
            if (gb) *gb -= g;
        });
}

Var mul(Var a, Var b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, double x, double y, double* ga, double* gb) {
            if (ga) *ga += g * y;
            if (gb) *gb += g * x;
        });
}

Var scale(Var a, double s) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v *= s;
    return t.record(std::move(out), {a.id}, [a = a.id, s](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        K().axpy(g.size(), s, g.data().data(), t.grad_buffer(a).data().data());
    });
}

Var add_row(Var x, Var b) {
    Tape& t = same_tape(x, b);
    require_matrix(x.value(), "add_row");
    const std::size_t n = x.rows(), d = x.cols();
    if (b.value().size() != d)
        throw DimensionError("add_row: bias " + shape_str(b.shape()) + " does not fit " + shape_str(x.shape()));
    Tensor out = x.value();
    const Tensor& bv = b.value();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) += bv[j];
    return t.record(std::move(out), {x.id, b.id}, [x = x.id, b = b.id, n, d](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        if (Tensor* gx = sink(t, x)) K().axpy(g.size(), 1.0, g.data().data(), gx->data().data());
        if (Tensor* gb = sink(t, b))
            for (std::size_t i = 0; i < n; ++i) K().axpy(d, 1.0, g.data().data() + i * d, gb->data().data());
    });
}

Var broadcast_rows(Var row, std::size_t n) {
    Tape& t = tape_of(row);
    const std::size_t d = row.value().size();
    if (row.value().rows() != 1) throw DimensionError("broadcast_rows: expected a single row, got " + shape_str(row.shape()));
    Tensor out({n, d});
    for (std::size_t i = 0; i < n; ++i)
        std::copy(row.value().data().begin(), row.value().data().end(), out.data().begin() + i * d);
    return t.record(std::move(out), {row.id}, [r = row.id, n, d](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& gr = t.grad_buffer(r);
        for (std::size_t i = 0; i < n; ++i) K().axpy(d, 1.0, g.data().data() + i * d, gr.data().data());
    });
}

Var relu(Var a) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
    return t.record(std::move(out), {a.id}, [a = a.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        const Tensor& x = t.value(a);
        Tensor& ga = t.grad_buffer(a);
        // subgradient 0 at exactly 0
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > 0.0) ga[i] += g[i];
    });
}

Var softmax_rows(Var x) {
    Tape& t = tape_of(x);
    Tensor out = softmax_rows(x.value());
    const std::size_t r = out.rows(), c = out.cols();
    return t.record(std::move(out), {x.id}, [x = x.id, r, c](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        const Tensor& y = t.value(self);
        Tensor& gx = t.grad_buffer(x);
        for (std::size_t i = 0; i < r; ++i) {
            const double* gi = g.data().data() + i * c;
            const double* yi = y.data().data() + i * c;
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += gi[j] * yi[j];
            for (std::size_t j = 0; j < c; ++j) gx.at(i, j) += yi[j] * (gi[j] - s);
        }
    });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape& t = same_tape(x, gamma);
    same_tape(x, beta);
    require_matrix(x.value(), "layer_norm");
    if (eps <= 0.0) throw std::invalid_argument("layer_norm: eps must be positive");
    const std::size_t n = x.rows(), d = x.cols();
    if (gamma.value().size() != d || beta.value().size() != d)
        throw DimensionError("layer_norm: affine parameters " + shape_str(gamma.shape()) + "/" +
                             shape_str(beta.shape()) + " do not fit width " + std::to_string(d));
    if (d == 0) throw DimensionError("layer_norm: zero-width rows");
    const Tensor& xv = x.value();
    const Tensor& gv = gamma.value();
    const Tensor& bv = beta.value();
    Tensor xhat({n, d});
    std::vector<double> inv_std(n);
    Tensor out({n, d});
    for (std::size_t i = 0; i < n; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += xv.at(i, j);
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (xv.at(i, j) - mu) * (xv.at(i, j) - mu);
        var /= static_cast<double>(d);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            xhat.at(i, j) = (xv.at(i, j) - mu) * inv_std[i];
            out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];
        }
    }
    return t.record(std::move(out), {x.id, gamma.id, beta.id},
                    [x = x.id, g_id = gamma.id, b_id = beta.id, n, d, xhat = std::move(xhat),
                     inv_std = std::move(inv_std)](Tape& t, std::size_t self) {
                        const Tensor& g = t.grad_buffer(self);
                        const Tensor& gv = t.value(g_id);
                        if (Tensor* gg = sink(t, g_id))
                            for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g.at(i, j) * xhat.at(i, j);
                        if (Tensor* gb = sink(t, b_id))
                            for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g.at(i, j);
                        if (Tensor* gx = sink(t, x)) {
                            const double dd = static_cast<double>(d);
                            for (std::size_t i = 0; i < n; ++i) {
                                double m1 = 0.0, m2 = 0.0;
                                for (std::size_t j = 0; j < d; ++j) {
                                    const double dh = g.at(i, j) * gv[j];
                                    m1 += dh;
                                    m2 += dh * xhat.at(i, j);
                                }
                                m1 /= dd;
                                m2 /= dd;
                                for (std::size_t j = 0; j < d; ++j) {
                                    const double dh = g.at(i, j) * gv[j];
                                    gx->at(i, j) += inv_std[i] * (dh - m1 - xhat.at(i, j) * m2);
                                }
                            }
                        }
                    });
}

Var sum(Var a) {
    Tape& t = tape_of(a);
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    return t.record(Tensor::scalar(s), {a.id}, [a = a.id](Tape& t, std::size_t self) {
        const double g = t.grad_buffer(self)[0];
        for (auto& v : t.grad_buffer(a).data()) v += g;
    });
}

Var mean(Var a) {
    const std::size_t n = a.value().size();
    if (n == 0) throw DimensionError("mean of an empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var mean_rows(Var a) {
    const std::size_t offsets[2] = {0, a.rows()};
    return segment_mean_rows(a, offsets);
}

Var segment_mean_rows(Var a, std::span<const std::size_t> offsets) {
    Tape& t = tape_of(a);
    require_matrix(a.value(), "segment_mean_rows");
    const std::size_t d = a.cols();
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != a.rows())
        throw DimensionError("segment_mean_rows: offsets do not cover " + shape_str(a.shape()));
    const std::size_t segs = offsets.size() - 1;
    Tensor out({segs, d});
    std::vector<std::size_t> off(offsets.begin(), offsets.end());
    for (std::size_t s = 0; s < segs; ++s) {
        if (off[s + 1] <= off[s]) throw DimensionError("segment_mean_rows: empty segment");
        const double inv = 1.0 / static_cast<double>(off[s + 1] - off[s]);
        for (std::size_t r = off[s]; r < off[s + 1]; ++r)
            K().axpy(d, inv, a.value().data().data() + r * d, out.data().data() + s * d);
    }
    return t.record(std::move(out), {a.id}, [a = a.id, off = std::move(off), d](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& ga = t.grad_buffer(a);
        for (std::size_t s = 0; s + 1 < off.size(); ++s) {
            const double inv = 1.0 / static_cast<double>(off[s + 1] - off[s]);
            for (std::size_t r = off[s]; r < off[s + 1]; ++r)
                K().axpy(d, inv, g.data().data() + s * d, ga.data().data() + r * d);
        }
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
    Tape& t = tape_of(a);
    require_matrix(a.value(), "slice_rows");
    if (begin + count > a.rows())
        throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                             ") out of " + shape_str(a.shape()));
    const std::size_t d = a.cols();
    const auto src = a.value().data().subspan(begin * d, count * d);
    Tensor out({count, d}, std::vector<double>(src.begin(), src.end()));
    return t.record(std::move(out), {a.id}, [a = a.id, begin, d](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        K().axpy(g.size(), 1.0, g.data().data(), t.grad_buffer(a).data().data() + begin * d);
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
    Tape& t = tape_of(a);
    require_matrix(a.value(), "slice_cols");
    const std::size_t r = a.rows(), c = a.cols();
    if (begin + count > c) throw DimensionError("slice_cols: range out of " + shape_str(a.shape()));
    Tensor out({r, count});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) out.at(i, j) = a.value().at(i, begin + j);
    return t.record(std::move(out), {a.id}, [a = a.id, begin, r, count](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < count; ++j) ga.at(i, begin + j) += g.at(i, j);
    });
}

Var gather_rows(Var a, std::span<const std::size_t> idx) {
    Tape& t = tape_of(a);
    require_matrix(a.value(), "gather_rows");
    const std::size_t d = a.cols();
    Tensor out({idx.size(), d});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= a.rows()) throw DimensionError("gather_rows: index out of range");
        std::copy_n(a.value().data().begin() + idx[i] * d, d, out.data().begin() + i * d);
    }
    return t.record(std::move(out), {a.id},
                    [a = a.id, ix = std::vector<std::size_t>(idx.begin(), idx.end()), d](Tape& t, std::size_t self) {
                        const Tensor& g = t.grad_buffer(self);
                        Tensor& ga = t.grad_buffer(a);
                        for (std::size_t i = 0; i < ix.size(); ++i)
                            K().axpy(d, 1.0, g.data().data() + i * d, ga.data().data() + ix[i] * d);
                    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
    Tape& t = tape_of(parts[0]);
    const std::size_t d = parts[0].cols();
    std::size_t total = 0;
    std::vector<std::size_t> ids;
    for (const Var& p : parts) {
        same_tape(parts[0], p);
        require_matrix(p.value(), "concat_rows");
        if (p.cols() != d) throw DimensionError("concat_rows: width mismatch " + shape_str(p.shape()));
        total += p.rows();
        ids.push_back(p.id);
    }
    Tensor out({total, d});
    std::size_t at = 0;
    for (const Var& p : parts) {
        std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + at);
        at += p.value().size();
    }
    return t.record(std::move(out), ids, [ids](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        std::size_t at = 0;
        for (std::size_t id : ids) {
            const std::size_t n = t.value(id).size();
            if (Tensor* gp = sink(t, id)) K().axpy(n, 1.0, g.data().data() + at, gp->data().data());
            at += n;
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat_cols: nothing to concatenate");
    Tape& t = tape_of(parts[0]);
    const std::size_t r = parts[0].rows();
    std::size_t total = 0;
    std::vector<std::size_t> ids;
    for (const Var& p : parts) {
        same_tape(parts[0], p);
        require_matrix(p.value(), "concat_cols");
        if (p.rows() != r) throw DimensionError("concat_cols: height mismatch " + shape_str(p.shape()));
        total += p.cols();
        ids.push_back(p.id);
    }
    Tensor out({r, total});
    std::size_t c0 = 0;
    for (const Var& p : parts) {
        const std::size_t c = p.cols();
        for (std::size_t i = 0; i < r; ++i)
            std::copy_n(p.value().data().begin() + i * c, c, out.data().begin() + i * total + c0);
        c0 += c;
    }
    return t.record(std::move(out), ids, [ids, r, total](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        std::size_t c0 = 0;
        for (std::size_t id : ids) {
            const std::size_t c = t.value(id).cols();
            if (Tensor* gp = sink(t, id))
                for (std::size_t i = 0; i < r; ++i)
                    K().axpy(c, 1.0, g.data().data() + i * total + c0, gp->data().data() + i * c);
            c0 += c;
        }
    });
}

Var spmm(const SparseMatrix& s, Var h) {
    Tape& t = tape_of(h);
    require_matrix(h.value(), "spmm");
    if (s.cols != h.rows())
        throw DimensionError("spmm: operator is " + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                             ", features are " + shape_str(h.shape()));
    const std::size_t d = h.cols();
    Tensor out({s.rows, d});
    for (std::size_t r = 0; r < s.rows; ++r)
        for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p)
            K().axpy(d, s.values[p], h.value().data().data() + s.col_idx[p] * d, out.data().data() + r * d);
    return t.record(std::move(out), {h.id}, [s, h = h.id, d](Tape& t, std::size_t self) {
        const Tensor& g = t.grad_buffer(self);
        Tensor& gh = t.grad_buffer(h);
        for (std::size_t r = 0; r < s.rows; ++r)
            for (std::size_t p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p)
                K().axpy(d, s.values[p], g.data().data() + r * d, gh.data().data() + s.col_idx[p] * d);
    });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
    Tape& t = tape_of(logits);
    require_matrix(logits.value(), "cross_entropy");
    const std::size_t n = logits.rows(), c = logits.cols();
    if (labels.size() != n) throw DimensionError("cross_entropy: label count differs from logit rows");
    Tensor p = softmax_rows(logits.value());
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c)
            throw DimensionError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " +
                                 std::to_string(c) + ")");
        // log-sum-exp form for the picked class
        const double* li = logits.value().data().data() + i * c;
        const double mx = *std::max_element(li, li + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += std::exp(li[j] - mx);
        loss += mx + std::log(s) - li[labels[i]];
    }
    loss /= static_cast<double>(n);
    return t.record(Tensor::scalar(loss), {logits.id},
                    [l = logits.id, p = std::move(p), lab = std::vector<int>(labels.begin(), labels.end()), n,
                     c](Tape& t, std::size_t self) {
                        const double g = t.grad_buffer(self)[0] / static_cast<double>(n);
                        Tensor& gl = t.grad_buffer(l);
                        for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t j = 0; j < c; ++j)
                                gl.at(i, j) += g * (p.at(i, j) - (static_cast<int>(j) == lab[i] ? 1.0 : 0.0));
                    });
}

Var bce_with_logits(Var logits, std::span<const double> targets) {
    Tape& t = tape_of(logits);
    const std::size_t n = logits.value().size();
    if (targets.size() != n) throw DimensionError("bce_with_logits: target count differs from logits");
    if (n == 0) throw DimensionError("bce_with_logits: empty input");
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = logits.value()[i];
        loss += std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::abs(z)));
    }
    loss /= static_cast<double>(n);
    return t.record(Tensor::scalar(loss), {logits.id},
                    [l = logits.id, y = std::vector<double>(targets.begin(), targets.end()), n](Tape& t,
                                                                                                 std::size_t self) {
                        const double g = t.grad_buffer(self)[0] / static_cast<double>(n);
                        Tensor& gl = t.grad_buffer(l);
                        const Tensor& z = t.value(l);
                        for (std::size_t i = 0; i < n; ++i) gl[i] += g * (1.0 / (1.0 + std::exp(-z[i])) - y[i]);
                    });
}

Var mse(Var pred, const Tensor& target) {
    Tape& t = tape_of(pred);
    if (pred.value().size() != target.size()) throw DimensionError("mse: prediction/target size mismatch");
    const Var diff = sub(pred, t.constant(Tensor(pred.shape(), target.values())));
    return mean(mul(diff, diff));
}

}  // namespace na
