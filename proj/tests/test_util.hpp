#pragma once

#include "neural_atoms/graph.hpp"
#include "neural_atoms/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

namespace na::testing {

/// Connected random graph: a random spanning tree plus `extra` chords.
inline MolecularGraph random_graph(std::size_t n, std::size_t feat, Rng& rng, std::size_t extra = 2) {
    MolecularGraph g;
    g.num_nodes = n;
    std::set<Edge> seen;
    for (std::size_t v = 1; v < n; ++v) {
        const std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
        seen.insert({u, v});
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t t = 0; t < extra && n > 2; ++t) {
        std::size_t a = pick(rng), b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        seen.insert({a, b});
    }
    g.edges.assign(seen.begin(), seen.end());
    g.node_features = random_normal({n, feat}, 1.0, rng);
    g.label = 0;
    return g;
}

inline MolecularGraph path_graph(std::size_t n, std::size_t feat, Rng& rng) {
    MolecularGraph g;
    g.num_nodes = n;
    for (std::size_t v = 1; v < n; ++v) g.edges.push_back({v - 1, v});
    g.node_features = random_normal({n, feat}, 1.0, rng);
    g.label = 0;
    return g;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// Rows of `x` reordered so that row i moves to perm[i].
inline Tensor permute_rows(const Tensor& x, const std::vector<std::size_t>& perm) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < x.cols(); ++c) out.at(perm[i], c) = x.at(i, c);
    return out;
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
    Tensor c({a.rows(), b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) s += a.at(i, p) * b.at(p, j);
            c.at(i, j) = s;
        }
    return c;
}

inline Tensor naive_transpose(const Tensor& a) {
    Tensor t({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

inline Tensor naive_softmax_rows(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double m = x.at(i, 0);
        for (std::size_t j = 1; j < x.cols(); ++j) m = std::max(m, x.at(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) s += std::exp(x.at(i, j) - m);
        for (std::size_t j = 0; j < x.cols(); ++j) y.at(i, j) = std::exp(x.at(i, j) - m) / s;
    }
    return y;
}

}  // namespace na::testing
