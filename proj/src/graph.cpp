#include "hgnn/graph.hpp"

#include <cmath>
#include <string>

#include "hgnn/kernels.hpp"

namespace hgnn {

namespace {

Matrix gaussian_similarity(const Matrix& hidden) {
    const std::size_t n = hidden.cols();
    Matrix g(n, n);
    kernels::pairwise_sq_distances(hidden.data(), hidden.rows(), n, g.data());
    for (double& v : g.values()) v = std::exp(-v);
    return g;
}

}  // namespace

AdjacencyMatrix build_classification_adjacency(const Matrix& hidden, std::span<const int> labels,
                                               int task_id) {
    if (hidden.cols() != labels.size()) {
        throw ShapeError("classification adjacency: " + std::to_string(hidden.cols()) +
                         " hidden columns but " + std::to_string(labels.size()) + " labels");
    }
    Matrix g = gaussian_similarity(hidden);
    const std::size_t n = hidden.cols();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l)
            if (labels[j] != labels[l]) g(j, l) = -g(j, l);
    return {task_id, std::move(g)};
}

AdjacencyMatrix build_regression_adjacency(const Matrix& hidden, int task_id) {
    return {task_id, gaussian_similarity(hidden)};
}

void row_normalize(AdjacencyMatrix& adj) {
    Matrix& g = adj.g;
    for (std::size_t r = 0; r < g.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < g.cols(); ++c) total += std::abs(g(r, c));
        // The diagonal is 1, so total >= 1.
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) /= total;
    }
}

}  // namespace hgnn
