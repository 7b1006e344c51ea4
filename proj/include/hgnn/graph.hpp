#pragma once

#include <span>

#include "hgnn/matrix.hpp"

namespace hgnn {

/// Dense per-task similarity graph over the columns of a hidden
/// representation matrix. Entries are exp(-||h_j - h_l||^2); in
/// classification mode pairs with different labels are negated.
///
/// The graph is rebuilt from the current hidden representation on every
/// forward pass and is treated as a constant by the backward pass.
struct AdjacencyMatrix {
    int task_id = 1;
    Matrix g;
};

AdjacencyMatrix build_classification_adjacency(const Matrix& hidden, std::span<const int> labels,
                                               int task_id = 1);
AdjacencyMatrix build_regression_adjacency(const Matrix& hidden, int task_id = 1);

/// Divides each row by its sum of absolute values. Not part of the default
/// pipeline; exposed for experiments.
void row_normalize(AdjacencyMatrix& adj);

}  // namespace hgnn
