#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hgnn/matrix.hpp"  // error types

namespace hgnn::theory {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Linear model with an optional task embedding e appended to every sample.
/// An empty `e` means no embedding (E has zero rows).
struct RidgeInstance {
    Mat X;  // p x n
    Mat Y;  // k x n
    Vec e;  // q
    double lambda = 1.0;

    Mat E() const;      // q x n, every column equal to e
    Mat X_hat() const;  // (p+q) x n, rows of X then rows of E
    /// Throws UsageError on shape mismatch or lambda <= 0.
    void validate() const;
};

struct RidgeSolution {
    Mat W1;  // p x k
    Mat W2;  // (p+q) x k
    double loss1 = 0.0;
    double loss2 = 0.0;
};

/// Cholesky solves of the regularised normal equations. NumericError when the
/// system's reciprocal condition estimate falls below machine epsilon.
RidgeSolution solve_ridge(const RidgeInstance& inst);

Mat matrix_A(const RidgeInstance& inst);  // lambda (X^T X + lambda I)^-1
Mat matrix_B(const RidgeInstance& inst);  // lambda (X^T X + E^T E + lambda I)^-1

struct ResidualErrors {
    double a = 0.0;  // ||(Y - W1^T X) - Y A|| / max(||Y||, 1)
    double b = 0.0;
};
ResidualErrors residual_identity_errors(const RidgeInstance& inst, const RidgeSolution& sol);

/// ||X (X^T X + lambda I)^-1 - (X X^T + lambda I)^-1 X|| relative to the first term.
double push_through_error(const Mat& X, double lambda);

/// X^T X E^T E + E^T E X^T X + 2 lambda E^T E + E^T E E^T E  (n x n).
Mat condition_matrix(const RidgeInstance& inst);

/// 1e-8 times the largest absolute entry.
double psd_tolerance(const Mat& m);
double min_eigenvalue(const Mat& m);
/// UsageError when `m` is not symmetric within `tol` (or 1e-10 if tol is 0).
bool check_psd(const Mat& m, double tol);

struct LossInequalityReport {
    double condition_min_eigenvalue = 0.0;
    bool condition_holds = false;
    double loss1 = 0.0;
    double loss2 = 0.0;
    /// loss1 >= loss2 - 1e-9 whenever the condition holds; vacuously true otherwise.
    bool inequality_holds = true;
    ResidualErrors residual;
    RidgeSolution solution;
};

LossInequalityReport verify_loss_inequality(const RidgeInstance& inst);

struct BoundInputs {
    double n = 1.0;
    double delta = 0.05;
    double x_star = 1.0;
    double beta_star = 1.0;  // read as the weight-norm radius W_*
    double empirical_loss = 0.0;
};

/// empirical_loss + 4 X* b* sqrt(1/n) + 2 X* b* sqrt(ln(1/delta) / (2n)).
double bound_rhs(const BoundInputs& b);

struct BoundOrderingReport {
    bool condition_holds = false;
    double rhs1 = 0.0;
    double rhs2 = 0.0;
    bool ordering_holds = true;  // rhs2 <= rhs1 + 1e-9 when the condition holds
};

/// UsageError when b1 and b2 disagree on n, delta, X* or beta*, or when X*
/// is smaller than some ||x_i|| or ||x_hat_i||.
BoundOrderingReport verify_bound_ordering(const RidgeInstance& inst, const BoundInputs& b1,
                                        const BoundInputs& b2);

/// Largest column norm of X_hat (bounds both ||x_i|| and ||x_hat_i||).
double feature_norm_bound(const RidgeInstance& inst);

struct InstanceDistribution {
    int max_dim = 8;  // p, q, n, k each uniform on 1..max_dim
    std::vector<double> lambdas{0.1, 1.0, 10.0};
};

/// Entries of X, Y, e uniform on [-1, 1]; lambda uniform over the list.
RidgeInstance random_instance(std::uint64_t seed, const InstanceDistribution& dist = {});

struct SweepConfig {
    std::uint64_t seed = 1;
    std::size_t count = 1000;
    InstanceDistribution dist;
    double delta = 0.05;
};

struct SweepRow {
    std::size_t instance_id = 0;
    std::uint64_t seed = 0;
    double condition_min_eigenvalue = 0.0;
    double loss1 = 0.0;
    double loss2 = 0.0;
    double rhs1 = 0.0;
    double rhs2 = 0.0;
    bool condition_holds = false;
    bool inequality_holds = true;
    bool ordering_holds = true;
    double residual_error = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t condition_count = 0;
    std::size_t inequality_violations = 0;
    std::size_t ordering_violations = 0;

    bool ok() const { return inequality_violations == 0 && ordering_violations == 0; }
};

/// Instances are verified concurrently; rows come back in instance order.
/// Bounds use X* = feature_norm_bound, beta* = max(||W1||_F, ||W2||_F) and the
/// per-sample training loss.
SweepResult run_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace hgnn::theory
