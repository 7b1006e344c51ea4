#include "hgnn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "hgnn/matrix.hpp"
#include "hgnn/rng.hpp"

namespace hgnn::theory {

namespace {

constexpr double kLossSlack = 1e-9;

Mat regularised_gram(const Mat& A, double lambda) {
    Mat g = A * A.transpose();
    g.diagonal().array() += lambda;
    return g;
}

/// Solves (A A^T + lambda I) W = A Y^T.
Mat ridge_weights(const Mat& A, const Mat& Y, double lambda) {
    Eigen::LLT<Mat> llt(regularised_gram(A, lambda));
    if (llt.info() != Eigen::Success || llt.rcond() < std::numeric_limits<double>::epsilon()) {
        throw NumericError("ridge system is ill-conditioned (lambda=" + std::to_string(lambda) + ")");
    }
    return llt.solve(A * Y.transpose());
}

/// lambda (M + lambda I)^-1 for symmetric positive semidefinite M.
Mat scaled_resolvent(const Mat& M, double lambda) {
    Mat s = M;
    s.diagonal().array() += lambda;
    Eigen::LLT<Mat> llt(s);
    if (llt.info() != Eigen::Success) throw NumericError("resolvent factorisation failed");
    return lambda * llt.solve(Mat::Identity(M.rows(), M.cols()));
}

}  // namespace

Mat RidgeInstance::E() const {
    Mat out(e.size(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) out.col(c) = e;
    return out;
}

Mat RidgeInstance::X_hat() const {
    Mat out(X.rows() + e.size(), X.cols());
    out.topRows(X.rows()) = X;
    out.bottomRows(e.size()) = E();
    return out;
}

void RidgeInstance::validate() const {
    if (X.rows() == 0 || X.cols() == 0) throw UsageError("ridge instance: X must be non-empty");
    if (Y.cols() != X.cols()) throw UsageError("ridge instance: X and Y disagree on sample count");
    if (Y.rows() == 0) throw UsageError("ridge instance: Y must be non-empty");
    if (!(lambda > 0.0)) throw UsageError("ridge instance: lambda must be positive");
}

RidgeSolution solve_ridge(const RidgeInstance& inst) {
    inst.validate();
    RidgeSolution s;
    s.W1 = ridge_weights(inst.X, inst.Y, inst.lambda);
    const Mat Xh = inst.X_hat();
    s.W2 = ridge_weights(Xh, inst.Y, inst.lambda);
    s.loss1 = (inst.Y - s.W1.transpose() * inst.X).squaredNorm();
    s.loss2 = (inst.Y - s.W2.transpose() * Xh).squaredNorm();
    return s;
}

Mat matrix_A(const RidgeInstance& inst) {
    return scaled_resolvent(inst.X.transpose() * inst.X, inst.lambda);
}

Mat matrix_B(const RidgeInstance& inst) {
    const Mat E = inst.E();
    return scaled_resolvent(inst.X.transpose() * inst.X + E.transpose() * E, inst.lambda);
}

ResidualErrors residual_identity_errors(const RidgeInstance& inst, const RidgeSolution& sol) {
    const double scale = std::max(inst.Y.norm(), 1.0);
    const Mat r1 = inst.Y - sol.W1.transpose() * inst.X;
    const Mat r2 = inst.Y - sol.W2.transpose() * inst.X_hat();
    return {(r1 - inst.Y * matrix_A(inst)).norm() / scale, (r2 - inst.Y * matrix_B(inst)).norm() / scale};
}

double push_through_error(const Mat& X, double lambda) {
    Mat small = X.transpose() * X;
    small.diagonal().array() += lambda;
    Mat big = X * X.transpose();
    big.diagonal().array() += lambda;
    const Mat left = X * small.llt().solve(Mat::Identity(small.rows(), small.cols()));
    const Mat right = big.llt().solve(X);
    return (left - right).norm() / std::max(left.norm(), std::numeric_limits<double>::min());
}

Mat condition_matrix(const RidgeInstance& inst) {
    const Mat E = inst.E();
    const Mat XtX = inst.X.transpose() * inst.X;
    const Mat EtE = E.transpose() * E;
    return XtX * EtE + EtE * XtX + 2.0 * inst.lambda * EtE + EtE * EtE;
}

double psd_tolerance(const Mat& m) {
    return m.size() == 0 ? 0.0 : 1e-8 * m.cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
    return solver.eigenvalues().minCoeff();
}

bool check_psd(const Mat& m, double tol) {
    if (m.rows() != m.cols()) throw UsageError("check_psd: matrix is not square");
    if (tol < 0.0) throw UsageError("check_psd: tolerance must be non-negative");
    const double sym_tol = tol > 0.0 ? tol : 1e-10;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol) {
        throw UsageError("check_psd: matrix is not symmetric");
    }
    return min_eigenvalue(m) >= -tol;
}

LossInequalityReport verify_loss_inequality(const RidgeInstance& inst) {
    LossInequalityReport r;
    r.solution = solve_ridge(inst);
    const Mat C = condition_matrix(inst);
    const Mat sym = 0.5 * (C + C.transpose());
    r.condition_min_eigenvalue = min_eigenvalue(sym);
    r.condition_holds = r.condition_min_eigenvalue >= -psd_tolerance(sym);
    r.loss1 = r.solution.loss1;
    r.loss2 = r.solution.loss2;
    r.inequality_holds = !r.condition_holds || r.loss1 >= r.loss2 - kLossSlack;
    r.residual = residual_identity_errors(inst, r.solution);
    return r;
}

double bound_rhs(const BoundInputs& b) {
    if (!(b.delta > 0.0 && b.delta < 1.0)) {
        throw UsageError("bound: delta must lie strictly between 0 and 1");
    }
    if (!(b.n > 0.0)) throw UsageError("bound: n must be positive");
    if (b.x_star < 0.0 || b.beta_star < 0.0) throw UsageError("bound: X* and beta* must be non-negative");
    const double c = b.x_star * b.beta_star;
    return b.empirical_loss + 4.0 * c * std::sqrt(1.0 / b.n) +
           2.0 * c * std::sqrt(std::log(1.0 / b.delta) / (2.0 * b.n));
}

double feature_norm_bound(const RidgeInstance& inst) {
    return inst.X_hat().colwise().norm().maxCoeff();
}

BoundOrderingReport verify_bound_ordering(const RidgeInstance& inst, const BoundInputs& b1,
                                        const BoundInputs& b2) {
    if (b1.n != b2.n || b1.delta != b2.delta || b1.x_star != b2.x_star || b1.beta_star != b2.beta_star) {
        throw UsageError("bound ordering: both bounds must share n, delta, X* and beta*");
    }
    if (b1.x_star < feature_norm_bound(inst) * (1.0 - 1e-12)) {
        throw UsageError("bound ordering: X* is smaller than a sample norm");
    }
    BoundOrderingReport r;
    const Mat C = condition_matrix(inst);
    const Mat sym = 0.5 * (C + C.transpose());
    r.condition_holds = min_eigenvalue(sym) >= -psd_tolerance(sym);
    r.rhs1 = bound_rhs(b1);
    r.rhs2 = bound_rhs(b2);
    r.ordering_holds = !r.condition_holds || r.rhs2 <= r.rhs1 + kLossSlack;
    return r;
}

RidgeInstance random_instance(std::uint64_t seed, const InstanceDistribution& dist) {
    if (dist.max_dim < 1 || dist.lambdas.empty()) throw UsageError("instance distribution is empty");
    Rng rng(seed);
    auto dim = [&] { return static_cast<Eigen::Index>(1 + rng.below(static_cast<std::uint64_t>(dist.max_dim))); };
    const Eigen::Index p = dim(), q = dim(), n = dim(), k = dim();
    auto fill = [&](Eigen::Index r, Eigen::Index c) {
        Mat m(r, c);
        for (Eigen::Index j = 0; j < c; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
        return m;
    };
    RidgeInstance inst;
    inst.X = fill(p, n);
    inst.Y = fill(k, n);
    inst.e = fill(q, 1).col(0);
    inst.lambda = dist.lambdas[rng.below(dist.lambdas.size())];
    return inst;
}

SweepResult run_sweep(const SweepConfig& config) {
    SweepResult result;
    result.rows.resize(config.count);
    std::vector<std::exception_ptr> errors(config.count);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(config.count); ++i) {
        try {
            SweepRow& row = result.rows[static_cast<std::size_t>(i)];
            row.instance_id = static_cast<std::size_t>(i);
            row.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
            const RidgeInstance inst = random_instance(row.seed, config.dist);
            const LossInequalityReport t1 = verify_loss_inequality(inst);
            const double n = static_cast<double>(inst.X.cols());
            BoundInputs b1{n, config.delta, feature_norm_bound(inst),
                           std::max(t1.solution.W1.norm(), t1.solution.W2.norm()), t1.loss1 / n};
            BoundInputs b2 = b1;
            b2.empirical_loss = t1.loss2 / n;
            const BoundOrderingReport t2 = verify_bound_ordering(inst, b1, b2);
            row.condition_min_eigenvalue = t1.condition_min_eigenvalue;
            row.loss1 = t1.loss1;
            row.loss2 = t1.loss2;
            row.rhs1 = t2.rhs1;
            row.rhs2 = t2.rhs2;
            row.condition_holds = t1.condition_holds;
            row.inequality_holds = t1.inequality_holds;
            row.ordering_holds = t2.ordering_holds;
            row.residual_error = std::max(t1.residual.a, t1.residual.b);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& row : result.rows) {
        result.condition_count += row.condition_holds;
        result.inequality_violations += !row.inequality_holds;
        result.ordering_violations += !row.ordering_holds;
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "# beta_star is read as the weight-norm radius W_star = max(||W1||_F, ||W2||_F); "
           "empirical loss is the per-sample training loss\n";
    out << "instance_id,seed,condition_min_eigenvalue,loss1,loss2,rhs1,rhs2,condition_holds,inequality_holds\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : result.rows) {
        out << r.instance_id << ',' << r.seed << ',' << num(r.condition_min_eigenvalue) << ','
            << num(r.loss1) << ',' << num(r.loss2) << ',' << num(r.rhs1) << ',' << num(r.rhs2) << ','
            << (r.condition_holds ? 1 : 0) << ',' << (r.inequality_holds ? 1 : 0) << '\n';
    }
}

}  // namespace hgnn::theory
