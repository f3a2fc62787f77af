#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bclean/similarity.hpp"
#include "bclean/table.hpp"

namespace bclean {

// Small square dense matrix, row-major. Everything here is m x m with m =
// number of attributes, so no sparse machinery is warranted.
struct Matrix {
    std::size_t dim = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t d, double fill = 0.0) : dim(d), a(d * d, fill) {}
    static Matrix identity(std::size_t d) {
        Matrix m(d);
        for (std::size_t i = 0; i < d; ++i) m.at(i, i) = 1.0;
        return m;
    }
    double& at(std::size_t i, std::size_t j) { return a[i * dim + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
    const double* row(std::size_t i) const { return a.data() + i * dim; }
    double* row(std::size_t i) { return a.data() + i * dim; }
};

double max_abs_offdiag(const Matrix& m);

// Cholesky-based inverse of a symmetric positive-definite matrix; throws
// NotPositiveDefinite. Used for KKT checks and the rho = 0 oracle route.
Matrix spd_inverse(const Matrix& m);
double logdet_spd(const Matrix& m);

struct GlassoResult {
    Matrix theta;
    bool converged = false;
    std::size_t iterations = 0;
    double kkt_residual = 0.0;
    // Dual objective (logdet W) per sweep; non-decreasing by construction.
    std::vector<double> dual_objectives;
};

struct SkeletonEdge {
    std::string from;  // parent
    std::string to;    // child
    double weight;     // signed autoregression coefficient
};

struct SkeletonGraph {
    std::vector<std::string> nodes;
    std::vector<SkeletonEdge> edges;
    std::vector<std::size_t> ordering;       // position -> attribute index
    std::vector<double> noise;               // per-node diagonal of Omega
};

struct StructureParams {
    double ridge = 1e-4;
    double rho = 0.1;
    double tol = 1e-4;
    std::size_t max_iter = 200;
    double edge_threshold = 0.2;
    std::vector<std::size_t> ordering_override;  // empty -> decreasing diag(Theta)
};

// ---------------------------------------------------------------- operations

// Centered sample covariance (1/(N-1)) of the feature rows plus ridge * I.
Matrix empirical_covariance(const PairFeatureMatrix& features, double ridge);

// Correlation-scaled covariance (unit diagonal, then + ridge * I). Feature
// variances depend on pool sizes and value lengths, so the glasso penalty is
// only meaningful on this scale; constant columns keep a unit diagonal.
Matrix standardize_covariance(const Matrix& cov, double ridge);

// Covariance of the pooled sweeps with per-sweep column means removed. Each
// sweep holds its own sort attribute near similarity 1, so pooling raw rows
// manufactures cross-sweep correlation between unrelated attributes; the
// within-sweep covariance keeps only pair-level alignment.
Matrix pooled_sweep_covariance(const PairFeatureMatrix& features, std::size_t n_sweeps);

// Block coordinate descent over columns of the working covariance W, lasso
// subproblems solved by cyclic coordinate descent; penalty applies to
// off-diagonal entries only. Terminates when the KKT residual of the
// recovered precision matrix falls below tol.
GlassoResult graphical_lasso(const Matrix& sigma, double rho, double tol,
                             std::size_t max_iter);

// Theta = (I - B) Omega (I - B)^T with B strictly lower-triangular under
// `ordering` (realized through the LDL^T factorization of the permuted
// Theta). Returns B in original attribute indexing plus diagonal Omega.
struct Decomposition {
    Matrix b;
    std::vector<double> omega;
};
Decomposition decompose_precision(const Matrix& theta,
                                  const std::vector<std::size_t>& ordering);

SkeletonGraph skeleton_from_b(const Matrix& b, const std::vector<double>& omega,
                              const std::vector<std::size_t>& ordering,
                              double edge_threshold,
                              const std::vector<std::string>& names);

SkeletonGraph learn_skeleton(const Table& table, const StructureParams& params);

std::string skeleton_to_json(const SkeletonGraph& g);
SkeletonGraph skeleton_from_json(const std::string& text);
std::string skeleton_to_dot(const SkeletonGraph& g);

std::vector<std::size_t> default_ordering(const Matrix& theta);

}  // namespace bclean
