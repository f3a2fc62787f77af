#include "bclean/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bclean/kernels.hpp"
#include "json.hpp"

namespace bclean {

double max_abs_offdiag(const Matrix& m) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.dim; ++i) {
        for (std::size_t j = 0; j < m.dim; ++j) {
            if (i != j) v = std::max(v, std::fabs(m.at(i, j)));
        }
    }
    return v;
}

namespace {

// Lower Cholesky factor; returns false if a pivot is not strictly positive.
bool cholesky(const Matrix& m, Matrix& l) {
    const std::size_t n = m.dim;
    l = Matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m.at(i, j) - kernels::dot({l.row(i), j}, {l.row(j), j});
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return false;
                l.at(i, i) = std::sqrt(s);
            } else {
                l.at(i, j) = s / l.at(j, j);
            }
        }
    }
    return true;
}

}  // namespace

Matrix spd_inverse(const Matrix& m) {
    Matrix l;
    if (!cholesky(m, l)) throw NotPositiveDefinite("matrix is not positive-definite");
    const std::size_t n = m.dim;
    // Invert L in place (lower triangular), then M^-1 = L^-T L^-1.
    Matrix li(n);
    for (std::size_t i = 0; i < n; ++i) {
        li.at(i, i) = 1.0 / l.at(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l.at(i, k) * li.at(k, j);
            li.at(i, j) = -s / l.at(i, i);
        }
    }
    Matrix inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += li.at(k, i) * li.at(k, j);
            inv.at(i, j) = s;
            inv.at(j, i) = s;
        }
    }
    return inv;
}

double logdet_spd(const Matrix& m) {
    Matrix l;
    if (!cholesky(m, l)) throw NotPositiveDefinite("matrix is not positive-definite");
    double acc = 0.0;
    for (std::size_t i = 0; i < m.dim; ++i) acc += std::log(l.at(i, i));
    return 2.0 * acc;
}

Matrix empirical_covariance(const PairFeatureMatrix& features, double ridge) {
    const std::size_t n = features.n_rows();
    const std::size_t m = features.n_cols;
    if (n < 2) throw EmptyTable("covariance needs at least 2 feature rows");
    if (ridge < 0.0) throw ConfigError("ridge must be >= 0");

    std::vector<double> mean(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(1.0, {features.row(i), m}, mean);
    }
    for (double& v : mean) v /= static_cast<double>(n);

    Matrix cov(m);
    std::vector<double> centered(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = features.row(i);
        for (std::size_t k = 0; k < m; ++k) centered[k] = row[k] - mean[k];
        kernels::rank1_update(cov.a, centered);
    }
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (double& v : cov.a) v *= scale;
    for (std::size_t k = 0; k < m; ++k) cov.at(k, k) += ridge;
    return cov;
}

Matrix pooled_sweep_covariance(const PairFeatureMatrix& features, std::size_t n_sweeps) {
    const std::size_t total = features.n_rows();
    const std::size_t m = features.n_cols;
    if (n_sweeps == 0 || total % n_sweeps != 0) {
        throw ConfigError("feature rows do not split into sweeps");
    }
    const std::size_t block = total / n_sweeps;
    if (total < 2) throw EmptyTable("covariance needs at least 2 feature rows");

    Matrix cov(m);
    std::vector<double> mean(m);
    std::vector<double> centered(m);
    for (std::size_t s = 0; s < n_sweeps; ++s) {
        const std::size_t begin = s * block;
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t i = 0; i < block; ++i) {
            kernels::axpy(1.0, {features.row(begin + i), m}, mean);
        }
        for (double& v : mean) v /= static_cast<double>(block);
        for (std::size_t i = 0; i < block; ++i) {
            const double* row = features.row(begin + i);
            for (std::size_t k = 0; k < m; ++k) centered[k] = row[k] - mean[k];
            kernels::rank1_update(cov.a, centered);
        }
    }
    const double scale = 1.0 / static_cast<double>(total - 1);
    for (double& v : cov.a) v *= scale;
    return cov;
}

Matrix standardize_covariance(const Matrix& cov, double ridge) {
    const std::size_t m = cov.dim;
    std::vector<double> scale(m);
    for (std::size_t i = 0; i < m; ++i) {
        scale[i] = cov.at(i, i) > 1e-12 ? std::sqrt(cov.at(i, i)) : 0.0;
    }
    Matrix r(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) {
                r.at(i, i) = 1.0 + ridge;
            } else if (scale[i] > 0.0 && scale[j] > 0.0) {
                r.at(i, j) = cov.at(i, j) / (scale[i] * scale[j]);
            }
        }
    }
    return r;
}

namespace {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// KKT residual of the precision estimate against sigma at penalty rho:
// W* = theta^-1 must satisfy W*_ii = Sigma_ii and, off-diagonal,
// W*_ij - Sigma_ij = rho * sign(theta_ij) when theta_ij != 0, otherwise
// |W*_ij - Sigma_ij| <= rho.
double kkt_residual(const Matrix& theta, const Matrix& sigma, double rho) {
    Matrix w = spd_inverse(theta);
    double res = 0.0;
    const std::size_t m = theta.dim;
    for (std::size_t i = 0; i < m; ++i) {
        res = std::max(res, std::fabs(w.at(i, i) - sigma.at(i, i)));
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double g = w.at(i, j) - sigma.at(i, j);
            const double t = theta.at(i, j);
            if (t != 0.0) {
                res = std::max(res, std::fabs(g - rho * (t > 0 ? 1.0 : -1.0)));
            } else {
                res = std::max(res, std::max(0.0, std::fabs(g) - rho));
            }
        }
    }
    return res;
}

}  // namespace

GlassoResult graphical_lasso(const Matrix& sigma, double rho, double tol,
                             std::size_t max_iter) {
    const std::size_t m = sigma.dim;
    if (rho < 0.0) throw ConfigError("rho must be >= 0");
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (std::fabs(sigma.at(i, j) - sigma.at(j, i)) > 1e-10) {
                throw ConfigError("covariance matrix is not symmetric");
            }
        }
        if (sigma.at(i, i) <= 0.0) {
            throw NotPositiveDefinite("covariance diagonal must be positive");
        }
    }

    GlassoResult result;
    if (m == 1) {
        result.theta = Matrix(1);
        result.theta.at(0, 0) = 1.0 / sigma.at(0, 0);
        result.converged = true;
        return result;
    }

    Matrix w = sigma;  // working covariance; diagonal stays fixed
    std::vector<std::vector<double>> betas(m, std::vector<double>(m - 1, 0.0));
    const double inner_tol = std::max(1e-14, tol * 1e-3);
    const std::size_t inner_max = 1000;

    Matrix w11(m - 1);
    std::vector<double> s12(m - 1), w12(m - 1);

    auto recover_theta = [&]() {
        Matrix theta(m);
        std::vector<std::size_t> rest;
        for (std::size_t j = 0; j < m; ++j) {
            rest.clear();
            for (std::size_t k = 0; k < m; ++k) {
                if (k != j) rest.push_back(k);
            }
            double quad = 0.0;
            for (std::size_t k = 0; k < m - 1; ++k) {
                quad += w.at(rest[k], j) * betas[j][k];
            }
            const double tjj = 1.0 / (w.at(j, j) - quad);
            theta.at(j, j) = tjj;
            for (std::size_t k = 0; k < m - 1; ++k) {
                theta.at(rest[k], j) = -betas[j][k] * tjj;
            }
        }
        // Column recoveries disagree transiently; symmetrize.
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double v = 0.5 * (theta.at(i, j) + theta.at(j, i));
                theta.at(i, j) = v;
                theta.at(j, i) = v;
            }
        }
        return theta;
    };

    for (std::size_t sweep = 0; sweep < max_iter; ++sweep) {
        for (std::size_t j = 0; j < m; ++j) {
            // Extract the (m-1) x (m-1) block excluding j.
            std::size_t r = 0;
            for (std::size_t p = 0; p < m; ++p) {
                if (p == j) continue;
                std::size_t c = 0;
                for (std::size_t q = 0; q < m; ++q) {
                    if (q == j) continue;
                    w11.at(r, c) = w.at(p, q);
                    ++c;
                }
                s12[r] = sigma.at(p, j);
                ++r;
            }

            std::vector<double>& beta = betas[j];
            for (std::size_t it = 0; it < inner_max; ++it) {
                double delta = 0.0;
                for (std::size_t k = 0; k < m - 1; ++k) {
                    const double old = beta[k];
                    double grad = s12[k] - kernels::dot({w11.row(k), m - 1}, beta);
                    grad += w11.at(k, k) * old;
                    const double updated = soft_threshold(grad, rho) / w11.at(k, k);
                    beta[k] = updated;
                    delta = std::max(delta, std::fabs(updated - old));
                }
                if (delta <= inner_tol) break;
            }

            for (std::size_t k = 0; k < m - 1; ++k) {
                w12[k] = kernels::dot({w11.row(k), m - 1}, beta);
            }
            r = 0;
            for (std::size_t p = 0; p < m; ++p) {
                if (p == j) continue;
                w.at(p, j) = w12[r];
                w.at(j, p) = w12[r];
                ++r;
            }
        }

        result.iterations = sweep + 1;
        try {
            result.dual_objectives.push_back(logdet_spd(w));
        } catch (const NotPositiveDefinite&) {
            // transient; keep iterating
        }
        Matrix theta = recover_theta();
        double res;
        try {
            res = kkt_residual(theta, sigma, rho);
        } catch (const NotPositiveDefinite&) {
            continue;
        }
        result.theta = theta;
        result.kkt_residual = res;
        if (res <= tol) {
            result.converged = true;
            return result;
        }
    }

    if (result.theta.dim == 0) {
        throw NotPositiveDefinite("graphical lasso could not produce a PD estimate");
    }
    return result;  // IterationLimit: caller may warn, residual is reported
}

std::vector<std::size_t> default_ordering(const Matrix& theta) {
    std::vector<std::size_t> order(theta.dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return theta.at(a, a) > theta.at(b, b);
    });
    return order;
}

Decomposition decompose_precision(const Matrix& theta,
                                  const std::vector<std::size_t>& ordering) {
    const std::size_t m = theta.dim;
    if (ordering.size() != m) throw ConfigError("ordering size mismatch");

    Matrix perm(m);
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = 0; q < m; ++q) {
            perm.at(p, q) = theta.at(ordering[p], ordering[q]);
        }
    }

    // LDL^T of the permuted matrix: perm = L D L^T, L unit lower-triangular.
    Matrix l = Matrix::identity(m);
    std::vector<double> d(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        double dp = perm.at(p, p);
        for (std::size_t k = 0; k < p; ++k) dp -= l.at(p, k) * l.at(p, k) * d[k];
        if (dp <= 0.0 || !std::isfinite(dp)) {
            throw NotPositiveDefinite("precision matrix is not positive-definite");
        }
        d[p] = dp;
        for (std::size_t q = p + 1; q < m; ++q) {
            double s = perm.at(q, p);
            for (std::size_t k = 0; k < p; ++k) s -= l.at(q, k) * l.at(p, k) * d[k];
            l.at(q, p) = s / dp;
        }
    }

    Decomposition out;
    out.b = Matrix(m);
    out.omega.assign(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        out.omega[ordering[p]] = d[p];
        for (std::size_t q = p + 1; q < m; ++q) {
            out.b.at(ordering[q], ordering[p]) = -l.at(q, p);
        }
    }
    return out;
}

SkeletonGraph skeleton_from_b(const Matrix& b, const std::vector<double>& omega,
                              const std::vector<std::size_t>& ordering,
                              double edge_threshold,
                              const std::vector<std::string>& names) {
    SkeletonGraph g;
    g.nodes = names;
    g.ordering = ordering;
    g.noise = omega;
    const std::size_t m = b.dim;
    // B[j][k] != 0 only when k precedes j in the ordering, so emitting
    // parent k -> child j cannot create a cycle.
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p + 1; q < m; ++q) {
            const std::size_t parent = ordering[p];
            const std::size_t child = ordering[q];
            const double w = b.at(child, parent);
            if (std::fabs(w) > edge_threshold) {
                g.edges.push_back({names[parent], names[child], w});
            }
        }
    }
    return g;
}

SkeletonGraph learn_skeleton(const Table& table, const StructureParams& params) {
    std::vector<std::string> names;
    for (const auto& a : table.attributes()) names.push_back(a.name);

    if (table.n_cols() < 2) {
        SkeletonGraph g;
        g.nodes = names;
        if (!names.empty()) {
            g.ordering = {0};
            g.noise = {0.0};
        }
        return g;
    }

    PairFeatureMatrix features = adjacent_pair_features(table);
    Matrix sigma = standardize_covariance(
        pooled_sweep_covariance(features, table.n_cols()), params.ridge);
    GlassoResult glasso = graphical_lasso(sigma, params.rho, params.tol, params.max_iter);

    std::vector<std::size_t> ordering = params.ordering_override.empty()
                                            ? default_ordering(glasso.theta)
                                            : params.ordering_override;
    Decomposition dec = decompose_precision(glasso.theta, ordering);
    return skeleton_from_b(dec.b, dec.omega, ordering, params.edge_threshold, names);
}

std::string skeleton_to_json(const SkeletonGraph& g) {
    nlohmann::ordered_json j;
    j["nodes"] = g.nodes;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) {
        j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    }
    j["ordering"] = g.ordering;
    j["noise"] = g.noise;
    return j.dump(2) + "\n";
}

SkeletonGraph skeleton_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SkeletonGraph g;
    g.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges")) {
        g.edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                           e.at("weight").get<double>()});
    }
    if (j.contains("ordering")) g.ordering = j["ordering"].get<std::vector<std::size_t>>();
    if (j.contains("noise")) g.noise = j["noise"].get<std::vector<double>>();
    return g;
}

std::string skeleton_to_dot(const SkeletonGraph& g) {
    std::ostringstream os;
    os << "digraph skeleton {\n";
    for (const auto& n : g.nodes) os << "  \"" << n << "\";\n";
    for (const auto& e : g.edges) {
        os << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"";
        os.precision(3);
        os << e.weight << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace bclean
