#include "sej/copula.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "sej/rng.hpp"

namespace sej {

namespace {

constexpr std::size_t kBlockRows = 16384;

double rank_to_gaussian(double r) { return 2.0 * std::sin(std::numbers::pi * r / 6.0); }

// Square root factor F with F*F^T = m. Cholesky when positive definite,
// symmetric eigen square root otherwise (semidefinite matrices).
Eigen::MatrixXd factor(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::FactorizationFailure, "eigendecomposition failed");
    }
    Eigen::VectorXd lambda = es.eigenvalues();
    if (lambda.minCoeff() < -1e-8) {
        throw Error(Errc::FactorizationFailure,
                    "matrix is not positive semidefinite (min eigenvalue " +
                        std::to_string(lambda.minCoeff()) + ")");
    }
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        lambda[i] = std::sqrt(std::max(lambda[i], 0.0));
    }
    return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

// Runs fn(block_index, first_row, last_row) over fixed-size row blocks on
// a small pool. Blocks write disjoint output, so the result does not
// depend on the worker count or scheduling.
template <typename Fn>
void for_each_block(std::size_t n_rows, unsigned threads, Fn&& fn) {
    const std::size_t n_blocks = (n_rows + kBlockRows - 1) / kBlockRows;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));

    if (threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            fn(b, b * kBlockRows, std::min(n_rows, (b + 1) * kBlockRows));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
            fn(b, b * kBlockRows, std::min(n_rows, (b + 1) * kBlockRows));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

double to_open_unit(double z) {
    const double u = normal_cdf(z);
    return std::min(std::max(u, 1e-300), 1.0 - 1e-16);
}

} // namespace

CorrelationMatrix build_matrix(const CorrelationSpec& spec, const CategorySet& categories,
                               const CopulaOptions& options) {
    const auto n = static_cast<Eigen::Index>(categories.size());
    CorrelationMatrix out{categories, Eigen::MatrixXd::Identity(n, n)};
    for (const auto& e : spec.entries()) {
        const auto i = static_cast<Eigen::Index>(categories.index_of(e.a));
        const auto j = static_cast<Eigen::Index>(categories.index_of(e.b));
        const double rho = options.rank_transform ? rank_to_gaussian(e.r) : e.r;
        out.rho(i, j) = rho;
        out.rho(j, i) = rho;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.rho);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::FactorizationFailure, "eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() >= options.psd_tolerance) {
        return out; // as-specified
    }

    // Spectral repair: clip negative eigenvalues, then renormalize the
    // diagonal back to 1.
    Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd repaired =
        es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd diag = repaired.diagonal();
    if (diag.minCoeff() <= 0.0) {
        throw Error(Errc::FactorizationFailure, "degenerate diagonal after repair");
    }
    Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
    repaired = scale.asDiagonal() * repaired * scale.asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) repaired(i, i) = 1.0;

    const double drift = (repaired - out.rho).cwiseAbs().maxCoeff();
    if (drift > options.max_repair_drift) {
        throw Error(Errc::RepairDriftExceeded,
                    "repair moved an entry by " + std::to_string(drift));
    }
    out.rho = repaired;
    out.repaired = true;
    out.repair_drift = drift;
    return out;
}

std::vector<double> SampleBlock::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = u[r * cols + c];
    return out;
}

SampleBlock sample(const CorrelationMatrix& matrix, std::size_t n_samples, std::uint64_t seed,
                   unsigned threads) {
    if (n_samples == 0) throw Error(Errc::InvalidEntry, "n_samples must be >= 1");
    const std::size_t k = matrix.size();
    const Eigen::MatrixXd f = factor(matrix.rho);

    SampleBlock out;
    out.rows = n_samples;
    out.cols = k;
    out.seed = seed;
    out.sampler_version = kSamplerVersion;
    out.u.resize(n_samples * k);

    for_each_block(n_samples, threads, [&](std::size_t block, std::size_t r0, std::size_t r1) {
        std::mt19937_64 engine(derive_seed(seed, block));
        std::vector<double> z(k);
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t j = 0; j < k; ++j) z[j] = normal_quantile(open_uniform(engine));
            double* row = out.u.data() + r * k;
            for (std::size_t i = 0; i < k; ++i) {
                double y = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    y += f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
                }
                row[i] = to_open_unit(y);
            }
        }
    });
    return out;
}

SampleBlock condition(const CorrelationMatrix& matrix, std::size_t node, double u_star,
                      std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    if (n_samples == 0) throw Error(Errc::InvalidEntry, "n_samples must be >= 1");
    const std::size_t k = matrix.size();
    if (node >= k) throw Error(Errc::UnknownCategory, "node index out of range");
    if (!(u_star > 0.0 && u_star < 1.0)) {
        throw Error(Errc::InvalidEntry, "conditioning percentile must lie in (0, 1)");
    }
    const double z_star = normal_quantile(u_star);

    // Gaussian conditional: mean c*z_star, covariance S_rr - c*c^T, where
    // c is the node's correlation column over the remaining coordinates.
    const auto m = static_cast<Eigen::Index>(k - 1);
    Eigen::VectorXd c(m);
    Eigen::MatrixXd rest(m, m);
    std::vector<std::size_t> keep;
    keep.reserve(k - 1);
    for (std::size_t i = 0; i < k; ++i) {
        if (i != node) keep.push_back(i);
    }
    for (Eigen::Index a = 0; a < m; ++a) {
        c[a] = matrix.rho(static_cast<Eigen::Index>(keep[a]), static_cast<Eigen::Index>(node));
        for (Eigen::Index b = 0; b < m; ++b) {
            rest(a, b) = matrix.rho(static_cast<Eigen::Index>(keep[a]),
                                    static_cast<Eigen::Index>(keep[b]));
        }
    }
    const Eigen::VectorXd mu = c * z_star;
    const Eigen::MatrixXd cond_cov = rest - c * c.transpose();
    const Eigen::MatrixXd f = factor(cond_cov);

    SampleBlock out;
    out.rows = n_samples;
    out.cols = k;
    out.seed = seed;
    out.sampler_version = kSamplerVersion;
    out.u.resize(n_samples * k);

    for_each_block(n_samples, threads, [&](std::size_t block, std::size_t r0, std::size_t r1) {
        std::mt19937_64 engine(derive_seed(seed, block));
        std::vector<double> t(k - 1);
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t j = 0; j + 1 < k; ++j) t[j] = normal_quantile(open_uniform(engine));
            double* row = out.u.data() + r * k;
            row[node] = u_star;
            for (Eigen::Index i = 0; i < m; ++i) {
                double y = mu[i];
                for (Eigen::Index j = 0; j < m; ++j) y += f(i, j) * t[static_cast<std::size_t>(j)];
                row[keep[static_cast<std::size_t>(i)]] = to_open_unit(y);
            }
        }
    });
    return out;
}

SampleBlock condition(const CorrelationMatrix& matrix, const std::string& node, double u_star,
                      std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    return condition(matrix, matrix.categories.index_of(node), u_star, n_samples, seed, threads);
}

} // namespace sej
