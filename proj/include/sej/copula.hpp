#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sej/domain.hpp"

namespace sej {

struct CopulaOptions {
    // Convert elicited rank correlations to Gaussian-copula correlations
    // via rho = 2*sin(pi*r/6). Off: use the values as product-moment
    // correlations directly (sensitivity runs).
    bool rank_transform = true;
    // Repair is rejected when any entry moves more than this.
    double max_repair_drift = 0.05;
    // Eigenvalues above this are treated as numerical zero.
    double psd_tolerance = -1e-10;
};

// Symmetric unit-diagonal correlation matrix over a category order,
// positive semidefinite by construction (possibly after spectral repair).
struct CorrelationMatrix {
    CategorySet categories;
    Eigen::MatrixXd rho;
    bool repaired = false;
    double repair_drift = 0.0; // max absolute entry change during repair

    std::size_t size() const noexcept { return categories.size(); }
};

// Assembles the matrix from the pairwise spec (unlisted pairs 0), applies
// the rank transform, verifies positive semidefiniteness and repairs by
// eigenvalue clipping + diagonal renormalization when needed. Throws
// UnknownCategory, RepairDriftExceeded.
CorrelationMatrix build_matrix(const CorrelationSpec& spec, const CategorySet& categories,
                               const CopulaOptions& options = {});

// n_samples x n_categories uniforms, reproducible bit-for-bit from
// (seed, n, matrix, version).
struct SampleBlock {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> u; // row-major, every entry in (0, 1)
    std::uint64_t seed = 0;
    std::string sampler_version;

    double at(std::size_t r, std::size_t c) const { return u[r * cols + c]; }
    std::vector<double> column(std::size_t c) const;
};

inline constexpr const char* kSamplerVersion = "gc-1";

// Gaussian-copula sampling: correlated standard normals mapped through the
// normal CDF. Deterministic per seed and independent of the worker count.
// threads = 0 picks the hardware count. Throws FactorizationFailure.
SampleBlock sample(const CorrelationMatrix& matrix, std::size_t n_samples, std::uint64_t seed,
                   unsigned threads = 0);

// Analytical conditioning of one node at the uniform value u_star: the
// node's column is the constant u_star and the remaining coordinates
// follow the Gaussian conditional law. Throws InvalidEntry for u_star
// outside (0, 1).
SampleBlock condition(const CorrelationMatrix& matrix, std::size_t node, double u_star,
                      std::size_t n_samples, std::uint64_t seed, unsigned threads = 0);
SampleBlock condition(const CorrelationMatrix& matrix, const std::string& node, double u_star,
                      std::size_t n_samples, std::uint64_t seed, unsigned threads = 0);

} // namespace sej
