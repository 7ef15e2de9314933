#pragma once

#include "difffake/diffcomb.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace difffake {

/// Samples stored one per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Anomaly model over combined pair features; higher score = more anomalous.
class AnomalyModel {
public:
    virtual ~AnomalyModel() = default;
    virtual std::uint32_t dim() const = 0;
    virtual double score(std::span<const double> x) const = 0;
};

enum class CovarianceType { Diagonal, Full };

inline constexpr double kVarianceFloor = 1e-6;

struct FitInfo {
    std::uint64_t seed = 0;
    /// Number of M-steps performed.
    std::uint32_t iterations = 0;
    bool converged = false;
    /// Total data log-likelihood after the last M-step.
    double final_log_likelihood = 0.0;
    /// Total log-likelihood of each successive parameter set, starting with
    /// the initialization.
    std::vector<double> log_likelihood_history;
    std::vector<std::string> warnings;
};

/// Finite mixture of Gaussians with diagonal or full covariances.
class GmmModel : public AnomalyModel {
public:
    /// Diagonal model. weights: N, means/variances: N x d.
    GmmModel(Eigen::VectorXd weights, RowMatrix means, RowMatrix variances);
    /// Full model. covariances: N matrices of d x d, symmetric positive definite.
    GmmModel(Eigen::VectorXd weights, RowMatrix means, std::vector<Eigen::MatrixXd> covariances);

    std::uint32_t dim() const override { return static_cast<std::uint32_t>(means_.cols()); }
    std::uint32_t n_components() const { return static_cast<std::uint32_t>(means_.rows()); }
    CovarianceType covariance_type() const { return type_; }

    const Eigen::VectorXd& weights() const { return weights_; }
    const RowMatrix& means() const { return means_; }
    /// Diagonal models only.
    const RowMatrix& variances() const;
    /// Full models only.
    const std::vector<Eigen::MatrixXd>& covariances() const;

    /// log(pi_k) + log N(x | mu_k, Sigma_k) for each component.
    Eigen::VectorXd component_log_densities(std::span<const double> x) const;

    /// log sum_k pi_k N(x | mu_k, Sigma_k), evaluated with a max-shifted
    /// log-sum-exp. Throws DimensionError on length mismatch and DataError on
    /// non-finite input.
    double log_density(std::span<const double> x) const;

    /// -log_density(x).
    double score(std::span<const double> x) const override { return -log_density(x); }

    FitInfo& fit_info() { return info_; }
    const FitInfo& fit_info() const { return info_; }

private:
    void prepare();
    void check_input(std::span<const double> x) const;

    CovarianceType type_;
    Eigen::VectorXd weights_;
    RowMatrix means_;
    RowMatrix variances_;
    std::vector<Eigen::MatrixXd> covariances_;
    // Cached: log weight plus normalizing constant per component, and for
    // full models the Cholesky factors.
    Eigen::VectorXd log_norm_;
    RowMatrix inv_variances_;
    std::vector<Eigen::MatrixXd> chol_;
    FitInfo info_;
};

/// Posterior responsibilities for every sample.
struct EStep {
    /// n x N, rows sum to one.
    RowMatrix responsibilities;
    /// Per-sample log-likelihood.
    Eigen::VectorXd log_likelihood;
    double total_log_likelihood = 0.0;
};

EStep expectation(const GmmModel& model, const RowMatrix& data);

struct FitOptions {
    std::uint32_t n_components = 3;
    std::uint64_t seed = 0;
    /// Stop when |LL_t - LL_{t-1}| <= tol * |LL_t|.
    double tol = 1e-6;
    std::uint32_t max_iter = 200;
    CovarianceType covariance = CovarianceType::Diagonal;
    double variance_floor = kVarianceFloor;
    /// Invoked after every E-step with the iteration index (0 = initial
    /// parameters).
    std::function<void(std::uint32_t, const EStep&)> on_e_step;
};

/// EM with k-means++ seeding of the means, per-feature sample variance as the
/// initial (co)variance and uniform initial weights. Variances are kept at or
/// above the floor; for full covariances the eigenvalues are clipped, which
/// is the constrained maximizer, so the likelihood never decreases.
///
/// Throws DataError when there are fewer distinct samples than components and
/// DimensionError for ragged input. All-identical data fits with floored
/// variances and records a warning.
GmmModel fit_gmm(const RowMatrix& data, const FitOptions& options);

/// Fits on combined features; every feature must come from a real pair.
GmmModel fit_gmm(std::span<const CombinedFeature> features, const FitOptions& options);

RowMatrix to_matrix(std::span<const CombinedFeature> features);

/// Binary little-endian layout:
///   "DFGM" | u32 version | u32 d | u32 N
///   N x f64 weights | N*d x f64 means |
///   version 1 (diagonal): N*d x f64 variances
///   version 2 (full):     N*d*d x f64 covariances (row-major)
///   trailer: u64 seed | u32 iterations | f64 final log-likelihood
void save_model(const GmmModel& model, const std::filesystem::path& path);

GmmModel load_model(const std::filesystem::path& path, std::optional<std::uint32_t> expected_dim = std::nullopt);

} // namespace difffake
