#include "difffake/gmm.hpp"

#include "binary_io.hpp"
#include "difffake/error.hpp"
#include "difffake/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace difffake {

namespace {

constexpr char kModelMagic[5] = "DFGM";
constexpr std::uint32_t kVersionDiagonal = 1;
constexpr std::uint32_t kVersionFull = 2;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (m == kNegInf) {
        return kNegInf;
    }
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        s += std::exp(v[k] - m);
    }
    return m + std::log(s);
}

void check_weights(const Eigen::VectorXd& w) {
    if (w.size() == 0) {
        throw std::invalid_argument("mixture needs at least one component");
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        if (!(w[k] >= 0.0) || !std::isfinite(w[k])) {
            throw std::invalid_argument("mixture weights must be finite and non-negative");
        }
        total += w[k];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("mixture weights must sum to 1");
    }
}

std::size_t count_distinct_rows(const RowMatrix& data, std::size_t stop_at) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (data(a, j) != data(b, j)) return data(a, j) < data(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size() && distinct < stop_at; ++i) {
        if (less(order[i - 1], order[i])) ++distinct;
    }
    return distinct;
}

RowMatrix kmeans_plus_plus(const RowMatrix& data, std::uint32_t k, Rng& rng) {
    const Eigen::Index n = data.rows();
    RowMatrix centers(k, data.cols());
    centers.row(0) = data.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double dist = 0.0;
            for (Eigen::Index j = 0; j < data.cols(); ++j) {
                const double diff = data(i, j) - centers(c - 1, j);
                dist += diff * diff;
            }
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], dist);
            total += d2[static_cast<std::size_t>(i)];
        }
        // total > 0 because there are at least k distinct rows.
        const double target = rng.uniform() * total;
        double acc = 0.0;
        Eigen::Index pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d2[static_cast<std::size_t>(i)] <= 0.0) continue;
            pick = i;
            acc += d2[static_cast<std::size_t>(i)];
            if (acc > target) break;
        }
        centers.row(c) = data.row(pick);
    }
    return centers;
}

Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd& s, double floor) {
    const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
    Eigen::MatrixXd out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

void m_step(const RowMatrix& data, const RowMatrix& resp, CovarianceType type, double floor,
            Eigen::VectorXd& weights, RowMatrix& means, RowMatrix& variances,
            std::vector<Eigen::MatrixXd>& covariances) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const Eigen::Index k_count = resp.cols();

    Eigen::VectorXd nk = Eigen::VectorXd::Zero(k_count);
    RowMatrix sums = RowMatrix::Zero(k_count, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < k_count; ++k) {
            const double r = resp(i, k);
            nk[k] += r;
            for (Eigen::Index j = 0; j < d; ++j) {
                sums(k, j) += r * data(i, j);
            }
        }
    }
    const double total = nk.sum();
    for (Eigen::Index k = 0; k < k_count; ++k) {
        weights[k] = nk[k] / total;
        if (nk[k] > 0.0) {
            means.row(k) = sums.row(k) / nk[k];
        }
    }

    if (type == CovarianceType::Diagonal) {
        RowMatrix sq = RowMatrix::Zero(k_count, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < k_count; ++k) {
                const double r = resp(i, k);
                for (Eigen::Index j = 0; j < d; ++j) {
                    const double diff = data(i, j) - means(k, j);
                    sq(k, j) += r * (diff * diff);
                }
            }
        }
        for (Eigen::Index k = 0; k < k_count; ++k) {
            if (!(nk[k] > 0.0)) continue;
            for (Eigen::Index j = 0; j < d; ++j) {
                variances(k, j) = std::max(sq(k, j) / nk[k], floor);
            }
        }
    } else {
        for (Eigen::Index k = 0; k < k_count; ++k) {
            if (!(nk[k] > 0.0)) continue;
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::VectorXd diff = (data.row(i) - means.row(k)).transpose();
                s.noalias() += resp(i, k) * diff * diff.transpose();
            }
            covariances[static_cast<std::size_t>(k)] = clip_eigenvalues(s / nk[k], floor);
        }
    }
}

GmmModel make_model(CovarianceType type, const Eigen::VectorXd& w, const RowMatrix& means,
                    const RowMatrix& variances, const std::vector<Eigen::MatrixXd>& covariances) {
    if (type == CovarianceType::Diagonal) {
        return GmmModel(w, means, variances);
    }
    return GmmModel(w, means, covariances);
}

} // namespace

GmmModel::GmmModel(Eigen::VectorXd weights, RowMatrix means, RowMatrix variances)
    : type_(CovarianceType::Diagonal), weights_(std::move(weights)), means_(std::move(means)),
      variances_(std::move(variances)) {
    check_weights(weights_);
    if (means_.rows() != weights_.size() || means_.cols() == 0 || variances_.rows() != means_.rows() ||
        variances_.cols() != means_.cols()) {
        throw DimensionError("inconsistent mixture parameter shapes");
    }
    if (!means_.allFinite() || !variances_.allFinite() || (variances_.array() <= 0.0).any()) {
        throw std::invalid_argument("means must be finite and variances finite and positive");
    }
    prepare();
}

GmmModel::GmmModel(Eigen::VectorXd weights, RowMatrix means, std::vector<Eigen::MatrixXd> covariances)
    : type_(CovarianceType::Full), weights_(std::move(weights)), means_(std::move(means)),
      covariances_(std::move(covariances)) {
    check_weights(weights_);
    if (means_.rows() != weights_.size() || means_.cols() == 0 ||
        covariances_.size() != static_cast<std::size_t>(means_.rows())) {
        throw DimensionError("inconsistent mixture parameter shapes");
    }
    for (const auto& c : covariances_) {
        if (c.rows() != means_.cols() || c.cols() != means_.cols()) {
            throw DimensionError("covariance matrix has wrong shape");
        }
        if (!c.allFinite()) {
            throw std::invalid_argument("covariances must be finite");
        }
    }
    if (!means_.allFinite()) {
        throw std::invalid_argument("means must be finite");
    }
    prepare();
}

const RowMatrix& GmmModel::variances() const {
    if (type_ != CovarianceType::Diagonal) {
        throw std::logic_error("variances() is only defined for diagonal models");
    }
    return variances_;
}

const std::vector<Eigen::MatrixXd>& GmmModel::covariances() const {
    if (type_ != CovarianceType::Full) {
        throw std::logic_error("covariances() is only defined for full models");
    }
    return covariances_;
}

void GmmModel::prepare() {
    const Eigen::Index n = means_.rows();
    const double d = static_cast<double>(means_.cols());
    log_norm_.resize(n);
    if (type_ == CovarianceType::Diagonal) {
        for (Eigen::Index k = 0; k < n; ++k) {
            double log_det = 0.0;
            for (Eigen::Index j = 0; j < means_.cols(); ++j) {
                log_det += std::log(variances_(k, j));
            }
            log_norm_[k] = std::log(weights_[k]) - 0.5 * (d * kLog2Pi + log_det);
        }
        return;
    }
    chol_.clear();
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::LLT<Eigen::MatrixXd> llt(covariances_[static_cast<std::size_t>(k)]);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("covariance matrix is not positive definite");
        }
        Eigen::MatrixXd l = llt.matrixL();
        const double log_det = 2.0 * l.diagonal().array().log().sum();
        log_norm_[k] = std::log(weights_[k]) - 0.5 * (d * kLog2Pi + log_det);
        chol_.push_back(std::move(l));
    }
}

void GmmModel::check_input(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(means_.cols())) {
        throw DimensionError("feature length " + std::to_string(x.size()) + " does not match model dim " +
                             std::to_string(means_.cols()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw DataError("non-finite feature component");
        }
    }
}

Eigen::VectorXd GmmModel::component_log_densities(std::span<const double> x) const {
    check_input(x);
    const Eigen::Index n = means_.rows();
    const Eigen::Index d = means_.cols();
    Eigen::VectorXd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double maha = 0.0;
        if (type_ == CovarianceType::Diagonal) {
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = x[static_cast<std::size_t>(j)] - means_(k, j);
                maha += diff * diff / variances_(k, j);
            }
        } else {
            Eigen::VectorXd diff(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                diff[j] = x[static_cast<std::size_t>(j)] - means_(k, j);
            }
            maha = chol_[static_cast<std::size_t>(k)].triangularView<Eigen::Lower>().solve(diff).squaredNorm();
        }
        out[k] = log_norm_[k] - 0.5 * maha;
    }
    return out;
}

double GmmModel::log_density(std::span<const double> x) const {
    return log_sum_exp(component_log_densities(x));
}

EStep expectation(const GmmModel& model, const RowMatrix& data) {
    if (data.cols() != static_cast<Eigen::Index>(model.dim())) {
        throw DimensionError("data width does not match model dim");
    }
    const Eigen::Index n = data.rows();
    EStep out;
    out.responsibilities.resize(n, model.n_components());
    out.log_likelihood.resize(n);
    out.total_log_likelihood = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd lp =
            model.component_log_densities(std::span<const double>(data.row(i).data(), static_cast<std::size_t>(data.cols())));
        const double lse = log_sum_exp(lp);
        for (Eigen::Index k = 0; k < lp.size(); ++k) {
            out.responsibilities(i, k) = std::exp(lp[k] - lse);
        }
        out.log_likelihood[i] = lse;
        out.total_log_likelihood += lse;
    }
    return out;
}

GmmModel fit_gmm(const RowMatrix& data, const FitOptions& options) {
    const std::uint32_t k = options.n_components;
    if (k == 0) {
        throw std::invalid_argument("n_components must be positive");
    }
    if (!(options.tol >= 0.0)) {
        throw std::invalid_argument("tol must be non-negative");
    }
    if (!(options.variance_floor > 0.0)) {
        throw std::invalid_argument("variance floor must be positive");
    }
    if (data.cols() == 0) {
        throw DimensionError("features must have positive length");
    }
    if (!data.allFinite()) {
        throw DataError("training features contain non-finite values");
    }
    const std::size_t distinct = count_distinct_rows(data, k + 1);
    if (distinct < k) {
        throw DataError("insufficient data: " + std::to_string(k) + " components need at least " +
                        std::to_string(k) + " distinct samples, got " + std::to_string(distinct));
    }

    FitInfo info;
    info.seed = options.seed;
    if (distinct == 1) {
        info.warnings.push_back("all training samples are identical; variances held at the floor");
    }

    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    Rng rng(options.seed);
    RowMatrix means = kmeans_plus_plus(data, k, rng);

    Eigen::RowVectorXd feature_var(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += data(i, j);
        const double mean = s / static_cast<double>(n);
        double sq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double diff = data(i, j) - mean;
            sq += diff * diff;
        }
        feature_var[j] = std::max(sq / static_cast<double>(n), options.variance_floor);
    }
    RowMatrix variances = feature_var.replicate(k, 1);
    std::vector<Eigen::MatrixXd> covariances;
    if (options.covariance == CovarianceType::Full) {
        covariances.assign(k, Eigen::MatrixXd(feature_var.transpose().asDiagonal()));
    }
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(k, 1.0 / k);

    GmmModel model = make_model(options.covariance, weights, means, variances, covariances);
    for (std::uint32_t iter = 0;; ++iter) {
        EStep e = expectation(model, data);
        if (options.on_e_step) {
            options.on_e_step(iter, e);
        }
        info.log_likelihood_history.push_back(e.total_log_likelihood);
        const std::size_t h = info.log_likelihood_history.size();
        if (h >= 2) {
            const double cur = info.log_likelihood_history[h - 1];
            const double prev = info.log_likelihood_history[h - 2];
            if (std::abs(cur - prev) <= options.tol * std::abs(cur)) {
                info.converged = true;
                break;
            }
        }
        if (iter == options.max_iter) {
            break;
        }
        m_step(data, e.responsibilities, options.covariance, options.variance_floor, weights, means, variances,
               covariances);
        model = make_model(options.covariance, weights, means, variances, covariances);
        info.iterations = iter + 1;
    }
    info.final_log_likelihood = info.log_likelihood_history.back();
    model.fit_info() = std::move(info);
    return model;
}

RowMatrix to_matrix(std::span<const CombinedFeature> features) {
    if (features.empty()) {
        throw DataError("no training features");
    }
    const std::size_t d = features.front().values.size();
    RowMatrix out(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].values.size() != d) {
            throw DimensionError("combined features have inconsistent lengths");
        }
        for (std::size_t j = 0; j < d; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i].values[j];
        }
    }
    return out;
}

GmmModel fit_gmm(std::span<const CombinedFeature> features, const FitOptions& options) {
    for (const CombinedFeature& f : features) {
        if (f.provenance.source_label != Label::Real) {
            throw DataError("pair from fake-labeled video '" + f.provenance.video_id +
                            "' reached anomaly-model training");
        }
    }
    return fit_gmm(to_matrix(features), options);
}

void save_model(const GmmModel& model, const std::filesystem::path& path) {
    if (path.empty()) {
        throw Error("empty model path");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    const bool full = model.covariance_type() == CovarianceType::Full;
    detail::put_magic(out, kModelMagic);
    detail::put_le<std::uint32_t>(out, full ? kVersionFull : kVersionDiagonal);
    detail::put_le<std::uint32_t>(out, model.dim());
    detail::put_le<std::uint32_t>(out, model.n_components());
    for (Eigen::Index k = 0; k < model.weights().size(); ++k) {
        detail::put_le<double>(out, model.weights()[k]);
    }
    for (Eigen::Index k = 0; k < model.means().rows(); ++k) {
        for (Eigen::Index j = 0; j < model.means().cols(); ++j) {
            detail::put_le<double>(out, model.means()(k, j));
        }
    }
    if (full) {
        for (const auto& c : model.covariances()) {
            for (Eigen::Index r = 0; r < c.rows(); ++r) {
                for (Eigen::Index col = 0; col < c.cols(); ++col) {
                    detail::put_le<double>(out, c(r, col));
                }
            }
        }
    } else {
        for (Eigen::Index k = 0; k < model.variances().rows(); ++k) {
            for (Eigen::Index j = 0; j < model.variances().cols(); ++j) {
                detail::put_le<double>(out, model.variances()(k, j));
            }
        }
    }
    const FitInfo& info = model.fit_info();
    detail::put_le<std::uint64_t>(out, info.seed);
    detail::put_le<std::uint32_t>(out, info.iterations);
    detail::put_le<double>(out, info.final_log_likelihood);
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

GmmModel load_model(const std::filesystem::path& path, std::optional<std::uint32_t> expected_dim) {
    if (path.empty()) {
        throw Error("empty model path");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    detail::expect_magic(in, kModelMagic, "model");
    const auto version = detail::get_le<std::uint32_t>(in, "version");
    if (version != kVersionDiagonal && version != kVersionFull) {
        throw FormatError("unsupported model file version " + std::to_string(version));
    }
    const auto d = detail::get_le<std::uint32_t>(in, "dim");
    const auto n = detail::get_le<std::uint32_t>(in, "component count");
    if (d == 0 || n == 0) {
        throw FormatError("model header declares zero dim or components");
    }
    if (expected_dim && *expected_dim != d) {
        throw DimensionError("model dim " + std::to_string(d) + " does not match expected " +
                             std::to_string(*expected_dim));
    }
    Eigen::VectorXd weights(n);
    for (std::uint32_t k = 0; k < n; ++k) weights[k] = detail::get_le<double>(in, "weights");
    RowMatrix means(n, d);
    for (std::uint32_t k = 0; k < n; ++k)
        for (std::uint32_t j = 0; j < d; ++j) means(k, j) = detail::get_le<double>(in, "means");

    auto finish = [&](GmmModel model) {
        FitInfo& info = model.fit_info();
        info.seed = detail::get_le<std::uint64_t>(in, "seed");
        info.iterations = detail::get_le<std::uint32_t>(in, "iterations");
        info.final_log_likelihood = detail::get_le<double>(in, "log-likelihood");
        detail::expect_eof(in, "model");
        return model;
    };

    try {
        if (version == kVersionDiagonal) {
            RowMatrix variances(n, d);
            for (std::uint32_t k = 0; k < n; ++k)
                for (std::uint32_t j = 0; j < d; ++j) variances(k, j) = detail::get_le<double>(in, "variances");
            return finish(GmmModel(std::move(weights), std::move(means), std::move(variances)));
        }
        std::vector<Eigen::MatrixXd> covariances(n, Eigen::MatrixXd(d, d));
        for (auto& c : covariances)
            for (std::uint32_t r = 0; r < d; ++r)
                for (std::uint32_t col = 0; col < d; ++col) c(r, col) = detail::get_le<double>(in, "covariances");
        return finish(GmmModel(std::move(weights), std::move(means), std::move(covariances)));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid model parameters: ") + e.what());
    }
}

} // namespace difffake
