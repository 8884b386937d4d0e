#include "hsl/objective.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "hsl/error.hpp"
#include "hsl/learning.hpp"
#include "hsl/rng.hpp"

namespace hsl {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  }
  return out;
}

double max_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) noexcept {
  return kind == ObjectiveKind::Quadratic ? "quadratic" : "logistic";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "quadratic") return ObjectiveKind::Quadratic;
  if (name == "logistic") return ObjectiveKind::Logistic;
  throw ConfigError("unknown objective kind '" + std::string(name) +
                    "' (expected quadratic or logistic)");
}

std::optional<double> Objective::test_accuracy(std::span<const double>) const {
  return std::nullopt;
}

double Objective::global_loss(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i) sum += local_loss(i, x);
  return sum / static_cast<double>(nodes());
}

void Objective::global_gradient(std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> g(dim());
  for (std::size_t i = 0; i < nodes(); ++i) {
    local_gradient(i, x, g);
    for (std::size_t j = 0; j < g.size(); ++j) out[j] += g[j];
  }
  for (double& v : out) v /= static_cast<double>(nodes());
}

double Objective::heterogeneity_sq(std::span<const double> x) const {
  std::vector<double> global(dim());
  global_gradient(x, global);
  std::vector<double> g(dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i) {
    local_gradient(i, x, g);
    for (std::size_t j = 0; j < g.size(); ++j) sum += (g[j] - global[j]) * (g[j] - global[j]);
  }
  return sum / static_cast<double>(nodes());
}

// ---------------------------------------------------------------- quadratic

QuadraticObjective::QuadraticObjective(std::vector<Shard> shards) : shards_(std::move(shards)) {
  if (shards_.empty()) throw ConfigError("quadratic objective needs at least one node");
  dim_ = shards_.front().a.cols();
  if (dim_ == 0) throw ConfigError("quadratic objective needs dim >= 1");
  shared_matrix_ = true;
  for (std::size_t i = 0; i < shards_.size(); ++i) {
    const auto& s = shards_[i];
    if (s.a.rows() == 0) throw ConfigError("node " + std::to_string(i) + " has an empty shard");
    if (s.a.cols() != dim_ || s.b.size() != s.a.rows()) {
      throw ConfigError("node " + std::to_string(i) + " shard dimensions disagree");
    }
    shared_matrix_ = shared_matrix_ && s.a == shards_.front().a;
    const Eigen::MatrixXd a = to_eigen(s.a);
    smoothness_ = std::max(smoothness_, max_eigenvalue(a.transpose() * a));
  }
}

double QuadraticObjective::local_loss(std::size_t node, std::span<const double> x) const {
  const auto& s = shards_.at(node);
  double sum = 0.0;
  for (std::size_t r = 0; r < s.a.rows(); ++r) {
    const double res = dot(s.a.row(r), x) - s.b[r];
    sum += res * res;
  }
  return 0.5 * sum;
}

void QuadraticObjective::local_gradient(std::size_t node, std::span<const double> x,
                                        std::span<double> out) const {
  const auto& s = shards_.at(node);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < s.a.rows(); ++r) {
    const auto row = s.a.row(r);
    const double res = dot(row, x) - s.b[r];
    for (std::size_t j = 0; j < dim_; ++j) out[j] += res * row[j];
  }
}

void QuadraticObjective::batch_gradient(std::size_t node, std::span<const double> x,
                                        std::span<const std::size_t> batch,
                                        std::span<double> out) const {
  const auto& s = shards_.at(node);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r : batch) {
    const auto row = s.a.row(r);
    const double res = dot(row, x) - s.b[r];
    for (std::size_t j = 0; j < dim_; ++j) out[j] += res * row[j];
  }
  // The loss is a sum over rows, so scale the batch sum up to the shard size.
  const double scale = static_cast<double>(s.a.rows()) / static_cast<double>(batch.size());
  for (double& v : out) v *= scale;
}

std::vector<double> QuadraticObjective::minimizer() const {
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(dim_, dim_);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_);
  for (const auto& s : shards_) {
    const Eigen::MatrixXd a = to_eigen(s.a);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(s.b.data(), s.b.size());
    hessian += a.transpose() * a;
    rhs += a.transpose() * b;
  }
  const Eigen::VectorXd x = hessian.ldlt().solve(rhs);
  return {x.data(), x.data() + x.size()};
}

std::optional<double> QuadraticObjective::min_global_loss() const {
  return global_loss(minimizer());
}

std::optional<double> QuadraticObjective::heterogeneity_sup() const {
  // With a common A the gradient differences A^T A (t_mean - t_i) do not depend on x.
  if (!shared_matrix_) return std::nullopt;
  return heterogeneity_sq(std::vector<double>(dim_, 0.0));
}

QuadraticObjective make_quadratic_objective(const QuadraticSpec& spec, std::uint64_t seed) {
  if (spec.nodes < 1 || spec.dim < 1) throw ConfigError("quadratic: nodes and dim must be >= 1");
  if (spec.spread < 0.0 || spec.heterogeneity < 0.0) {
    throw ConfigError("quadratic: spread and heterogeneity must be >= 0");
  }
  auto rng = Rng::child(seed, 0, StreamTag::Objective, 0);
  const std::size_t d = spec.dim;
  const std::size_t rows = d + spec.extra_rows;

  auto draw_matrix = [&] {
    Matrix a(rows, d);
    for (std::size_t j = 0; j < d; ++j) a(j, j) = 1.0;
    for (std::size_t r = d; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) a(r, j) = spec.spread * rng.normal();
    }
    return a;
  };

  std::vector<double> center(d);
  for (double& c : center) c = rng.normal();
  const Matrix shared = spec.shared_matrix ? draw_matrix() : Matrix{};

  std::vector<QuadraticObjective::Shard> shards;
  shards.reserve(spec.nodes);
  std::vector<double> target(d);
  for (std::size_t i = 0; i < spec.nodes; ++i) {
    QuadraticObjective::Shard s{spec.shared_matrix ? shared : draw_matrix(), {}};
    for (std::size_t j = 0; j < d; ++j) target[j] = center[j] + spec.heterogeneity * rng.normal();
    s.b.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) s.b[r] = dot(s.a.row(r), target);
    shards.push_back(std::move(s));
  }
  return QuadraticObjective(std::move(shards));
}

// ---------------------------------------------------------------- logistic

LogisticObjective::LogisticObjective(std::vector<Dataset> shards, Dataset test)
    : shards_(std::move(shards)), test_(std::move(test)) {
  if (shards_.empty()) throw ConfigError("logistic objective needs at least one node");
  features_ = shards_.front().features.cols();
  auto check = [&](const Dataset& d, const std::string& what) {
    if (d.features.cols() != features_ || d.labels.size() != d.features.rows()) {
      throw ConfigError(what + " dimensions disagree");
    }
    for (int y : d.labels) {
      if (y != 0 && y != 1) throw ConfigError(what + " has a label outside {0, 1}");
    }
  };
  for (std::size_t i = 0; i < shards_.size(); ++i) {
    const std::string what = "node " + std::to_string(i) + " shard";
    if (shards_[i].labels.empty()) throw ConfigError(what + " is empty");
    check(shards_[i], what);
    // Hessian of the mean logistic loss is bounded by (1/4) E[z z^T], z = (features, 1).
    const auto& f = shards_[i].features;
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(features_ + 1, features_ + 1);
    Eigen::VectorXd z(features_ + 1);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t j = 0; j < features_; ++j) z(j) = f(r, j);
      z(features_) = 1.0;
      second += z * z.transpose();
    }
    second /= static_cast<double>(f.rows());
    smoothness_ = std::max(smoothness_, 0.25 * max_eigenvalue(second));
  }
  if (!test_.labels.empty()) check(test_, "test set");
}

namespace {

double logit(const Matrix& features, std::size_t r, std::span<const double> x) {
  const std::size_t f = features.cols();
  return dot(features.row(r), x.first(f)) + x[f];
}

}  // namespace

double LogisticObjective::local_loss(std::size_t node, std::span<const double> x) const {
  const auto& s = shards_.at(node);
  double sum = 0.0;
  for (std::size_t r = 0; r < s.labels.size(); ++r) {
    const double z = logit(s.features, r, x);
    sum += softplus(z) - (s.labels[r] ? z : 0.0);
  }
  return sum / static_cast<double>(s.labels.size());
}

void LogisticObjective::local_gradient(std::size_t node, std::span<const double> x,
                                       std::span<double> out) const {
  const auto& s = shards_.at(node);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < s.labels.size(); ++r) {
    const double err = sigmoid(logit(s.features, r, x)) - s.labels[r];
    const auto row = s.features.row(r);
    for (std::size_t j = 0; j < features_; ++j) out[j] += err * row[j];
    out[features_] += err;
  }
  for (double& v : out) v /= static_cast<double>(s.labels.size());
}

void LogisticObjective::batch_gradient(std::size_t node, std::span<const double> x,
                                       std::span<const std::size_t> batch,
                                       std::span<double> out) const {
  const auto& s = shards_.at(node);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r : batch) {
    const double err = sigmoid(logit(s.features, r, x)) - s.labels[r];
    const auto row = s.features.row(r);
    for (std::size_t j = 0; j < features_; ++j) out[j] += err * row[j];
    out[features_] += err;
  }
  for (double& v : out) v /= static_cast<double>(batch.size());
}

std::optional<double> LogisticObjective::test_accuracy(std::span<const double> x) const {
  if (test_.labels.empty()) return std::nullopt;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test_.labels.size(); ++r) {
    const int predicted = logit(test_.features, r, x) > 0.0 ? 1 : 0;
    correct += predicted == test_.labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(test_.labels.size());
}

LogisticObjective make_logistic_objective(const LogisticSpec& spec, std::uint64_t seed) {
  if (spec.nodes < 1 || spec.features < 1) {
    throw ConfigError("logistic: nodes and features must be >= 1");
  }
  if (spec.train_samples < spec.nodes) {
    throw ConfigError("logistic: train_samples must be >= nodes");
  }
  if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) {
    throw ConfigError("logistic: label_noise must be in [0, 0.5)");
  }
  auto rng = Rng::child(seed, 0, StreamTag::Objective, 0);
  const std::size_t f = spec.features;

  std::vector<double> direction(f);
  double norm = 0.0;
  for (double& v : direction) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : direction) v /= norm;

  auto draw = [&](std::size_t count) {
    LogisticObjective::Dataset d{Matrix(count, f), std::vector<int>(count)};
    for (std::size_t r = 0; r < count; ++r) {
      const int y = rng.uniform01() < 0.5 ? 1 : 0;
      const double sign = y ? 1.0 : -1.0;
      for (std::size_t j = 0; j < f; ++j) {
        d.features(r, j) = sign * 0.5 * spec.separation * direction[j] + rng.normal();
      }
      d.labels[r] = rng.uniform01() < spec.label_noise ? 1 - y : y;
    }
    return d;
  };

  const auto train = draw(spec.train_samples);
  auto test = draw(spec.test_samples);

  auto partition_rng = Rng::child(seed, 0, StreamTag::Partition, 0);
  const auto parts = partition_dirichlet(train.labels, spec.nodes, spec.alpha, partition_rng);

  std::vector<LogisticObjective::Dataset> shards;
  shards.reserve(spec.nodes);
  for (const auto& idx : parts) {
    LogisticObjective::Dataset s{Matrix(idx.size(), f), std::vector<int>(idx.size())};
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < f; ++j) s.features(r, j) = train.features(idx[r], j);
      s.labels[r] = train.labels[idx[r]];
    }
    shards.push_back(std::move(s));
  }
  return LogisticObjective(std::move(shards), std::move(test));
}

}  // namespace hsl
