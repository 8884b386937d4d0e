#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hsl/matrix.hpp"

namespace hsl {

enum class ObjectiveKind { Quadratic, Logistic };

std::string_view to_string(ObjectiveKind kind) noexcept;
ObjectiveKind parse_objective_kind(std::string_view name);

/// Per-node local objectives f_i and their mean F.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const noexcept = 0;
  virtual std::size_t nodes() const noexcept = 0;
  /// Model dimension.
  virtual std::size_t dim() const noexcept = 0;
  virtual std::size_t shard_size(std::size_t node) const = 0;

  virtual double local_loss(std::size_t node, std::span<const double> x) const = 0;
  virtual void local_gradient(std::size_t node, std::span<const double> x,
                              std::span<double> out) const = 0;
  /// Unbiased estimate of local_gradient from the shard samples listed in `batch`.
  virtual void batch_gradient(std::size_t node, std::span<const double> x,
                              std::span<const std::size_t> batch, std::span<double> out) const = 0;

  /// Held-out accuracy of a single model; nullopt for objectives without labels.
  virtual std::optional<double> test_accuracy(std::span<const double> x) const;

  /// Max over nodes of the gradient Lipschitz constant.
  virtual double smoothness() const = 0;
  /// min_x F(x) when known in closed form.
  virtual std::optional<double> min_global_loss() const { return std::nullopt; }
  /// sup_x (1/n) sum_i ||grad f_i(x) - grad F(x)||^2 when it is finite and known.
  virtual std::optional<double> heterogeneity_sup() const { return std::nullopt; }

  double global_loss(std::span<const double> x) const;
  void global_gradient(std::span<const double> x, std::span<double> out) const;
  /// (1/n) sum_i ||grad f_i(x) - grad F(x)||^2.
  double heterogeneity_sq(std::span<const double> x) const;
};

/// f_i(x) = 1/2 ||A_i x - b_i||^2.
class QuadraticObjective final : public Objective {
 public:
  struct Shard {
    Matrix a;
    std::vector<double> b;
  };

  explicit QuadraticObjective(std::vector<Shard> shards);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::Quadratic; }
  std::size_t nodes() const noexcept override { return shards_.size(); }
  std::size_t dim() const noexcept override { return dim_; }
  std::size_t shard_size(std::size_t node) const override { return shards_.at(node).a.rows(); }

  double local_loss(std::size_t node, std::span<const double> x) const override;
  void local_gradient(std::size_t node, std::span<const double> x,
                      std::span<double> out) const override;
  void batch_gradient(std::size_t node, std::span<const double> x,
                      std::span<const std::size_t> batch, std::span<double> out) const override;

  double smoothness() const override { return smoothness_; }
  std::optional<double> min_global_loss() const override;
  std::optional<double> heterogeneity_sup() const override;

  const Shard& shard(std::size_t node) const { return shards_.at(node); }
  /// argmin F, from the normal equations.
  std::vector<double> minimizer() const;

 private:
  std::vector<Shard> shards_;
  std::size_t dim_ = 0;
  double smoothness_ = 0.0;
  bool shared_matrix_ = false;
};

/// Binary logistic regression; the last model coordinate is the bias.
class LogisticObjective final : public Objective {
 public:
  struct Dataset {
    Matrix features;          ///< samples x features
    std::vector<int> labels;  ///< 0 or 1
  };

  LogisticObjective(std::vector<Dataset> shards, Dataset test);

  ObjectiveKind kind() const noexcept override { return ObjectiveKind::Logistic; }
  std::size_t nodes() const noexcept override { return shards_.size(); }
  std::size_t dim() const noexcept override { return features_ + 1; }
  std::size_t shard_size(std::size_t node) const override {
    return shards_.at(node).labels.size();
  }

  double local_loss(std::size_t node, std::span<const double> x) const override;
  void local_gradient(std::size_t node, std::span<const double> x,
                      std::span<double> out) const override;
  void batch_gradient(std::size_t node, std::span<const double> x,
                      std::span<const std::size_t> batch, std::span<double> out) const override;
  std::optional<double> test_accuracy(std::span<const double> x) const override;
  double smoothness() const override { return smoothness_; }

  const Dataset& shard(std::size_t node) const { return shards_.at(node); }
  const Dataset& test_set() const noexcept { return test_; }

 private:
  std::vector<Dataset> shards_;
  Dataset test_;
  std::size_t features_ = 0;
  double smoothness_ = 0.0;
};

/// Synthetic least-squares shards: A_i = [I_d ; spread * G_i], b_i = A_i (c + h z_i),
/// with G_i, z_i standard Gaussian. `shared_matrix` reuses one A for all nodes,
/// which makes the heterogeneity constant in x.
struct QuadraticSpec {
  std::size_t nodes = 1;
  std::size_t dim = 1;
  std::size_t extra_rows = 0;
  double spread = 0.0;
  double heterogeneity = 0.0;
  bool shared_matrix = true;
};

QuadraticObjective make_quadratic_objective(const QuadraticSpec& spec, std::uint64_t seed);

/// Two-class Gaussian mixture, x ~ N(+-separation/2 * u, I), split across nodes
/// with a Dirichlet(alpha) label partition. Labels are flipped with probability
/// `label_noise`.
struct LogisticSpec {
  std::size_t nodes = 1;
  std::size_t features = 2;
  std::size_t train_samples = 1000;
  std::size_t test_samples = 1000;
  double alpha = 1.0;
  double separation = 2.0;
  double label_noise = 0.0;
};

LogisticObjective make_logistic_objective(const LogisticSpec& spec, std::uint64_t seed);

}  // namespace hsl
