#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

namespace monna {

/// Row-major dense square matrix; only what the objectives need.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    static DenseMatrix identity(std::size_t dim);
    static DenseMatrix diagonal(std::span<const double> diag);

    std::size_t dim() const noexcept { return dim_; }
    double& at(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
    double at(std::size_t r, std::size_t c) const noexcept { return data_[r * dim_ + c]; }

    ParamVector apply(const ParamVector& v) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

enum class ObjectiveKind { Quadratic, Logistic };
enum class NoiseKind { Gaussian, UniformBall };
enum class HeterogeneityKind { CenterSpread, DirichletLabels };

std::string_view to_string(ObjectiveKind kind) noexcept;
std::string_view to_string(NoiseKind kind) noexcept;
std::string_view to_string(HeterogeneityKind kind) noexcept;
ObjectiveKind parse_objective_kind(std::string_view text);
NoiseKind parse_noise_kind(std::string_view text);
HeterogeneityKind parse_heterogeneity_kind(std::string_view text);

/// Q(θ) = ½ (θ - center)ᵀ A (θ - center); A is shared across nodes.
struct QuadraticObjective {
    std::shared_ptr<const DenseMatrix> curvature;
    ParamVector center;
    double max_eigenvalue = 0.0;  // L; known from construction
};

/// Binary logistic regression on a node-local sample set, labels in {0, 1},
/// plus (regularization / 2)‖θ‖².
struct LogisticObjective {
    std::vector<ParamVector> features;
    std::vector<int> labels;
    double regularization = 0.0;
};

class LocalObjective {
public:
    explicit LocalObjective(QuadraticObjective q) : impl_(std::move(q)) {}
    explicit LocalObjective(LogisticObjective l) : impl_(std::move(l)) {}

    ObjectiveKind kind() const noexcept;
    std::size_t dim() const noexcept;
    const QuadraticObjective* as_quadratic() const noexcept;
    const LogisticObjective* as_logistic() const noexcept;

private:
    std::variant<QuadraticObjective, LogisticObjective> impl_;
};

/// Additive gradient noise with total variance sigma².
struct NoiseModel {
    double sigma = 0.0;
    NoiseKind kind = NoiseKind::Gaussian;
};

double loss(const LocalObjective& obj, const ParamVector& theta);
ParamVector true_gradient(const LocalObjective& obj, const ParamVector& theta);

/// true_gradient + zero-mean perturbation with E‖noise‖² = sigma².
ParamVector stochastic_gradient(const LocalObjective& obj, const NoiseModel& noise,
                                const ParamVector& theta, Rng& rng);

/// Zero-mean perturbation alone.
ParamVector sample_noise(const NoiseModel& noise, std::size_t dim, Rng& rng);

double global_loss(std::span<const LocalObjective> objs, const ParamVector& theta);
ParamVector global_gradient(std::span<const LocalObjective> objs, const ParamVector& theta);

/// max over samples of (1/|C|) Σ ‖∇Qᵢ(θ) - ∇Q(θ)‖².
double measure_heterogeneity(std::span<const LocalObjective> objs,
                             std::span<const ParamVector> theta_samples);

/// Label-flipped counterparts: logistic labels l -> 1 - l; quadratic centers
/// reflected b -> 2p - b through p = coordinate-wise (max + min) / 2 of all
/// centers. Throws UnsupportedAttackError for an empty or mixed-kind list.
std::vector<LocalObjective> flip_labels(std::span<const LocalObjective> objs);

/// Full description of the synthetic objective family.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Quadratic;
    std::size_t dim = 10;
    double smoothness = 1.0;      // L: largest eigenvalue of A (quadratic)
    double strong_convexity = 0.1;  // smallest eigenvalue of A (quadratic)
    bool rotate = true;           // random orthogonal eigenbasis for A
    double center_norm = 5.0;     // ‖b̄‖, global optimum distance from the origin
    double sigma = 1.0;
    NoiseKind noise = NoiseKind::Gaussian;
    double zeta = 1.0;
    HeterogeneityKind heterogeneity = HeterogeneityKind::CenterSpread;
    double dirichlet_alpha = 1.0;    // logistic label-allocation concentration
    std::size_t samples_per_node = 64;
    double regularization = 1e-2;
    double class_separation = 2.0;
    std::uint64_t seed = 0;        // extra salt mixed into the experiment seed

    bool operator==(const ObjectiveSpec&) const = default;
};

/// The correct nodes' objectives plus the constants the theory needs.
struct ObjectiveSuite {
    std::vector<LocalObjective> locals;
    NoiseModel noise;
    double smoothness = 0.0;  // exact for quadratics, upper bound for logistic
    ParamVector minimizer;    // argmin of the global loss
    double optimal_loss = 0.0;  // Q*
};

/// Builds objectives for `num_correct` nodes. Quadratic/CenterSpread makes the
/// heterogeneity exactly spec.zeta². Logistic/DirichletLabels draws each
/// node's class proportion from Beta(dirichlet_alpha, dirichlet_alpha) and
/// finds Q* with a deterministic gradient-descent solve.
ObjectiveSuite build_objectives(const ObjectiveSpec& spec, std::size_t num_correct,
                                std::uint64_t seed);

/// Recorded largest eigenvalue of A for quadratics; Frobenius upper bound
/// ¼‖X‖²_F / m + regularization for logistic.
double smoothness_constant(const LocalObjective& obj);

}  // namespace monna
