#include "monna/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monna/errors.hpp"

namespace monna {

namespace {

template <class Kind, std::size_t N>
Kind parse_enum(std::string_view text, const Kind (&kinds)[N], const char* what) {
    for (Kind k : kinds) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("", std::string("unknown ") + what + " '" + std::string(text) + "'");
}

// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double label_sign(int label) noexcept { return label == 1 ? 1.0 : -1.0; }

ParamVector gaussian_vector(std::size_t dim, double stddev, Rng& rng) {
    std::normal_distribution<double> normal(0.0, stddev);
    ParamVector v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
}

ParamVector random_unit(std::size_t dim, Rng& rng) {
    ParamVector v;
    do {
        v = gaussian_vector(dim, 1.0, rng);
    } while (squared_norm(v) == 0.0);
    v /= norm(v);
    return v;
}

// Columns of a random orthogonal matrix via modified Gram-Schmidt.
std::vector<ParamVector> random_orthonormal_basis(std::size_t dim, Rng& rng) {
    std::vector<ParamVector> basis;
    basis.reserve(dim);
    while (basis.size() < dim) {
        ParamVector v = gaussian_vector(dim, 1.0, rng);
        for (const auto& q : basis) v.axpy(-dot(v, q), q);
        const double len = norm(v);
        if (len < 1e-8) continue;
        v /= len;
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<double> spread_eigenvalues(std::size_t dim, double lo, double hi) {
    std::vector<double> eig(dim, hi);
    if (dim > 1) {
        for (std::size_t i = 0; i < dim; ++i) {
            eig[i] = hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(dim - 1);
        }
    }
    return eig;
}

ObjectiveSuite build_quadratic(const ObjectiveSpec& spec, std::size_t num_correct, Rng& rng) {
    if (spec.strong_convexity <= 0.0 || spec.strong_convexity > spec.smoothness) {
        throw ConfigError("objective.mu", "need 0 < mu <= L for the quadratic family");
    }
    if (spec.heterogeneity != HeterogeneityKind::CenterSpread) {
        throw ConfigError("objective.heterogeneity",
                          "quadratic objectives use the center_spread construction");
    }
    const std::size_t d = spec.dim;
    const auto eig = spread_eigenvalues(d, spec.strong_convexity, spec.smoothness);

    auto curvature = std::make_shared<DenseMatrix>(d);
    if (spec.rotate) {
        const auto basis = random_orthonormal_basis(d, rng);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) acc += basis[k][r] * eig[k] * basis[k][c];
                curvature->at(r, c) = acc;
            }
        }
        // exact symmetry
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = r + 1; c < d; ++c) curvature->at(c, r) = curvature->at(r, c);
        }
    } else {
        *curvature = DenseMatrix::diagonal(eig);
    }

    const ParamVector global_center = spec.center_norm * random_unit(d, rng);

    std::vector<ParamVector> offsets;
    offsets.reserve(num_correct);
    for (std::size_t i = 0; i < num_correct; ++i) offsets.push_back(gaussian_vector(d, 1.0, rng));
    const ParamVector offset_mean = mean_of(offsets);
    double spread = 0.0;
    for (auto& r : offsets) {
        r -= offset_mean;
        spread += squared_norm(curvature->apply(r));
    }
    spread /= static_cast<double>(num_correct);
    const double scale = (spec.zeta > 0.0 && spread > 0.0) ? spec.zeta / std::sqrt(spread) : 0.0;

    ObjectiveSuite suite;
    suite.noise = {spec.sigma, spec.noise};
    suite.smoothness = spec.smoothness;
    suite.minimizer = global_center;
    double q_star = 0.0;
    for (auto& r : offsets) {
        r *= scale;
        q_star += 0.5 * dot(r, curvature->apply(r));
        suite.locals.emplace_back(
            QuadraticObjective{curvature, global_center + r, spec.smoothness});
    }
    suite.optimal_loss = q_star / static_cast<double>(num_correct);
    return suite;
}

ObjectiveSuite build_logistic(const ObjectiveSpec& spec, std::size_t num_correct, Rng& rng) {
    if (spec.heterogeneity != HeterogeneityKind::DirichletLabels) {
        throw ConfigError("objective.heterogeneity",
                          "logistic objectives use the dirichlet_labels construction");
    }
    if (spec.dirichlet_alpha <= 0.0) {
        throw ConfigError("objective.dirichlet_alpha", "must be positive");
    }
    if (spec.samples_per_node == 0) {
        throw ConfigError("objective.samples_per_node", "must be positive");
    }
    const std::size_t d = spec.dim;
    const ParamVector class_mean = (0.5 * spec.class_separation) * random_unit(d, rng);
    std::gamma_distribution<double> gamma(spec.dirichlet_alpha, 1.0);

    ObjectiveSuite suite;
    suite.noise = {spec.sigma, spec.noise};
    for (std::size_t i = 0; i < num_correct; ++i) {
        const double g1 = gamma(rng);
        const double g0 = gamma(rng);
        const double p_positive = (g0 + g1) > 0.0 ? g1 / (g0 + g1) : 0.5;
        std::bernoulli_distribution coin(p_positive);
        LogisticObjective obj;
        obj.regularization = spec.regularization;
        for (std::size_t s = 0; s < spec.samples_per_node; ++s) {
            const int label = coin(rng) ? 1 : 0;
            ParamVector x = gaussian_vector(d, 1.0, rng);
            x.axpy(label_sign(label), class_mean);
            obj.features.push_back(std::move(x));
            obj.labels.push_back(label);
        }
        suite.locals.emplace_back(std::move(obj));
    }
    for (const auto& obj : suite.locals) {
        suite.smoothness = std::max(suite.smoothness, smoothness_constant(obj));
    }

    // Q* proxy: deterministic gradient descent on the strongly convex global loss.
    ParamVector theta(d);
    const double step = 1.0 / suite.smoothness;
    for (int iter = 0; iter < 200000; ++iter) {
        const ParamVector grad = global_gradient(suite.locals, theta);
        if (squared_norm(grad) <= 1e-26) break;
        theta.axpy(-step, grad);
    }
    suite.minimizer = theta;
    suite.optimal_loss = global_loss(suite.locals, theta);
    return suite;
}

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t dim) {
    DenseMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
    DenseMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m.at(i, i) = diag[i];
    return m;
}

ParamVector DenseMatrix::apply(const ParamVector& v) const {
    require_dim(v, dim_, "matrix-vector product");
    ParamVector out(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        double acc = 0.0;
        const double* row = data_.data() + r * dim_;
        for (std::size_t c = 0; c < dim_; ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

std::string_view to_string(ObjectiveKind kind) noexcept {
    return kind == ObjectiveKind::Quadratic ? "quadratic" : "logistic";
}

std::string_view to_string(NoiseKind kind) noexcept {
    return kind == NoiseKind::Gaussian ? "gaussian" : "uniform_ball";
}

std::string_view to_string(HeterogeneityKind kind) noexcept {
    return kind == HeterogeneityKind::CenterSpread ? "center_spread" : "dirichlet_labels";
}

ObjectiveKind parse_objective_kind(std::string_view text) {
    static constexpr ObjectiveKind kinds[] = {ObjectiveKind::Quadratic, ObjectiveKind::Logistic};
    return parse_enum(text, kinds, "objective kind");
}

NoiseKind parse_noise_kind(std::string_view text) {
    static constexpr NoiseKind kinds[] = {NoiseKind::Gaussian, NoiseKind::UniformBall};
    return parse_enum(text, kinds, "noise kind");
}

HeterogeneityKind parse_heterogeneity_kind(std::string_view text) {
    static constexpr HeterogeneityKind kinds[] = {HeterogeneityKind::CenterSpread,
                                                  HeterogeneityKind::DirichletLabels};
    return parse_enum(text, kinds, "heterogeneity construction");
}

ObjectiveKind LocalObjective::kind() const noexcept {
    return std::holds_alternative<QuadraticObjective>(impl_) ? ObjectiveKind::Quadratic
                                                             : ObjectiveKind::Logistic;
}

std::size_t LocalObjective::dim() const noexcept {
    if (const auto* q = as_quadratic()) return q->center.dim();
    const auto* l = as_logistic();
    return l->features.empty() ? 0 : l->features.front().dim();
}

const QuadraticObjective* LocalObjective::as_quadratic() const noexcept {
    return std::get_if<QuadraticObjective>(&impl_);
}

const LogisticObjective* LocalObjective::as_logistic() const noexcept {
    return std::get_if<LogisticObjective>(&impl_);
}

double loss(const LocalObjective& obj, const ParamVector& theta) {
    if (const auto* q = obj.as_quadratic()) {
        const ParamVector diff = theta - q->center;
        return 0.5 * dot(diff, q->curvature->apply(diff));
    }
    const auto& l = *obj.as_logistic();
    require_dim(theta, obj.dim(), "logistic loss");
    double acc = 0.0;
    for (std::size_t j = 0; j < l.features.size(); ++j) {
        acc += softplus(-label_sign(l.labels[j]) * dot(theta, l.features[j]));
    }
    return acc / static_cast<double>(l.features.size()) +
           0.5 * l.regularization * squared_norm(theta);
}

ParamVector true_gradient(const LocalObjective& obj, const ParamVector& theta) {
    if (const auto* q = obj.as_quadratic()) {
        return q->curvature->apply(theta - q->center);
    }
    const auto& l = *obj.as_logistic();
    require_dim(theta, obj.dim(), "logistic gradient");
    ParamVector grad(theta.dim());
    for (std::size_t j = 0; j < l.features.size(); ++j) {
        const double s = label_sign(l.labels[j]);
        grad.axpy(-s * sigmoid(-s * dot(theta, l.features[j])), l.features[j]);
    }
    grad /= static_cast<double>(l.features.size());
    grad.axpy(l.regularization, theta);
    return grad;
}

ParamVector sample_noise(const NoiseModel& noise, std::size_t dim, Rng& rng) {
    if (noise.sigma == 0.0 || dim == 0) return ParamVector(dim);
    const double d = static_cast<double>(dim);
    if (noise.kind == NoiseKind::Gaussian) {
        return gaussian_vector(dim, noise.sigma / std::sqrt(d), rng);
    }
    // Uniform in a ball of radius R has E‖u‖² = R² d / (d + 2).
    const double radius = noise.sigma * std::sqrt((d + 2.0) / d);
    ParamVector direction = random_unit(dim, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = radius * std::pow(unif(rng), 1.0 / d);
    return r * std::move(direction);
}

ParamVector stochastic_gradient(const LocalObjective& obj, const NoiseModel& noise,
                                const ParamVector& theta, Rng& rng) {
    ParamVector grad = true_gradient(obj, theta);
    if (noise.sigma != 0.0) grad += sample_noise(noise, grad.dim(), rng);
    return grad;
}

double global_loss(std::span<const LocalObjective> objs, const ParamVector& theta) {
    if (objs.empty()) throw DimensionError("global loss over no objectives");
    double acc = 0.0;
    for (const auto& obj : objs) acc += loss(obj, theta);
    return acc / static_cast<double>(objs.size());
}

ParamVector global_gradient(std::span<const LocalObjective> objs, const ParamVector& theta) {
    if (objs.empty()) throw DimensionError("global gradient over no objectives");
    ParamVector acc = true_gradient(objs.front(), theta);
    for (std::size_t i = 1; i < objs.size(); ++i) acc += true_gradient(objs[i], theta);
    acc /= static_cast<double>(objs.size());
    return acc;
}

double measure_heterogeneity(std::span<const LocalObjective> objs,
                             std::span<const ParamVector> theta_samples) {
    if (theta_samples.empty()) throw DimensionError("measure_heterogeneity: no samples");
    double worst = 0.0;
    for (const auto& theta : theta_samples) {
        const ParamVector global = global_gradient(objs, theta);
        double acc = 0.0;
        for (const auto& obj : objs) acc += squared_distance(true_gradient(obj, theta), global);
        worst = std::max(worst, acc / static_cast<double>(objs.size()));
    }
    return worst;
}

std::vector<LocalObjective> flip_labels(std::span<const LocalObjective> objs) {
    if (objs.empty()) throw UnsupportedAttackError("label flipping needs at least one objective");
    const ObjectiveKind kind = objs.front().kind();
    for (const auto& obj : objs) {
        if (obj.kind() != kind) {
            throw UnsupportedAttackError("label flipping over mixed objective kinds");
        }
    }
    std::vector<LocalObjective> flipped;
    flipped.reserve(objs.size());
    if (kind == ObjectiveKind::Logistic) {
        for (const auto& obj : objs) {
            LogisticObjective copy = *obj.as_logistic();
            for (auto& label : copy.labels) label = 1 - label;
            flipped.emplace_back(std::move(copy));
        }
        return flipped;
    }
    const std::size_t d = objs.front().dim();
    ParamVector lo(d, std::numeric_limits<double>::infinity());
    ParamVector hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& obj : objs) {
        const auto& center = obj.as_quadratic()->center;
        for (std::size_t c = 0; c < d; ++c) {
            lo[c] = std::min(lo[c], center[c]);
            hi[c] = std::max(hi[c], center[c]);
        }
    }
    // b -> 2p - b with p = (lo + hi) / 2, i.e. b -> lo + hi - b.
    for (const auto& obj : objs) {
        QuadraticObjective copy = *obj.as_quadratic();
        for (std::size_t c = 0; c < d; ++c) copy.center[c] = lo[c] + hi[c] - copy.center[c];
        flipped.emplace_back(std::move(copy));
    }
    return flipped;
}

double smoothness_constant(const LocalObjective& obj) {
    if (const auto* q = obj.as_quadratic()) return q->max_eigenvalue;
    const auto& l = *obj.as_logistic();
    double frob = 0.0;
    for (const auto& x : l.features) frob += squared_norm(x);
    return 0.25 * frob / static_cast<double>(l.features.size()) + l.regularization;
}

ObjectiveSuite build_objectives(const ObjectiveSpec& spec, std::size_t num_correct,
                                std::uint64_t seed) {
    if (spec.dim == 0) throw ConfigError("system.d", "dimension must be positive");
    if (num_correct == 0) throw ConfigError("system.n", "need at least one correct node");
    if (spec.sigma < 0.0) throw ConfigError("objective.sigma", "must be non-negative");
    if (spec.zeta < 0.0) throw ConfigError("objective.zeta", "must be non-negative");
    Rng rng = make_stream(seed ^ mix64(spec.seed), StreamKind::Objective);
    return spec.kind == ObjectiveKind::Quadratic ? build_quadratic(spec, num_correct, rng)
                                                 : build_logistic(spec, num_correct, rng);
}

}  // namespace monna
