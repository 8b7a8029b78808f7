#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace monna {

using NodeId = std::size_t;

/// Dense real vector of fixed dimension. Models, momentums and coordination
/// vectors are all ParamVectors.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    ParamVector(std::initializer_list<double> init) : values_(init) {}
    explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t dim() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& raw() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    ParamVector& operator+=(const ParamVector& other);
    ParamVector& operator-=(const ParamVector& other);
    ParamVector& operator*=(double scale) noexcept;
    ParamVector& operator/=(double divisor) noexcept;

    /// this += scale * other
    ParamVector& axpy(double scale, const ParamVector& other);

    bool all_finite() const noexcept;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> values_;
};

ParamVector operator+(ParamVector lhs, const ParamVector& rhs);
ParamVector operator-(ParamVector lhs, const ParamVector& rhs);
ParamVector operator*(double scale, ParamVector v);

double dot(const ParamVector& a, const ParamVector& b);
double squared_norm(const ParamVector& v) noexcept;
double norm(const ParamVector& v) noexcept;
double squared_distance(const ParamVector& a, const ParamVector& b);

/// Arithmetic mean, summed in list order. Throws on an empty list.
ParamVector mean_of(std::span<const ParamVector> vectors);

/// Throws DimensionError unless every vector has dimension `dim`.
void require_dim(std::span<const ParamVector> vectors, std::size_t dim, const char* what);
void require_dim(const ParamVector& v, std::size_t dim, const char* what);

}  // namespace monna
