#include "monna/param_vector.hpp"

#include <cmath>
#include <string>

#include "monna/errors.hpp"

namespace monna {

namespace {

void check_same_dim(const ParamVector& a, const ParamVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
    }
}

}  // namespace

ParamVector& ParamVector::operator+=(const ParamVector& other) {
    check_same_dim(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
    check_same_dim(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ParamVector& ParamVector::operator*=(double scale) noexcept {
    for (auto& v : values_) v *= scale;
    return *this;
}

ParamVector& ParamVector::operator/=(double divisor) noexcept {
    for (auto& v : values_) v /= divisor;
    return *this;
}

ParamVector& ParamVector::axpy(double scale, const ParamVector& other) {
    check_same_dim(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
    return *this;
}

bool ParamVector::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

ParamVector operator+(ParamVector lhs, const ParamVector& rhs) { return lhs += rhs; }
ParamVector operator-(ParamVector lhs, const ParamVector& rhs) { return lhs -= rhs; }
ParamVector operator*(double scale, ParamVector v) { return v *= scale; }

double dot(const ParamVector& a, const ParamVector& b) {
    check_same_dim(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_norm(const ParamVector& v) noexcept {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double norm(const ParamVector& v) noexcept { return std::sqrt(squared_norm(v)); }

double squared_distance(const ParamVector& a, const ParamVector& b) {
    check_same_dim(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

ParamVector mean_of(std::span<const ParamVector> vectors) {
    if (vectors.empty()) throw DimensionError("mean of an empty list");
    ParamVector acc = vectors.front();
    for (std::size_t i = 1; i < vectors.size(); ++i) acc += vectors[i];
    acc /= static_cast<double>(vectors.size());
    return acc;
}

void require_dim(const ParamVector& v, std::size_t dim, const char* what) {
    if (v.dim() != dim) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                             ", got " + std::to_string(v.dim()));
    }
}

void require_dim(std::span<const ParamVector> vectors, std::size_t dim, const char* what) {
    for (const auto& v : vectors) require_dim(v, dim, what);
}

}  // namespace monna
