// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gcdtc/tensor.hpp"

namespace gcdtc {

/// Boolean tensor congruent with the data; true marks an observed entry.
class ObservationMask {
public:
    ObservationMask() = default;
    explicit ObservationMask(Shape shape, bool observed = true);
    ObservationMask(Shape shape, std::vector<std::uint8_t> flags);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return flags_.size(); }
    [[nodiscard]] std::size_t observed_count() const;

    [[nodiscard]] bool operator[](std::size_t offset) const { return flags_[offset] != 0; }
    void set(std::size_t offset, bool observed) { flags_[offset] = observed ? 1 : 0; }

    [[nodiscard]] std::span<const std::uint8_t> flags() const { return flags_; }

    friend bool operator==(const ObservationMask&, const ObservationMask&) = default;

private:
    Shape shape_;
    std::vector<std::uint8_t> flags_;
};

enum class LossKind { Gaussian, Poisson };

[[nodiscard]] std::string_view to_string(LossKind kind);
/// Parses "gaussian" or "poisson"; throws std::invalid_argument otherwise.
[[nodiscard]] LossKind parse_loss(std::string_view name);

/// Element-wise negative log-likelihood, constants dropped:
///   Gaussian: (x - t)^2 / 2
///   Poisson:  x - t ln x       (requires x > 0)
struct LossModel {
    LossKind kind = LossKind::Poisson;

    [[nodiscard]] double elem_value(double x, double t) const;
    /// d(elem_value)/dx.
    [[nodiscard]] double elem_grad(double x, double t) const;
};

/// Sum of the element loss over observed entries. Throws std::domain_error
/// for Poisson when an observed x is not strictly positive.
[[nodiscard]] double loss_value(const LossModel& loss, const DenseTensor& x, const DenseTensor& t,
                                const ObservationMask& mask);

[[nodiscard]] double loss_elem_grad(const LossModel& loss, double x, double t);

/// Masked gradient tensor: y_i = dloss/dx_i on observed entries, 0 elsewhere.
[[nodiscard]] DenseTensor build_y(const LossModel& loss, const DenseTensor& x,
                                  const DenseTensor& t, const ObservationMask& mask);

}  // namespace gcdtc
