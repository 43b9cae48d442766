// SPDX-License-Identifier: MIT
#include "gcdtc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gcdtc {

namespace {

void check_congruent(const DenseTensor& x, const DenseTensor& t, const ObservationMask& mask) {
    if (x.shape() != t.shape() || x.shape() != mask.shape()) {
        throw std::invalid_argument("loss: tensor and mask shapes are not congruent");
    }
}

void check_poisson_domain(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("poisson loss requires x > 0 at observed entries (got " +
                                std::to_string(x) + ")");
    }
}

}  // namespace

ObservationMask::ObservationMask(Shape shape, bool observed)
    : shape_(std::move(shape)), flags_(numel(shape_), observed ? 1 : 0) {}

ObservationMask::ObservationMask(Shape shape, std::vector<std::uint8_t> flags)
    : shape_(std::move(shape)), flags_(std::move(flags)) {
    if (flags_.size() != numel(shape_)) {
        throw std::invalid_argument("mask length does not match shape volume");
    }
    for (auto& f : flags_) f = f ? 1 : 0;
}

std::size_t ObservationMask::observed_count() const {
    return static_cast<std::size_t>(std::ranges::count(flags_, std::uint8_t{1}));
}

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Gaussian:
            return "gaussian";
        case LossKind::Poisson:
            return "poisson";
    }
    return "unknown";
}

LossKind parse_loss(std::string_view name) {
    if (name == "gaussian") return LossKind::Gaussian;
    if (name == "poisson") return LossKind::Poisson;
    throw std::invalid_argument("unknown loss '" + std::string(name) +
                                "' (expected poisson or gaussian)");
}

double LossModel::elem_value(double x, double t) const {
    switch (kind) {
        case LossKind::Gaussian: {
            const double d = x - t;
            return 0.5 * d * d;
        }
        case LossKind::Poisson:
            check_poisson_domain(x);
            return x - t * std::log(x);
    }
    return 0.0;
}

double LossModel::elem_grad(double x, double t) const {
    switch (kind) {
        case LossKind::Gaussian:
            return x - t;
        case LossKind::Poisson:
            check_poisson_domain(x);
            return (x - t) / x;
    }
    return 0.0;
}

double loss_value(const LossModel& loss, const DenseTensor& x, const DenseTensor& t,
                  const ObservationMask& mask) {
    check_congruent(x, t, mask);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (mask[i]) sum += loss.elem_value(x[i], t[i]);
    }
    return sum;
}

double loss_elem_grad(const LossModel& loss, double x, double t) { return loss.elem_grad(x, t); }

DenseTensor build_y(const LossModel& loss, const DenseTensor& x, const DenseTensor& t,
                    const ObservationMask& mask) {
    check_congruent(x, t, mask);
    DenseTensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (mask[i]) y[i] = loss.elem_grad(x[i], t[i]);
    }
    return y;
}

}  // namespace gcdtc
