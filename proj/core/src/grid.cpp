#include "finls/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "finls/error.hpp"

namespace finls::spectral {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, int points_per_axis, double half_width)
    : dim_(dim), m_(points_per_axis), l_(half_width) {
  if (dim != 2 && dim != 3) {
    throw ValidationError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (!is_power_of_two(points_per_axis) || points_per_axis < 16) {
    throw ValidationError("points_per_axis must be a power of two >= 16, got " +
                          std::to_string(points_per_axis));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ValidationError("half_width must be positive and finite");
  }
  h_ = 2.0 * l_ / m_;
  cell_volume_ = std::pow(h_, dim_);
  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(m_);

  auto tables = std::make_shared<Tables>();
  tables->radius.resize(size_);
  tables->xi_squared.resize(size_);
  for (std::size_t n = 0; n < size_; ++n) {
    const auto idx = unravel(n);
    double r2 = 0.0;
    double k2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
      const double x = coordinate(idx[a]);
      const double k = frequency(idx[a]);
      r2 += x * x;
      k2 += k * k;
    }
    tables->radius[n] = std::sqrt(r2);
    tables->xi_squared[n] = k2;
  }
  tables_ = std::move(tables);
}

std::size_t Grid::origin_flat_index() const noexcept {
  return ravel({m_ / 2, m_ / 2, m_ / 2});
}

double Grid::frequency(int i) const noexcept {
  return std::numbers::pi * mode_number(i) / l_;
}

std::array<int, 3> Grid::unravel(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(m_));
    flat /= static_cast<std::size_t>(m_);
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<int, 3>& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * static_cast<std::size_t>(m_) + idx[a];
  return flat;
}

std::array<double, 3> Grid::position(std::size_t flat) const noexcept {
  const auto idx = unravel(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

std::array<double, 3> Grid::wavevector(std::size_t flat) const noexcept {
  const auto idx = unravel(flat);
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) k[a] = frequency(idx[a]);
  return k;
}

double Grid::max_frequency() const noexcept {
  return std::sqrt(static_cast<double>(dim_)) * std::numbers::pi * (m_ / 2) / l_;
}

double Grid::min_frequency() const noexcept { return std::numbers::pi / l_; }

}  // namespace finls::spectral
