#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace finls::spectral {

/// Uniform periodic box [-L, L)^N with M points per axis.
///
/// Points are stored row-major with axis 0 slowest. The origin sits at index
/// M/2 on every axis so reflections x -> -x map grid points onto grid points.
/// Angular frequencies follow the FFT ordering xi_k = pi k / L with
/// k = 0, 1, ..., M/2-1, -M/2, ..., -1.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_width);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return m_; }
  double half_width() const noexcept { return l_; }
  double spacing() const noexcept { return h_; }
  double cell_volume() const noexcept { return cell_volume_; }
  std::size_t size() const noexcept { return size_; }

  /// Index of the origin along one axis.
  int origin_index() const noexcept { return m_ / 2; }
  std::size_t origin_flat_index() const noexcept;

  double coordinate(int i) const noexcept { return -l_ + h_ * i; }
  /// Signed lattice mode number for FFT slot i.
  int mode_number(int i) const noexcept { return i < m_ / 2 ? i : i - m_; }
  double frequency(int i) const noexcept;
  bool is_nyquist(int i) const noexcept { return i == m_ / 2; }

  std::span<const double> radius() const noexcept { return tables_->radius; }
  std::span<const double> xi_squared() const noexcept { return tables_->xi_squared; }

  std::array<int, 3> unravel(std::size_t flat) const noexcept;
  std::size_t ravel(const std::array<int, 3>& idx) const noexcept;

  std::array<double, 3> position(std::size_t flat) const noexcept;
  std::array<double, 3> wavevector(std::size_t flat) const noexcept;

  /// Largest |xi| on the lattice.
  double max_frequency() const noexcept;
  /// Smallest nonzero |xi| on the lattice.
  double min_frequency() const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.m_ == b.m_ && a.l_ == b.l_;
  }

 private:
  struct Tables {
    std::vector<double> radius;
    std::vector<double> xi_squared;
  };

  int dim_;
  int m_;
  double l_;
  double h_;
  double cell_volume_;
  std::size_t size_;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace finls::spectral
