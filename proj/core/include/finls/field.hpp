#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "finls/grid.hpp"

namespace finls::spectral {

using cplx = std::complex<double>;

/// 64-byte aligned storage so FFT plans built once can run on any Field.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

enum class Representation { physical, frequency };

/// Complex state on a Grid, held either as point samples or as unnormalised
/// DFT coefficients.
class Field {
 public:
  Field(Grid grid, Representation rep = Representation::physical);
  Field(Grid grid, ComplexBuffer values, Representation rep);

  static Field zeros(const Grid& grid, Representation rep = Representation::physical) {
    return Field(grid, rep);
  }

  const Grid& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  bool is_physical() const noexcept { return rep_ == Representation::physical; }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  ComplexBuffer& buffer() noexcept { return values_; }
  void set_representation(Representation rep) noexcept { rep_ = rep; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx factor);

 private:
  Grid grid_;
  ComplexBuffer values_;
  Representation rep_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx factor, Field a);

Field conj(Field f);

/// Samples a real or complex function of position on the grid.
template <typename F>
Field sample(const Grid& grid, F&& fn) {
  Field out(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) out[n] = fn(grid.position(n));
  return out;
}

}  // namespace finls::spectral
