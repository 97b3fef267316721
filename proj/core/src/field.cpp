#include "finls/field.hpp"

#include "finls/error.hpp"

namespace finls::spectral {

Field::Field(Grid grid, Representation rep)
    : grid_(std::move(grid)), values_(grid_.size(), cplx{0.0, 0.0}), rep_(rep) {}

Field::Field(Grid grid, ComplexBuffer values, Representation rep)
    : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
  if (values_.size() != grid_.size()) {
    throw ContractViolation("field length does not match grid size");
  }
}

namespace {

void check_compatible(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ContractViolation("fields live on different grids");
  if (a.representation() != b.representation()) {
    throw ContractViolation("fields are in different representations");
  }
}

}  // namespace

Field& Field::operator+=(const Field& other) {
  check_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  check_compatible(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx factor) {
  for (auto& v : values_) v *= factor;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx factor, Field a) { return a *= factor; }

Field conj(Field f) {
  if (!f.is_physical()) throw ContractViolation("conj expects a physical field");
  for (auto& v : f.values()) v = std::conj(v);
  return f;
}

}  // namespace finls::spectral
