#pragma once

#include "finls/field.hpp"

namespace finls::spectral::detail {

/// Unnormalised in-place DFT over all axes. Plans are created once per
/// (dim, M, direction) and executed on caller-owned buffers, so concurrent
/// calls on distinct buffers are safe.
void fft_forward_inplace(const Grid& grid, ComplexBuffer& data);

/// Inverse DFT including the 1/M^N normalisation.
void fft_inverse_inplace(const Grid& grid, ComplexBuffer& data);

}  // namespace finls::spectral::detail
