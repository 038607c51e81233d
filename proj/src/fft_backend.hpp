#pragma once

#include <complex>

namespace cotrack::detail {

// 2-D complex transform of a row-major rows x cols buffer. sign -1 is the
// unnormalized forward transform, +1 the unnormalized backward transform.
// in and out must be distinct buffers. Thread-safe; plans are cached.
void dft2d(int rows, int cols, const std::complex<double>* in, std::complex<double>* out,
           int sign);

} // namespace cotrack::detail
