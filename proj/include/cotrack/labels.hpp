#pragma once

#include "cotrack/tensor.hpp"

namespace cotrack {

// Regression target for filter training: a periodic Gaussian bump with peak
// value 1 at the grid center cell. Distances are measured cell-wise under
// the wrap-around metric, so the map is circularly symmetric about the peak.
struct LabelMap {
    Tensor values; // rows x cols x 1
    int peak_row = 0;
    int peak_col = 0;
    double sigma = 0.0; // in cells
};

// Separable raised-cosine taper in [0, 1]; value 0 on the outermost ring
// whenever both dimensions exceed 1.
struct WindowWeights {
    Tensor values; // rows x cols x 1
};

// value(center + d) = exp(-|d|^2 / (2 sigma^2)) for every wrap-around offset
// d; the center cell is (rows/2, cols/2).
LabelMap gaussian_label(int rows, int cols, double sigma);

// Outer product of 1-D Hann profiles of the two lengths.
WindowWeights hann_window(int rows, int cols);

} // namespace cotrack
