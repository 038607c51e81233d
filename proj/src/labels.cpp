#include "cotrack/labels.hpp"

#include <cmath>

#include "cotrack/errors.hpp"

namespace cotrack {

LabelMap gaussian_label(int rows, int cols, double sigma) {
    if (rows < 1 || cols < 1)
        throw InvalidArgument("gaussian_label: dimensions must be >= 1");
    if (!(sigma > 0.0))
        throw InvalidArgument("gaussian_label: sigma must be positive");

    LabelMap label;
    label.peak_row = rows / 2;
    label.peak_col = cols / 2;
    label.sigma = sigma;
    label.values = Tensor(rows, cols, 1);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int r = 0; r < rows; ++r) {
        // Wrap-around distance to the peak along each axis.
        int dr = std::abs(r - label.peak_row);
        dr = std::min(dr, rows - dr);
        for (int c = 0; c < cols; ++c) {
            int dc = std::abs(c - label.peak_col);
            dc = std::min(dc, cols - dc);
            label.values.at(r, c) = std::exp(-(double(dr) * dr + double(dc) * dc) * inv);
        }
    }
    return label;
}

WindowWeights hann_window(int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw InvalidArgument("hann_window: dimensions must be >= 1");

    auto profile = [](int n) {
        std::vector<double> p(n, 1.0);
        if (n > 1) {
            for (int i = 0; i < n; ++i)
                p[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n - 1)));
        }
        return p;
    };

    const auto pr = profile(rows);
    const auto pc = profile(cols);
    WindowWeights win;
    win.values = Tensor(rows, cols, 1);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            win.values.at(r, c) = pr[r] * pc[c];
    return win;
}

} // namespace cotrack
