#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cotrack/config.hpp"
#include "cotrack/image.hpp"
#include "cotrack/labels.hpp"
#include "cotrack/parallel.hpp"
#include "cotrack/tensor.hpp"

namespace cotrack {

// One feature's cell grid. Channel counts are fixed per kind: hog 31,
// cn 11 (1 on the grayscale fallback), lbp 10.
struct FeatureGrid {
    Tensor values; // rows_c x cols_c x channels
    FeatureKind kind = FeatureKind::Hog;
    int cell_size = 0;
};

// Per-feature grids on one shared spatial grid; windowed after align_stack.
struct FeatureStack {
    std::vector<FeatureGrid> grids;
    bool windowed = false;

    int rows() const { return grids.empty() ? 0 : grids.front().values.rows(); }
    int cols() const { return grids.empty() ? 0 : grids.front().values.cols(); }
};

// Color-name probabilities over quantized RGB (5 bits per channel,
// index = (r>>3) + 32*(g>>3) + 1024*(b>>3)); 11 names per row, rows sum to 1.
class CNLookupTable {
public:
    static constexpr int kRows = 32768;
    static constexpr int kNames = 11;

    // Deterministic fallback: soft assignment of each quantized color to the
    // nearest of 11 prototype colors. Keeps the build self-contained; a table
    // file can replace it via load() or the COTRACK_CN_TABLE variable.
    static CNLookupTable builtin();

    // Reads a little-endian float32 row-major 32768 x 11 file. Corrupt
    // content (bad size, negative entries, row sums off by > 1e-3) -> DataError.
    static CNLookupTable load(const std::string& path);

    // Writes the file format accepted by load(); used to regenerate the
    // shipped table.
    void save(const std::string& path) const;

    const float* row(std::uint8_t r, std::uint8_t g, std::uint8_t b) const {
        return data_.data() + static_cast<std::size_t>(index(r, g, b)) * kNames;
    }
    static int index(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        return (r >> 3) + 32 * (g >> 3) + 1024 * (b >> 3);
    }

    std::vector<float>& raw() { return data_; }
    const std::vector<float>& raw() const { return data_; }

private:
    std::vector<float> data_;
};

// Returns the table named by COTRACK_CN_TABLE if set, the builtin fallback
// otherwise. The result is shared and immutable.
std::shared_ptr<const CNLookupTable> default_cn_table();

// 31-channel Felzenszwalb HOG: 18 contrast-sensitive + 9 contrast-insensitive
// orientation channels + 4 normalization (texture) channels. Grid dims are
// patch dims / cell_size.
FeatureGrid extract_hog(const Image& patch, int cell_size, Exec exec = Exec::Parallel);

// 11-channel color-name probabilities averaged per cell. A grayscale patch
// falls back to a 1-channel cell-mean intensity grid and reports it through
// fallback_used.
FeatureGrid extract_cn(const Image& patch, int cell_size, const CNLookupTable& table,
                       Exec exec = Exec::Parallel, bool* fallback_used = nullptr);

// Uniform LBP (8 neighbors, radius 1) histogram per cell, 10 bins: 9 uniform
// classes by number of set bits + 1 catch-all; L1-normalized per cell.
FeatureGrid extract_lbp(const Image& patch, int cell_size, Exec exec = Exec::Parallel);

// Resamples every grid to target dims (bilinear, per channel) and applies the
// window per channel. All output grids share the target spatial dims.
FeatureStack align_stack(std::vector<FeatureGrid> grids, int target_rows, int target_cols,
                         const WindowWeights& window);

// Bilinear per-channel resampling of a cell grid (no-op when dims match).
Tensor resample_bilinear(const Tensor& src, int out_rows, int out_cols);

} // namespace cotrack
