#include "cotrack/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "cotrack/errors.hpp"

namespace cotrack {

namespace {

constexpr int kHogOrientations = 9;  // unsigned bins over [0, pi)
constexpr int kHogChannels = 31;     // 18 signed + 9 unsigned + 4 texture
constexpr double kHogClip = 0.2;
constexpr double kHogEps = 1e-4;

void require_cell_layout(const Image& patch, int cell_size, const char* op) {
    if (cell_size < 1)
        throw InvalidArgument(std::string(op) + ": cell_size must be >= 1");
    if (patch.rows < cell_size || patch.cols < cell_size)
        throw InvalidArgument(std::string(op) + ": patch smaller than one cell");
    if (patch.rows % cell_size != 0 || patch.cols % cell_size != 0)
        throw InvalidArgument(std::string(op) + ": patch dims must be divisible by cell_size");
}

inline double luma(const Image& img, int r, int c) {
    if (img.channels == 1)
        return img.at(r, c, 0);
    return 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
}

} // namespace

FeatureGrid extract_hog(const Image& patch, int cell_size, Exec exec) {
    require_cell_layout(patch, cell_size, "extract_hog");
    const int rows = patch.rows, cols = patch.cols;
    const int rows_c = rows / cell_size, cols_c = cols / cell_size;
    const auto npx = static_cast<std::size_t>(rows) * cols;

    // Precomputed snap directions for the 9 unsigned orientations.
    std::array<double, kHogOrientations> uu{}, vv{};
    for (int k = 0; k < kHogOrientations; ++k) {
        uu[k] = std::cos(M_PI * k / kHogOrientations);
        vv[k] = std::sin(M_PI * k / kHogOrientations);
    }

    // Pass 1: per-pixel gradient magnitude and snapped signed orientation.
    // Gradients use central differences on the dominant color channel,
    // clamped at the patch border.
    std::vector<double> mag(npx);
    std::vector<int> bin18(npx);
    parallel_for(rows, exec, [&](std::int64_t r) {
        const int rm = std::max<int>(0, static_cast<int>(r) - 1);
        const int rp = std::min(rows - 1, static_cast<int>(r) + 1);
        for (int c = 0; c < cols; ++c) {
            const int cm = std::max(0, c - 1);
            const int cp = std::min(cols - 1, c + 1);
            double dx = 0.0, dy = 0.0, best = -1.0;
            for (int ch = 0; ch < patch.channels; ++ch) {
                const double gx = double(patch.at(static_cast<int>(r), cp, ch)) -
                                  patch.at(static_cast<int>(r), cm, ch);
                const double gy = double(patch.at(rp, c, ch)) - patch.at(rm, c, ch);
                const double m2 = gx * gx + gy * gy;
                if (m2 > best) {
                    best = m2;
                    dx = gx;
                    dy = gy;
                }
            }
            int best_o = 0;
            double best_dot = 0.0;
            for (int k = 0; k < kHogOrientations; ++k) {
                const double dot = uu[k] * dx + vv[k] * dy;
                if (dot > best_dot) {
                    best_dot = dot;
                    best_o = k;
                } else if (-dot > best_dot) {
                    best_dot = -dot;
                    best_o = k + kHogOrientations;
                }
            }
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            mag[i] = std::sqrt(best);
            bin18[i] = best_o;
        }
    });

    // Pass 2: cell histograms, gathered per cell with bilinear spatial
    // weights (each pixel influences up to four cells). Gathering keeps the
    // summation order fixed per cell, so results do not depend on threading.
    std::vector<double> hist(static_cast<std::size_t>(rows_c) * cols_c * 18, 0.0);
    parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
        const int ci = static_cast<int>(cell) / cols_c;
        const int cj = static_cast<int>(cell) % cols_c;
        const int r0 = std::max(0, static_cast<int>(std::floor((ci - 0.5) * cell_size)));
        const int r1 = std::min(rows - 1, static_cast<int>(std::ceil((ci + 1.5) * cell_size)));
        const int c0 = std::max(0, static_cast<int>(std::floor((cj - 0.5) * cell_size)));
        const int c1 = std::min(cols - 1, static_cast<int>(std::ceil((cj + 1.5) * cell_size)));
        double* h = hist.data() + cell * 18;
        for (int r = r0; r <= r1; ++r) {
            const double wr = 1.0 - std::abs((r + 0.5) / cell_size - 0.5 - ci);
            if (wr <= 0.0)
                continue;
            for (int c = c0; c <= c1; ++c) {
                const double wc = 1.0 - std::abs((c + 0.5) / cell_size - 0.5 - cj);
                if (wc <= 0.0)
                    continue;
                const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                h[bin18[i]] += wr * wc * mag[i];
            }
        }
    });

    // Pass 3: cell energies over unsigned orientations.
    std::vector<double> energy(static_cast<std::size_t>(rows_c) * cols_c, 0.0);
    parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
        const double* h = hist.data() + cell * 18;
        double e = 0.0;
        for (int o = 0; o < kHogOrientations; ++o) {
            const double s = h[o] + h[o + kHogOrientations];
            e += s * s;
        }
        energy[cell] = e;
    });

    // Pass 4: normalize against the four 2x2 blocks containing each cell
    // (clamped at the grid border) with truncation.
    FeatureGrid grid;
    grid.kind = FeatureKind::Hog;
    grid.cell_size = cell_size;
    grid.values = Tensor(rows_c, cols_c, kHogChannels);
    auto cell_energy = [&](int i, int j) {
        i = std::clamp(i, 0, rows_c - 1);
        j = std::clamp(j, 0, cols_c - 1);
        return energy[static_cast<std::size_t>(i) * cols_c + j];
    };
    parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
        const int ci = static_cast<int>(cell) / cols_c;
        const int cj = static_cast<int>(cell) % cols_c;
        std::array<double, 4> norm{};
        int k = 0;
        for (int di = -1; di <= 0; ++di)
            for (int dj = -1; dj <= 0; ++dj) {
                const double block = cell_energy(ci + di, cj + dj) +
                                     cell_energy(ci + di + 1, cj + dj) +
                                     cell_energy(ci + di, cj + dj + 1) +
                                     cell_energy(ci + di + 1, cj + dj + 1);
                norm[k++] = 1.0 / std::sqrt(block + kHogEps);
            }
        const double* h = hist.data() + cell * 18;
        std::array<double, 4> texture{};
        for (int o = 0; o < 18; ++o) {
            double sum = 0.0;
            for (int b = 0; b < 4; ++b) {
                const double v = std::min(h[o] * norm[b], kHogClip);
                sum += v;
                texture[b] += v;
            }
            grid.values.at(ci, cj, o) = 0.5 * sum;
        }
        for (int o = 0; o < kHogOrientations; ++o) {
            const double s = h[o] + h[o + kHogOrientations];
            double sum = 0.0;
            for (int b = 0; b < 4; ++b)
                sum += std::min(s * norm[b], kHogClip);
            grid.values.at(ci, cj, 18 + o) = 0.5 * sum;
        }
        for (int b = 0; b < 4; ++b)
            grid.values.at(ci, cj, 27 + b) = 0.2357 * texture[b];
    });
    return grid;
}

// ---------------------------------------------------------------------------
// Color naming

namespace {

struct Prototype {
    double r, g, b;
};

// The 11 color-name prototypes in fixed channel order: black, blue, brown,
// grey, green, orange, pink, purple, red, white, yellow.
constexpr std::array<Prototype, CNLookupTable::kNames> kPrototypes = {{
    {0, 0, 0},       // black
    {0, 0, 255},     // blue
    {139, 69, 19},   // brown
    {128, 128, 128}, // grey
    {0, 128, 0},     // green
    {255, 165, 0},   // orange
    {255, 192, 203}, // pink
    {128, 0, 128},   // purple
    {255, 0, 0},     // red
    {255, 255, 255}, // white
    {255, 255, 0},   // yellow
}};

constexpr double kPrototypeBandwidth = 60.0;

} // namespace

CNLookupTable CNLookupTable::builtin() {
    CNLookupTable t;
    t.data_.resize(static_cast<std::size_t>(kRows) * kNames);
    for (int i = 0; i < kRows; ++i) {
        // Quantization bin centers.
        const double r = (i & 31) * 8.0 + 4.0;
        const double g = ((i >> 5) & 31) * 8.0 + 4.0;
        const double b = ((i >> 10) & 31) * 8.0 + 4.0;
        double w[kNames];
        double total = 0.0;
        for (int k = 0; k < kNames; ++k) {
            const double dr = r - kPrototypes[k].r;
            const double dg = g - kPrototypes[k].g;
            const double db = b - kPrototypes[k].b;
            w[k] = std::exp(-(dr * dr + dg * dg + db * db) /
                            (2.0 * kPrototypeBandwidth * kPrototypeBandwidth));
            total += w[k];
        }
        for (int k = 0; k < kNames; ++k)
            t.data_[static_cast<std::size_t>(i) * kNames + k] =
                static_cast<float>(w[k] / total);
    }
    return t;
}

CNLookupTable CNLookupTable::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f)
        throw IoError("cn table: cannot open \"" + path + "\"");
    CNLookupTable t;
    t.data_.resize(static_cast<std::size_t>(kRows) * kNames);
    const std::size_t want = t.data_.size();
    const std::size_t got = std::fread(t.data_.data(), sizeof(float), want, f);
    // Probe for trailing bytes.
    char extra;
    const bool oversized = std::fread(&extra, 1, 1, f) == 1;
    std::fclose(f);
    if (got != want || oversized)
        throw DataError("cn table: \"" + path + "\" is not a 32768x11 float32 file");
    for (int i = 0; i < kRows; ++i) {
        double sum = 0.0;
        for (int k = 0; k < kNames; ++k) {
            const float v = t.data_[static_cast<std::size_t>(i) * kNames + k];
            if (!std::isfinite(v) || v < 0.0f)
                throw DataError("cn table: negative or non-finite entry in row " +
                                std::to_string(i));
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-3)
            throw DataError("cn table: row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
    }
    return t;
}

void CNLookupTable::save(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        throw IoError("cn table: cannot write \"" + path + "\"");
    const std::size_t n = std::fwrite(data_.data(), sizeof(float), data_.size(), f);
    std::fclose(f);
    if (n != data_.size())
        throw IoError("cn table: short write to \"" + path + "\"");
}

std::shared_ptr<const CNLookupTable> default_cn_table() {
    static std::mutex mtx;
    static std::shared_ptr<const CNLookupTable> cached;
    static std::string cached_path;
    std::scoped_lock lock(mtx);
    const char* env = std::getenv("COTRACK_CN_TABLE");
    const std::string path = env ? env : "";
    if (!cached || path != cached_path) {
        cached = std::make_shared<const CNLookupTable>(path.empty() ? CNLookupTable::builtin()
                                                                    : CNLookupTable::load(path));
        cached_path = path;
    }
    return cached;
}

FeatureGrid extract_cn(const Image& patch, int cell_size, const CNLookupTable& table, Exec exec,
                       bool* fallback_used) {
    require_cell_layout(patch, cell_size, "extract_cn");
    const int rows_c = patch.rows / cell_size, cols_c = patch.cols / cell_size;
    const double inv_count = 1.0 / (double(cell_size) * cell_size);

    FeatureGrid grid;
    grid.kind = FeatureKind::Cn;
    grid.cell_size = cell_size;

    if (patch.channels != 3) {
        // Grayscale input: cell-mean intensity stands in for the color names.
        if (fallback_used)
            *fallback_used = true;
        grid.values = Tensor(rows_c, cols_c, 1);
        parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
            const int ci = static_cast<int>(cell) / cols_c;
            const int cj = static_cast<int>(cell) % cols_c;
            double sum = 0.0;
            for (int r = ci * cell_size; r < (ci + 1) * cell_size; ++r)
                for (int c = cj * cell_size; c < (cj + 1) * cell_size; ++c)
                    sum += patch.at(r, c, 0) / 255.0;
            grid.values.at(ci, cj, 0) = sum * inv_count;
        });
        return grid;
    }

    if (fallback_used)
        *fallback_used = false;
    grid.values = Tensor(rows_c, cols_c, CNLookupTable::kNames);
    parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
        const int ci = static_cast<int>(cell) / cols_c;
        const int cj = static_cast<int>(cell) % cols_c;
        std::array<double, CNLookupTable::kNames> acc{};
        for (int r = ci * cell_size; r < (ci + 1) * cell_size; ++r)
            for (int c = cj * cell_size; c < (cj + 1) * cell_size; ++c) {
                const float* p = table.row(patch.at(r, c, 0), patch.at(r, c, 1),
                                           patch.at(r, c, 2));
                for (int k = 0; k < CNLookupTable::kNames; ++k)
                    acc[k] += p[k];
            }
        for (int k = 0; k < CNLookupTable::kNames; ++k)
            grid.values.at(ci, cj, k) = acc[k] * inv_count;
    });
    return grid;
}

// ---------------------------------------------------------------------------
// Local binary patterns

namespace {

// Circular 8-neighborhood at radius 1, clockwise from the top-left.
constexpr std::array<std::array<int, 2>, 8> kLbpOffsets = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1},
}};

// riu2 mapping: uniform patterns (at most two 0/1 transitions around the
// ring) keyed by their number of set bits, everything else in bin 9.
int lbp_bin(unsigned code) {
    const unsigned rotated = ((code << 1) | (code >> 7)) & 0xFFu;
    const int transitions = std::popcount(static_cast<unsigned>((code ^ rotated) & 0xFFu));
    return transitions <= 2 ? std::popcount(code & 0xFFu) : 9;
}

} // namespace

FeatureGrid extract_lbp(const Image& patch, int cell_size, Exec exec) {
    if (patch.rows < 3 || patch.cols < 3)
        throw InvalidArgument("extract_lbp: patch smaller than 3x3");
    require_cell_layout(patch, cell_size, "extract_lbp");
    const int rows = patch.rows, cols = patch.cols;
    const int rows_c = rows / cell_size, cols_c = cols / cell_size;
    constexpr int kBins = 10;

    FeatureGrid grid;
    grid.kind = FeatureKind::Lbp;
    grid.cell_size = cell_size;
    grid.values = Tensor(rows_c, cols_c, kBins);
    const double inv_count = 1.0 / (double(cell_size) * cell_size);
    parallel_for(static_cast<std::int64_t>(rows_c) * cols_c, exec, [&](std::int64_t cell) {
        const int ci = static_cast<int>(cell) / cols_c;
        const int cj = static_cast<int>(cell) % cols_c;
        std::array<double, kBins> hist{};
        for (int r = ci * cell_size; r < (ci + 1) * cell_size; ++r)
            for (int c = cj * cell_size; c < (cj + 1) * cell_size; ++c) {
                const double center = luma(patch, r, c);
                unsigned code = 0;
                for (int k = 0; k < 8; ++k) {
                    const int nr = std::clamp(r + kLbpOffsets[k][0], 0, rows - 1);
                    const int nc = std::clamp(c + kLbpOffsets[k][1], 0, cols - 1);
                    if (luma(patch, nr, nc) > center)
                        code |= 1u << k;
                }
                hist[lbp_bin(code)] += 1.0;
            }
        for (int k = 0; k < kBins; ++k)
            grid.values.at(ci, cj, k) = hist[k] * inv_count;
    });
    return grid;
}

// ---------------------------------------------------------------------------
// Alignment

Tensor resample_bilinear(const Tensor& src, int out_rows, int out_cols) {
    if (src.rows() == out_rows && src.cols() == out_cols)
        return src;
    Tensor out(out_rows, out_cols, src.channels());
    const double sy = double(src.rows()) / out_rows;
    const double sx = double(src.cols()) / out_cols;
    for (int ch = 0; ch < src.channels(); ++ch)
        for (int r = 0; r < out_rows; ++r) {
            const double fy = (r + 0.5) * sy - 0.5;
            const int y1 = static_cast<int>(std::floor(fy));
            const double wy = fy - y1;
            const int ya = std::clamp(y1, 0, src.rows() - 1);
            const int yb = std::clamp(y1 + 1, 0, src.rows() - 1);
            for (int c = 0; c < out_cols; ++c) {
                const double fx = (c + 0.5) * sx - 0.5;
                const int x1 = static_cast<int>(std::floor(fx));
                const double wx = fx - x1;
                const int xa = std::clamp(x1, 0, src.cols() - 1);
                const int xb = std::clamp(x1 + 1, 0, src.cols() - 1);
                out.at(r, c, ch) = (1.0 - wy) * ((1.0 - wx) * src.at(ya, xa, ch) +
                                                 wx * src.at(ya, xb, ch)) +
                                   wy * ((1.0 - wx) * src.at(yb, xa, ch) +
                                         wx * src.at(yb, xb, ch));
            }
        }
    return out;
}

FeatureStack align_stack(std::vector<FeatureGrid> grids, int target_rows, int target_cols,
                         const WindowWeights& window) {
    if (grids.empty())
        throw InvalidArgument("align_stack: no grids");
    if (target_rows < 1 || target_cols < 1)
        throw InvalidArgument("align_stack: target dims must be positive");
    if (window.values.rows() != target_rows || window.values.cols() != target_cols)
        throw InvalidArgument("align_stack: window dims must match target dims");

    FeatureStack stack;
    stack.windowed = true;
    for (auto& g : grids) {
        FeatureGrid aligned;
        aligned.kind = g.kind;
        aligned.cell_size = g.cell_size;
        aligned.values = resample_bilinear(g.values, target_rows, target_cols);
        for (int ch = 0; ch < aligned.values.channels(); ++ch)
            for (int r = 0; r < target_rows; ++r)
                for (int c = 0; c < target_cols; ++c)
                    aligned.values.at(r, c, ch) *= window.values.at(r, c);
        stack.grids.push_back(std::move(aligned));
    }
    return stack;
}

} // namespace cotrack
