#include "cotrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cotrack/errors.hpp"
#include "cotrack/parallel.hpp"

namespace fs = std::filesystem;

namespace cotrack {

namespace {

constexpr std::uint64_t kTagBgCoarse = 0x11;
constexpr std::uint64_t kTagBgFine = 0x12;
constexpr std::uint64_t kTagTexA = 0x21;
constexpr std::uint64_t kTagTexB = 0x22;
constexpr std::uint64_t kTagNoiseU = 0x31;
constexpr std::uint64_t kTagNoiseV = 0x32;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double hash01(std::uint64_t seed, std::uint64_t tag, std::int64_t a, std::int64_t b) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ tag);
    h = splitmix(h ^ static_cast<std::uint64_t>(a));
    h = splitmix(h ^ static_cast<std::uint64_t>(b));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smooth lattice noise in [0, 1): bilinear blend of hashed lattice corners.
double value_noise(std::uint64_t seed, std::uint64_t tag, double x, double y, double scale) {
    const double fx = x / scale, fy = y / scale;
    const auto ix = static_cast<std::int64_t>(std::floor(fx));
    const auto iy = static_cast<std::int64_t>(std::floor(fy));
    const double tx = fx - ix, ty = fy - iy;
    const double v00 = hash01(seed, tag, ix, iy);
    const double v01 = hash01(seed, tag, ix + 1, iy);
    const double v10 = hash01(seed, tag, ix, iy + 1);
    const double v11 = hash01(seed, tag, ix + 1, iy + 1);
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11);
}

double gaussian_noise(std::uint64_t seed, std::int64_t frame, std::int64_t pixel) {
    const double u1 = std::max(1e-12, hash01(seed, kTagNoiseU, frame, pixel));
    const double u2 = hash01(seed, kTagNoiseV, frame, pixel);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

BBox round_box(const BBox& b) {
    return {static_cast<double>(std::lround(b.x)), static_cast<double>(std::lround(b.y)),
            static_cast<double>(std::lround(b.w)), static_cast<double>(std::lround(b.h))};
}

} // namespace

SynthKind synth_kind_from_name(const std::string& name) {
    if (name == "translate") return SynthKind::Translate;
    if (name == "scale_ramp") return SynthKind::ScaleRamp;
    if (name == "illumination_ramp") return SynthKind::IlluminationRamp;
    if (name == "deform") return SynthKind::Deform;
    throw InvalidArgument("synth: unknown kind \"" + name + "\"");
}

const char* synth_kind_name(SynthKind kind) {
    switch (kind) {
    case SynthKind::Translate: return "translate";
    case SynthKind::ScaleRamp: return "scale_ramp";
    case SynthKind::IlluminationRamp: return "illumination_ramp";
    case SynthKind::Deform: return "deform";
    }
    return "?";
}

BBox SynthSpec::box_at(int t) const {
    const double cx0 = frame_w / 2.0, cy0 = frame_h / 2.0;
    double cx = cx0, cy = cy0;
    double w = target_w, h = target_h;
    switch (kind) {
    case SynthKind::Translate:
        cx = cx0 + amp_x * std::sin(2.0 * M_PI * t / period_x);
        cy = cy0 + amp_y * std::sin(2.0 * M_PI * t / period_y);
        break;
    case SynthKind::ScaleRamp:
        w = target_w * (1.0 + rate * t);
        h = target_h * (1.0 + rate * t);
        break;
    case SynthKind::IlluminationRamp:
        break;
    case SynthKind::Deform: {
        const double d = deform_amp * std::sin(2.0 * M_PI * t / deform_period);
        w = target_w * (1.0 + d);
        h = target_h * (1.0 - d);
        break;
    }
    }
    return {cx - w / 2.0, cy - h / 2.0, w, h};
}

void SynthSpec::validate() const {
    if (frames < 2)
        throw InvalidArgument("synth: frames must be >= 2");
    if (frame_w < 32 || frame_h < 32)
        throw InvalidArgument("synth: frame dims must be >= 32");
    if (target_w < 8 || target_h < 8)
        throw InvalidArgument("synth: target dims must be >= 8");
    if (noise_sigma < 0.0)
        throw InvalidArgument("synth: noise_sigma must be >= 0");
    if (period_x <= 0.0 || period_y <= 0.0 || deform_period <= 0.0)
        throw InvalidArgument("synth: periods must be positive");
    if (rate < 0.0)
        throw InvalidArgument("synth: rate must be >= 0");
    if (gain_start <= 0.0 || gain_end <= 0.0)
        throw InvalidArgument("synth: gains must be positive");
    if (std::abs(deform_amp) >= 0.9)
        throw InvalidArgument("synth: deform_amp must stay below 0.9");
    for (int t = 0; t < frames; ++t) {
        const BBox b = round_box(box_at(t));
        if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > frame_w || b.y + b.h > frame_h ||
            b.w < 4.0 || b.h < 4.0)
            throw InvalidArgument("synth: target escapes the frame at frame " +
                                  std::to_string(t));
    }
}

Image render_synth_frame(const SynthSpec& spec, int t, const BBox& box) {
    Image img(spec.frame_h, spec.frame_w, 3);
    const double gain =
        spec.kind == SynthKind::IlluminationRamp
            ? spec.gain_start +
                  (spec.gain_end - spec.gain_start) * t / std::max(1, spec.frames - 1)
            : 1.0;
    const int x0 = static_cast<int>(box.x), y0 = static_cast<int>(box.y);
    const int x1 = static_cast<int>(box.x + box.w), y1 = static_cast<int>(box.y + box.h);

    parallel_for(spec.frame_h, Exec::Parallel, [&](std::int64_t row) {
        const int r = static_cast<int>(row);
        for (int c = 0; c < spec.frame_w; ++c) {
            double rv, gv, bv;
            if (r >= y0 && r < y1 && c >= x0 && c < x1) {
                // Texture sampled in box-normalized coordinates, so scale and
                // deformation rescale the pattern with the target.
                const double u = (c - box.x + 0.5) / box.w;
                const double v = (r - box.y + 0.5) / box.h;
                const double na = value_noise(spec.seed, kTagTexA, u * 64.0, v * 64.0, 8.0);
                const double nb = value_noise(spec.seed, kTagTexB, u * 64.0, v * 64.0, 4.0);
                rv = 40.0 + 200.0 * na;
                gv = 30.0 + 160.0 * nb;
                bv = 20.0 + 120.0 * (1.0 - na);
            } else {
                const double m1 = value_noise(spec.seed, kTagBgCoarse, c, r, 24.0);
                const double m2 = value_noise(spec.seed, kTagBgFine, c, r, 7.0);
                const double base = 90.0 + 50.0 * m1 + 20.0 * m2;
                rv = base * 0.9;
                gv = base;
                bv = std::min(255.0, base * 1.1);
            }
            const std::int64_t pixel = row * spec.frame_w + c;
            const double noise = spec.noise_sigma * gaussian_noise(spec.seed, t, pixel);
            img.at(r, c, 0) =
                static_cast<std::uint8_t>(std::clamp(gain * (rv + noise), 0.0, 255.0));
            img.at(r, c, 1) =
                static_cast<std::uint8_t>(std::clamp(gain * (gv + noise), 0.0, 255.0));
            img.at(r, c, 2) =
                static_cast<std::uint8_t>(std::clamp(gain * (bv + noise), 0.0, 255.0));
        }
    });
    return img;
}

SequenceDataset generate_synthetic(const SynthSpec& spec, const std::string& out_dir) {
    spec.validate();
    const fs::path root(out_dir);
    const fs::path img_dir = root / "img";
    fs::create_directories(img_dir);

    std::ofstream gt(root / "groundtruth_rect.txt");
    if (!gt)
        throw IoError("synth: cannot write ground truth in \"" + out_dir + "\"");

    SequenceDataset ds;
    ds.name = root.filename().string();
    for (int t = 0; t < spec.frames; ++t) {
        const BBox box = round_box(spec.box_at(t));
        const Image frame = render_synth_frame(spec, t, box);
        char name[32];
        std::snprintf(name, sizeof(name), "%04d.png", t + 1);
        const fs::path path = img_dir / name;
        save_png(frame, path.string());
        // 1-based benchmark convention on disk.
        gt << static_cast<long>(box.x) + 1 << "," << static_cast<long>(box.y) + 1 << ","
           << static_cast<long>(box.w) << "," << static_cast<long>(box.h) << "\n";
        ds.frame_paths.push_back(path.string());
        ds.gt_boxes.push_back(box);
    }
    return ds;
}

} // namespace cotrack
