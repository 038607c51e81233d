#pragma once

#include <cstdint>
#include <string>

#include "cotrack/eval.hpp"
#include "cotrack/image.hpp"

namespace cotrack {

enum class SynthKind { Translate, ScaleRamp, IlluminationRamp, Deform };

// Deterministic synthetic sequence: a textured target over a differently
// textured background, written in the benchmark layout so the loader and the
// tracker exercise the exact production path.
struct SynthSpec {
    SynthKind kind = SynthKind::Translate;
    int frames = 100;
    int frame_w = 320;
    int frame_h = 240;
    int target_w = 64;
    int target_h = 64;

    // translate: sinusoidal center path
    double amp_x = 40.0;
    double amp_y = 20.0;
    double period_x = 100.0;
    double period_y = 67.0;
    // scale_ramp: side(t) = side * (1 + rate * t)
    double rate = 0.002;
    // illumination_ramp: linear global gain from gain_start to gain_end
    double gain_start = 1.0;
    double gain_end = 1.6;
    // deform: periodic aspect-ratio perturbation of amplitude deform_amp
    double deform_amp = 0.15;
    double deform_period = 40.0;

    double noise_sigma = 2.0; // additive pixel noise
    std::uint64_t seed = 7;

    // Throws InvalidArgument when the motion would push the target out of the
    // frame or the parameters are degenerate.
    void validate() const;

    // Continuous ground-truth box at frame t (before integer rounding).
    BBox box_at(int t) const;
};

SynthKind synth_kind_from_name(const std::string& name); // InvalidArgument on unknown
const char* synth_kind_name(SynthKind kind);

// Renders the frames and ground truth into out_dir (benchmark layout, PNG
// frames) and returns the dataset. Same spec + seed => byte-identical output.
SequenceDataset generate_synthetic(const SynthSpec& spec, const std::string& out_dir);

// Frame renderer used by the generator; exposed so tests can track in-memory
// sequences without touching the filesystem.
Image render_synth_frame(const SynthSpec& spec, int t, const BBox& int_box);

} // namespace cotrack
