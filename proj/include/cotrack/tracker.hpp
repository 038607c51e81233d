#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cotrack/config.hpp"
#include "cotrack/features.hpp"
#include "cotrack/image.hpp"
#include "cotrack/solver.hpp"
#include "cotrack/spectrum.hpp"

namespace cotrack {

struct TrackerDiagnostics {
    bool cn_fallback = false;          // grayscale input, CN replaced by intensity
    std::vector<int> skipped_updates;  // frames whose model re-solve failed
};

// Per-sequence tracking state. Confined to one logical thread of control;
// independent trackers may run concurrently.
struct TrackerState {
    BBox bbox;
    FeatureStack model_templates; // running labeled templates x_i, windowed
    FilterBank bank;
    LabelMap label;
    TrackerConfig cfg;
    int frame_index = 0;
    std::vector<ResponseMap> last_responses;

    // Fixed template geometry chosen at init; scale-search patches are
    // resampled to it so filter dims never change.
    int template_rows_px = 0;
    int template_cols_px = 0;
    int grid_rows = 0;
    int grid_cols = 0;
    WindowWeights window;
    int patch_channels = 0; // channel mode locked at init (1 or 3)

    std::shared_ptr<const CNLookupTable> cn_table;
    std::vector<Spectrum> filter_spectra; // cached per-feature filter spectra
    ADMMState last_solve;
    TrackerDiagnostics diagnostics;
};

// First-frame initialization: extracts the padded patch, builds the feature
// stack, the Gaussian label and the Hann window, and learns the initial
// filters with the unlabeled templates equal to the labeled ones.
TrackerState init(const Image& first_frame, const BBox& ground_truth, const TrackerConfig& cfg,
                  std::ostream* trace = nullptr);

struct Detection {
    double cx = 0.0, cy = 0.0; // new center, frame px
    ResponseMap fused;
    std::vector<ResponseMap> per_feature;
};

// Per-feature correlation responses at the previous center and scale, fused
// by arithmetic mean; the fused peak displacement moves the center.
Detection detect_translation(TrackerState& st, const Image& frame);

struct ScaleSearch {
    double best_scale = 1.0;
    std::vector<double> scores; // prior-weighted fused peak per scale factor
};

// Evaluates every configured scale factor at the detected center, weighting
// the fused peak by a Gaussian prior over the signed scale index. Ties break
// toward the unit scale, then toward the smaller |index|.
ScaleSearch search_scale(const TrackerState& st, const Image& frame, double cx, double cy);

// Interpolates fresh templates into the model (rate eta), refreshes the
// unlabeled templates with the pre-merge snapshot, and re-solves warm-started.
// A solver numerical error keeps the previous model and flags the frame.
void update_model(TrackerState& st, const Image& frame, const BBox& new_bbox,
                  std::ostream* trace = nullptr);

struct TrackOptions {
    std::string render_dir;          // write annotated PNGs here when set
    std::ostream* trace = nullptr;   // solver convergence CSV
};

struct TrackResult {
    std::vector<BBox> boxes; // one per frame, frame 0 = init box
    std::optional<int> lost_at;
    bool cn_fallback = false;
    std::vector<int> skipped_updates;
};

using FrameSource = std::function<Image(int)>;

// Full loop: init on frame 0, then per frame detect -> scale -> clip ->
// update. Tracking loss freezes the last good box for the remaining frames
// and tags the run.
TrackResult track_sequence(const FrameSource& frames, int frame_count, const BBox& init_box,
                           const TrackerConfig& cfg, const TrackOptions& opts = {});

} // namespace cotrack
