#include "cotrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cotrack/errors.hpp"

namespace cotrack {

namespace {

Image normalize_channels(const Image& patch, int want_channels) {
    if (patch.channels == want_channels)
        return patch;
    Image out(patch.rows, patch.cols, want_channels);
    if (want_channels == 1) {
        for (int r = 0; r < patch.rows; ++r)
            for (int c = 0; c < patch.cols; ++c) {
                const double y = 0.299 * patch.at(r, c, 0) + 0.587 * patch.at(r, c, 1) +
                                 0.114 * patch.at(r, c, 2);
                out.at(r, c, 0) = static_cast<std::uint8_t>(std::lround(y));
            }
    } else {
        for (int r = 0; r < patch.rows; ++r)
            for (int c = 0; c < patch.cols; ++c)
                for (int ch = 0; ch < 3; ++ch)
                    out.at(r, c, ch) = patch.at(r, c, 0);
    }
    return out;
}

FeatureStack extract_stack(const TrackerState& st, const Image& frame, const BBox& box,
                           bool* cn_fallback) {
    Image patch = extract_patch(frame, box, st.cfg.padding, st.template_rows_px,
                                st.template_cols_px);
    patch = normalize_channels(patch, st.patch_channels);
    const Exec exec = st.cfg.solver.exec;
    std::vector<FeatureGrid> grids;
    for (FeatureKind kind : st.cfg.features_enabled) {
        switch (kind) {
        case FeatureKind::Hog:
            grids.push_back(extract_hog(patch, st.cfg.cell_size, exec));
            break;
        case FeatureKind::Cn: {
            bool fb = false;
            grids.push_back(extract_cn(patch, st.cfg.cell_size, *st.cn_table, exec, &fb));
            if (fb && cn_fallback)
                *cn_fallback = true;
            break;
        }
        case FeatureKind::Lbp:
            grids.push_back(extract_lbp(patch, st.cfg.cell_size, exec));
            break;
        }
    }
    return align_stack(std::move(grids), st.grid_rows, st.grid_cols, st.window);
}

void refresh_filter_spectra(TrackerState& st) {
    st.filter_spectra.clear();
    for (const auto& w : st.bank.per_feature)
        st.filter_spectra.push_back(forward_spectrum(w, st.cfg.solver.exec));
}

// Round to the nearest positive multiple of cell_size.
int template_side_px(double target_side, double padding, int cell_size) {
    const int cells = std::max(1, static_cast<int>(std::lround(target_side * padding / cell_size)));
    return cells * cell_size;
}

struct FusedResponse {
    ResponseMap fused;
    std::vector<ResponseMap> per_feature;
};

FusedResponse respond(const TrackerState& st, const FeatureStack& stack) {
    const Exec exec = st.cfg.solver.exec;
    FusedResponse out;
    Tensor mean(st.grid_rows, st.grid_cols, 1);
    const double inv_n = 1.0 / static_cast<double>(stack.grids.size());
    for (std::size_t i = 0; i < stack.grids.size(); ++i) {
        const Spectrum zhat = forward_spectrum(stack.grids[i].values, exec);
        ResponseMap r = correlation_response(zhat, st.filter_spectra[i], exec);
        for (std::size_t t = 0; t < mean.data().size(); ++t)
            mean.data()[t] += inv_n * r.values.data()[t];
        out.per_feature.push_back(std::move(r));
    }
    out.fused = make_response_map(std::move(mean));
    return out;
}

} // namespace

TrackerState init(const Image& first_frame, const BBox& ground_truth, const TrackerConfig& cfg,
                  std::ostream* trace) {
    cfg.validate();
    if (!ground_truth.valid())
        throw InvalidArgument("tracker init: invalid ground-truth box");
    if (ground_truth.x < 0.0 || ground_truth.y < 0.0 ||
        ground_truth.x + ground_truth.w > first_frame.cols ||
        ground_truth.y + ground_truth.h > first_frame.rows)
        throw InvalidArgument("tracker init: box outside frame");

    TrackerState st;
    st.cfg = cfg;
    st.bbox = ground_truth;
    st.patch_channels = first_frame.channels;
    st.template_rows_px = template_side_px(ground_truth.h, cfg.padding, cfg.cell_size);
    st.template_cols_px = template_side_px(ground_truth.w, cfg.padding, cfg.cell_size);
    st.grid_rows = st.template_rows_px / cfg.cell_size;
    st.grid_cols = st.template_cols_px / cfg.cell_size;
    st.window = hann_window(st.grid_rows, st.grid_cols);

    const double sigma = cfg.label_sigma_factor *
                         std::sqrt(ground_truth.w * ground_truth.h) / cfg.cell_size;
    st.label = gaussian_label(st.grid_rows, st.grid_cols, sigma);
    st.cn_table = default_cn_table();

    st.model_templates = extract_stack(st, first_frame, ground_truth,
                                       &st.diagnostics.cn_fallback);

    // No distinct unlabeled sample exists yet: the agreement term couples the
    // filters through the labeled templates themselves.
    ProblemInstance inst{st.model_templates, st.model_templates, st.label};
    SolveResult solved = solve_joint_filters(inst, cfg.solver, nullptr, trace);
    st.bank = std::move(solved.bank);
    st.last_solve = std::move(solved.state);
    refresh_filter_spectra(st);
    return st;
}

Detection detect_translation(TrackerState& st, const Image& frame) {
    if (st.filter_spectra.empty())
        throw InvalidArgument("detect_translation: tracker not initialized");
    FeatureStack stack = extract_stack(st, frame, st.bbox, nullptr);
    FusedResponse resp = respond(st, stack);

    const int off_r = resp.fused.peak_row - st.grid_rows / 2;
    const int off_c = resp.fused.peak_col - st.grid_cols / 2;
    // The response is label-shaped around the content displacement with the
    // opposite sign: a target moving right drags the peak left of center.
    const double scale_x = st.bbox.w * st.cfg.padding / st.template_cols_px;
    const double scale_y = st.bbox.h * st.cfg.padding / st.template_rows_px;
    Detection det;
    det.cx = st.bbox.cx() - off_c * st.cfg.cell_size * scale_x;
    det.cy = st.bbox.cy() - off_r * st.cfg.cell_size * scale_y;
    det.per_feature = std::move(resp.per_feature);
    det.fused = std::move(resp.fused);
    st.last_responses = det.per_feature;
    return det;
}

ScaleSearch search_scale(const TrackerState& st, const Image& frame, double cx, double cy) {
    const auto& factors = st.cfg.scale_factors;
    const int unit = st.cfg.unit_scale_index();
    BBox base{cx - st.bbox.w / 2.0, cy - st.bbox.h / 2.0, st.bbox.w, st.bbox.h};

    ScaleSearch out;
    out.scores.assign(factors.size(), 0.0);
    for (std::size_t idx = 0; idx < factors.size(); ++idx) {
        const BBox candidate = scale_bbox_about_center(base, factors[idx]);
        FeatureStack stack = extract_stack(st, frame, candidate, nullptr);
        FusedResponse resp = respond(st, stack);
        const double n = static_cast<double>(static_cast<int>(idx) - unit);
        const double prior = std::exp(-(n * n) /
                                      (2.0 * st.cfg.scale_prior_sigma * st.cfg.scale_prior_sigma));
        out.scores[idx] = prior * resp.fused.peak_value;
    }

    // Preference order for ties: unit scale first, then smaller |index|.
    std::vector<std::size_t> order(factors.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int na = std::abs(static_cast<int>(a) - unit);
        const int nb = std::abs(static_cast<int>(b) - unit);
        if (na != nb)
            return na < nb;
        return a < b;
    });
    std::size_t best = order[0];
    for (std::size_t i : order)
        if (out.scores[i] > out.scores[best])
            best = i;
    out.best_scale = factors[best];
    return out;
}

void update_model(TrackerState& st, const Image& frame, const BBox& new_bbox,
                  std::ostream* trace) {
    if (!new_bbox.valid())
        throw InvalidArgument("update_model: invalid box");
    bool fb = false;
    FeatureStack fresh = extract_stack(st, frame, new_bbox, &fb);
    if (fb)
        st.diagnostics.cn_fallback = true;

    const double eta = st.cfg.learning_rate;
    FeatureStack merged = st.model_templates;
    for (std::size_t i = 0; i < merged.grids.size(); ++i) {
        auto& dst = merged.grids[i].values.data();
        const auto& src = fresh.grids[i].values.data();
        for (std::size_t t = 0; t < dst.size(); ++t)
            dst[t] = (1.0 - eta) * dst[t] + eta * src[t];
    }

    st.bbox = new_bbox;
    st.frame_index += 1;
    try {
        ProblemInstance inst{merged, fresh, st.label};
        SolveResult solved = solve_joint_filters(inst, st.cfg.solver, &st.bank, trace);
        st.model_templates = std::move(merged);
        st.bank = std::move(solved.bank);
        st.last_solve = std::move(solved.state);
        refresh_filter_spectra(st);
    } catch (const NumericalError&) {
        // Keep the previous model; the frame is flagged instead.
        st.diagnostics.skipped_updates.push_back(st.frame_index);
    }
}

TrackResult track_sequence(const FrameSource& frames, int frame_count, const BBox& init_box,
                           const TrackerConfig& cfg, const TrackOptions& opts) {
    if (frame_count < 1)
        throw InvalidArgument("track_sequence: need at least one frame");

    const bool render = !opts.render_dir.empty();
    if (render)
        std::filesystem::create_directories(opts.render_dir);
    auto render_frame = [&](const Image& f, const BBox& b, int t) {
        if (!render)
            return;
        Image annotated = f;
        draw_box(annotated, b, 255, 40, 40);
        char name[32];
        std::snprintf(name, sizeof(name), "%04d.png", t + 1);
        save_png(annotated, opts.render_dir + "/" + name);
    };

    TrackResult result;
    Image f0 = frames(0);
    TrackerState st = init(f0, init_box, cfg, opts.trace);
    result.boxes.push_back(st.bbox);
    render_frame(f0, st.bbox, 0);

    for (int t = 1; t < frame_count; ++t) {
        try {
            Image f = frames(t);
            Detection det = detect_translation(st, f);
            ScaleSearch sc = search_scale(st, f, det.cx, det.cy);
            BBox moved{det.cx - st.bbox.w / 2.0, det.cy - st.bbox.h / 2.0, st.bbox.w,
                       st.bbox.h};
            BBox next = clip_bbox(scale_bbox_about_center(moved, sc.best_scale),
                                  static_cast<double>(f.cols), static_cast<double>(f.rows));
            update_model(st, f, next, opts.trace);
            result.boxes.push_back(st.bbox);
            render_frame(f, st.bbox, t);
        } catch (const TrackingLost&) {
            result.lost_at = t;
            break;
        }
    }
    // A lost run keeps emitting the last good box.
    while (result.boxes.size() < static_cast<std::size_t>(frame_count))
        result.boxes.push_back(result.boxes.back());

    result.cn_fallback = st.diagnostics.cn_fallback;
    result.skipped_updates = st.diagnostics.skipped_updates;
    return result;
}

} // namespace cotrack
