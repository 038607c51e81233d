#pragma once

#include <cmath>

namespace cotrack {

// Axis-aligned rectangle in continuous pixel coordinates, (0,0) at the
// top-left of the frame. Width and height must be positive for a valid box.
struct BBox {
    double x = 0.0; // left edge
    double y = 0.0; // top edge
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }

    bool valid() const {
        return w > 0.0 && h > 0.0 && std::isfinite(x) && std::isfinite(y) &&
               std::isfinite(w) && std::isfinite(h);
    }
};

// Rescales both sides by s, keeping the center fixed. Throws InvalidArgument
// for s <= 0.
BBox scale_bbox_about_center(const BBox& b, double s);

// Clamps the box into [0, frame_w] x [0, frame_h]. A box clipped to nothing
// collapses to a 1x1 box pinned to the nearest border, so the result is
// always a valid box inside the frame. Idempotent.
BBox clip_bbox(const BBox& b, double frame_w, double frame_h);

// Intersection over union of two valid boxes, in [0, 1].
double overlap_ratio(const BBox& bt, const BBox& bg);

} // namespace cotrack
