#include "cotrack/geometry.hpp"

#include <algorithm>

#include "cotrack/errors.hpp"

namespace cotrack {

BBox scale_bbox_about_center(const BBox& b, double s) {
    if (!(s > 0.0))
        throw InvalidArgument("scale_bbox_about_center: scale must be positive");
    BBox out;
    out.w = b.w * s;
    out.h = b.h * s;
    out.x = b.cx() - out.w / 2.0;
    out.y = b.cy() - out.h / 2.0;
    return out;
}

BBox clip_bbox(const BBox& b, double frame_w, double frame_h) {
    double x1 = std::clamp(b.x, 0.0, frame_w);
    double y1 = std::clamp(b.y, 0.0, frame_h);
    double x2 = std::clamp(b.x + b.w, 0.0, frame_w);
    double y2 = std::clamp(b.y + b.h, 0.0, frame_h);
    double w = x2 - x1;
    double h = y2 - y1;
    // Fully clipped: keep a minimum 1x1 box pinned to the nearest border.
    if (w <= 0.0) {
        x1 = std::clamp(x1, 0.0, frame_w - 1.0);
        w = 1.0;
    }
    if (h <= 0.0) {
        y1 = std::clamp(y1, 0.0, frame_h - 1.0);
        h = 1.0;
    }
    return {x1, y1, w, h};
}

double overlap_ratio(const BBox& bt, const BBox& bg) {
    const double ix = std::max(0.0, std::min(bt.x + bt.w, bg.x + bg.w) - std::max(bt.x, bg.x));
    const double iy = std::max(0.0, std::min(bt.y + bt.h, bg.y + bg.h) - std::max(bt.y, bg.y));
    const double inter = ix * iy;
    const double uni = bt.area() + bg.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

} // namespace cotrack
