#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace cotrack {

// Dense real tensor of shape rows x cols x channels, stored channel-planar
// (each channel is a contiguous row-major rows*cols plane). The planar layout
// is what the per-channel spectral transforms operate on.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols, int channels, double fill = 0.0)
        : rows_(rows), cols_(cols), channels_(channels),
          v_(static_cast<std::size_t>(rows) * cols * channels, fill) {
        assert(rows >= 0 && cols >= 0 && channels >= 0);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int channels() const { return channels_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(rows_) * cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& at(int r, int c, int ch = 0) {
        return v_[plane_size() * ch + static_cast<std::size_t>(r) * cols_ + c];
    }
    double at(int r, int c, int ch = 0) const {
        return v_[plane_size() * ch + static_cast<std::size_t>(r) * cols_ + c];
    }

    std::span<double> plane(int ch) {
        return {v_.data() + plane_size() * ch, plane_size()};
    }
    std::span<const double> plane(int ch) const {
        return {v_.data() + plane_size() * ch, plane_size()};
    }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    bool same_shape(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && channels_ == o.channels_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    int channels_ = 0;
    std::vector<double> v_;
};

} // namespace cotrack
