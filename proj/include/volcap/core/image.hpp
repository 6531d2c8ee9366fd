#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

#include "volcap/core/error.hpp"

namespace volcap {

/// Dense row-major float image with 1 or 3 channels. Row 0 is the top row.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.f)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<size_t>(width) * height * channels, fill) {
        if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
            throw InvalidArgumentError("Image: bad dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    float& at(int x, int y, int c = 0) {
        assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c < channels_);
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }
    float at(int x, int y, int c = 0) const {
        assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c < channels_);
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool same_shape(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

private:
    int width_ = 0, height_ = 0, channels_ = 0;
    std::vector<float> data_;
};

/// Binary mask, one byte per pixel (0 or 1), row-major.
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, bool fill = false)
        : width_(width), height_(height),
          data_(static_cast<size_t>(width) * height, fill ? 1 : 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool get(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { data_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0; }

    const std::vector<unsigned char>& data() const { return data_; }

    bool same_shape(const Mask& o) const { return width_ == o.width_ && height_ == o.height_; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : data_) n += (v != 0);
        return n;
    }

private:
    int width_ = 0, height_ = 0;
    std::vector<unsigned char> data_;
};

}  // namespace volcap
