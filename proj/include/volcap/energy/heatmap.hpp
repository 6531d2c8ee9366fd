#pragma once

#include <vector>

#include "volcap/core/error.hpp"
#include "volcap/core/image.hpp"

namespace volcap {

/// Per-camera, per-frame, per-joint detection heat maps in [0,1]. Grids may
/// be downsampled relative to the camera images by an integer-free scale
/// factor; map pixel (x, y) is centered at image coordinates
/// ((x + 0.5) * scale, (y + 0.5) * scale).
class HeatMapSet {
public:
    HeatMapSet() = default;
    HeatMapSet(int cameras, int frames, int joints, int map_width, int map_height,
               double scale = 1.0)
        : cameras_(cameras), frames_(frames), joints_(joints), scale_(scale),
          maps_(static_cast<std::size_t>(cameras) * frames * joints,
                Image(map_width, map_height, 1)) {}

    int cameras() const { return cameras_; }
    int frames() const { return frames_; }
    int joints() const { return joints_; }
    double scale() const { return scale_; }
    int map_width() const { return maps_.empty() ? 0 : maps_[0].width(); }
    int map_height() const { return maps_.empty() ? 0 : maps_[0].height(); }

    Image& at(int camera, int frame, int joint) { return maps_[index(camera, frame, joint)]; }
    const Image& at(int camera, int frame, int joint) const {
        return maps_[index(camera, frame, joint)];
    }

    bool has(int camera, int frame, int joint) const {
        return camera >= 0 && camera < cameras_ && frame >= 0 && frame < frames_ && joint >= 0 &&
               joint < joints_;
    }

private:
    std::size_t index(int camera, int frame, int joint) const {
        if (!has(camera, frame, joint)) throw InvalidArgumentError("HeatMapSet: index out of range");
        return (static_cast<std::size_t>(camera) * frames_ + frame) * joints_ + joint;
    }

    int cameras_ = 0, frames_ = 0, joints_ = 0;
    double scale_ = 1.0;
    std::vector<Image> maps_;
};

}  // namespace volcap
