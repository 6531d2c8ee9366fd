#pragma once

#include "volcap/core/error.hpp"

namespace volcap {

/// Weights and constants of the alignment energy. The data/prior weights
/// are free parameters; the defaults recover synthetic closed-loop scenes.
struct EnergyConfig {
    double w_data = 1.0;
    double w_smooth = 0.1;
    double w_pose = 1.0;
    double w_shape = 1.0;

    double delta_low = 0.1;    // flat-region gradient threshold
    double delta_high = 0.2;   // image gradient magnitude clamp
    double sobel_sigma = 1.1;  // px, smoothing of the Sobel response

    double joint_gaussian_sigma = 0.10;   // m, stage-I joint probes
    double joint_gaussian_density = 4.0;  // makes probes clearly visible
    double heatmap_support_min = 1e-3;    // heat-map values below are skipped

    double cull = 1e-8;  // per-ray peak density cutoff

    void validate() const {
        if (w_data < 0 || w_smooth < 0 || w_pose < 0 || w_shape < 0)
            throw InvalidArgumentError("EnergyConfig: weights must be >= 0");
        if (delta_low < 0 || delta_high <= 0 || sobel_sigma <= 0)
            throw InvalidArgumentError("EnergyConfig: bad gradient constants");
    }
};

}  // namespace volcap
