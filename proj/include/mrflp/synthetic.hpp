#pragma once

#include <cstdint>

#include "mrflp/image.hpp"
#include "mrflp/pipeline.hpp"

namespace mrflp {

struct SyntheticOptions {
    int width = 64;
    int height = 64;
    /// Per-channel intensity step between background and object.
    double contrast = 0.4;
    /// Standard deviation of additive Gaussian noise, clamped to [0, 1] after.
    double noise = 0.1;
    /// Background stroke radius relative to the object boundary.
    double ring_scale = 1.25;
    std::uint64_t seed = 42;
};

/// Two-region image: a randomly placed, slightly irregular blob on a flat
/// background, with its truth mask and default scribbles (a cross inside the
/// object and a closed stroke around it).
struct SyntheticCase {
    RgbImage image;
    Mask truth;
    PixelSeeds seeds;
};

SyntheticCase generate_two_region(const SyntheticOptions& options = {});

}  // namespace mrflp
