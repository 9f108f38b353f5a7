#pragma once

#include <array>
#include <vector>

#include "mrflp/graph.hpp"
#include "mrflp/image.hpp"

namespace mrflp {

struct SuperpixelOptions {
    int iterations = 10;
    /// Weight of spatial distance relative to colour distance, per grid step.
    double compactness = 0.1;
};

/// Partition of an image into 4-connected regions with contiguous ids
/// 0..K-1, numbered row-major by centroid.
struct SuperpixelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // per pixel
    std::vector<std::array<double, 3>> mean_color;
    std::vector<std::array<double, 2>> centroid;  // (x, y)
    std::vector<int> sizes;

    int count() const noexcept { return static_cast<int>(sizes.size()); }
    int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }

    /// Unordered pairs of superpixels sharing a 4-neighbour pixel border,
    /// canonical and sorted.
    std::vector<Edge> adjacency() const;

    /// Graph over superpixels with mean colours as features.
    SuperpixelGraph to_graph(double c) const;

    /// Per-pixel values from per-superpixel values.
    std::vector<double> expand(const std::vector<double>& per_superpixel) const;

    /// Closed outlines of each superpixel in pixel-corner coordinates; one or
    /// more loops per superpixel (holes give extra loops).
    std::vector<std::vector<std::vector<std::array<int, 2>>>> boundary_polygons() const;
};

/// SLIC-style k-means over (colour, position) with connectivity enforcement.
/// Throws InvalidInputError for an empty image or target outside [1, pixels].
SuperpixelMap superpixelize(const RgbImage& image, int target_count,
                            const SuperpixelOptions& options = {});

}  // namespace mrflp
