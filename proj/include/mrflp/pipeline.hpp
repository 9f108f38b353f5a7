#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrflp/factorization.hpp"
#include "mrflp/graph.hpp"
#include "mrflp/image.hpp"
#include "mrflp/lp.hpp"
#include "mrflp/relaxations.hpp"
#include "mrflp/seeds.hpp"
#include "mrflp/superpixel.hpp"

namespace mrflp {

inline constexpr double kDefaultThreshold = 0.08;
inline constexpr double kDefaultLambda = 10.0;
inline constexpr int kDefaultSuperpixels = 800;
inline constexpr int kDefaultRobotBudget = 20;

struct SegmentationParams {
    double c = kDefaultWeightFloor;
    double lambda = kDefaultLambda;
    double threshold = kDefaultThreshold;
    /// Unset: 1e-8 times the largest diagonal of W~.
    std::optional<double> epsilon;
    int superpixels = kDefaultSuperpixels;
    /// Image-border pixels become background seeds.
    bool border_background = false;
    LpOptions lp;
};

/// output_i = 1 iff labels_i >= t.
std::vector<int> threshold_labels(const std::vector<double>& labels, double t);

/// |A n B| / |A u B|, 1 when both are empty. Throws on dimension mismatch.
double overlap_ratio(const Mask& result, const Mask& truth);

using Point = std::array<int, 2>;  // (x, y)

/// Scribbled pixels.
struct PixelSeeds {
    std::vector<Point> foreground;
    std::vector<Point> background;

    bool empty() const noexcept { return foreground.empty() && background.empty(); }
    friend bool operator==(const PixelSeeds&, const PixelSeeds&) = default;
};

/// Overlay convention: opaque red-dominant pixels are foreground, opaque
/// blue-dominant pixels background, transparent pixels carry no seed.
PixelSeeds pixel_seeds_from_overlay(const RgbaImage& overlay);
/// {"v":1,"foreground":[[x,y],...],"background":[[x,y],...]}
PixelSeeds pixel_seeds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PixelSeeds& seeds);

/// Each superpixel touched by scribbles gets the majority class by pixel
/// count, ties going to foreground. Out-of-image points are rejected.
SeedSet rasterize_seeds(const SuperpixelMap& map, const PixelSeeds& seeds,
                        bool border_background = false);

/// Everything computed once per image and reused across seed edits.
struct PreparedImage {
    SuperpixelMap map;
    SuperpixelGraph graph;
    SmoothnessMatrix wtilde;        // unregularized
    SmoothnessMatrix wtilde_eps;    // with epsilon on the diagonal
    FactorU factor;
};

PreparedImage prepare_image(const RgbImage& image, const SegmentationParams& params);
PreparedImage prepare_graph(SuperpixelMap map, const SegmentationParams& params);

struct Segmentation {
    LabelField labels;       // per superpixel
    EnergyReport energy;
    int iterations = 0;      // LP iterations, 0 for the direct solvers
};

/// Seed-only segmentation with the chosen relaxation.
Segmentation segment(const PreparedImage& prepared, const SeedSet& seeds, Method method,
                     const SegmentationParams& params);

Mask mask_from_labels(const SuperpixelMap& map, const std::vector<double>& labels, double t);

/// Per-pixel continuous labels for a set of methods, plus the truth mask.
struct SweepCase {
    int width = 0;
    int height = 0;
    std::map<std::string, std::vector<double>> labels;
    Mask truth;
};

struct SweepReport {
    std::vector<double> thresholds;
    std::vector<std::string> methods;
    /// gamma[m][k]: mean over cases at thresholds[k]; gamma_std the spread.
    std::map<std::string, std::vector<double>> gamma;
    std::map<std::string, std::vector<double>> gamma_std;
    /// Mean and standard deviation of gamma[m] over the grid.
    std::map<std::string, double> mean;
    std::map<std::string, double> stddev;

    /// "threshold,method,gamma" with a header line.
    std::string to_csv() const;
};

/// Thresholds k / (grid_size - 1), k = 0..grid_size-1. Throws when grid_size < 2.
SweepReport threshold_sweep(const std::vector<SweepCase>& cases, int grid_size);

/// Adds one seed at the pixel nearest the centroid of the largest
/// misclassified 4-connected region, labelled with the truth there. Only
/// pixels at least half the region's maximum depth away from its outline are
/// candidates. Seeds are returned unchanged when the masks agree.
PixelSeeds robot_user_step(const Mask& current, const Mask& truth, const PixelSeeds& seeds);

struct RobotRun {
    std::vector<double> gamma;  // after the initial solve and each interaction
    PixelSeeds seeds;
};

/// Solve, then alternate robot_user_step and re-solve up to `budget` times
/// (stopping early once the mask is perfect).
RobotRun run_robot_user(const PreparedImage& prepared, const Mask& truth, PixelSeeds seeds,
                        Method method, const SegmentationParams& params,
                        int budget = kDefaultRobotBudget);

}  // namespace mrflp
