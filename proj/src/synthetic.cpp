#include "mrflp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mrflp/errors.hpp"

namespace mrflp {

SyntheticCase generate_two_region(const SyntheticOptions& o)
{
    if (o.width < 8 || o.height < 8) throw InvalidInputError("synthetic image must be at least 8x8");
    if (!(o.contrast >= 0.0 && o.contrast <= 1.0) || !(o.noise >= 0.0))
        throw InvalidInputError("synthetic: contrast must lie in [0, 1] and noise be non-negative");
    if (!(o.ring_scale > 1.0)) throw InvalidInputError("synthetic: ring_scale must exceed 1");

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double w = o.width, h = o.height;
    const double cx = w * (0.4 + 0.2 * unit(rng));
    const double cy = h * (0.4 + 0.2 * unit(rng));
    const double rx = w * (0.18 + 0.08 * unit(rng));
    const double ry = h * (0.18 + 0.08 * unit(rng));
    const double wobble_amp = 0.08 * unit(rng);
    const double wobble_phase = 2.0 * std::numbers::pi * unit(rng);
    const int wobble_freq = 2 + static_cast<int>(unit(rng) * 3.0);

    // Radial distance normalised so the boundary sits at 1.
    auto radius = [&](double x, double y) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        const double theta = std::atan2(dy, dx);
        return std::hypot(dx, dy) / (1.0 + wobble_amp * std::sin(wobble_freq * theta + wobble_phase));
    };

    const double base = (1.0 - o.contrast) * (0.2 + 0.6 * unit(rng));
    const bool bright_object = unit(rng) < 0.5;
    const double bg = bright_object ? base : base + o.contrast;
    const double fg = bright_object ? base + o.contrast : base;

    SyntheticCase out;
    out.image = RgbImage(o.width, o.height);
    out.truth = Mask(o.width, o.height);
    for (int y = 0; y < o.height; ++y) {
        for (int x = 0; x < o.width; ++x) {
            const bool inside = radius(x + 0.5, y + 0.5) <= 1.0;
            out.truth.at(x, y) = inside ? 1 : 0;
            for (int c = 0; c < 3; ++c) {
                const double v = (inside ? fg : bg) + o.noise * gauss(rng);
                out.image.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }

    // Foreground: a cross through the centre reaching 70% of the radii.
    // Background: a closed stroke at ring_scale times the boundary radius,
    // clipped to the image.
    for (int y = 0; y < o.height; ++y) {
        for (int x = 0; x < o.width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const bool on_h = std::abs(py - cy) < 1.0 && std::abs(px - cx) <= 0.7 * rx;
            const bool on_v = std::abs(px - cx) < 1.0 && std::abs(py - cy) <= 0.7 * ry;
            if ((on_h || on_v) && out.truth.at(x, y)) out.seeds.foreground.push_back({x, y});
        }
    }
    Mask ring(o.width, o.height);
    const int steps = 8 * (o.width + o.height);
    for (int s = 0; s < steps; ++s) {
        const double theta = 2.0 * std::numbers::pi * s / steps;
        const double scale = o.ring_scale * (1.0 + wobble_amp * std::sin(wobble_freq * theta + wobble_phase));
        const int x = static_cast<int>(std::floor(cx + scale * rx * std::cos(theta)));
        const int y = static_cast<int>(std::floor(cy + scale * ry * std::sin(theta)));
        const int xc = std::clamp(x, 0, o.width - 1), yc = std::clamp(y, 0, o.height - 1);
        if (!ring.at(xc, yc) && !out.truth.at(xc, yc)) {
            ring.at(xc, yc) = 1;
            out.seeds.background.push_back({xc, yc});
        }
    }
    std::sort(out.seeds.background.begin(), out.seeds.background.end(),
              [](const Point& a, const Point& b) { return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0]; });
    return out;
}

}  // namespace mrflp
