#include "mrflp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrflp/errors.hpp"

namespace mrflp {

std::vector<int> threshold_labels(const std::vector<double>& labels, double t)
{
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] >= t ? 1 : 0;
    return out;
}

double overlap_ratio(const Mask& result, const Mask& truth)
{
    if (result.width != truth.width || result.height != truth.height ||
        result.bits.size() != truth.bits.size())
        throw InvalidInputError("overlap_ratio: mask dimensions differ");
    long long inter = 0, uni = 0;
    for (std::size_t i = 0; i < result.bits.size(); ++i) {
        const bool a = result.bits[i] != 0, b = truth.bits[i] != 0;
        inter += a && b;
        uni += a || b;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

PixelSeeds pixel_seeds_from_overlay(const RgbaImage& overlay)
{
    PixelSeeds seeds;
    for (int y = 0; y < overlay.height; ++y) {
        for (int x = 0; x < overlay.width; ++x) {
            const auto* p = &overlay.data[4 * (static_cast<std::size_t>(y) * overlay.width + x)];
            if (p[3] < 128) continue;
            if (p[0] > p[2] && p[0] >= 128) seeds.foreground.push_back({x, y});
            else if (p[2] > p[0] && p[2] >= 128) seeds.background.push_back({x, y});
        }
    }
    return seeds;
}

namespace {

std::vector<Point> points_from_json(const nlohmann::json& j, const char* key)
{
    std::vector<Point> out;
    if (!j.contains(key)) return out;
    const auto& list = j.at(key);
    if (!list.is_array()) throw InvalidInputError(std::string("seeds: '") + key + "' must be an array");
    for (const auto& p : list) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
            throw InvalidInputError(std::string("seeds: entries of '") + key + "' must be [x, y]");
        out.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    return out;
}

}  // namespace

PixelSeeds pixel_seeds_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw InvalidInputError("seeds: expected a JSON object");
    if (j.contains("v") && j.at("v") != 1) throw InvalidInputError("seeds: unsupported version");
    return {points_from_json(j, "foreground"), points_from_json(j, "background")};
}

nlohmann::json to_json(const PixelSeeds& seeds)
{
    auto list = [](const std::vector<Point>& pts) {
        auto a = nlohmann::json::array();
        for (const auto& p : pts) a.push_back({p[0], p[1]});
        return a;
    };
    return {{"v", 1}, {"foreground", list(seeds.foreground)}, {"background", list(seeds.background)}};
}

SeedSet rasterize_seeds(const SuperpixelMap& map, const PixelSeeds& seeds, bool border_background)
{
    const int k = map.count();
    std::vector<long long> fg(k, 0), bg(k, 0);
    auto vote = [&](const Point& p, std::vector<long long>& tally) {
        if (p[0] < 0 || p[1] < 0 || p[0] >= map.width || p[1] >= map.height)
            throw InvalidInputError("seed point (" + std::to_string(p[0]) + ", " +
                                    std::to_string(p[1]) + ") outside the image");
        ++tally[map.at(p[0], p[1])];
    };
    for (const auto& p : seeds.foreground) vote(p, fg);
    for (const auto& p : seeds.background) vote(p, bg);
    if (border_background) {
        for (int x = 0; x < map.width; ++x) {
            vote({x, 0}, bg);
            if (map.height > 1) vote({x, map.height - 1}, bg);
        }
        for (int y = 1; y + 1 < map.height; ++y) {
            vote({0, y}, bg);
            if (map.width > 1) vote({map.width - 1, y}, bg);
        }
    }
    std::vector<int> f, b;
    for (int i = 0; i < k; ++i) {
        if (fg[i] == 0 && bg[i] == 0) continue;
        (fg[i] >= bg[i] ? f : b).push_back(i);
    }
    return SeedSet(std::move(f), std::move(b));
}

PreparedImage prepare_graph(SuperpixelMap map, const SegmentationParams& params)
{
    auto graph = map.to_graph(params.c);
    const auto incidence = build_incidence(graph);
    auto wtilde = build_wtilde(incidence, 0.0);
    const double eps = params.epsilon ? *params.epsilon : default_epsilon(wtilde);
    auto wtilde_eps = build_wtilde(incidence, eps);
    auto factor = cholesky_upper(wtilde_eps);
    return PreparedImage{std::move(map), std::move(graph), std::move(wtilde), std::move(wtilde_eps),
                         std::move(factor)};
}

PreparedImage prepare_image(const RgbImage& image, const SegmentationParams& params)
{
    const int target = std::min(params.superpixels, image.pixel_count());
    return prepare_graph(superpixelize(image, target), params);
}

Segmentation segment(const PreparedImage& prepared, const SeedSet& seeds, Method method,
                     const SegmentationParams& params)
{
    seeds.validate(prepared.graph.node_count());
    Segmentation out;
    switch (method) {
    case Method::CompactLp: {
        auto r = solve_compact_lp(prepared.factor, seeds, params.lp);
        out.labels = std::move(r.labels);
        out.iterations = r.lp.iterations;
        break;
    }
    case Method::ConventionalLp: {
        auto r = solve_conventional_lp(prepared.graph, seeds, params.lp);
        out.labels = std::move(r.labels);
        out.iterations = r.lp.iterations;
        break;
    }
    case Method::Qp:
        out.labels = solve_random_walker(prepared.wtilde, seeds);
        break;
    case Method::GraphCut:
        out.labels = solve_graph_cut(prepared.graph, seeds).labels;
        break;
    }
    out.energy = energy_report(prepared.graph, out.labels.values, &prepared.factor);
    return out;
}

Mask mask_from_labels(const SuperpixelMap& map, const std::vector<double>& labels, double t)
{
    if (static_cast<int>(labels.size()) != map.count())
        throw InvalidInputError("mask_from_labels: label count differs from superpixel count");
    const auto bin = threshold_labels(labels, t);
    Mask mask(map.width, map.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        mask.bits[i] = static_cast<std::uint8_t>(bin[map.labels[i]]);
    return mask;
}

std::string SweepReport::to_csv() const
{
    std::ostringstream out;
    out.precision(17);
    out << "threshold,method,gamma\n";
    for (const auto& m : methods) {
        const auto& g = gamma.at(m);
        for (std::size_t k = 0; k < thresholds.size(); ++k)
            out << thresholds[k] << ',' << m << ',' << g[k] << '\n';
    }
    return out.str();
}

SweepReport threshold_sweep(const std::vector<SweepCase>& cases, int grid_size)
{
    if (grid_size < 2) throw InvalidInputError("threshold_sweep: grid_size must be at least 2");
    SweepReport report;
    report.thresholds.resize(grid_size);
    for (int k = 0; k < grid_size; ++k)
        report.thresholds[k] = static_cast<double>(k) / (grid_size - 1);
    report.thresholds.back() = 1.0;

    if (!cases.empty())
        for (const auto& [name, _] : cases.front().labels) report.methods.push_back(name);

    for (const auto& m : report.methods) {
        std::vector<double> sum(grid_size, 0.0), sq(grid_size, 0.0);
        for (const auto& c : cases) {
            const auto it = c.labels.find(m);
            if (it == c.labels.end()) throw InvalidInputError("threshold_sweep: case lacks method " + m);
            const auto& v = it->second;
            if (static_cast<int>(v.size()) != c.width * c.height)
                throw InvalidInputError("threshold_sweep: label size differs from image size");
            for (int k = 0; k < grid_size; ++k) {
                Mask mask(c.width, c.height);
                for (std::size_t i = 0; i < v.size(); ++i)
                    mask.bits[i] = v[i] >= report.thresholds[k] ? 1 : 0;
                const double g = overlap_ratio(mask, c.truth);
                sum[k] += g;
                sq[k] += g * g;
            }
        }
        const double n = static_cast<double>(cases.size());
        std::vector<double> mean(grid_size, 0.0), sd(grid_size, 0.0);
        for (int k = 0; k < grid_size && n > 0; ++k) {
            mean[k] = sum[k] / n;
            sd[k] = std::sqrt(std::max(0.0, sq[k] / n - mean[k] * mean[k]));
        }
        const double mu = std::accumulate(mean.begin(), mean.end(), 0.0) / grid_size;
        double var = 0.0;
        for (double g : mean) var += (g - mu) * (g - mu);
        report.mean[m] = mu;
        report.stddev[m] = std::sqrt(var / grid_size);
        report.gamma[m] = std::move(mean);
        report.gamma_std[m] = std::move(sd);
    }
    return report;
}

PixelSeeds robot_user_step(const Mask& current, const Mask& truth, const PixelSeeds& seeds)
{
    if (current.width != truth.width || current.height != truth.height)
        throw InvalidInputError("robot_user_step: mask dimensions differ");
    const int w = current.width, h = current.height;
    std::vector<int> comp(static_cast<std::size_t>(w) * h, -1);
    std::vector<int> best;
    std::vector<int> stack, members;
    for (int start = 0; start < w * h; ++start) {
        if (comp[start] >= 0 || current.bits[start] == truth.bits[start]) continue;
        members.clear();
        stack.assign(1, start);
        comp[start] = start;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            members.push_back(p);
            const int x = p % w, y = p / w;
            const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& q : nbr) {
                if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
                const int qi = q[1] * w + q[0];
                if (comp[qi] >= 0 || current.bits[qi] == truth.bits[qi]) continue;
                comp[qi] = start;
                stack.push_back(qi);
            }
        }
        if (members.size() > best.size()) best = members;
    }
    PixelSeeds out = seeds;
    if (best.empty()) return out;

    // City-block distance of each member to the nearest pixel outside the region.
    const int region = comp[best.front()];
    std::vector<int> depth(static_cast<std::size_t>(w) * h, -1);
    std::vector<int> queue;
    for (int p = 0; p < w * h; ++p) {
        if (comp[p] != region) {
            depth[p] = 0;
            queue.push_back(p);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int p = queue[head], x = p % w, y = p / w;
        const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& q : nbr) {
            if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
            const int qi = q[1] * w + q[0];
            if (depth[qi] >= 0) continue;
            depth[qi] = depth[p] + 1;
            queue.push_back(qi);
        }
    }
    int max_depth = 0;
    for (int p : best) max_depth = std::max(max_depth, depth[p]);
    // Only the deeper half of the region is eligible, so that regions wrapped
    // around their own centroid are not seeded on their rim.
    const int min_depth = max_depth < 0 ? -1 : (max_depth + 1) / 2;

    double cx = 0.0, cy = 0.0;
    for (int p : best) {
        cx += p % w;
        cy += p / w;
    }
    cx /= static_cast<double>(best.size());
    cy /= static_cast<double>(best.size());
    int pick = best.front();
    double dmin = INFINITY;
    for (int p : best) {
        if (depth[p] < min_depth) continue;
        const double dx = p % w - cx, dy = p / w - cy;
        const double d = dx * dx + dy * dy;
        if (d < dmin || (d == dmin && p < pick)) {
            dmin = d;
            pick = p;
        }
    }
    const Point pt{pick % w, pick / w};
    (truth.bits[pick] ? out.foreground : out.background).push_back(pt);
    return out;
}

RobotRun run_robot_user(const PreparedImage& prepared, const Mask& truth, PixelSeeds seeds,
                        Method method, const SegmentationParams& params, int budget)
{
    RobotRun run;
    auto solve_mask = [&](const PixelSeeds& s) {
        const auto set = rasterize_seeds(prepared.map, s, params.border_background);
        const auto seg = segment(prepared, set, method, params);
        return mask_from_labels(prepared.map, seg.labels.values, params.threshold);
    };
    Mask mask = solve_mask(seeds);
    run.gamma.push_back(overlap_ratio(mask, truth));
    for (int it = 0; it < budget && !(mask == truth); ++it) {
        seeds = robot_user_step(mask, truth, seeds);
        mask = solve_mask(seeds);
        run.gamma.push_back(overlap_ratio(mask, truth));
    }
    run.seeds = std::move(seeds);
    return run;
}

}  // namespace mrflp
