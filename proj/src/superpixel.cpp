#include "mrflp/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mrflp/errors.hpp"

namespace mrflp {

namespace {

// 4-connected components of a label image. Returns component id per pixel.
int connected_components(int w, int h, const std::vector<int>& labels, std::vector<int>& comp)
{
    comp.assign(labels.size(), -1);
    int next = 0;
    std::vector<int> stack;
    for (int start = 0; start < w * h; ++start) {
        if (comp[start] != -1) {
            continue;
        }
        comp[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int x = p % w;
            const int y = p / w;
            const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) {
                    continue;
                }
                const int qi = q[1] * w + q[0];
                if (comp[qi] == -1 && labels[qi] == labels[start]) {
                    comp[qi] = next;
                    stack.push_back(qi);
                }
            }
        }
        ++next;
    }
    return next;
}

}  // namespace

SuperpixelMap superpixelize(const RgbImage& image, int target_count, const SuperpixelOptions& options)
{
    const int w = image.width;
    const int h = image.height;
    const int pixels = w * h;
    if (w <= 0 || h <= 0 || static_cast<int>(image.data.size()) != 3 * pixels) {
        throw InvalidInputError("superpixelize: degenerate image");
    }
    if (target_count < 1 || target_count > pixels) {
        throw InvalidInputError("superpixelize: target count must be in [1, pixel count]");
    }

    const double step = std::sqrt(static_cast<double>(pixels) / target_count);
    const int nx = std::clamp(static_cast<int>(std::lround(w / step)), 1, w);
    const int ny = std::clamp(static_cast<int>(std::lround(h / step)), 1, h);
    const int k = nx * ny;

    std::vector<int> assign(pixels);
    auto cell_x = [&](int x) { return std::min(nx - 1, x * nx / w); };
    auto cell_y = [&](int y) { return std::min(ny - 1, y * ny / h); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            assign[y * w + x] = cell_y(y) * nx + cell_x(x);
        }
    }

    struct Center {
        double r = 0, g = 0, b = 0, x = 0, y = 0;
        int n = 0;
    };
    std::vector<Center> centers(k);
    auto recompute = [&]() {
        std::vector<Center> acc(k);
        for (int p = 0; p < pixels; ++p) {
            auto& c = acc[assign[p]];
            const int x = p % w;
            const int y = p / w;
            c.r += image.at(x, y, 0);
            c.g += image.at(x, y, 1);
            c.b += image.at(x, y, 2);
            c.x += x;
            c.y += y;
            ++c.n;
        }
        for (int i = 0; i < k; ++i) {
            if (acc[i].n == 0) {
                continue;  // keep the previous centre
            }
            const double inv = 1.0 / acc[i].n;
            centers[i] = {acc[i].r * inv, acc[i].g * inv, acc[i].b * inv, acc[i].x * inv,
                          acc[i].y * inv, acc[i].n};
        }
    };
    recompute();

    const double spatial = options.compactness / step;
    const double spatial2 = spatial * spatial;
    for (int it = 0; it < options.iterations; ++it) {
        bool changed = false;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int p = y * w + x;
                const double r = image.at(x, y, 0);
                const double g = image.at(x, y, 1);
                const double b = image.at(x, y, 2);
                const int cx = cell_x(x);
                const int cy = cell_y(y);
                int best = assign[p];
                double best_d = std::numeric_limits<double>::infinity();
                for (int gy = std::max(0, cy - 2); gy <= std::min(ny - 1, cy + 2); ++gy) {
                    for (int gx = std::max(0, cx - 2); gx <= std::min(nx - 1, cx + 2); ++gx) {
                        const int c = gy * nx + gx;
                        const auto& ct = centers[c];
                        if (ct.n == 0) {
                            continue;
                        }
                        const double dc = (r - ct.r) * (r - ct.r) + (g - ct.g) * (g - ct.g) +
                                          (b - ct.b) * (b - ct.b);
                        const double ds = (x - ct.x) * (x - ct.x) + (y - ct.y) * (y - ct.y);
                        const double d = dc + spatial2 * ds;
                        if (d < best_d) {
                            best_d = d;
                            best = c;
                        }
                    }
                }
                if (best != assign[p]) {
                    assign[p] = best;
                    changed = true;
                }
            }
        }
        recompute();
        if (!changed) {
            break;
        }
    }

    // Connectivity: split each cluster into its 4-connected pieces, then fold
    // small pieces into the most similar neighbouring piece.
    std::vector<int> comp;
    const int pieces = connected_components(w, h, assign, comp);
    std::vector<double> sum(3 * pieces, 0.0);
    std::vector<int> size(pieces, 0);
    for (int p = 0; p < pixels; ++p) {
        const int c = comp[p];
        for (int ch = 0; ch < 3; ++ch) {
            sum[3 * c + ch] += image.at(p % w, p / w, ch);
        }
        ++size[c];
    }
    std::vector<int> parent(pieces);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    const int min_size = std::max(1, static_cast<int>(pixels / target_count / 4));
    // Every fragment other than the largest piece of its cluster is folded too.
    std::vector<int> main_piece(k, -1);
    for (int p = 0; p < pixels; ++p) {
        int& m = main_piece[assign[p]];
        if (m < 0 || size[comp[p]] > size[m]) {
            m = comp[p];
        }
    }
    std::vector<int> cluster_of(pieces);
    for (int p = 0; p < pixels; ++p) {
        cluster_of[comp[p]] = assign[p];
    }
    std::vector<std::vector<int>> neighbours(pieces);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = comp[y * w + x];
            if (x + 1 < w && comp[y * w + x + 1] != a) {
                neighbours[a].push_back(comp[y * w + x + 1]);
                neighbours[comp[y * w + x + 1]].push_back(a);
            }
            if (y + 1 < h && comp[(y + 1) * w + x] != a) {
                neighbours[a].push_back(comp[(y + 1) * w + x]);
                neighbours[comp[(y + 1) * w + x]].push_back(a);
            }
        }
    }
    std::vector<int> order(pieces);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return size[a] < size[b]; });
    std::vector<int> root_size = size;
    std::vector<double> root_sum = sum;
    for (int piece : order) {
        const int root = find(piece);
        const bool stray = root == piece && main_piece[cluster_of[piece]] != piece;
        if (root_size[root] >= min_size && !stray) {
            continue;
        }
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int nb : neighbours[piece]) {
            const int r2 = find(nb);
            if (r2 == root) {
                continue;
            }
            double d = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                const double a = root_sum[3 * root + ch] / root_size[root];
                const double b = root_sum[3 * r2 + ch] / root_size[r2];
                d += (a - b) * (a - b);
            }
            if (d < best_d || (d == best_d && r2 < best)) {
                best_d = d;
                best = r2;
            }
        }
        if (best < 0) {
            continue;
        }
        parent[root] = best;
        root_size[best] += root_size[root];
        for (int ch = 0; ch < 3; ++ch) {
            root_sum[3 * best + ch] += root_sum[3 * root + ch];
        }
    }

    // Final segments, numbered row-major by centroid.
    std::map<int, int> root_index;
    std::vector<int> seg(pixels);
    for (int p = 0; p < pixels; ++p) {
        const int r = find(comp[p]);
        auto it = root_index.try_emplace(r, static_cast<int>(root_index.size())).first;
        seg[p] = it->second;
    }
    const int count = static_cast<int>(root_index.size());
    std::vector<double> cx(count, 0.0), cy(count, 0.0);
    std::vector<int> cnt(count, 0);
    for (int p = 0; p < pixels; ++p) {
        cx[seg[p]] += p % w;
        cy[seg[p]] += p / w;
        ++cnt[seg[p]];
    }
    for (int s = 0; s < count; ++s) {
        cx[s] /= cnt[s];
        cy[s] /= cnt[s];
    }
    std::vector<int> rank(count);
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(), [&](int a, int b) {
        const double ya = std::floor(cy[a]);
        const double yb = std::floor(cy[b]);
        if (ya != yb) {
            return ya < yb;
        }
        if (cx[a] != cx[b]) {
            return cx[a] < cx[b];
        }
        return a < b;
    });
    std::vector<int> new_id(count);
    for (int i = 0; i < count; ++i) {
        new_id[rank[i]] = i;
    }

    SuperpixelMap map;
    map.width = w;
    map.height = h;
    map.labels.resize(pixels);
    map.mean_color.assign(count, {0.0, 0.0, 0.0});
    map.centroid.assign(count, {0.0, 0.0});
    map.sizes.assign(count, 0);
    for (int p = 0; p < pixels; ++p) {
        const int id = new_id[seg[p]];
        map.labels[p] = id;
        for (int ch = 0; ch < 3; ++ch) {
            map.mean_color[id][ch] += image.at(p % w, p / w, ch);
        }
        map.centroid[id][0] += p % w;
        map.centroid[id][1] += p / w;
        ++map.sizes[id];
    }
    for (int s = 0; s < count; ++s) {
        for (int ch = 0; ch < 3; ++ch) {
            map.mean_color[s][ch] /= map.sizes[s];
        }
        map.centroid[s][0] /= map.sizes[s];
        map.centroid[s][1] /= map.sizes[s];
    }
    return map;
}

std::vector<Edge> SuperpixelMap::adjacency() const
{
    std::vector<Edge> edges;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int a = at(x, y);
            if (x + 1 < width && at(x + 1, y) != a) {
                const int b = at(x + 1, y);
                edges.push_back({std::min(a, b), std::max(a, b)});
            }
            if (y + 1 < height && at(x, y + 1) != a) {
                const int b = at(x, y + 1);
                edges.push_back({std::min(a, b), std::max(a, b)});
            }
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& l, const Edge& r) { return l.u != r.u ? l.u < r.u : l.v < r.v; });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

SuperpixelGraph SuperpixelMap::to_graph(double c) const
{
    std::vector<FeatureVector> features;
    features.reserve(mean_color.size());
    for (const auto& m : mean_color) {
        features.push_back({m[0], m[1], m[2]});
    }
    return SuperpixelGraph::from_features(std::move(features), adjacency(), c);
}

std::vector<double> SuperpixelMap::expand(const std::vector<double>& per_superpixel) const
{
    if (static_cast<int>(per_superpixel.size()) != count()) {
        throw InvalidInputError("superpixel expand: value count does not match superpixel count");
    }
    std::vector<double> out(labels.size());
    for (std::size_t p = 0; p < labels.size(); ++p) {
        out[p] = per_superpixel[labels[p]];
    }
    return out;
}

std::vector<std::vector<std::vector<std::array<int, 2>>>> SuperpixelMap::boundary_polygons() const
{
    using Point = std::array<int, 2>;
    struct Segment {
        Point from;
        Point to;
    };
    std::vector<std::vector<Segment>> segs(count());
    auto label_at = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= width || y >= height) ? -1 : at(x, y);
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int l = at(x, y);
            if (label_at(x, y - 1) != l) {
                segs[l].push_back({{x, y}, {x + 1, y}});
            }
            if (label_at(x + 1, y) != l) {
                segs[l].push_back({{x + 1, y}, {x + 1, y + 1}});
            }
            if (label_at(x, y + 1) != l) {
                segs[l].push_back({{x + 1, y + 1}, {x, y + 1}});
            }
            if (label_at(x - 1, y) != l) {
                segs[l].push_back({{x, y + 1}, {x, y}});
            }
        }
    }
    std::vector<std::vector<std::vector<Point>>> out(count());
    for (int l = 0; l < count(); ++l) {
        std::multimap<Point, int> by_start;
        for (int s = 0; s < static_cast<int>(segs[l].size()); ++s) {
            by_start.emplace(segs[l][s].from, s);
        }
        std::vector<char> used(segs[l].size(), 0);
        for (int s0 = 0; s0 < static_cast<int>(segs[l].size()); ++s0) {
            if (used[s0]) {
                continue;
            }
            std::vector<Point> loop;
            int s = s0;
            while (s != -1 && !used[s]) {
                used[s] = 1;
                loop.push_back(segs[l][s].from);
                const Point end = segs[l][s].to;
                s = -1;
                auto [first, last] = by_start.equal_range(end);
                for (auto it = first; it != last; ++it) {
                    if (!used[it->second]) {
                        s = it->second;
                        break;
                    }
                }
            }
            // Drop collinear interior vertices.
            std::vector<Point> simple;
            const int m = static_cast<int>(loop.size());
            for (int i = 0; i < m; ++i) {
                const Point& a = loop[(i + m - 1) % m];
                const Point& b = loop[i];
                const Point& c = loop[(i + 1) % m];
                const long cross = static_cast<long>(b[0] - a[0]) * (c[1] - b[1]) -
                                   static_cast<long>(b[1] - a[1]) * (c[0] - b[0]);
                if (cross != 0) {
                    simple.push_back(b);
                }
            }
            out[l].push_back(simple.empty() ? loop : simple);
        }
    }
    return out;
}

}  // namespace mrflp
