#include "commands.hpp"

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mrflp/config.hpp"
#include "mrflp/diagnostics.hpp"
#include "mrflp/errors.hpp"
#include "mrflp/service.hpp"
#include "mrflp/synthetic.hpp"

namespace mrflp::cli {

namespace {

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PixelSeeds load_seeds(const std::string& path)
{
    if (ends_with(path, ".png")) return pixel_seeds_from_overlay(read_png_rgba(path));
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open seeds file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInputError("seeds file " + path + ": " + e.what());
    }
    return pixel_seeds_from_json(j);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << text;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names)
{
    std::vector<Method> out;
    if (names.empty()) return {std::begin(kAllMethods), std::end(kAllMethods)};
    for (const auto& n : names) out.push_back(parse_method(n));
    return out;
}

}  // namespace

SegmentationParams resolve_params(const Common& common, const ParamFlags& f)
{
    SegmentationParams p;
    if (!common.config.empty()) apply_config_file(common.config, p);
    if (f.lambda) p.lambda = *f.lambda;
    if (f.c) p.c = *f.c;
    if (f.threshold) p.threshold = *f.threshold;
    if (f.epsilon) p.epsilon = *f.epsilon;
    if (f.superpixels) p.superpixels = *f.superpixels;
    if (f.border_background) p.border_background = true;
    if (common.lp_tol) p.lp.tol_feas = p.lp.tol_gap = *common.lp_tol;
    if (common.lp_max_iter) p.lp.max_iterations = *common.lp_max_iter;
    validate_params(p);
    return p;
}

int cmd_segment(const Common& common, const ParamFlags& flags, const SegmentArgs& a)
{
    const auto params = resolve_params(common, flags);
    const Method method = parse_method(a.method);
    const auto image = read_png_rgb(a.image);
    const auto pixel_seeds = load_seeds(a.seeds);
    std::optional<Mask> truth;
    if (!a.truth.empty()) truth = read_png_mask(a.truth);

    const auto prepared = prepare_image(image, params);
    const auto seeds = rasterize_seeds(prepared.map, pixel_seeds, params.border_background);
    const auto seg = segment(prepared, seeds, method, params);
    const auto mask = mask_from_labels(prepared.map, seg.labels.values, params.threshold);

    auto result = result_json(seg.labels, seg.energy, params.threshold);
    result["v"] = 1;
    result["superpixels"] = prepared.map.count();
    result["seeded"] = {{"foreground", seeds.foreground().size()},
                        {"background", seeds.background().size()}};
    if (truth) result["gamma"] = overlap_ratio(mask, *truth);

    if (!a.out_json.empty()) write_text(a.out_json, result.dump(2) + "\n");
    if (!a.out_mask.empty()) write_file(a.out_mask, encode_png_mask(mask));
    if (common.json) {
        std::cout << result.dump(2) << "\n";
    } else {
        std::cout << "method " << to_string(method) << ", " << prepared.map.count() << " superpixels, "
                  << mask.count() << " foreground pixels, l1 energy " << seg.energy.l1;
        if (truth) std::cout << ", gamma " << result["gamma"].get<double>();
        std::cout << "\n";
    }
    return kOk;
}

int cmd_compare(const Common& common, const ParamFlags& flags, const CompareArgs& a)
{
    const auto params = resolve_params(common, flags);
    const auto image = read_png_rgb(a.image);
    const auto pixel_seeds = load_seeds(a.seeds);
    std::optional<Mask> truth;
    if (!a.truth.empty()) truth = read_png_mask(a.truth);
    const auto prepared = prepare_image(image, params);
    const auto seeds = rasterize_seeds(prepared.map, pixel_seeds, params.border_background);

    nlohmann::json out = {{"v", 1}, {"threshold", params.threshold}, {"methods", nlohmann::json::object()}};
    for (Method m : parse_methods(a.methods)) {
        const auto seg = segment(prepared, seeds, m, params);
        const auto mask = mask_from_labels(prepared.map, seg.labels.values, params.threshold);
        nlohmann::json row = {{"l1", seg.energy.l1},
                              {"l2", seg.energy.l2},
                              {"l1plus", seg.energy.l1plus},
                              {"foreground_pixels", mask.count()},
                              {"iterations", seg.iterations}};
        if (truth) row["gamma"] = overlap_ratio(mask, *truth);
        out["methods"][to_string(m)] = row;
    }
    if (common.json) {
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    std::printf("%-12s %14s %14s %14s %10s\n", "method", "l1", "l2", "l1plus", "gamma");
    for (const auto& [name, row] : out["methods"].items()) {
        std::printf("%-12s %14.6g %14.6g %14.6g %10s\n", name.c_str(), row["l1"].get<double>(),
                    row["l2"].get<double>(), row["l1plus"].get<double>(),
                    row.contains("gamma") ? std::to_string(row["gamma"].get<double>()).c_str() : "-");
    }
    return kOk;
}

int cmd_sweep(const Common& common, const ParamFlags& flags, const SweepArgs& a)
{
    const auto params = resolve_params(common, flags);
    const auto methods = parse_methods(a.methods);
    if (a.cases < 1) throw InvalidInputError("sweep: at least one case is required");
    std::vector<SweepCase> cases;
    for (int i = 0; i < a.cases; ++i) {
        SyntheticOptions o;
        o.width = o.height = a.size;
        o.contrast = a.contrast;
        o.noise = a.noise;
        o.seed = common.seed + static_cast<std::uint64_t>(i);
        const auto synth = generate_two_region(o);
        const auto prepared = prepare_image(synth.image, params);
        const auto seeds = rasterize_seeds(prepared.map, synth.seeds, params.border_background);
        SweepCase c{synth.image.width, synth.image.height, {}, synth.truth};
        for (Method m : methods)
            c.labels[to_string(m)] = prepared.map.expand(segment(prepared, seeds, m, params).labels.values);
        cases.push_back(std::move(c));
    }
    const auto report = threshold_sweep(cases, a.grid);
    if (!a.out.empty()) write_text(a.out, report.to_csv());
    if (common.json) {
        nlohmann::json j = {{"v", 1}, {"cases", a.cases}, {"grid", a.grid}, {"methods", nlohmann::json::object()}};
        for (const auto& m : report.methods)
            j["methods"][m] = {{"mean", report.mean.at(m)}, {"stddev", report.stddev.at(m)}};
        std::cout << j.dump(2) << "\n";
    } else if (a.out.empty()) {
        std::cout << report.to_csv();
    } else {
        for (const auto& m : report.methods)
            std::cout << m << ": mean gamma " << report.mean.at(m) << " (sd " << report.stddev.at(m) << ")\n";
    }
    return kOk;
}

int cmd_verify(const Common& common, const VerifyArgs& a)
{
    VerifyOptions o;
    o.seed = common.seed;
    if (a.instances_scale < 1) throw InvalidInputError("verify: scale must be at least 1");
    o.psd_instances *= a.instances_scale;
    o.factor_instances *= a.instances_scale;
    o.norm_instances *= a.instances_scale;
    o.exactness_instances *= a.instances_scale;
    if (common.lp_tol) o.lp.tol_feas = o.lp.tol_gap = *common.lp_tol;
    if (common.lp_max_iter) o.lp.max_iterations = *common.lp_max_iter;
    const auto report = verify_all(o);
    if (common.json) {
        std::cout << report.dump(2) << "\n";
    } else {
        for (const auto& [name, r] : report.items()) {
            if (!r.is_object()) continue;
            std::cout << (r["pass"].get<bool>() ? "PASS " : "FAIL ") << name << " (" << r["instances"]
                      << " instances)\n";
        }
    }
    return report["pass"].get<bool>() ? kOk : kVerifyFailed;
}

int cmd_bench(const Common& common, const BenchArgs& a)
{
    LpOptions lp;
    if (common.lp_tol) lp.tol_feas = lp.tol_gap = *common.lp_tol;
    if (common.lp_max_iter) lp.max_iterations = *common.lp_max_iter;
    const auto rows = timing_bench(a.sizes, a.repetitions, common.seed, parse_methods(a.methods), lp);
    const auto csv = timing_csv(rows);
    if (!a.out.empty()) write_text(a.out, csv);
    if (common.json) {
        auto j = nlohmann::json::array();
        for (const auto& r : rows)
            j.push_back({{"method", r.method}, {"n", r.n}, {"median_seconds", r.median_seconds},
                         {"samples", r.samples}});
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << csv;
    }
    return kOk;
}

namespace {
HttpService* g_running = nullptr;
extern "C" void handle_stop(int)
{
    if (g_running) g_running->request_stop();
}
}  // namespace

int cmd_serve(const Common& common, const ParamFlags& flags, const ServeArgs& a)
{
    ServiceOptions o;
    o.defaults = resolve_params(common, flags);
    o.idle_timeout = std::chrono::minutes(a.idle_minutes);
    SegmentationService service(o);
    HttpService http(service);
    const int port = http.bind(a.host, a.port);
    if (common.json) std::cout << nlohmann::json{{"v", 1}, {"host", a.host}, {"port", port}}.dump() << std::endl;
    else std::cout << "listening on " << a.host << ":" << port << std::endl;
    g_running = &http;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    http.run();
    g_running = nullptr;
    return kOk;
}

int cmd_generate(const Common& common, const GenerateArgs& a)
{
    SyntheticOptions o;
    o.width = a.width;
    o.height = a.height;
    o.contrast = a.contrast;
    o.noise = a.noise;
    o.seed = common.seed;
    const auto synth = generate_two_region(o);
    write_file(a.out_prefix + "_image.png", encode_png_rgb(synth.image));
    write_file(a.out_prefix + "_truth.png", encode_png_mask(synth.truth));
    write_text(a.out_prefix + "_seeds.json", to_json(synth.seeds).dump() + "\n");
    if (common.json) {
        std::cout << nlohmann::json{{"v", 1},
                                    {"image", a.out_prefix + "_image.png"},
                                    {"truth", a.out_prefix + "_truth.png"},
                                    {"seeds", a.out_prefix + "_seeds.json"}}
                         .dump()
                  << "\n";
    } else {
        std::cout << "wrote " << a.out_prefix << "_{image,truth}.png and " << a.out_prefix
                  << "_seeds.json\n";
    }
    return kOk;
}

}  // namespace mrflp::cli
