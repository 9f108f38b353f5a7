#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "mrflp/diagnostics.hpp"
#include "mrflp/pipeline.hpp"
#include "mrflp/synthetic.hpp"

using namespace mrflp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail)
{
    if (!pass) ++failures;
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string instances(const nlohmann::json& check)
{
    std::string s = std::to_string(check["instances"].get<int>()) + " instances";
    if (check.contains("first_failure")) s += ", first failure " + check["first_failure"].dump();
    return s;
}

void theorem_suites()
{
    VerifyOptions psd_only;
    psd_only.factor_instances = psd_only.norm_instances = psd_only.exactness_instances = 0;
    auto t0 = Clock::now();
    const auto psd = verify_all(psd_only)["psd"];
    const double psd_seconds = seconds_since(t0);
    report(psd["pass"].get<bool>() && psd_seconds < 30.0, "psd_suite",
           instances(psd) + ", " + std::to_string(psd_seconds) + " s (limit 30 s)");

    VerifyOptions rest;
    rest.psd_instances = 0;
    const auto all = verify_all(rest);
    const std::pair<const char*, const char*> checks[] = {
        {"factorization", "factorization_identity"}, {"corollaries", "corollary_suite"},
        {"norm_bounds", "norm_bound_suite"},         {"exactness", "exactness_oracle"},
        {"optimal_sandwich", "optimal_value_sandwich"}, {"harmonic", "random_walker_harmonicity"},
        {"problem_size", "problem_size"}};
    for (const auto& [key, name] : checks) {
        const auto& c = all[key];
        std::string detail = instances(c);
        if (std::string(key) == "corollaries") detail += ", 100 random L each";
        if (std::string(key) == "norm_bounds") detail += ", 100 random L each";
        report(c["pass"].get<bool>(), name, detail);
    }
}

void threshold_sweep_check()
{
    const auto t0 = Clock::now();
    const SegmentationParams params;
    std::vector<SweepCase> cases;
    for (int i = 0; i < 20; ++i) {
        SyntheticOptions o;
        o.width = o.height = 64;
        o.contrast = 0.4;
        o.noise = 0.1;
        o.seed = kDefaultInstanceSeed + static_cast<std::uint64_t>(i);
        const auto synth = generate_two_region(o);
        const auto prepared = prepare_image(synth.image, params);
        const auto seeds = rasterize_seeds(prepared.map, synth.seeds, params.border_background);
        SweepCase c{synth.image.width, synth.image.height, {}, synth.truth};
        for (Method m : {Method::CompactLp, Method::Qp})
            c.labels[to_string(m)] = prepared.map.expand(segment(prepared, seeds, m, params).labels.values);
        cases.push_back(std::move(c));
    }
    const auto sweep = threshold_sweep(cases, 100);
    const auto& lp = sweep.gamma.at(to_string(Method::CompactLp));
    const auto& qp = sweep.gamma.at(to_string(Method::Qp));
    int wins = 0;
    for (std::size_t k = 0; k < lp.size(); ++k) wins += lp[k] >= qp[k];
    const double secs = seconds_since(t0);
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "compact_lp >= qp at %d/100 thresholds (need 90), mean gamma %.4f vs %.4f, %.1f s (limit 300 s)",
                  wins, sweep.mean.at(to_string(Method::CompactLp)), sweep.mean.at(to_string(Method::Qp)), secs);
    report(wins >= 90 && secs < 300.0, "threshold_sweep", detail);
}

void end_to_end_check()
{
    const SegmentationParams params;
    constexpr int kImages = 5;
    std::vector<double> worst(std::size(kAllMethods), 1.0);
    double worst_harmonic = 0.0;
    bool harmonic_pass = true;
    for (int i = 0; i < kImages; ++i) {
        SyntheticOptions o;
        o.contrast = 1.0;
        o.seed = kDefaultInstanceSeed + static_cast<std::uint64_t>(i);
        const auto synth = generate_two_region(o);
        const auto prepared = prepare_image(synth.image, params);
        const auto seeds = rasterize_seeds(prepared.map, synth.seeds, params.border_background);
        for (std::size_t m = 0; m < std::size(kAllMethods); ++m) {
            const auto seg = segment(prepared, seeds, kAllMethods[m], params);
            const double g =
                overlap_ratio(mask_from_labels(prepared.map, seg.labels.values, params.threshold), synth.truth);
            worst[m] = std::min(worst[m], g);
            if (kAllMethods[m] == Method::Qp) {
                const auto h = verify_harmonic(prepared.graph, seeds, seg.labels.values);
                harmonic_pass = harmonic_pass && h.pass;
                worst_harmonic = std::max(worst_harmonic, h.max_residual);
            }
        }
    }
    for (std::size_t m = 0; m < std::size(kAllMethods); ++m) {
        char detail[160];
        std::snprintf(detail, sizeof detail, "min gamma %.4f over %d images (need 0.95)", worst[m], kImages);
        report(worst[m] >= 0.95, "end_to_end_" + to_string(kAllMethods[m]), detail);
    }
    char detail[160];
    std::snprintf(detail, sizeof detail, "max residual %.3g on %d segmentation graphs (limit 1e-8)", worst_harmonic,
                  kImages);
    report(harmonic_pass, "random_walker_harmonicity_images", detail);
}

void timing_check()
{
    const auto rows = timing_bench({400}, 5, kDefaultInstanceSeed, {Method::CompactLp, Method::ConventionalLp});
    double compact = 0.0, conventional = 0.0;
    for (const auto& r : rows) (r.method == to_string(Method::CompactLp) ? compact : conventional) = r.median_seconds;
    char detail[160];
    std::snprintf(detail, sizeof detail, "N=400 median conv_lp %.4f s, compact_lp %.4f s over 5 repetitions",
                  conventional, compact);
    report(conventional > compact, "relative_timing", detail);
}

}  // namespace

int main()
{
    theorem_suites();
    threshold_sweep_check();
    end_to_end_check();
    timing_check();
    std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
    return failures == 0 ? 0 : 1;
}
