#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mrflp/errors.hpp"

using namespace mrflp;
using namespace mrflp::cli;

namespace {

void add_param_flags(CLI::App* app, ParamFlags& f)
{
    app->add_option("--lambda", f.lambda, "Boundary weight with a unary term (default 10)");
    app->add_option("--c", f.c, "Edge weight floor (default 0.00001)");
    app->add_option("--threshold", f.threshold, "Label threshold (default 0.08)")->check(CLI::Range(0.0, 1.0));
    app->add_option("--epsilon", f.epsilon, "Diagonal regularization (default 1e-8 max diag)");
    app->add_option("--superpixels", f.superpixels, "Target superpixel count (default 800)");
    app->add_flag("--border-background", f.border_background, "Seed image-border pixels as background");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Binary submodular MRF segmentation with compact and conventional LP relaxations, "
                 "random walker and graph cuts"};
    app.require_subcommand(1);

    Common common;
    app.add_flag("--json", common.json, "Machine-readable output");
    app.add_option("--seed", common.seed, "Random seed for generated instances");
    app.add_option("--lp-tol", common.lp_tol, "Interior point tolerance");
    app.add_option("--lp-max-iter", common.lp_max_iter, "Interior point iteration limit");
    app.add_option("--config", common.config, "key = value parameter file");

    ParamFlags flags;

    SegmentArgs seg;
    auto* segment = app.add_subcommand("segment", "Segment an image from seed scribbles");
    segment->add_option("image", seg.image, "RGB PNG")->required();
    segment->add_option("seeds", seg.seeds, "Seed JSON or scribble PNG")->required();
    segment->add_option("-m,--method", seg.method, "compact_lp | conv_lp | qp | gc");
    segment->add_option("-o,--out-json", seg.out_json, "Result JSON path");
    segment->add_option("--mask", seg.out_mask, "Thresholded mask PNG path");
    segment->add_option("--truth", seg.truth, "Truth mask PNG for scoring");
    add_param_flags(segment, flags);

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Run several methods on one image");
    compare->add_option("image", cmp.image, "RGB PNG")->required();
    compare->add_option("seeds", cmp.seeds, "Seed JSON or scribble PNG")->required();
    compare->add_option("--truth", cmp.truth, "Truth mask PNG for scoring");
    compare->add_option("--methods", cmp.methods, "Subset of methods (default all)");
    add_param_flags(compare, flags);

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Threshold sweep over generated two-region images");
    sweep->add_option("--cases", sw.cases, "Number of generated images");
    sweep->add_option("--grid", sw.grid, "Number of thresholds")->check(CLI::Range(2, 100000));
    sweep->add_option("--size", sw.size, "Image side in pixels");
    sweep->add_option("--contrast", sw.contrast, "Object/background intensity step");
    sweep->add_option("--noise", sw.noise, "Noise standard deviation");
    sweep->add_option("--methods", sw.methods, "Methods to compare");
    sweep->add_option("-o,--out", sw.out, "CSV path (threshold,method,gamma)");
    add_param_flags(sweep, flags);

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Numerically check the theorems on random instances");
    verify->add_option("--scale", ver.instances_scale, "Multiply instance counts");

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Median solve times on random grid graphs");
    bench->add_option("--sizes", bn.sizes, "Node counts");
    bench->add_option("--reps", bn.repetitions, "Repetitions per size")->check(CLI::PositiveNumber);
    bench->add_option("--methods", bn.methods, "Methods (default all)");
    bench->add_option("-o,--out", bn.out, "CSV path");

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the segmentation HTTP service");
    serve->add_option("--host", sv.host, "Bind address");
    serve->add_option("--port", sv.port, "Port, 0 for ephemeral");
    serve->add_option("--idle-minutes", sv.idle_minutes, "Session idle timeout")->check(CLI::PositiveNumber);
    add_param_flags(serve, flags);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic image, truth mask and seeds");
    generate->add_option("-o,--out-prefix", gen.out_prefix, "Output path prefix");
    generate->add_option("--width", gen.width, "Width");
    generate->add_option("--height", gen.height, "Height");
    generate->add_option("--contrast", gen.contrast, "Object/background intensity step");
    generate->add_option("--noise", gen.noise, "Noise standard deviation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*segment) return cmd_segment(common, flags, seg);
        if (*compare) return cmd_compare(common, flags, cmp);
        if (*sweep) return cmd_sweep(common, flags, sw);
        if (*verify) return cmd_verify(common, ver);
        if (*bench) return cmd_bench(common, bn);
        if (*serve) return cmd_serve(common, flags, sv);
        if (*generate) return cmd_generate(common, gen);
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const UnseededComponentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolverError;
    }
    return kFailure;
}
