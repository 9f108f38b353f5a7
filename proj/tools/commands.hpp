#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrflp/pipeline.hpp"

namespace mrflp::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInputError = 2,
    kSolverError = 3,
    kVerifyFailed = 4,
};

struct Common {
    bool json = false;
    std::uint64_t seed = 42;
    std::optional<double> lp_tol;
    std::optional<int> lp_max_iter;
    std::string config;
};

/// Command-line overrides on top of an optional config file.
struct ParamFlags {
    std::optional<double> lambda;
    std::optional<double> c;
    std::optional<double> threshold;
    std::optional<double> epsilon;
    std::optional<int> superpixels;
    bool border_background = false;
};

SegmentationParams resolve_params(const Common& common, const ParamFlags& flags);

struct SegmentArgs {
    std::string image;
    std::string seeds;
    std::string method = "compact_lp";
    std::string out_json;
    std::string out_mask;
    std::string truth;
};

struct CompareArgs {
    std::string image;
    std::string seeds;
    std::string truth;
    std::vector<std::string> methods;
};

struct SweepArgs {
    int cases = 20;
    int grid = 100;
    int size = 64;
    double contrast = 0.4;
    double noise = 0.1;
    std::vector<std::string> methods{"compact_lp", "qp"};
    std::string out;
};

struct VerifyArgs {
    int instances_scale = 1;
};

struct BenchArgs {
    std::vector<int> sizes{50, 100, 400};
    int repetitions = 5;
    std::vector<std::string> methods;
    std::string out;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    int idle_minutes = 30;
};

struct GenerateArgs {
    std::string out_prefix = "synthetic";
    int width = 64;
    int height = 64;
    double contrast = 0.4;
    double noise = 0.1;
};

int cmd_segment(const Common&, const ParamFlags&, const SegmentArgs&);
int cmd_compare(const Common&, const ParamFlags&, const CompareArgs&);
int cmd_sweep(const Common&, const ParamFlags&, const SweepArgs&);
int cmd_verify(const Common&, const VerifyArgs&);
int cmd_bench(const Common&, const BenchArgs&);
int cmd_serve(const Common&, const ParamFlags&, const ServeArgs&);
int cmd_generate(const Common&, const GenerateArgs&);

}  // namespace mrflp::cli
