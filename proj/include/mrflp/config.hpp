#pragma once

#include <iosfwd>
#include <string>

#include "mrflp/pipeline.hpp"

namespace mrflp {

/// Reads `key = value` lines into `params`. Recognised keys: lambda, c,
/// threshold, epsilon, superpixels, border_background, lp_tol, lp_max_iter.
/// Blank lines, `#` comments and `[section]` headers are ignored; values may
/// be quoted. Throws InvalidInputError naming the line on anything else.
void apply_config(std::istream& in, SegmentationParams& params);
void apply_config_file(const std::string& path, SegmentationParams& params);

/// Rejects out-of-range parameters (threshold outside [0,1], negative c, ...).
void validate_params(const SegmentationParams& params);

}  // namespace mrflp
