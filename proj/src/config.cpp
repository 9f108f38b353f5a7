#include "mrflp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "mrflp/errors.hpp"

namespace mrflp {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    throw InvalidInputError("config line " + std::to_string(line) + ": '" + v + "' is not a number");
}

long long parse_int(const std::string& v, int line)
{
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw InvalidInputError("config line " + std::to_string(line) + ": '" + v +
                                "' is not an integer");
    return out;
}

bool parse_bool(const std::string& v, int line)
{
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidInputError("config line " + std::to_string(line) + ": '" + v + "' is not a boolean");
}

}  // namespace

void apply_config(std::istream& in, SegmentationParams& params)
{
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string text = trim(raw.substr(0, hash));
        if (text.empty() || text.front() == '[') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw InvalidInputError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);

        if (key == "lambda") params.lambda = parse_double(value, line);
        else if (key == "c") params.c = parse_double(value, line);
        else if (key == "threshold") params.threshold = parse_double(value, line);
        else if (key == "epsilon") params.epsilon = parse_double(value, line);
        else if (key == "superpixels") params.superpixels = static_cast<int>(parse_int(value, line));
        else if (key == "border_background") params.border_background = parse_bool(value, line);
        else if (key == "lp_tol") params.lp.tol_feas = params.lp.tol_gap = parse_double(value, line);
        else if (key == "lp_max_iter") params.lp.max_iterations = static_cast<int>(parse_int(value, line));
        else throw InvalidInputError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    validate_params(params);
}

void apply_config_file(const std::string& path, SegmentationParams& params)
{
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config file " + path);
    apply_config(in, params);
}

void validate_params(const SegmentationParams& p)
{
    if (!(p.lambda > 0.0)) throw InvalidInputError("lambda must be positive");
    if (!(p.c >= 0.0)) throw InvalidInputError("c must be non-negative");
    if (!(p.threshold >= 0.0 && p.threshold <= 1.0))
        throw InvalidInputError("threshold must lie in [0, 1]");
    if (p.epsilon && !(*p.epsilon > 0.0)) throw InvalidInputError("epsilon must be positive");
    if (p.superpixels < 1) throw InvalidInputError("superpixels must be at least 1");
    if (!(p.lp.tol_feas > 0.0) || !(p.lp.tol_gap > 0.0))
        throw InvalidInputError("LP tolerance must be positive");
    if (p.lp.max_iterations < 1) throw InvalidInputError("LP iteration limit must be at least 1");
}

}  // namespace mrflp
