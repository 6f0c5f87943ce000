#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "rchow/chowfilter.hpp"
#include "rchow/distributions.hpp"
#include "rchow/hypothesis.hpp"

namespace rchow {

using Json = nlohmann::json;

/// { "n", "d", "kind", "coeffs" } with coefficients in graded lex order.
Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j);

/// Basis metadata, chi and provenance.
Json to_json(const ChowEstimate& chow);

/// Tagged by "kind": ltf { v, theta }, ptf { q }, pbf { q, xi },
/// constant { n, value }, intersection { n, halfspaces (ambient), reduced,
/// basis (rows) }.
Json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const Json& j);

Json to_json(const FilterParams& p);
/// Throws ConfigError on unknown keys or bad values.
FilterParams filter_params_from_json(const Json& j);

struct DistributionConfig {
  std::string family = "gaussian";
  double gamma = 0.0;
  std::optional<TailConstants> tail_constants;
  std::optional<std::string> moments_file;
};

/// { "family", "gamma", "tail_constants": { "scale", "offset" }, "moments_file" };
/// "n" and "d" may appear and are returned through the pointers when given.
DistributionConfig distribution_config_from_json(const Json& j, int* n = nullptr, int* d = nullptr);
Json to_json(const DistributionConfig& c);
ReasonableDistribution make_distribution(const DistributionConfig& c, int n, int d, double eps);

/// Parses text, turning parse errors into ConfigError with line and column.
Json parse_json_text(const std::string& text);
Json load_json_file(const std::string& path);

/// 1-based line of the first occurrence of "key" in text, or 0.
int line_of_key(const std::string& text, const std::string& key);

}  // namespace rchow
