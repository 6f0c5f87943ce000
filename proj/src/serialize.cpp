#include "rchow/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rchow/error.hpp"

namespace rchow {

namespace {

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const Json& j, const std::string& what) {
  require(j.is_array(), ErrorKind::ConfigError, what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), ErrorKind::ConfigError, what + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::ConfigError, where + " must be a JSON object");
  for (const auto& item : j.items()) {
    require(allowed.count(item.key()) > 0, ErrorKind::ConfigError,
            "unknown key '" + item.key() + "' in " + where);
  }
}

double number_at(const Json& j, const std::string& key) {
  require(j.at(key).is_number(), ErrorKind::ConfigError, "'" + key + "' must be a number");
  return j.at(key).get<double>();
}

int int_at(const Json& j, const std::string& key) {
  require(j.at(key).is_number_integer(), ErrorKind::ConfigError, "'" + key + "' must be an integer");
  return j.at(key).get<int>();
}

Json ltf_json(const LTF& h) { return {{"v", vector_json(h.v)}, {"theta", h.theta}}; }

LTF ltf_from(const Json& j) {
  require(j.contains("v") && j.contains("theta"), ErrorKind::ConfigError, "halfspace needs 'v' and 'theta'");
  return LTF::normalized(vector_from(j.at("v"), "v"), number_at(j, "theta"));
}

}  // namespace

Json to_json(const Polynomial& p) {
  const MonomialBasis& b = p.basis();
  return {{"n", b.n()},
          {"d", b.d()},
          {"kind", b.multilinear() ? "multilinear" : "full"},
          {"coeffs", vector_json(p.coeffs())}};
}

Polynomial polynomial_from_json(const Json& j) {
  check_keys(j, {"n", "d", "kind", "coeffs"}, "polynomial");
  require(j.contains("n") && j.contains("d") && j.contains("coeffs"), ErrorKind::ConfigError,
          "polynomial needs 'n', 'd' and 'coeffs'");
  BasisKind kind = BasisKind::Full;
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    require(k == "full" || k == "multilinear", ErrorKind::ConfigError, "polynomial kind must be full or multilinear");
    if (k == "multilinear") kind = BasisKind::Multilinear;
  }
  BasisPtr basis = enumerate_basis(int_at(j, "n"), int_at(j, "d"), kind);
  Vector c = vector_from(j.at("coeffs"), "coeffs");
  require(static_cast<std::size_t>(c.size()) == basis->size(), ErrorKind::ConfigError,
          "coeffs has " + std::to_string(c.size()) + " entries, basis has " + std::to_string(basis->size()));
  return {std::move(basis), std::move(c)};
}

Json to_json(const ChowEstimate& chow) {
  const Provenance& p = chow.provenance;
  return {{"basis",
           {{"n", chow.basis->n()},
            {"d", chow.basis->d()},
            {"kind", chow.basis->multilinear() ? "multilinear" : "full"},
            {"size", chow.basis->size()}}},
          {"chi", vector_json(chow.chi)},
          {"provenance",
           {{"samples_in", p.samples_in},
            {"pruned", p.pruned},
            {"iterations", p.iterations},
            {"removed_by_filter", p.removed_by_filter},
            {"survivors", p.survivors},
            {"final_lambda", p.final_lambda},
            {"break_threshold", p.break_threshold},
            {"converged", p.converged},
            {"no_threshold", p.no_threshold},
            {"cap_reached", p.cap_reached},
            {"filtered", p.filtered}}}};
}

Json to_json(const Hypothesis& h) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LTF>) {
          Json j = ltf_json(x);
          j["kind"] = "ltf";
          return j;
        } else if constexpr (std::is_same_v<T, PTF>) {
          return {{"kind", "ptf"}, {"q", to_json(x.q)}};
        } else if constexpr (std::is_same_v<T, PBF>) {
          return {{"kind", "pbf"}, {"q", to_json(x.q)}, {"xi", x.xi}};
        } else if constexpr (std::is_same_v<T, ConstantHypothesis>) {
          return {{"kind", "constant"}, {"n", x.n}, {"value", x.value}};
        } else {
          Json j = {{"kind", "intersection"}, {"n", x.ambient_n}};
          Json ambient = Json::array();
          for (const auto& m : x.ambient_halfspaces()) ambient.push_back(ltf_json(m));
          j["halfspaces"] = ambient;
          if (x.basis) {
            Json reduced = Json::array();
            for (const auto& m : x.halfspaces) reduced.push_back(ltf_json(m));
            j["reduced"] = reduced;
            Json rows = Json::array();
            for (Eigen::Index r = 0; r < x.basis->rows(); ++r) rows.push_back(vector_json(x.basis->row(r).transpose()));
            j["basis"] = rows;
          }
          return j;
        }
      },
      h);
}

Hypothesis hypothesis_from_json(const Json& j) {
  require(j.is_object() && j.contains("kind"), ErrorKind::ConfigError, "hypothesis needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ltf") return ltf_from(j);
  if (kind == "ptf") return PTF(polynomial_from_json(j.at("q")));
  if (kind == "pbf") return PBF(polynomial_from_json(j.at("q")), number_at(j, "xi"));
  if (kind == "constant") return ConstantHypothesis(int_at(j, "n"), number_at(j, "value"));
  if (kind == "intersection") {
    const int n = int_at(j, "n");
    if (j.contains("basis") && j.contains("reduced")) {
      const Json& rows = j.at("basis");
      require(rows.is_array() && static_cast<int>(rows.size()) == n, ErrorKind::ConfigError,
              "intersection basis must have n rows");
      std::vector<LTF> members;
      for (const auto& m : j.at("reduced")) members.push_back(ltf_from(m));
      const Eigen::Index dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
      Matrix b(n, dim);
      for (int r = 0; r < n; ++r) {
        const Vector row = vector_from(rows[static_cast<std::size_t>(r)], "basis row");
        require(row.size() == dim, ErrorKind::ConfigError, "ragged intersection basis");
        b.row(r) = row.transpose();
      }
      return Intersection(std::move(members), std::move(b));
    }
    std::vector<LTF> members;
    for (const auto& m : j.at("halfspaces")) members.push_back(ltf_from(m));
    return Intersection(std::move(members), n);
  }
  fail(ErrorKind::ConfigError, "unknown hypothesis kind '" + kind + "'");
}

Json to_json(const FilterParams& p) {
  Json j = {{"c_break", p.c_break}, {"max_iterations", p.max_iterations}, {"dense_limit", p.dense_limit}};
  if (p.eps) j["eps"] = *p.eps;
  if (p.eigen_tol) j["eigen_tol"] = *p.eigen_tol;
  return j;
}

FilterParams filter_params_from_json(const Json& j) {
  check_keys(j, {"eps", "c_break", "eigen_tol", "max_iterations", "dense_limit"}, "filter");
  FilterParams p;
  if (j.contains("eps")) p.eps = number_at(j, "eps");
  if (j.contains("c_break")) p.c_break = number_at(j, "c_break");
  if (j.contains("eigen_tol")) p.eigen_tol = number_at(j, "eigen_tol");
  if (j.contains("max_iterations")) p.max_iterations = static_cast<std::size_t>(int_at(j, "max_iterations"));
  if (j.contains("dense_limit")) p.dense_limit = static_cast<std::size_t>(int_at(j, "dense_limit"));
  require(p.c_break > 0.0, ErrorKind::ConfigError, "'c_break' must be positive");
  require(!p.eigen_tol || *p.eigen_tol >= 0.0, ErrorKind::ConfigError, "'eigen_tol' must be non-negative");
  require(p.max_iterations > 0, ErrorKind::ConfigError, "'max_iterations' must be positive");
  return p;
}

DistributionConfig distribution_config_from_json(const Json& j, int* n, int* d) {
  check_keys(j, {"family", "n", "d", "gamma", "tail_constants", "moments_file"}, "distribution");
  DistributionConfig c;
  if (j.contains("family")) {
    require(j.at("family").is_string(), ErrorKind::ConfigError, "'family' must be a string");
    c.family = j.at("family").get<std::string>();
  }
  if (c.family != "gaussian" && c.family != "hypercube" && c.family != "log-concave") {
    fail(ErrorKind::UnknownFamily, "unknown distribution family '" + c.family + "'");
  }
  if (j.contains("gamma")) c.gamma = number_at(j, "gamma");
  require(c.gamma >= 0.0 && c.gamma < 1.0, ErrorKind::ConfigError, "'gamma' must lie in [0, 1)");
  if (j.contains("tail_constants")) {
    const Json& t = j.at("tail_constants");
    check_keys(t, {"scale", "offset"}, "tail_constants");
    TailConstants tc;
    if (t.contains("scale")) tc.scale = number_at(t, "scale");
    if (t.contains("offset")) tc.offset = number_at(t, "offset");
    require(tc.scale > 0.0, ErrorKind::ConfigError, "'tail_constants.scale' must be positive");
    c.tail_constants = tc;
  }
  if (j.contains("moments_file")) c.moments_file = j.at("moments_file").get<std::string>();
  require(c.family != "log-concave" || c.moments_file.has_value(), ErrorKind::ConfigError,
          "log-concave family needs 'moments_file'");
  if (n && j.contains("n")) *n = int_at(j, "n");
  if (d && j.contains("d")) *d = int_at(j, "d");
  return c;
}

Json to_json(const DistributionConfig& c) {
  Json j = {{"family", c.family}, {"gamma", c.gamma}};
  if (c.tail_constants) j["tail_constants"] = {{"scale", c.tail_constants->scale}, {"offset", c.tail_constants->offset}};
  if (c.moments_file) j["moments_file"] = *c.moments_file;
  return j;
}

ReasonableDistribution make_distribution(const DistributionConfig& c, int n, int d, double eps) {
  DistributionOptions opts;
  opts.tail_constants = c.tail_constants;
  if (c.family == "gaussian") return make_gaussian(n, d, eps, opts);
  if (c.family == "hypercube") return make_hypercube(n, d, eps, opts);
  if (c.family == "log-concave") {
    require(c.moments_file.has_value(), ErrorKind::ConfigError, "log-concave family needs 'moments_file'");
    return log_concave_descriptor(enumerate_basis(n, d), load_matrix_csv(*c.moments_file), c.gamma, eps, {}, opts);
  }
  fail(ErrorKind::UnknownFamily, "unknown distribution family '" + c.family + "'");
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorKind::ConfigError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                     ": malformed JSON");
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ConfigError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i) line += text[i] == '\n';
  return line;
}

}  // namespace rchow
