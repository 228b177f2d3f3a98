#include "hsclab/config.hpp"

#include "hsclab/expr_parser.hpp"

namespace hsclab {

using nlohmann::json;

BaseModel base_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "fubini_study") return fubini_study(j.at("n").get<int>());
  if (kind == "flat") return flat_space(j.at("n").get<int>());
  if (kind == "product") {
    const auto& factors = j.at("factors");
    if (!factors.is_array() || factors.size() < 2)
      throw std::invalid_argument("product base: need at least two factors");
    BaseModel m = base_from_json(factors[0]);
    for (std::size_t i = 1; i < factors.size(); ++i) m = product(m, base_from_json(factors[i]));
    return m;
  }
  if (kind == "custom") {
    BaseModel m;
    m.kind = "custom";
    m.name = j.value("name", "custom-base");
    m.dim = j.at("n").get<int>();
    m.manifold.dim = m.dim;
    const auto vars = chart_vars(m.dim, 0);
    for (const auto& cj : j.at("charts")) {
      Chart c;
      c.dim = m.dim;
      c.name = cj.value("name", "c" + std::to_string(m.manifold.charts.size()));
      c.potential = parse_expr(cj.at("potential").get<std::string>(), vars);
      c.box = cj.value("box", 2.0);
      m.manifold.charts.push_back(std::move(c));
    }
    if (m.manifold.charts.empty()) throw std::invalid_argument("custom base: no charts");
    return m;
  }
  throw std::invalid_argument("unknown base kind '" + kind + "'");
}

BundleModel bundle_from_json(const json& j, const BaseModel& base) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "line_bundle_sum")
    return line_bundle_sum(base, j.at("degrees").get<std::vector<int>>());
  if (kind == "custom") {
    BundleModel bm;
    bm.kind = "custom";
    bm.name = j.value("name", "custom-bundle");
    const auto& hj = j.at("h");
    if (!hj.is_array() || hj.empty())
      throw std::invalid_argument("custom bundle: h must be a nonempty matrix of strings");
    bm.rank = static_cast<int>(hj.size());
    const auto vars = chart_vars(base.dim, 0);
    std::vector<std::vector<Expr>> h(bm.rank, std::vector<Expr>(bm.rank, constant(0.0)));
    for (int a = 0; a < bm.rank; ++a) {
      if (static_cast<int>(hj[a].size()) != bm.rank)
        throw std::invalid_argument("custom bundle: h must be square");
      for (int b = 0; b < bm.rank; ++b)
        h[a][b] = parse_expr(hj[a][b].get<std::string>(), vars);
    }
    // the same entry matrix on every base chart the config covers
    const int ncharts = j.value("charts", 1);
    for (int c = 0; c < ncharts; ++c) bm.h.push_back(h);
    return bm;
  }
  throw std::invalid_argument("unknown bundle kind '" + kind + "'");
}

Model model_from_json(const json& j) {
  if (j.is_string()) return catalog(j.get<std::string>());
  Model m;
  m.base = base_from_json(j.at("base"));
  m.name = j.value("name", m.base.name);
  if (j.contains("bundle") && !j.at("bundle").is_null()) {
    m.bundle = bundle_from_json(j.at("bundle"), m.base);
    if (static_cast<int>(m.bundle->h.size()) > static_cast<int>(m.base.manifold.charts.size()))
      throw std::invalid_argument("bundle covers more charts than the base has");
    // restrict the base atlas to the charts the bundle covers
    if (m.bundle->h.size() < m.base.manifold.charts.size()) {
      m.base.manifold.charts.resize(m.bundle->h.size());
      std::erase_if(m.base.manifold.transitions, [&](const ChartTransition& t) {
        return t.from >= static_cast<int>(m.bundle->h.size()) ||
               t.to >= static_cast<int>(m.bundle->h.size());
      });
    }
    m.name += "/" + m.bundle->name;
  }
  m.distinguished_frame_ok = false;  // custom models are excluded from papercheck
  return m;
}

}  // namespace hsclab
