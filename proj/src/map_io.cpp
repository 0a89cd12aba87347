#include "tmap/map_io.hpp"

#include <json.hpp>

#include "tmap/error.hpp"

namespace tmap {

namespace {

using nlohmann::json;

json function_json(const UnivariateFunction& f) {
  json terms = json::array();
  for (const auto& t : f.terms()) {
    terms.push_back({{"kind", to_string(t.basis.kind)},
                     {"center", t.basis.center},
                     {"scale", t.basis.scale},
                     {"coefficient", t.coefficient}});
  }
  return terms;
}

UnivariateFunction function_from(const json& terms, bool monotone) {
  std::vector<Term> out;
  for (const auto& t : terms) {
    Term term;
    term.coefficient = t.at("coefficient").get<double>();
    term.basis.kind = basis_kind_from_string(t.at("kind").get<std::string>());
    term.basis.center = t.at("center").get<double>();
    term.basis.scale = t.at("scale").get<double>();
    out.push_back(term);
  }
  return UnivariateFunction(std::move(out), monotone);
}

}  // namespace

std::string map_to_json(const TriangularMap& map) {
  json comps = json::array();
  for (const auto& c : map.components()) {
    json parts = json::array();
    for (const auto& part : c.nonmonotone()) {
      parts.push_back({{"input", part.input}, {"terms", function_json(part.function)}});
    }
    comps.push_back({{"index", c.index()},
                     {"constant", c.constant()},
                     {"reference_center", c.reference_center()},
                     {"reference_scale", c.reference_scale()},
                     {"nonmonotone", parts},
                     {"monotone", function_json(c.monotone())}});
  }
  json j{{"data_dimension", map.data_dimension()}, {"components", comps}};
  return j.dump(2);
}

TriangularMap map_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const auto d = j.at("data_dimension").get<std::size_t>();
    std::vector<MapComponent> comps;
    for (const auto& c : j.at("components")) {
      const auto k = c.at("index").get<std::size_t>();
      std::vector<NonmonotonePart> parts;
      for (const auto& part : c.at("nonmonotone")) {
        parts.push_back({part.at("input").get<std::size_t>(), function_from(part.at("terms"), false)});
      }
      MapComponent comp(k, d + k, std::move(parts), function_from(c.at("monotone"), true),
                        c.at("constant").get<double>());
      comp.set_reference(c.value("reference_center", 0.0), c.value("reference_scale", 1.0));
      comps.push_back(std::move(comp));
    }
    return TriangularMap(d, std::move(comps));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed map JSON: ") + e.what());
  }
}

std::string fit_report_json(const FitReport& report) {
  json comps = json::array();
  for (const auto& c : report.components) {
    comps.push_back({{"index", c.index},
                     {"objective", c.objective},
                     {"iterations", c.iterations},
                     {"converged", c.converged},
                     {"stalled", c.stalled},
                     {"gradient_norm", c.gradient_norm},
                     {"closed_form", c.used_closed_form},
                     {"identity", c.identity},
                     {"regularized", c.regularized},
                     {"degenerate_residual", c.degenerate_residual}});
  }
  json j{{"converged", report.all_converged()}, {"components", comps}};
  return j.dump(2);
}

}  // namespace tmap
