#include "pinchlab/profile_json.hpp"

#include <variant>

namespace pinchlab {

namespace {

Json segment_to_json(const SegmentSpec& s) {
  Json j;
  j["kind"] = std::string(s.kind());
  j["domain"] = Json::array({s.r_lo, s.r_hi});
  if (const auto* c = std::get_if<ConstantShape>(&s.shape)) {
    j["value"] = c->value;
  } else if (const auto* p = std::get_if<ParabolaShape>(&s.shape)) {
    j["c0"] = p->c0;
    j["c1"] = p->c1;
    j["c2"] = p->c2;
    j["origin"] = p->origin;
  } else if (const auto* b = std::get_if<BandShape>(&s.shape)) {
    j["left_value"] = b->left_value();
    j["left_slope"] = b->left_slope();
    Json nodes = Json::array();
    for (const BandNode& nd : b->nodes()) nodes.push_back(Json::array({nd.offset, nd.second}));
    j["nodes"] = nodes;
  }
  return j;
}

double num(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw DomainError(std::string("profile JSON: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

SegmentSpec segment_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("domain")) {
    throw DomainError("profile JSON: segment needs 'kind' and 'domain'");
  }
  const auto& dom = j.at("domain");
  if (!dom.is_array() || dom.size() != 2) {
    throw DomainError("profile JSON: 'domain' must be [lo, hi]");
  }
  SegmentSpec s;
  s.r_lo = dom[0].get<double>();
  s.r_hi = dom[1].get<double>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sine") {
    s.shape = SineShape{};
  } else if (kind == "linear") {
    s.shape = LinearShape{};
  } else if (kind == "constant") {
    s.shape = ConstantShape{num(j, "value")};
  } else if (kind == "parabola") {
    s.shape = ParabolaShape{num(j, "c0"), num(j, "c1"), num(j, "c2"), num(j, "origin")};
  } else if (kind == "pl2_band") {
    std::vector<BandNode> nodes;
    for (const auto& nd : j.at("nodes")) {
      if (!nd.is_array() || nd.size() != 2) {
        throw DomainError("profile JSON: band nodes are [offset, second] pairs");
      }
      nodes.push_back({nd[0].get<double>(), nd[1].get<double>()});
    }
    s.shape = BandShape(num(j, "left_value"), num(j, "left_slope"), std::move(nodes));
  } else {
    throw DomainError("profile JSON: unknown segment kind '" + kind + "'");
  }
  return s;
}

}  // namespace

Json profile_to_json(const RadialProfile& profile) {
  Json segs = Json::array();
  for (const auto& s : profile.segments()) segs.push_back(segment_to_json(s));
  return Json{{"segments", segs}};
}

RadialProfile profile_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("segments") || !doc.at("segments").is_array()) {
    throw DomainError("profile JSON: expected {\"segments\": [...]}");
  }
  std::vector<SegmentSpec> segs;
  for (const auto& s : doc.at("segments")) segs.push_back(segment_from_json(s));
  return RadialProfile(std::move(segs));
}

Json manifold_to_json(const ManifoldWithDensity& m) {
  Json meta;
  meta["model"] = std::string(to_string(m.meta().kind));
  meta["eps"] = m.meta().eps ? Json(*m.meta().eps) : Json(nullptr);
  meta["delta"] = m.meta().delta ? Json(*m.meta().delta) : Json(nullptr);
  meta["warnings"] = m.meta().warnings;
  return Json{{"n", m.n()},
              {"topology", std::string(to_string(m.topology()))},
              {"L", m.half_length()},
              {"potential_scale", m.potential_scale()},
              {"phi", profile_to_json(m.phi())},
              {"f", profile_to_json(m.f())},
              {"meta", meta}};
}

ManifoldWithDensity manifold_from_json(const Json& doc) {
  if (!doc.is_object()) throw DomainError("profile JSON: expected an object");
  for (const char* key : {"n", "topology", "potential_scale", "phi", "f"}) {
    if (!doc.contains(key)) throw DomainError(std::string("profile JSON: missing '") + key + "'");
  }
  const std::string topo = doc.at("topology").get<std::string>();
  Topology t;
  if (topo == "cap") {
    t = Topology::Cap;
  } else if (topo == "doubled_sphere") {
    t = Topology::DoubledSphere;
  } else {
    throw DomainError("profile JSON: unknown topology '" + topo + "'");
  }
  ModelMeta meta;
  if (doc.contains("meta") && doc.at("meta").is_object()) {
    const Json& mj = doc.at("meta");
    if (mj.contains("model")) meta.kind = parse_model_kind(mj.at("model").get<std::string>());
    if (mj.contains("eps") && mj.at("eps").is_number()) meta.eps = mj.at("eps").get<double>();
    if (mj.contains("delta") && mj.at("delta").is_number()) {
      meta.delta = mj.at("delta").get<double>();
    }
    if (mj.contains("warnings")) meta.warnings = mj.at("warnings").get<std::vector<std::string>>();
  }
  ManifoldWithDensity m(doc.at("n").get<int>(), profile_from_json(doc.at("phi")),
                        profile_from_json(doc.at("f")), t,
                        doc.at("potential_scale").get<double>(), std::move(meta));
  if (doc.contains("L") && doc.at("L").is_number() &&
      doc.at("L").get<double>() != m.half_length()) {
    throw DomainError("profile JSON: 'L' disagrees with the profile domain");
  }
  return m;
}

}  // namespace pinchlab
