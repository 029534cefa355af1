#pragma once

#include <string>

#include <json.hpp>

#include "fraclab/inverse.hpp"

namespace fraclab {

// Fully-resolved run description.  Every field has a documented default, so a
// config document may specify any subset of keys; unknown keys are rejected.
struct PotentialConfig {
  std::string kind = "bump";  // zero | bump | two-bumps
  Vec2 center{0.3, 0.0};
  double height = 5.0;
  double width = 0.3;
  Vec2 center2{-0.3, -0.3};  // second bump of the two-bumps kind
  double height2 = -1.0;
};

struct SourceConfig {
  int count = 8;
  double width = 0.0;  // 0 picks half the annulus thickness
};

struct GridConfig {
  int radial_count = 16;
  int angular_count = 32;
};

struct RunConfig {
  double a = 0.5;
  GridConfig grid;
  PotentialConfig potential;
  SourceConfig source;
  AngularInterval sigma{0.0, pi};
  InversionConfig inversion;
  std::string output_dir = "out";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& node,
                                std::initializer_list<const char*> allowed,
                                const std::string& prefix) {
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    require(known, "config-error", "unknown key \"" + prefix + item.key() + "\"");
  }
}

inline double number_field(const nlohmann::json& node, const char* key,
                           double fallback, const std::string& prefix) {
  if (!node.contains(key)) return fallback;
  require(node[key].is_number(), "config-error",
          "key \"" + prefix + key + "\" must be a number");
  return node[key].get<double>();
}

inline int int_field(const nlohmann::json& node, const char* key, int fallback,
                     const std::string& prefix) {
  if (!node.contains(key)) return fallback;
  require(node[key].is_number_integer(), "config-error",
          "key \"" + prefix + key + "\" must be an integer");
  return node[key].get<int>();
}

inline Vec2 point_field(const nlohmann::json& node, const char* key,
                        const Vec2& fallback, const std::string& prefix) {
  if (!node.contains(key)) return fallback;
  const nlohmann::json& p = node[key];
  require(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(),
          "config-error",
          "key \"" + prefix + key + "\" must be a two-number array");
  return Vec2(p[0].get<double>(), p[1].get<double>());
}

}  // namespace detail

// Strict parse of a JSON run description: unknown keys are errors, missing
// keys take the defaults above, out-of-range values are rejected with the
// offending key named.  All failures carry the "config-error" code.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail("config-error", std::string("malformed config document: ") + e.what());
  }
  require(doc.is_object(), "config-error", "config document must be an object");
  detail::reject_unknown_keys(
      doc, {"a", "grid", "potential", "source", "sigma", "inversion", "output_dir"},
      "");

  RunConfig cfg;
  cfg.a = detail::number_field(doc, "a", cfg.a, "");
  require(cfg.a > 0.0 && cfg.a < 1.0, "config-error",
          "key \"a\" must lie strictly between 0 and 1");

  if (doc.contains("grid")) {
    const nlohmann::json& g = doc["grid"];
    require(g.is_object(), "config-error", "key \"grid\" must be an object");
    detail::reject_unknown_keys(g, {"radial_count", "angular_count"}, "grid.");
    cfg.grid.radial_count =
        detail::int_field(g, "radial_count", cfg.grid.radial_count, "grid.");
    cfg.grid.angular_count =
        detail::int_field(g, "angular_count", cfg.grid.angular_count, "grid.");
  }
  require(cfg.grid.radial_count >= 4, "config-error",
          "key \"grid.radial_count\" must be at least 4");
  require(cfg.grid.angular_count >= 8, "config-error",
          "key \"grid.angular_count\" must be at least 8");

  if (doc.contains("potential")) {
    const nlohmann::json& p = doc["potential"];
    require(p.is_object(), "config-error", "key \"potential\" must be an object");
    detail::reject_unknown_keys(
        p, {"kind", "center", "height", "width", "center2", "height2"},
        "potential.");
    if (p.contains("kind")) {
      require(p["kind"].is_string(), "config-error",
              "key \"potential.kind\" must be a string");
      cfg.potential.kind = p["kind"].get<std::string>();
    }
    cfg.potential.center =
        detail::point_field(p, "center", cfg.potential.center, "potential.");
    cfg.potential.height =
        detail::number_field(p, "height", cfg.potential.height, "potential.");
    cfg.potential.width =
        detail::number_field(p, "width", cfg.potential.width, "potential.");
    cfg.potential.center2 =
        detail::point_field(p, "center2", cfg.potential.center2, "potential.");
    cfg.potential.height2 =
        detail::number_field(p, "height2", cfg.potential.height2, "potential.");
  }
  require(cfg.potential.kind == "zero" || cfg.potential.kind == "bump" ||
              cfg.potential.kind == "two-bumps",
          "config-error",
          "key \"potential.kind\" must be zero, bump, or two-bumps");
  require(cfg.potential.width > 0.0, "config-error",
          "key \"potential.width\" must be positive");

  if (doc.contains("source")) {
    const nlohmann::json& s = doc["source"];
    require(s.is_object(), "config-error", "key \"source\" must be an object");
    detail::reject_unknown_keys(s, {"count", "width"}, "source.");
    cfg.source.count = detail::int_field(s, "count", cfg.source.count, "source.");
    cfg.source.width =
        detail::number_field(s, "width", cfg.source.width, "source.");
  }
  require(cfg.source.count >= 1, "config-error",
          "key \"source.count\" must be at least 1");
  require(cfg.source.width >= 0.0, "config-error",
          "key \"source.width\" must be nonnegative");

  if (doc.contains("sigma")) {
    const nlohmann::json& s = doc["sigma"];
    require(s.is_object(), "config-error", "key \"sigma\" must be an object");
    detail::reject_unknown_keys(s, {"phi0", "phi1"}, "sigma.");
    cfg.sigma.phi0 = detail::number_field(s, "phi0", cfg.sigma.phi0, "sigma.");
    cfg.sigma.phi1 = detail::number_field(s, "phi1", cfg.sigma.phi1, "sigma.");
  }
  require(cfg.sigma.phi1 > cfg.sigma.phi0, "config-error",
          "key \"sigma.phi1\" must exceed sigma.phi0");
  require(cfg.sigma.phi1 - cfg.sigma.phi0 <= 2.0 * pi + 1e-12, "config-error",
          "key \"sigma\" must span at most the full circle");

  if (doc.contains("inversion")) {
    const nlohmann::json& v = doc["inversion"];
    require(v.is_object(), "config-error", "key \"inversion\" must be an object");
    detail::reject_unknown_keys(
        v,
        {"regularization_weight", "max_iterations", "step_tolerance",
         "noise_level", "seed", "inverse_crime", "support_radius"},
        "inversion.");
    InversionConfig& inv = cfg.inversion;
    inv.regularization_weight = detail::number_field(
        v, "regularization_weight", inv.regularization_weight, "inversion.");
    inv.max_iterations =
        detail::int_field(v, "max_iterations", inv.max_iterations, "inversion.");
    inv.step_tolerance = detail::number_field(v, "step_tolerance",
                                              inv.step_tolerance, "inversion.");
    inv.noise_level =
        detail::number_field(v, "noise_level", inv.noise_level, "inversion.");
    if (v.contains("seed")) {
      require(v["seed"].is_number_unsigned(), "config-error",
              "key \"inversion.seed\" must be a nonnegative integer");
      inv.seed = v["seed"].get<std::uint64_t>();
    }
    if (v.contains("inverse_crime")) {
      require(v["inverse_crime"].is_boolean(), "config-error",
              "key \"inversion.inverse_crime\" must be a boolean");
      inv.inverse_crime_flag = v["inverse_crime"].get<bool>();
    }
    inv.support_radius = detail::number_field(v, "support_radius",
                                              inv.support_radius, "inversion.");
  }
  require(cfg.inversion.regularization_weight > 0.0, "config-error",
          "key \"inversion.regularization_weight\" must be positive");
  require(cfg.inversion.max_iterations >= 1, "config-error",
          "key \"inversion.max_iterations\" must be at least 1");
  require(cfg.inversion.step_tolerance > 0.0, "config-error",
          "key \"inversion.step_tolerance\" must be positive");
  require(cfg.inversion.noise_level >= 0.0, "config-error",
          "key \"inversion.noise_level\" must be nonnegative");
  require(cfg.inversion.support_radius > 0.0 &&
              cfg.inversion.support_radius <= 0.9,
          "config-error",
          "key \"inversion.support_radius\" must lie in (0, 0.9]");

  if (doc.contains("output_dir")) {
    require(doc["output_dir"].is_string(), "config-error",
            "key \"output_dir\" must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  require(!cfg.output_dir.empty(), "config-error",
          "key \"output_dir\" must not be empty");
  return cfg;
}

// Complete echo of a resolved config; parsing the echo reproduces the config.
inline nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json doc;
  doc["a"] = cfg.a;
  doc["grid"] = {{"radial_count", cfg.grid.radial_count},
                 {"angular_count", cfg.grid.angular_count}};
  doc["potential"] = {{"kind", cfg.potential.kind},
                      {"center", {cfg.potential.center.x(), cfg.potential.center.y()}},
                      {"height", cfg.potential.height},
                      {"width", cfg.potential.width},
                      {"center2", {cfg.potential.center2.x(), cfg.potential.center2.y()}},
                      {"height2", cfg.potential.height2}};
  doc["source"] = {{"count", cfg.source.count}, {"width", cfg.source.width}};
  doc["sigma"] = {{"phi0", cfg.sigma.phi0}, {"phi1", cfg.sigma.phi1}};
  doc["inversion"] = {
      {"regularization_weight", cfg.inversion.regularization_weight},
      {"max_iterations", cfg.inversion.max_iterations},
      {"step_tolerance", cfg.inversion.step_tolerance},
      {"noise_level", cfg.inversion.noise_level},
      {"seed", cfg.inversion.seed},
      {"inverse_crime", cfg.inversion.inverse_crime_flag},
      {"support_radius", cfg.inversion.support_radius}};
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

// Builders for the objects a pipeline needs, all from the same run config.
inline DiskGrids run_grids(const RunConfig& cfg) {
  return build_disk_grids(DiskGeometry{}, cfg.grid.radial_count,
                          cfg.grid.angular_count, FractionalOrder(cfg.a),
                          cfg.sigma);
}

inline ExteriorPatch run_patch() {
  return build_exterior_patch(DiskGeometry{}, 1.5, 2.0, 8, 32);
}

inline SourceBasis run_basis(const RunConfig& cfg, const ExteriorPatch& patch) {
  return SourceBasis::annulus_bumps(patch, cfg.source.count, cfg.source.width);
}

inline Potential run_potential(const RunConfig& cfg, const InteriorGrid& grid) {
  if (cfg.potential.kind == "zero") return Potential::zero(grid);
  if (cfg.potential.kind == "bump")
    return Potential::bump(grid, cfg.potential.center, cfg.potential.height,
                           cfg.potential.width);
  return Potential::two_bumps(grid, cfg.potential.center, cfg.potential.height,
                              cfg.potential.center2, cfg.potential.height2,
                              cfg.potential.width);
}

}  // namespace fraclab
