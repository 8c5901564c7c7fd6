#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ibvs/config.hpp"

namespace ibvs {

namespace {

constexpr double kDeg = M_PI / 180.0;

/// Typed, strict view over one table of the config tree.
class Table {
 public:
  Table(const ConfigTree* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) fail("", "must be a table");
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  Table table(const std::string& key) {
    used_.insert(key);
    return Table(has(key) ? &node_->at(key) : nullptr, qualified(key));
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return to_number(node_->at(key), key);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t n, const std::vector<double>& fallback) {
    if (!has(key)) return fallback;
    used_.insert(key);
    const auto& v = node_->at(key);
    if (!v.is_array() || v.size() != n) fail(key, "must be an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(to_number(x, key));
    return out;
  }

  Vector3<double> vec3(const std::string& key, const Vector3<double>& fallback) {
    const auto v = numbers(key, 3, {fallback.x(), fallback.y(), fallback.z()});
    return Vector3<double>(v[0], v[1], v[2]);
  }

  /// Raw access for keys with several accepted shapes.
  const ConfigTree* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &node_->at(key);
  }

  double to_number(const ConfigTree& v, const std::string& key) {
    used_.insert(key);
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError((key.empty() ? path_ : qualified(key)) + ": " + msg);
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) throw ConfigError(qualified(key) + ": unknown key");
    }
  }

 private:
  const ConfigTree* node_;
  std::string path_;
  std::set<std::string> used_;

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
};

template <typename Enum>
Enum parse_enum(Table& t, const std::string& key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> options) {
  if (!t.has(key)) return fallback;
  const std::string v = t.string(key, "");
  for (const auto& [name, value] : options) {
    if (v == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : options) allowed += std::string(allowed.empty() ? "" : ", ") + name;
  t.fail(key, "'" + v + "' is not one of: " + allowed);
}

ConfigTree vec_tree(const Vector3<double>& v) { return ConfigTree::array({v.x(), v.y(), v.z()}); }

std::array<double, kCornerCount> per_corner(Table& t, const std::string& key) {
  const ConfigTree* v = t.raw(key);
  std::array<double, kCornerCount> out{};
  if (!v) return out;
  if (v->is_number()) {
    out.fill(v->get<double>());
    return out;
  }
  if (!v->is_array() || v->size() != kCornerCount) t.fail(key, "must be a number or an array of 4 numbers");
  for (int i = 0; i < kCornerCount; ++i) out[i] = t.to_number((*v)[i], key);
  return out;
}

std::array<PixelPointd, kCornerCount> per_corner_offset(Table& t, const std::string& key) {
  const ConfigTree* v = t.raw(key);
  std::array<PixelPointd, kCornerCount> out{};
  if (!v) return out;
  auto pair = [&](const ConfigTree& p) {
    if (!p.is_array() || p.size() != 2) t.fail(key, "offsets are [du, dv] pairs");
    return PixelPointd{t.to_number(p[0], key), t.to_number(p[1], key)};
  };
  if (v->is_array() && v->size() == 2 && (*v)[0].is_number()) {
    out.fill(pair(*v));
    return out;
  }
  if (!v->is_array() || v->size() != kCornerCount) t.fail(key, "must be [du, dv] or 4 such pairs");
  for (int i = 0; i < kCornerCount; ++i) out[i] = pair((*v)[i]);
  return out;
}

PerturbationModel parse_perturbation(Table t) {
  PerturbationModel m;
  const std::string kind = t.string("kind", "ideal");
  if (kind == "ideal") {
    m.variant = perturbation::Ideal{};
  } else if (kind == "occlusion") {
    m.variant = perturbation::Occlusion{per_corner(t, "dropout_prob")};
  } else if (kind == "illumination") {
    m.variant = perturbation::Illumination{t.number("pixel_noise_sigma_px", 0), t.number("misdetect_prob", 0)};
  } else if (kind == "clutter") {
    m.variant = perturbation::Clutter{t.number("outlier_prob", 0)};
  } else if (kind == "background") {
    m.variant = perturbation::BackgroundBias{per_corner_offset(t, "bias_px")};
  } else {
    t.fail("kind", "'" + kind + "' is not one of: ideal, occlusion, illumination, clutter, background");
  }
  t.finish();
  return m;
}

ConfigTree perturbation_tree(const PerturbationModel& m) {
  ConfigTree t;
  t["kind"] = m.kind();
  if (const auto* o = std::get_if<perturbation::Occlusion>(&m.variant)) {
    t["dropout_prob"] = ConfigTree(std::vector<double>(o->dropout_prob.begin(), o->dropout_prob.end()));
  } else if (const auto* i = std::get_if<perturbation::Illumination>(&m.variant)) {
    t["pixel_noise_sigma_px"] = i->pixel_noise_sigma;
    t["misdetect_prob"] = i->misdetect_prob;
  } else if (const auto* c = std::get_if<perturbation::Clutter>(&m.variant)) {
    t["outlier_prob"] = c->outlier_prob;
  } else if (const auto* b = std::get_if<perturbation::BackgroundBias>(&m.variant)) {
    ConfigTree pairs = ConfigTree::array();
    for (const auto& o : b->offset) pairs.push_back(ConfigTree::array({o.u, o.v}));
    t["bias_px"] = pairs;
  }
  return t;
}

}  // namespace

ScenarioConfig scenario_from_tree(const ConfigTree& tree) {
  ScenarioConfig c;
  Table root(&tree, "");
  c.duration = root.number("duration_s", c.duration);
  c.seed = root.integer("seed", c.seed);

  {
    Table t = root.table("uav");
    c.initial_position = t.vec3("initial_position", c.initial_position);
    c.initial_yaw = t.number("initial_yaw_deg", c.initial_yaw / kDeg) * kDeg;
    t.finish();
  }
  {
    Table t = root.table("target");
    c.target_center = t.vec3("center", c.target_center);
    c.target_facing_yaw = t.number("facing_yaw_deg", c.target_facing_yaw / kDeg) * kDeg;
    c.target_width = t.number("width_m", c.target_width);
    c.target_height = t.number("height_m", c.target_height);
    t.finish();
  }
  {
    Table t = root.table("desired");
    const std::string source = t.string("source", "goal_camera_pose");
    if (source == "goal_camera_pose") {
      if (t.has("pixels")) t.fail("pixels", "only valid with source = \"explicit_pixels\"");
      GoalCameraPose g;
      g.position = t.vec3("goal_position", g.position);
      g.yaw = t.number("goal_yaw_deg", g.yaw / kDeg) * kDeg;
      c.desired = g;
    } else if (source == "explicit_pixels") {
      if (t.has("goal_position") || t.has("goal_yaw_deg")) {
        t.fail("source", "explicit_pixels excludes goal_position / goal_yaw_deg");
      }
      ExplicitPixels px;
      const ConfigTree* v = t.raw("pixels");
      if (!v || !v->is_array() || v->size() != kCornerCount) t.fail("pixels", "4 [u, v] pairs required");
      for (int i = 0; i < kCornerCount; ++i) {
        const auto& p = (*v)[i];
        if (!p.is_array() || p.size() != 2) t.fail("pixels", "each entry must be [u, v]");
        px.pixels[i] = {t.to_number(p[0], "pixels"), t.to_number(p[1], "pixels")};
      }
      c.desired = px;
    } else {
      t.fail("source", "must be goal_camera_pose or explicit_pixels");
    }
    t.finish();
  }
  {
    Table t = root.table("camera");
    c.camera.fx = t.number("fx", c.camera.fx);
    c.camera.fy = t.number("fy", c.camera.fy);
    c.camera.cx = t.number("cx", c.camera.cx);
    c.camera.cy = t.number("cy", c.camera.cy);
    c.camera.width = t.number("width", c.camera.width);
    c.camera.height = t.number("height", c.camera.height);
    t.finish();
  }
  {
    Table t = root.table("controller");
    auto& k = c.controller;
    k.lambda = t.number("lambda", k.lambda);
    k.depth_policy = parse_enum(t, "depth_policy", k.depth_policy,
                                {{"true", DepthPolicy::True}, {"constant", DepthPolicy::Constant},
                                 {"goal", DepthPolicy::Goal}});
    k.constant_depth = t.number("constant_depth_m", k.constant_depth);
    k.reduction = parse_enum(t, "reduction", k.reduction,
                             {{"reduced4", Reduction::Reduced4}, {"full6", Reduction::Full6}});
    k.stale_policy = parse_enum(t, "stale_feature_policy", k.stale_policy,
                                {{"hold_last", StalePolicy::HoldLast}, {"drop_pair", StalePolicy::DropPair}});
    k.max_linear = t.number("max_linear_mps", k.max_linear);
    k.max_angular = t.number("max_angular_radps", k.max_angular);
    k.sigma_min_tol = t.number("sigma_min_tol", k.sigma_min_tol);
    t.finish();
  }
  {
    Table t = root.table("plant");
    auto& p = c.plant;
    p.tau = t.number("tau_s", p.tau);
    p.tilt_model = t.boolean("tilt_model", p.tilt_model);
    p.max_tilt = t.number("max_tilt_deg", p.max_tilt / kDeg) * kDeg;
    p.mass = t.number("mass_kg", p.mass);
    p.inertia_diag = t.vec3("inertia_diag_kgm2", p.inertia_diag);
    Table mount = t.table("camera_mount");
    p.body_T_camera.translation = mount.vec3("translation_m", p.body_T_camera.translation);
    const Matrix3<double>& r0 = p.body_T_camera.rotation.matrix();
    std::vector<double> fallback;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) fallback.push_back(r0(i, j));
    const auto r = mount.numbers("rotation_row_major", 9, fallback);
    Matrix3<double> m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = r[3 * i + j];
    p.body_T_camera.rotation = Rotationd(m);
    mount.finish();
    t.finish();
  }
  {
    Table t = root.table("timing");
    c.control_rate = t.number("control_rate_hz", c.control_rate);
    const auto sub = t.integer("plant_substeps", static_cast<std::uint64_t>(c.plant_substeps));
    if (sub < 1 || sub > 1000) t.fail("plant_substeps", "must be in [1, 1000]");
    c.plant_substeps = static_cast<int>(sub);
    c.warmup = t.number("warmup_s", c.warmup);
    c.lost_grace = t.number("lost_grace_s", c.lost_grace);
    t.finish();
  }
  c.perturbation = parse_perturbation(root.table("perturbation"));
  {
    Table t = root.table("latency");
    auto& l = c.latency;
    l.inference_min = t.number("inference_min_ms", l.inference_min * 1e3) * 1e-3;
    l.inference_max = t.number("inference_max_ms", l.inference_max * 1e3) * 1e-3;
    l.preprocess_mean = t.number("preprocess_mean_ms", l.preprocess_mean * 1e3) * 1e-3;
    l.preprocess_sigma = t.number("preprocess_sigma_ms", l.preprocess_sigma * 1e3) * 1e-3;
    l.preprocess_min = t.number("preprocess_min_ms", l.preprocess_min * 1e3) * 1e-3;
    t.finish();
  }
  {
    Table t = root.table("summary");
    c.convergence_fraction = t.number("convergence_fraction", c.convergence_fraction);
    c.convergence_hold = t.number("convergence_hold_s", c.convergence_hold);
    t.finish();
  }
  root.finish();
  c.finalize();
  return c;
}

ConfigTree scenario_to_tree(const ScenarioConfig& c) {
  ConfigTree t;
  t["duration_s"] = c.duration;
  t["seed"] = c.seed;
  t["uav"]["initial_position"] = vec_tree(c.initial_position);
  t["uav"]["initial_yaw_deg"] = c.initial_yaw / kDeg;
  t["target"]["center"] = vec_tree(c.target_center);
  t["target"]["facing_yaw_deg"] = c.target_facing_yaw / kDeg;
  t["target"]["width_m"] = c.target_width;
  t["target"]["height_m"] = c.target_height;
  if (const auto* g = std::get_if<GoalCameraPose>(&c.desired)) {
    t["desired"]["source"] = "goal_camera_pose";
    t["desired"]["goal_position"] = vec_tree(g->position);
    t["desired"]["goal_yaw_deg"] = g->yaw / kDeg;
  } else {
    const auto& px = std::get<ExplicitPixels>(c.desired);
    t["desired"]["source"] = "explicit_pixels";
    ConfigTree pairs = ConfigTree::array();
    for (const auto& p : px.pixels) pairs.push_back(ConfigTree::array({p.u, p.v}));
    t["desired"]["pixels"] = pairs;
  }
  t["camera"] = {{"fx", c.camera.fx}, {"fy", c.camera.fy},       {"cx", c.camera.cx},
                 {"cy", c.camera.cy}, {"width", c.camera.width}, {"height", c.camera.height}};
  const auto& k = c.controller;
  t["controller"]["lambda"] = k.lambda;
  t["controller"]["depth_policy"] =
      k.depth_policy == DepthPolicy::True ? "true" : k.depth_policy == DepthPolicy::Constant ? "constant" : "goal";
  t["controller"]["constant_depth_m"] = k.constant_depth;
  t["controller"]["reduction"] = k.reduction == Reduction::Reduced4 ? "reduced4" : "full6";
  t["controller"]["stale_feature_policy"] = k.stale_policy == StalePolicy::HoldLast ? "hold_last" : "drop_pair";
  t["controller"]["max_linear_mps"] = k.max_linear;
  t["controller"]["max_angular_radps"] = k.max_angular;
  t["controller"]["sigma_min_tol"] = k.sigma_min_tol;
  const auto& p = c.plant;
  t["plant"]["tau_s"] = p.tau;
  t["plant"]["tilt_model"] = p.tilt_model;
  t["plant"]["max_tilt_deg"] = p.max_tilt / kDeg;
  t["plant"]["mass_kg"] = p.mass;
  t["plant"]["inertia_diag_kgm2"] = vec_tree(p.inertia_diag);
  t["plant"]["camera_mount"]["translation_m"] = vec_tree(p.body_T_camera.translation);
  ConfigTree rot = ConfigTree::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rot.push_back(p.body_T_camera.rotation(i, j));
  t["plant"]["camera_mount"]["rotation_row_major"] = rot;
  t["timing"]["control_rate_hz"] = c.control_rate;
  t["timing"]["plant_substeps"] = c.plant_substeps;
  t["timing"]["warmup_s"] = c.warmup;
  t["timing"]["lost_grace_s"] = c.lost_grace;
  t["perturbation"] = perturbation_tree(c.perturbation);
  const auto& l = c.latency;
  t["latency"] = {{"inference_min_ms", l.inference_min * 1e3},     {"inference_max_ms", l.inference_max * 1e3},
                  {"preprocess_mean_ms", l.preprocess_mean * 1e3}, {"preprocess_sigma_ms", l.preprocess_sigma * 1e3},
                  {"preprocess_min_ms", l.preprocess_min * 1e3}};
  t["summary"]["convergence_fraction"] = c.convergence_fraction;
  t["summary"]["convergence_hold_s"] = c.convergence_hold;
  return t;
}

ScenarioConfig parse_scenario(std::string_view text, bool json) {
  ConfigTree tree;
  if (json) {
    try {
      tree = ConfigTree::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("JSON: ") + e.what());
    }
  } else {
    tree = parse_toml(text);
  }
  return scenario_from_tree(tree);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  try {
    return parse_scenario(text, json);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> preset_names() { return {"ideal", "occlusion", "illumination", "clutter", "background"}; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "ideal") {
    c.perturbation.variant = perturbation::Ideal{};
  } else if (name == "occlusion") {
    perturbation::Occlusion o;
    o.dropout_prob.fill(0.3);
    c.perturbation.variant = o;
  } else if (name == "illumination") {
    c.perturbation.variant = perturbation::Illumination{1.5, 0.05};
  } else if (name == "clutter") {
    c.perturbation.variant = perturbation::Clutter{0.05};
  } else if (name == "background") {
    perturbation::BackgroundBias b;
    b.offset.fill(PixelPointd{40.0, 0.0});
    c.perturbation.variant = b;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  c.finalize();
  return c;
}

}  // namespace ibvs
