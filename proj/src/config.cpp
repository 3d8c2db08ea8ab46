#include "panav/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "panav/error.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace {

using Getter = std::function<std::string(const EpisodeConfig&)>;
using Setter = std::function<void(EpisodeConfig&, std::string_view)>;

struct Setting {
  std::string key;
  Getter get;
  Setter set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  fail(ErrorCode::kInvalidConfig,
       std::string(key) + " = '" + std::string(value) + "': expected " + std::string(expected));
}

std::string fmt(double v) { return text::format_double(v); }

Setting real_param(std::string key, std::function<double&(EpisodeConfig&)> ref, bool positive) {
  return Setting{key,
                 [ref](const EpisodeConfig& c) { return fmt(ref(const_cast<EpisodeConfig&>(c))); },
                 [ref, key, positive](EpisodeConfig& c, std::string_view v) {
                   const auto x = text::parse_double(v);
                   if (!x || !std::isfinite(*x) || (positive && !(*x > 0.0))) {
                     bad_value(key, v, positive ? "a positive number" : "a number");
                   }
                   ref(c) = *x;
                 }};
}

template <typename Int>
Setting int_param(std::string key, std::function<Int&(EpisodeConfig&)> ref, Int min_value) {
  return Setting{key,
                 [ref](const EpisodeConfig& c) {
                   return std::to_string(ref(const_cast<EpisodeConfig&>(c)));
                 },
                 [ref, key, min_value](EpisodeConfig& c, std::string_view v) {
                   const auto x = text::parse_int<Int>(v);
                   if (!x || *x < min_value) {
                     bad_value(key, v, "an integer >= " + std::to_string(min_value));
                   }
                   ref(c) = *x;
                 }};
}

Setting string_param(std::string key, std::function<std::string&(EpisodeConfig&)> ref) {
  return Setting{key, [ref](const EpisodeConfig& c) { return ref(const_cast<EpisodeConfig&>(c)); },
                 [ref](EpisodeConfig& c, std::string_view v) { ref(c) = std::string(v); }};
}

std::string_view source_kind_name(SceneSourceKind kind) {
  switch (kind) {
    case SceneSourceKind::kSynthetic: return "synthetic";
    case SceneSourceKind::kS3dis: return "s3dis";
    case SceneSourceKind::kSceneFile: return "file";
    case SceneSourceKind::kInline: return "inline";
  }
  return "synthetic";
}

std::string_view ceiling_name(CeilingPolicy::Kind kind) {
  switch (kind) {
    case CeilingPolicy::Kind::kAuto: return "auto";
    case CeilingPolicy::Kind::kByLabel: return "by-label";
    case CeilingPolicy::Kind::kByHeightCut: return "by-height-cut";
  }
  return "auto";
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> t;
    // scene
    t.push_back({"scene.source",
                 [](const EpisodeConfig& c) { return std::string(source_kind_name(c.source.kind)); },
                 [](EpisodeConfig& c, std::string_view v) {
                   if (v == "synthetic") c.source.kind = SceneSourceKind::kSynthetic;
                   else if (v == "s3dis") c.source.kind = SceneSourceKind::kS3dis;
                   else if (v == "file") c.source.kind = SceneSourceKind::kSceneFile;
                   else bad_value("scene.source", v, "synthetic, s3dis or file");
                 }});
    t.push_back({"scene.path", [](const EpisodeConfig& c) { return c.source.path.string(); },
                 [](EpisodeConfig& c, std::string_view v) { c.source.path = std::string(v); }});
    t.push_back(int_param<std::uint64_t>(
        "scene.seed", [](EpisodeConfig& c) -> std::uint64_t& { return c.source.seed; }, 0));
    t.push_back(int_param<int>(
        "scene.offices", [](EpisodeConfig& c) -> int& { return c.source.layout.offices; }, 2));
    t.push_back(int_param<int>(
        "scene.hallways", [](EpisodeConfig& c) -> int& { return c.source.layout.hallways; }, 1));
    t.push_back({"scene.topology",
                 [](const EpisodeConfig& c) {
                   return std::string(c.source.layout.topology == CorridorTopology::kLoop ? "loop" : "linear");
                 },
                 [](EpisodeConfig& c, std::string_view v) {
                   if (v == "loop") c.source.layout.topology = CorridorTopology::kLoop;
                   else if (v == "linear") c.source.layout.topology = CorridorTopology::kLinear;
                   else bad_value("scene.topology", v, "loop or linear");
                 }});
    t.push_back(real_param("scene.ring_width", [](EpisodeConfig& c) -> double& { return c.source.layout.ring_width; }, true));
    t.push_back(real_param("scene.ring_height", [](EpisodeConfig& c) -> double& { return c.source.layout.ring_height; }, true));
    t.push_back(real_param("scene.corridor_width", [](EpisodeConfig& c) -> double& { return c.source.layout.corridor_width; }, true));
    t.push_back(real_param("scene.office_depth", [](EpisodeConfig& c) -> double& { return c.source.layout.office_depth; }, true));
    t.push_back(real_param("scene.door_width", [](EpisodeConfig& c) -> double& { return c.source.layout.door_width; }, true));
    t.push_back(real_param("scene.wall_height", [](EpisodeConfig& c) -> double& { return c.source.layout.wall_height; }, true));
    t.push_back(real_param("scene.point_spacing", [](EpisodeConfig& c) -> double& { return c.source.layout.point_spacing; }, true));
    t.push_back({"scene.jitter",
                 [](const EpisodeConfig& c) { return std::string(c.source.layout.jitter ? "true" : "false"); },
                 [](EpisodeConfig& c, std::string_view v) {
                   if (v == "true") c.source.layout.jitter = true;
                   else if (v == "false") c.source.layout.jitter = false;
                   else bad_value("scene.jitter", v, "true or false");
                 }});
    // episode
    t.push_back(string_param("episode.label", [](EpisodeConfig& c) -> std::string& { return c.label; }));
    t.push_back(string_param("episode.instruction", [](EpisodeConfig& c) -> std::string& { return c.instruction; }));
    t.push_back(string_param("episode.start_room", [](EpisodeConfig& c) -> std::string& { return c.start_room; }));
    t.push_back(string_param("episode.goal_room", [](EpisodeConfig& c) -> std::string& { return c.goal_room; }));
    // grid_maps
    t.push_back(real_param("grid_maps.resolution", [](EpisodeConfig& c) -> double& { return c.params.resolution; }, true));
    t.push_back({"grid_maps.ceiling_policy",
                 [](const EpisodeConfig& c) { return std::string(ceiling_name(c.params.ceiling.kind)); },
                 [](EpisodeConfig& c, std::string_view v) {
                   if (v == "auto") c.params.ceiling.kind = CeilingPolicy::Kind::kAuto;
                   else if (v == "by-label") c.params.ceiling.kind = CeilingPolicy::Kind::kByLabel;
                   else if (v == "by-height-cut") c.params.ceiling.kind = CeilingPolicy::Kind::kByHeightCut;
                   else bad_value("grid_maps.ceiling_policy", v, "auto, by-label or by-height-cut");
                 }});
    t.push_back(real_param("grid_maps.ceiling_fraction", [](EpisodeConfig& c) -> double& { return c.params.ceiling.fraction; }, true));
    t.push_back(real_param("grid_maps.floor_band", [](EpisodeConfig& c) -> double& { return c.params.bands.floor_band; }, true));
    t.push_back(real_param("grid_maps.obstacle_low", [](EpisodeConfig& c) -> double& { return c.params.bands.obstacle_low; }, false));
    t.push_back(real_param("grid_maps.obstacle_high", [](EpisodeConfig& c) -> double& { return c.params.bands.obstacle_high; }, false));
    t.push_back(int_param<int>("grid_maps.inflation_cells", [](EpisodeConfig& c) -> int& { return c.params.inflation_cells; }, 0));
    // topo_graph
    t.push_back(real_param("topo_graph.adjacency_threshold",
                           [](EpisodeConfig& c) -> double& { return c.params.adjacency_threshold; }, true));
    // path_planning
    t.push_back(int_param<std::size_t>("path_planning.k", [](EpisodeConfig& c) -> std::size_t& { return c.params.k; }, 1));
    // privacy_field
    t.push_back(real_param("privacy_field.sigma_d", [](EpisodeConfig& c) -> double& { return c.params.sigma_d; }, true));
    t.push_back({"privacy_field.field_mode",
                 [](const EpisodeConfig& c) { return std::string(to_string(c.params.field_mode)); },
                 [](EpisodeConfig& c, std::string_view v) {
                   const auto mode = parse_field_mode(v);
                   if (!mode) bad_value("privacy_field.field_mode", v, "paper-eq5 or risk-inverted");
                   c.params.field_mode = *mode;
                 }});
    t.push_back({"privacy_field.mask_categories",
                 [](const EpisodeConfig& c) {
                   std::string out;
                   for (RoomCategory cat : c.params.mask_categories) {
                     out += (out.empty() ? "" : ",") + std::string(to_string(cat));
                   }
                   return out;
                 },
                 [](EpisodeConfig& c, std::string_view v) {
                   std::set<RoomCategory> cats;
                   std::string token;
                   std::istringstream in{std::string(v)};
                   while (std::getline(in, token, ',')) {
                     const auto cat = parse_room_category(token);
                     if (!cat) bad_value("privacy_field.mask_categories", v, "comma-separated room categories");
                     cats.insert(*cat);
                   }
                   if (cats.empty()) bad_value("privacy_field.mask_categories", v, "at least one category");
                   c.params.mask_categories = std::move(cats);
                 }});
    // selection
    t.push_back({"selection.selector",
                 [](const EpisodeConfig& c) { return std::string(to_string(c.params.selector)); },
                 [](EpisodeConfig& c, std::string_view v) {
                   if (v == "heuristic") c.params.selector = SelectionMethod::kHeuristic;
                   else if (v == "vlm") c.params.selector = SelectionMethod::kVlm;
                   else bad_value("selection.selector", v, "heuristic or vlm");
                 }});
    t.push_back(int_param<int>("selection.render_scale", [](EpisodeConfig& c) -> int& { return c.params.render_scale; }, 1));
    t.push_back(int_param<int>("selection.stroke_width", [](EpisodeConfig& c) -> int& { return c.params.stroke_width; }, 0));
    t.push_back(real_param("selection.temperature", [](EpisodeConfig& c) -> double& { return c.params.temperature; }, false));
    // vlm
    t.push_back(string_param("vlm.endpoint", [](EpisodeConfig& c) -> std::string& { return c.params.vlm_endpoint; }));
    t.push_back(string_param("vlm.model", [](EpisodeConfig& c) -> std::string& { return c.params.vlm_model; }));
    t.push_back(int_param<int>("vlm.timeout_seconds", [](EpisodeConfig& c) -> int& { return c.params.vlm_timeout_seconds; }, 1));
    return t;
  }();
  return table;
}

}  // namespace

void set_config_value(EpisodeConfig& config, std::string_view key, std::string_view value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(config, value);
      return;
    }
  }
  fail(ErrorCode::kInvalidConfig, "unknown setting '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const EpisodeConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : settings()) out.emplace_back(s.key, s.get(config));
  return out;
}

std::string format_config(const EpisodeConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : config_entries(config)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

EpisodeConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  EpisodeConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::kInvalidConfig, "setting '" + section + "' is outside a section");
    for (const auto& [key, value] : body) {
      set_config_value(config, section + "." + key, value.get_value<std::string>());
    }
  }
  return config;
}

EpisodeConfig load_config_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::kIoFailure, "cannot read " + file.string());
  return parse_config(in);
}

std::string source_label(const SceneSource& source) {
  switch (source.kind) {
    case SceneSourceKind::kSynthetic: return "synthetic_" + std::to_string(source.seed);
    case SceneSourceKind::kS3dis: {
      const auto p = source.path.lexically_normal();
      return (p.has_filename() ? p.filename() : p.parent_path().filename()).string();
    }
    case SceneSourceKind::kSceneFile: return source.path.stem().string();
    case SceneSourceKind::kInline: return source.scene ? source.scene->area_name : "inline";
  }
  return "scene";
}

}  // namespace panav
