#include "panav/scene.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "panav/error.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSceneMagic = "PANAV-SCENE v1";

struct ClassName {
  SemanticClass cls;
  std::string_view name;
};

constexpr std::array<ClassName, 15> kClassNames{{
    {SemanticClass::kUnset, "-"},
    {SemanticClass::kCeiling, "ceiling"},
    {SemanticClass::kFloor, "floor"},
    {SemanticClass::kWall, "wall"},
    {SemanticClass::kBeam, "beam"},
    {SemanticClass::kColumn, "column"},
    {SemanticClass::kWindow, "window"},
    {SemanticClass::kDoor, "door"},
    {SemanticClass::kTable, "table"},
    {SemanticClass::kChair, "chair"},
    {SemanticClass::kSofa, "sofa"},
    {SemanticClass::kBookcase, "bookcase"},
    {SemanticClass::kBoard, "board"},
    {SemanticClass::kStairs, "stairs"},
    {SemanticClass::kClutter, "clutter"},
}};

struct CategoryName {
  std::string_view prefix;
  RoomCategory category;
};

// Lower-cased name prefixes seen in S3DIS and in hand-written fixtures.
constexpr std::array<CategoryName, 14> kCategoryAliases{{
    {"office", RoomCategory::kOffice},
    {"hallway", RoomCategory::kHallway},
    {"hallways", RoomCategory::kHallway},
    {"corridor", RoomCategory::kHallway},
    {"conference", RoomCategory::kConference},
    {"conferenceroom", RoomCategory::kConference},
    {"meeting", RoomCategory::kConference},
    {"lobby", RoomCategory::kLobby},
    {"wc", RoomCategory::kBathroom},
    {"bathroom", RoomCategory::kBathroom},
    {"restroom", RoomCategory::kBathroom},
    {"toilet", RoomCategory::kBathroom},
    {"storage", RoomCategory::kStorage},
    {"other", RoomCategory::kOther},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

[[noreturn]] void record_error(const fs::path& file, std::size_t line, const std::string& what) {
  fail(ErrorCode::kMalformedRecord,
       file.string() + ":" + std::to_string(line) + ": " + what);
}

void append_point_file(const fs::path& file, SemanticClass cls, std::vector<LabeledPoint>& out) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = text::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      record_error(file, line_no, "expected 6 fields, got " + std::to_string(fields.size()));
    }
    LabeledPoint p;
    std::array<double, 3> xyz{};
    for (int i = 0; i < 3; ++i) {
      auto v = text::parse_double(fields[i]);
      if (!v || !std::isfinite(*v)) {
        record_error(file, line_no, "bad coordinate '" + std::string(fields[i]) + "'");
      }
      xyz[i] = *v;
    }
    std::array<std::uint8_t, 3> rgb{};
    for (int i = 0; i < 3; ++i) {
      auto v = text::parse_int<int>(fields[3 + i]);
      if (!v || *v < 0 || *v > 255) {
        record_error(file, line_no, "bad color '" + std::string(fields[3 + i]) + "'");
      }
      rgb[i] = static_cast<std::uint8_t>(*v);
    }
    p.x = xyz[0];
    p.y = xyz[1];
    p.z = xyz[2];
    p.r = rgb[0];
    p.g = rgb[1];
    p.b = rgb[2];
    p.semantic_class = cls;
    out.push_back(p);
  }
}

std::vector<fs::path> sorted_txt_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string_view to_string(SemanticClass cls) {
  for (const auto& entry : kClassNames) {
    if (entry.cls == cls) return entry.name;
  }
  return "-";
}

SemanticClass semantic_class_from_name(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& entry : kClassNames) {
    if (entry.name == key) return entry.cls;
  }
  return SemanticClass::kClutter;
}

std::string_view to_string(RoomCategory category) {
  switch (category) {
    case RoomCategory::kOffice: return "office";
    case RoomCategory::kHallway: return "hallway";
    case RoomCategory::kConference: return "conference";
    case RoomCategory::kLobby: return "lobby";
    case RoomCategory::kBathroom: return "bathroom";
    case RoomCategory::kStorage: return "storage";
    case RoomCategory::kOther: return "other";
  }
  return "other";
}

std::optional<RoomCategory> parse_room_category(std::string_view token) {
  for (auto c : {RoomCategory::kOffice, RoomCategory::kHallway, RoomCategory::kConference,
                 RoomCategory::kLobby, RoomCategory::kBathroom, RoomCategory::kStorage,
                 RoomCategory::kOther}) {
    if (to_string(c) == token) return c;
  }
  return std::nullopt;
}

RoomCategory category_from_name(std::string_view room_name) {
  const std::string prefix = lower(room_name.substr(0, room_name.find('_')));
  for (const auto& alias : kCategoryAliases) {
    if (alias.prefix == prefix) return alias.category;
  }
  return RoomCategory::kOther;
}

const Room* SceneSet::find_room(std::string_view name) const {
  auto it = std::lower_bound(rooms.begin(), rooms.end(), name,
                             [](const Room& r, std::string_view n) { return r.name < n; });
  if (it != rooms.end() && it->name == name) return &*it;
  return nullptr;
}

std::size_t SceneSet::point_count() const {
  std::size_t n = 0;
  for (const auto& room : rooms) n += room.points.size();
  return n;
}

bool SceneSet::has_labels() const {
  for (const auto& room : rooms) {
    for (const auto& p : room.points) {
      if (p.semantic_class != SemanticClass::kUnset) return true;
    }
  }
  return false;
}

void validate_scene(const SceneSet& scene) {
  if (scene.area_name.empty() || has_whitespace(scene.area_name)) {
    fail(ErrorCode::kMalformedScene, "area name must be a non-empty token");
  }
  for (std::size_t i = 0; i < scene.rooms.size(); ++i) {
    const Room& room = scene.rooms[i];
    if (room.name.empty() || has_whitespace(room.name)) {
      fail(ErrorCode::kMalformedScene, "room name must be a non-empty token");
    }
    if (i > 0 && !(scene.rooms[i - 1].name < room.name)) {
      fail(ErrorCode::kMalformedScene,
           room.name == scene.rooms[i - 1].name ? "duplicate room name " + room.name
                                                : "rooms not sorted by name");
    }
    if (room.category != category_from_name(room.name)) {
      fail(ErrorCode::kMalformedScene, "category of " + room.name + " disagrees with its name");
    }
    if (room.points.empty()) {
      fail(ErrorCode::kMalformedScene, "room " + room.name + " has no points");
    }
    for (const auto& p : room.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        fail(ErrorCode::kMalformedScene, "non-finite point in " + room.name);
      }
    }
  }
}

Episode make_episode(std::shared_ptr<const SceneSet> scene, std::string instruction,
                     std::string start_room, std::string goal_room) {
  if (!scene) fail(ErrorCode::kInvalidEpisode, "episode has no scene");
  if (instruction.empty()) fail(ErrorCode::kInvalidEpisode, "instruction is empty");
  for (const auto* name : {&start_room, &goal_room}) {
    if (scene->find_room(*name) == nullptr) {
      fail(ErrorCode::kUnknownRoom, "room '" + *name + "' not in " + scene->area_name);
    }
  }
  return Episode{std::move(scene), std::move(instruction), std::move(start_room),
                 std::move(goal_room)};
}

SceneSet parse_s3dis_area(const fs::path& root_directory) {
  if (!fs::is_directory(root_directory)) {
    fail(ErrorCode::kNoScenes, root_directory.string() + " is not a directory");
  }
  std::vector<fs::path> room_dirs;
  for (const auto& entry : fs::directory_iterator(root_directory)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && !name.empty() && name[0] != '.') {
      room_dirs.push_back(entry.path());
    }
  }
  std::sort(room_dirs.begin(), room_dirs.end());

  SceneSet scene;
  scene.area_name = root_directory.filename().string();
  if (scene.area_name.empty()) scene.area_name = root_directory.parent_path().filename().string();
  for (const auto& dir : room_dirs) {
    Room room;
    room.name = dir.filename().string();
    room.category = category_from_name(room.name);
    const fs::path annotations = dir / "Annotations";
    std::vector<fs::path> annotated;
    if (fs::is_directory(annotations)) annotated = sorted_txt_files(annotations);
    if (!annotated.empty()) {
      for (const auto& file : annotated) {
        const std::string stem = file.stem().string();
        const auto cut = stem.rfind('_');
        append_point_file(file, semantic_class_from_name(stem.substr(0, cut)), room.points);
      }
    } else if (fs::is_regular_file(dir / (room.name + ".txt"))) {
      append_point_file(dir / (room.name + ".txt"), SemanticClass::kUnset, room.points);
    }
    // Directories without point files are not rooms.
    if (!room.points.empty()) scene.rooms.push_back(std::move(room));
  }
  if (scene.rooms.empty()) {
    fail(ErrorCode::kNoScenes, "no room directories with points under " + root_directory.string());
  }
  return scene;
}

SceneSet read_scene(std::istream& in, std::string_view source_name) {
  auto bad = [&](std::size_t line_no, const std::string& what) {
    fail(ErrorCode::kMalformedScene,
         std::string(source_name) + ":" + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != kSceneMagic) bad(line_no, "missing header '" + std::string(kSceneMagic) + "'");
  if (!next_line()) bad(line_no, "missing AREA line");
  auto area = text::split_ws(line);
  if (area.size() != 2 || area[0] != "AREA") bad(line_no, "expected 'AREA <name>'");

  SceneSet scene;
  scene.area_name = std::string(area[1]);
  std::set<std::string> names;
  while (next_line()) {
    auto head = text::split_ws(line);
    if (head.size() != 4 || head[0] != "ROOM") bad(line_no, "expected 'ROOM <name> <category> <count>'");
    Room room;
    room.name = std::string(head[1]);
    auto category = parse_room_category(head[2]);
    if (!category) bad(line_no, "unknown category '" + std::string(head[2]) + "'");
    room.category = *category;
    auto count = text::parse_int<std::size_t>(head[3]);
    if (!count) bad(line_no, "bad point count");
    if (!names.insert(room.name).second) bad(line_no, "duplicate room name " + room.name);
    room.points.reserve(*count);
    for (std::size_t i = 0; i < *count; ++i) {
      if (!next_line()) bad(line_no, "truncated point list for " + room.name);
      auto f = text::split_ws(line);
      if (f.size() != 7) bad(line_no, "point record needs 7 fields");
      LabeledPoint p;
      auto x = text::parse_double(f[0]);
      auto y = text::parse_double(f[1]);
      auto z = text::parse_double(f[2]);
      auto r = text::parse_int<int>(f[3]);
      auto g = text::parse_int<int>(f[4]);
      auto b = text::parse_int<int>(f[5]);
      if (!x || !y || !z || !r || !g || !b) bad(line_no, "non-numeric point field");
      for (int c : {*r, *g, *b}) {
        if (c < 0 || c > 255) bad(line_no, "color out of range");
      }
      p.x = *x;
      p.y = *y;
      p.z = *z;
      p.r = static_cast<std::uint8_t>(*r);
      p.g = static_cast<std::uint8_t>(*g);
      p.b = static_cast<std::uint8_t>(*b);
      if (f[6] != "-") {
        bool known = false;
        for (const auto& entry : kClassNames) {
          if (entry.name == f[6]) {
            p.semantic_class = entry.cls;
            known = true;
          }
        }
        if (!known) bad(line_no, "unknown class '" + std::string(f[6]) + "'");
      }
      room.points.push_back(p);
    }
    scene.rooms.push_back(std::move(room));
  }
  std::sort(scene.rooms.begin(), scene.rooms.end(),
            [](const Room& a, const Room& b) { return a.name < b.name; });
  validate_scene(scene);
  return scene;
}

SceneSet parse_scene_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + file.string());
  return read_scene(in, file.string());
}

void write_scene(std::ostream& out, const SceneSet& scene) {
  validate_scene(scene);
  out << kSceneMagic << '\n' << "AREA " << scene.area_name << '\n';
  for (const auto& room : scene.rooms) {
    out << "ROOM " << room.name << ' ' << to_string(room.category) << ' ' << room.points.size()
        << '\n';
    for (const auto& p : room.points) {
      out << text::format_double(p.x) << ' ' << text::format_double(p.y) << ' '
          << text::format_double(p.z) << ' ' << int(p.r) << ' ' << int(p.g) << ' ' << int(p.b)
          << ' ' << to_string(p.semantic_class) << '\n';
    }
  }
}

void write_scene_file(const fs::path& file, const SceneSet& scene) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  write_scene(out, scene);
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

}  // namespace panav
