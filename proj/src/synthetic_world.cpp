#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "panav/error.hpp"
#include "panav/scene.hpp"

namespace panav {

namespace {

struct Rect {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
};

// A door gap on an axis-aligned edge. Walls are skipped over [lo, hi] along the edge.
struct Door {
  bool horizontal;  // true: lies on a line y = at
  double at;
  double lo, hi;
};

struct RoomPlan {
  std::string name;
  std::vector<Rect> rects;
  std::vector<Door> doors;
  std::uint8_t floor_shade;
  std::vector<Rect> desks;
};

constexpr double kWallInset = 0.02;
constexpr double kProbe = 0.05;
constexpr double kZStep = 0.1;
constexpr double kCeilingPitch = 0.2;
constexpr double kNoise = 0.005;

// Uniform in [0,1) from the top 53 bits; avoids implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint8_t jitter(int base, int spread) {
    int v = base + static_cast<int>(std::floor(uniform(-spread, spread + 1)));
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
  }

 private:
  std::mt19937_64 engine_;
};

bool is_hallway(const std::string& name) { return name.rfind("hallway", 0) == 0; }

class WorldBuilder {
 public:
  WorldBuilder(const LayoutParams& p, Rng& rng) : p_(p), rng_(rng) {}

  Room build(const RoomPlan& plan, const std::vector<RoomPlan>& all) {
    Room room;
    room.name = plan.name;
    room.category = category_from_name(plan.name);
    for (const auto& r : plan.rects) add_floor_and_ceiling(r, plan.floor_shade, room.points);
    for (const auto& r : plan.rects) add_walls(plan, r, all, room.points);
    for (const auto& d : plan.desks) add_desk(d, room.points);
    return room;
  }

 private:
  void push(std::vector<LabeledPoint>& out, double x, double y, double z, int shade_r, int shade_g,
            int shade_b, SemanticClass cls) {
    LabeledPoint pt;
    pt.x = x + rng_.uniform(-kNoise, kNoise);
    pt.y = y + rng_.uniform(-kNoise, kNoise);
    pt.z = z + rng_.uniform(-kNoise, kNoise);
    pt.r = rng_.jitter(shade_r, 6);
    pt.g = rng_.jitter(shade_g, 6);
    pt.b = rng_.jitter(shade_b, 6);
    pt.semantic_class = cls;
    out.push_back(pt);
  }

  void add_floor_and_ceiling(const Rect& r, std::uint8_t shade, std::vector<LabeledPoint>& out) {
    const double s = p_.point_spacing;
    for (double y = r.y0 + s / 2; y < r.y1; y += s) {
      for (double x = r.x0 + s / 2; x < r.x1; x += s) {
        push(out, x, y, 0.0, shade, shade, shade - 10, SemanticClass::kFloor);
      }
    }
    for (double y = r.y0 + kCeilingPitch / 2; y < r.y1; y += kCeilingPitch) {
      for (double x = r.x0 + kCeilingPitch / 2; x < r.x1; x += kCeilingPitch) {
        push(out, x, y, p_.wall_height, 235, 235, 230, SemanticClass::kCeiling);
      }
    }
  }

  void add_desk(const Rect& d, std::vector<LabeledPoint>& out) {
    const double s = p_.point_spacing;
    for (double y = d.y0 + s / 2; y < d.y1; y += s) {
      for (double x = d.x0 + s / 2; x < d.x1; x += s) {
        push(out, x, y, 0.75, 120, 80, 45, SemanticClass::kTable);
      }
    }
  }

  // Samples one wall column per point_spacing along every edge of `r`; columns whose
  // outward probe lands in the same room, or in another hallway when this room is a
  // hallway, are open. Door gaps keep only a lintel above head height.
  void add_walls(const RoomPlan& plan, const Rect& r, const std::vector<RoomPlan>& all,
                 std::vector<LabeledPoint>& out) {
    const double s = p_.point_spacing;
    struct Edge {
      bool horizontal;
      double at, lo, hi, nx, ny;
    };
    const Edge edges[4] = {
        {true, r.y0, r.x0, r.x1, 0.0, -1.0},
        {true, r.y1, r.x0, r.x1, 0.0, 1.0},
        {false, r.x0, r.y0, r.y1, -1.0, 0.0},
        {false, r.x1, r.y0, r.y1, 1.0, 0.0},
    };
    for (const auto& e : edges) {
      for (double t = e.lo + s / 2; t < e.hi; t += s) {
        const double qx = e.horizontal ? t : e.at;
        const double qy = e.horizontal ? e.at : t;
        const double px = qx + e.nx * kProbe;
        const double py = qy + e.ny * kProbe;
        if (is_open(plan, px, py, all)) continue;
        const double wx = qx - e.nx * kWallInset;
        const double wy = qy - e.ny * kWallInset;
        bool in_door = false;
        for (const auto& d : plan.doors) {
          if (d.horizontal == e.horizontal && std::abs(d.at - e.at) < 1e-9 && t >= d.lo &&
              t <= d.hi) {
            in_door = true;
          }
        }
        if (in_door) {
          for (double z = 2.1; z < p_.wall_height - 0.05; z += kZStep) {
            push(out, wx, wy, z, 90, 70, 60, SemanticClass::kDoor);
          }
        } else {
          for (double z = kZStep; z < p_.wall_height - 0.05; z += kZStep) {
            push(out, wx, wy, z, 205, 195, 175, SemanticClass::kWall);
          }
        }
      }
    }
  }

  static bool is_open(const RoomPlan& plan, double px, double py, const std::vector<RoomPlan>& all) {
    for (const auto& r : plan.rects) {
      if (r.contains(px, py)) return true;
    }
    if (!is_hallway(plan.name)) return false;
    for (const auto& other : all) {
      if (&other == &plan || !is_hallway(other.name)) continue;
      for (const auto& r : other.rects) {
        if (r.contains(px, py)) return true;
      }
    }
    return false;
  }

  const LayoutParams& p_;
  Rng& rng_;
};

void validate_layout(const LayoutParams& p) {
  auto bad = [](const std::string& why) { fail(ErrorCode::kInvalidLayout, why); };
  if (p.hallways < 1) bad("at least one hallway is required");
  if (p.offices < 2) bad("at least two non-hallway rooms are required");
  if (!(p.point_spacing > 0.0) || p.point_spacing > 0.5) bad("point_spacing must be in (0, 0.5]");
  if (!(p.corridor_width > 0.5) || !(p.office_depth > 1.0) || !(p.door_width > 0.3) ||
      !(p.wall_height > 2.5)) {
    bad("corridor_width > 0.5, office_depth > 1, door_width > 0.3 and wall_height > 2.5 required");
  }
  const double office_width = p.ring_width / p.offices;
  const double margin = p.topology == CorridorTopology::kLoop ? p.corridor_width : 0.0;
  if (office_width - margin < p.door_width + 0.6) bad("offices too narrow for their doors");
  if (p.topology == CorridorTopology::kLoop) {
    if (p.ring_height < 2.0 * p.corridor_width + 0.5) bad("ring_height too small for two corridors");
    if (p.ring_width < 2.0 * p.corridor_width + 0.5 * p.hallways) bad("ring_width too small");
  } else if (p.ring_width / p.hallways < p.corridor_width) {
    bad("too many hallway segments for ring_width");
  }
}

}  // namespace

SceneSet generate_synthetic_world(std::uint64_t seed, const LayoutParams& params) {
  validate_layout(params);
  Rng rng(seed);
  LayoutParams p = params;
  if (p.jitter) {
    p.ring_width *= rng.uniform(0.9, 1.15);
    if (p.topology == CorridorTopology::kLoop) p.ring_height *= rng.uniform(0.9, 1.2);
    p.office_depth *= rng.uniform(0.9, 1.2);
    validate_layout(p);
  }

  const double w = p.ring_width;
  const double c = p.corridor_width;
  const bool loop = p.topology == CorridorTopology::kLoop;
  const double office_y0 = loop ? p.ring_height : c;

  std::vector<RoomPlan> plans;
  auto hallway = [&](int index) -> RoomPlan& {
    const std::string name = "hallway_" + std::to_string(index);
    for (auto& plan : plans) {
      if (plan.name == name) return plan;
    }
    plans.push_back(RoomPlan{name, {}, {}, 165, {}});
    return plans.back();
  };

  if (!loop) {
    for (int i = 0; i < p.hallways; ++i) {
      hallway(i + 1).rects.push_back(Rect{w * i / p.hallways, 0.0, w * (i + 1) / p.hallways, c});
    }
  } else {
    const double hh = p.ring_height;
    const Rect north{c, hh - c, w - c, hh};
    const Rect west{0.0, 0.0, c, hh};
    const Rect east{w - c, 0.0, w, hh};
    const Rect south{c, 0.0, w - c, c};
    switch (p.hallways) {
      case 1:
        hallway(1).rects = {north, west, east, south};
        break;
      case 2:
        hallway(1).rects = {north};
        hallway(2).rects = {west, south, east};
        break;
      case 3:
        hallway(1).rects = {north};
        hallway(2).rects = {west, south};
        hallway(3).rects = {east};
        break;
      default: {
        hallway(1).rects = {north};
        hallway(2).rects = {west};
        hallway(3).rects = {east};
        const int pieces = p.hallways - 3;
        for (int i = 0; i < pieces; ++i) {
          const double x0 = c + (w - 2 * c) * i / pieces;
          const double x1 = c + (w - 2 * c) * (i + 1) / pieces;
          hallway(4 + i).rects = {Rect{x0, 0.0, x1, c}};
        }
      }
    }
  }

  // Offices along the north side of the main corridor, each with one door facing it.
  const double office_width = w / p.offices;
  const double door_lo_bound = loop ? c : 0.0;
  const double door_hi_bound = loop ? w - c : w;
  for (int i = 0; i < p.offices; ++i) {
    RoomPlan office{"office_" + std::to_string(i + 1), {}, {}, 140, {}};
    const double x0 = office_width * i;
    const double x1 = office_width * (i + 1);
    office.rects.push_back(Rect{x0, office_y0, x1, office_y0 + p.office_depth});
    const double lo = std::max(x0, door_lo_bound) + 0.3 + p.door_width / 2;
    const double hi = std::min(x1, door_hi_bound) - 0.3 - p.door_width / 2;
    double mid = 0.5 * (lo + hi);
    if (p.jitter) mid = rng.uniform(lo, hi);
    const Door door{true, office_y0, mid - p.door_width / 2, mid + p.door_width / 2};
    office.doors.push_back(door);
    const double desk_w = std::min(1.6, office_width - 1.0);
    const double cx = 0.5 * (x0 + x1);
    const double top = office_y0 + p.office_depth;
    office.desks.push_back(Rect{cx - desk_w / 2, top - 0.9, cx + desk_w / 2, top - 0.1});
    plans.push_back(office);

    // The matching gap in whichever hallway rectangle borders the door.
    for (auto& plan : plans) {
      if (!is_hallway(plan.name)) continue;
      for (const auto& r : plan.rects) {
        if (std::abs(r.y1 - office_y0) < 1e-9 && r.x0 < door.hi && r.x1 > door.lo) {
          plan.doors.push_back(door);
        }
      }
    }
  }

  std::sort(plans.begin(), plans.end(),
            [](const RoomPlan& a, const RoomPlan& b) { return a.name < b.name; });
  SceneSet scene;
  scene.area_name = "synthetic_" + std::to_string(seed);
  WorldBuilder builder(p, rng);
  for (const auto& plan : plans) scene.rooms.push_back(builder.build(plan, plans));
  return scene;
}

}  // namespace panav
