#include "panav/privacy_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include "panav/error.hpp"
#include "panav/image.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::string_view kFieldMagic = "PANAV-FIELD v1";

enum class State : std::uint8_t { kFar, kTrial, kKnown };

std::vector<std::size_t> source_indices(const GridGeometry& g, std::span<const Cell> sources) {
  if (sources.empty()) fail(ErrorCode::kEmptySources, "distance field needs at least one source");
  std::vector<std::size_t> out;
  out.reserve(sources.size());
  for (Cell c : sources) {
    if (!g.contains(c)) fail(ErrorCode::kInvalidArgument, "source cell outside the grid");
    out.push_back(g.index(c));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::string_view to_string(FieldMode mode) {
  return mode == FieldMode::kFarPeak ? "paper-eq5" : "risk-inverted";
}

std::optional<FieldMode> parse_field_mode(std::string_view token) {
  if (token == "paper-eq5") return FieldMode::kFarPeak;
  if (token == "risk-inverted") return FieldMode::kRiskInverted;
  return std::nullopt;
}

DistanceField fmm_distance(const TraversabilityMap& tra, std::span<const Cell> sources) {
  const GridGeometry& g = tra.geometry;
  const auto seeds = source_indices(g, sources);
  const std::size_t n = g.cell_count();

  DistanceField field{g, std::vector<double>(n, kInf)};
  std::vector<State> state(n, State::kFar);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> trial;

  auto known_value = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= g.width || y >= g.height) return kInf;
    const std::size_t i = g.index({x, y});
    return state[i] == State::kKnown ? field.values[i] : kInf;
  };
  auto update = [&](Cell c) {
    const std::size_t i = g.index(c);
    if (state[i] == State::kKnown || !tra.traversable[i]) return;
    double a = std::min(known_value(c.x - 1, c.y), known_value(c.x + 1, c.y));
    double b = std::min(known_value(c.x, c.y - 1), known_value(c.x, c.y + 1));
    if (a > b) std::swap(a, b);
    if (a == kInf) return;
    double u;
    if (b - a >= 1.0) {
      u = a + 1.0;
    } else {
      u = 0.5 * (a + b + std::sqrt(2.0 - (a - b) * (a - b)));
    }
    if (u < field.values[i]) {
      field.values[i] = u;
      state[i] = State::kTrial;
      trial.push({u, i});
    }
  };
  auto for_neighbors = [&](std::size_t i, auto&& fn) {
    const Cell c = g.cell_at(i);
    for (Cell d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
      const Cell v{c.x + d.x, c.y + d.y};
      if (g.contains(v)) fn(v);
    }
  };

  for (std::size_t i : seeds) {
    field.values[i] = 0.0;
    state[i] = State::kKnown;
  }
  // First ring is exact: a traversable 4-neighbor of a source is one cell away.
  std::vector<std::size_t> ring;
  for (std::size_t i : seeds) {
    for_neighbors(i, [&](Cell v) {
      const std::size_t vi = g.index(v);
      if (state[vi] != State::kKnown && tra.traversable[vi]) {
        field.values[vi] = 1.0;
        state[vi] = State::kKnown;
        ring.push_back(vi);
      }
    });
  }
  for (std::size_t i : ring) for_neighbors(i, update);

  while (!trial.empty()) {
    const auto [value, i] = trial.top();
    trial.pop();
    if (state[i] == State::kKnown || value > field.values[i]) continue;
    state[i] = State::kKnown;
    for_neighbors(i, update);
  }
  return field;
}

DistanceField exact_distance_oracle(const TraversabilityMap& tra, std::span<const Cell> sources) {
  const GridGeometry& g = tra.geometry;
  const auto seeds = source_indices(g, sources);
  DistanceField field{g, std::vector<double>(g.cell_count(), kInf)};
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const Cell c = g.cell_at(i);
    double best = kInf;
    for (std::size_t s : seeds) {
      const Cell sc = g.cell_at(s);
      const double dx = c.x - sc.x;
      const double dy = c.y - sc.y;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    field.values[i] = best;
  }
  return field;
}

std::vector<Cell> mask_sources(const RoomMask& mask) {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < mask.masked.size(); ++i) {
    if (mask.masked[i]) out.push_back(mask.geometry.cell_at(i));
  }
  return out;
}

PrivacyField gaussian_modulate(const DistanceField& d, double sigma_d, FieldMode mode) {
  if (!(sigma_d > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma_d must be positive");
  double mu = 0.0;
  for (double v : d.values) {
    if (std::isfinite(v)) mu = std::max(mu, v);
  }
  if (!(mu > 0.0)) fail(ErrorCode::kDegenerateField, "distance field has no finite positive value");

  PrivacyField field;
  field.geometry = d.geometry;
  field.mu = mu;
  field.sigma = mu / sigma_d;
  field.sigma_d = sigma_d;
  field.mode = mode;
  field.values.resize(d.values.size());
  const double two_sigma_sq = 2.0 * field.sigma * field.sigma;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const double v = d.values[i];
    if (!std::isfinite(v)) {
      field.values[i] = 0.0;
      continue;
    }
    const double offset = mode == FieldMode::kFarPeak ? v - mu : v;
    field.values[i] = std::exp(-(offset * offset) / two_sigma_sq);
  }
  return field;
}

RiskScore path_risk(const MetricPath& path, const PrivacyField& field) {
  RiskScore score{path.path_id, 0.0, path.world_length, path.cell_length};
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const Cell c = path.cells[i];
    if (!field.geometry.contains(c)) {
      fail(ErrorCode::kGeometryMismatch, "path cell outside the field grid");
    }
    if (i > 0 && c == path.cells[i - 1]) continue;
    score.risk += field.at(c);
  }
  return score;
}

void write_field(std::ostream& out, const GridGeometry& g, std::span<const double> values) {
  if (values.size() != g.cell_count()) fail(ErrorCode::kInvalidArgument, "field size mismatch");
  out << kFieldMagic << '\n'
      << g.width << ' ' << g.height << ' ' << text::format_double(g.resolution) << ' '
      << text::format_double(g.origin_x) << ' ' << text::format_double(g.origin_y) << '\n';
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int k = 0; k < 4; ++k) bytes[i * 4 + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DistanceField read_field(std::istream& in) {
  std::string magic;
  std::string dims;
  if (!std::getline(in, magic) || magic != kFieldMagic) fail(ErrorCode::kMalformedField, "missing header");
  if (!std::getline(in, dims)) fail(ErrorCode::kMalformedField, "missing dimensions");
  const auto f = text::split_ws(dims);
  if (f.size() != 5) fail(ErrorCode::kMalformedField, "dimension line needs 5 fields");
  const auto w = text::parse_int<int>(f[0]);
  const auto h = text::parse_int<int>(f[1]);
  const auto res = text::parse_double(f[2]);
  const auto ox = text::parse_double(f[3]);
  const auto oy = text::parse_double(f[4]);
  if (!w || !h || !res || !ox || !oy || *w < 1 || *h < 1) {
    fail(ErrorCode::kMalformedField, "bad dimension line");
  }
  DistanceField field{GridGeometry{*ox, *oy, *res, *w, *h}, {}};
  std::vector<unsigned char> bytes(field.geometry.cell_count() * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    fail(ErrorCode::kMalformedField, "truncated raster");
  }
  field.values.resize(field.geometry.cell_count());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[i * 4 + k]) << (8 * k);
    field.values[i] = std::bit_cast<float>(bits);
  }
  return field;
}

void write_field_file(const std::filesystem::path& file, const GridGeometry& geometry,
                      std::span<const double> values) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  write_field(out, geometry, values);
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

void write_field_heatmap_png(const std::filesystem::path& file, const PrivacyField& field) {
  const GridGeometry& g = field.geometry;
  RgbImage image(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) image.set(x, g.height - 1 - y, heat_color(field.at({x, y})));
  }
  write_bytes(file, encode_png(image));
}

}  // namespace panav
