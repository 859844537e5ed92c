#include "modsat/morphology.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <sstream>

namespace modsat {

namespace {

// Own-axis inertia of one cuboid module; all three axes use the same
// expression for the cube modules used here.
constexpr double kSelfInertia =
    kModuleMass * (kModuleLength * kModuleLength + kModuleWidth * kModuleWidth) / 12.0;

Vec3 axis_inertia(const Vec3& p) {
  return {kSelfInertia + kModuleMass * (p.y() * p.y() + p.z() * p.z()),
          kSelfInertia + kModuleMass * (p.x() * p.x() + p.z() * p.z()),
          kSelfInertia + kModuleMass * (p.x() * p.x() + p.y() * p.y())};
}

void require_modules(const Morphology& m) {
  if (m.module_count() == 0) throw MorphologyError("no modules");
}

constexpr std::array<std::array<int, 3>, 6> kFaceOffsets{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

}  // namespace

ModuleType module_type_from_int(int code) {
  if (code < 0 || code > 2) {
    throw MorphologyError("invalid module type code " + std::to_string(code));
  }
  return static_cast<ModuleType>(code);
}

Morphology::Morphology(int dims) : dims_(dims) {
  if (dims < 1) throw MorphologyError("grid dims must be positive");
  cells_.assign(static_cast<std::size_t>(dims) * dims * dims, ModuleType::Empty);
}

Morphology::Morphology(int dims, std::vector<ModuleType> cells) : dims_(dims), cells_(std::move(cells)) {
  if (dims < 1) throw MorphologyError("grid dims must be positive");
  if (cells_.size() != static_cast<std::size_t>(dims) * dims * dims) {
    throw MorphologyError("cell count does not match dims^3");
  }
}

Morphology Morphology::from_codes(int dims, std::span<const int> codes) {
  std::vector<ModuleType> cells;
  cells.reserve(codes.size());
  for (int c : codes) cells.push_back(module_type_from_int(c));
  return Morphology(dims, std::move(cells));
}

Morphology Morphology::filled(int dims, ModuleType type) {
  Morphology m(dims);
  std::fill(m.cells_.begin(), m.cells_.end(), type);
  return m;
}

bool Morphology::in_bounds(CellIndex c) const {
  return c.i >= 1 && c.i <= dims_ && c.j >= 1 && c.j <= dims_ && c.k >= 1 && c.k <= dims_;
}

std::size_t Morphology::flat_index(CellIndex c) const {
  if (!in_bounds(c)) throw MorphologyError("cell index out of range");
  return (static_cast<std::size_t>(c.i - 1) * dims_ + (c.j - 1)) * dims_ + (c.k - 1);
}

CellIndex Morphology::cell_index(std::size_t flat) const {
  const auto d = static_cast<std::size_t>(dims_);
  return {static_cast<int>(flat / (d * d)) + 1, static_cast<int>((flat / d) % d) + 1,
          static_cast<int>(flat % d) + 1};
}

std::vector<int> Morphology::codes() const {
  std::vector<int> out;
  out.reserve(cells_.size());
  for (auto t : cells_) out.push_back(static_cast<int>(t));
  return out;
}

int Morphology::module_count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(),
                                        [](ModuleType t) { return t != ModuleType::Empty; }));
}

Vec3 module_position(CellIndex c, int dims) {
  if (c.i < 1 || c.i > dims || c.j < 1 || c.j > dims || c.k < 1 || c.k > dims) {
    throw MorphologyError("cell index out of range");
  }
  return {(c.i - 1) * kModuleHeight, (c.j - 1) * kModuleLength, -(c.k - 1) * kModuleWidth};
}

Vec3 center_of_mass(const Morphology& m) {
  require_modules(m);
  Vec3 sum = Vec3::Zero();
  for (std::size_t f = 0; f < m.size(); ++f) {
    if (m[f] != ModuleType::Empty) sum += module_position(m.cell_index(f), m.dims());
  }
  return sum / m.module_count();
}

Vec3 inertia_reference_frame(const Morphology& m) {
  require_modules(m);
  Vec3 total = Vec3::Zero();
  for (std::size_t f = 0; f < m.size(); ++f) {
    if (m[f] != ModuleType::Empty) total += axis_inertia(module_position(m.cell_index(f), m.dims()));
  }
  return total;
}

MassProperties inertia_body_frame(const Morphology& m) {
  MassProperties props;
  props.com = center_of_mass(m);
  props.mass = kModuleMass * m.module_count();
  props.centroid_positions.assign(m.size(), Vec3::Zero());
  for (std::size_t f = 0; f < m.size(); ++f) {
    if (m[f] == ModuleType::Empty) continue;
    const Vec3 p = module_position(m.cell_index(f), m.dims()) - props.com;
    props.centroid_positions[f] = p;
    props.inertia += axis_inertia(p);
  }
  return props;
}

Vec3 products_of_inertia(const Morphology& m) {
  const Vec3 com = center_of_mass(m);
  Vec3 out = Vec3::Zero();
  for (std::size_t f = 0; f < m.size(); ++f) {
    if (m[f] == ModuleType::Empty) continue;
    const Vec3 p = module_position(m.cell_index(f), m.dims()) - com;
    out -= kModuleMass * Vec3(p.x() * p.y(), p.x() * p.z(), p.y() * p.z());
  }
  return out;
}

std::vector<std::size_t> connected_component(const Morphology& m, std::size_t seed) {
  std::vector<std::size_t> out;
  if (seed >= m.size() || m[seed] == ModuleType::Empty) return out;
  std::vector<bool> seen(m.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(seed);
  seen[seed] = true;
  while (!frontier.empty()) {
    const auto f = frontier.front();
    frontier.pop();
    out.push_back(f);
    const CellIndex c = m.cell_index(f);
    for (const auto& d : kFaceOffsets) {
      const CellIndex n{c.i + d[0], c.j + d[1], c.k + d[2]};
      if (!m.in_bounds(n)) continue;
      const auto nf = m.flat_index(n);
      if (!seen[nf] && m[nf] != ModuleType::Empty) {
        seen[nf] = true;
        frontier.push(nf);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_connected(const Morphology& m) {
  const int n = m.module_count();
  if (n == 0) return true;
  const auto first = static_cast<std::size_t>(
      std::find_if(m.cells().begin(), m.cells().end(), [](ModuleType t) { return t != ModuleType::Empty; }) -
      m.cells().begin());
  return static_cast<int>(connected_component(m, first).size()) == n;
}

int actuator_count(const Morphology& m) {
  return static_cast<int>(
      std::count(m.cells().begin(), m.cells().end(), ModuleType::Actuator));
}

Morphology repair(const Morphology& m) {
  const std::size_t seed = m.flat_index(m.center());
  std::vector<std::size_t> keep = connected_component(m, seed);
  if (keep.empty()) {
    // Center is empty: fall back to the largest component (lowest index wins ties).
    std::vector<bool> visited(m.size(), false);
    for (std::size_t f = 0; f < m.size(); ++f) {
      if (visited[f] || m[f] == ModuleType::Empty) continue;
      auto comp = connected_component(m, f);
      for (auto c : comp) visited[c] = true;
      if (comp.size() > keep.size()) keep = std::move(comp);
    }
  }
  Morphology out(m.dims());
  if (keep.empty()) {
    out.set_flat(seed, ModuleType::Rigid);
    return out;
  }
  for (auto f : keep) out.set_flat(f, m[f]);
  return out;
}

std::string render_layers(const Morphology& m) {
  std::ostringstream os;
  for (int k = 1; k <= m.dims(); ++k) {
    os << "layer " << k << "\n";
    for (int i = 1; i <= m.dims(); ++i) {
      for (int j = 1; j <= m.dims(); ++j) {
        switch (m.at({i, j, k})) {
          case ModuleType::Empty: os << '.'; break;
          case ModuleType::Rigid: os << 'R'; break;
          case ModuleType::Actuator: os << 'A'; break;
        }
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace modsat
