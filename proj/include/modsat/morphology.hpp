#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsat {

using Vec3 = Eigen::Vector3d;

enum class ModuleType : std::uint8_t { Empty = 0, Rigid = 1, Actuator = 2 };

/// Converts an integer code to a ModuleType, rejecting anything outside {0, 1, 2}.
ModuleType module_type_from_int(int code);

// Per-module constants: every module is a 1 kg cube with 0.1 m sides.
inline constexpr double kModuleMass = 1.0;
inline constexpr double kModuleLength = 0.1;
inline constexpr double kModuleWidth = 0.1;
inline constexpr double kModuleHeight = 0.1;

class MorphologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1-based grid coordinate (i = row, j = column, k = layer).
struct CellIndex {
  int i = 1;
  int j = 1;
  int k = 1;
  bool operator==(const CellIndex&) const = default;
};

/// Cubic grid of module types. Storage is row-major with i outermost and
/// k innermost; all public indexing is 1-based.
class Morphology {
 public:
  Morphology() = default;
  explicit Morphology(int dims);
  Morphology(int dims, std::vector<ModuleType> cells);

  static Morphology from_codes(int dims, std::span<const int> codes);
  static Morphology filled(int dims, ModuleType type);

  int dims() const { return dims_; }
  std::size_t size() const { return cells_.size(); }

  ModuleType at(CellIndex c) const { return cells_[flat_index(c)]; }
  void set(CellIndex c, ModuleType t) { cells_[flat_index(c)] = t; }
  ModuleType operator[](std::size_t flat) const { return cells_[flat]; }
  void set_flat(std::size_t flat, ModuleType t) { cells_.at(flat) = t; }

  std::size_t flat_index(CellIndex c) const;
  CellIndex cell_index(std::size_t flat) const;
  bool in_bounds(CellIndex c) const;
  bool occupied(CellIndex c) const { return at(c) != ModuleType::Empty; }

  const std::vector<ModuleType>& cells() const { return cells_; }
  std::vector<int> codes() const;

  int module_count() const;
  CellIndex center() const { return {(dims_ + 1) / 2, (dims_ + 1) / 2, (dims_ + 1) / 2}; }

  bool operator==(const Morphology&) const = default;

 private:
  int dims_ = 0;
  std::vector<ModuleType> cells_;
};

struct MassProperties {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();
  /// Diagonal body-frame inertia (Ix, Iy, Iz) about the centroid.
  Vec3 inertia = Vec3::Zero();
  /// Centroid-frame position of each cell, indexed by flat cell index
  /// (zero for empty cells).
  std::vector<Vec3> centroid_positions;
};

/// Reference-frame position of the center of cell c (origin at cell (1,1,1),
/// z decreasing with layer). Throws on out-of-range indices.
Vec3 module_position(CellIndex c, int dims);

Vec3 center_of_mass(const Morphology& m);

/// Diagonal inertia about the reference-frame axes through cell (1,1,1).
Vec3 inertia_reference_frame(const Morphology& m);

/// Mass, center of mass and diagonal centroidal inertia used by the dynamics.
MassProperties inertia_body_frame(const Morphology& m);

/// Centroidal products of inertia (Ixy, Ixz, Iyz), tensor convention
/// I_xy = -sum m x y. Diagnostic only; the dynamics treat these as zero.
Vec3 products_of_inertia(const Morphology& m);

bool is_connected(const Morphology& m);
int actuator_count(const Morphology& m);

/// Flat indices of the face-connected component containing `seed`
/// (empty if the seed cell is unoccupied).
std::vector<std::size_t> connected_component(const Morphology& m, std::size_t seed);

/// Repair applied after the design phase and when decoding genomes:
/// keep the component containing the center cell, or the largest component
/// if the center is empty, or restore a lone rigid center module if nothing
/// is occupied. Idempotent.
Morphology repair(const Morphology& m);

/// Layer-by-layer text rendering using '.', 'R', 'A'.
std::string render_layers(const Morphology& m);

}  // namespace modsat
