#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "swarmflow/torus_grid.hpp"

namespace swarmflow {

/// Binary snapshot: "SWFL", u32 version, u32 N, u32 n_g, u32 rank, then float64 LE.
/// Cells row-major (axis 0 slowest); per cell 1, N or N*N values for rank 0, 1, 2.
struct FieldSnapshot {
  int dim = 0;
  int cells_per_axis = 0;
  int rank = 0;
  std::vector<double> values;

  TorusGrid grid() const { return TorusGrid(dim, cells_per_axis); }
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::filesystem::path& path, const FieldSnapshot& snap);
FieldSnapshot read_snapshot(const std::filesystem::path& path);

FieldSnapshot to_snapshot(const ScalarField& f);
FieldSnapshot to_snapshot(const VectorField& f);
FieldSnapshot to_snapshot(const SymTensorField& f);

ScalarField scalar_from_snapshot(const FieldSnapshot& s);
VectorField vector_from_snapshot(const FieldSnapshot& s);
/// Symmetrises the stored matrix.
SymTensorField tensor_from_snapshot(const FieldSnapshot& s, bool trace_free);

}  // namespace swarmflow
