#include "swarmflow/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "swarmflow/errors.hpp"

namespace swarmflow {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes little endian");

void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

std::size_t per_cell(int rank, int dim) {
  if (rank == 0) return 1;
  if (rank == 1) return static_cast<std::size_t>(dim);
  return static_cast<std::size_t>(dim * dim);
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const FieldSnapshot& snap) {
  const TorusGrid g = snap.grid();
  if (snap.values.size() != g.size() * per_cell(snap.rank, snap.dim))
    throw Error("write_snapshot: payload size does not match header");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write("SWFL", 4);
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(snap.dim));
  put_u32(out, static_cast<std::uint32_t>(snap.cells_per_axis));
  put_u32(out, static_cast<std::uint32_t>(snap.rank));
  out.write(reinterpret_cast<const char*>(snap.values.data()),
            static_cast<std::streamsize>(snap.values.size() * sizeof(double)));
  if (!out) throw Error("write failed: " + path.string());
}

FieldSnapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SWFL", 4) != 0) throw Error(path.string() + ": bad magic");
  const auto version = get_u32(in);
  if (version != kSnapshotVersion)
    throw Error(path.string() + ": unsupported version " + std::to_string(version));
  FieldSnapshot s;
  s.dim = static_cast<int>(get_u32(in));
  s.cells_per_axis = static_cast<int>(get_u32(in));
  s.rank = static_cast<int>(get_u32(in));
  if (!in || s.rank < 0 || s.rank > 2) throw Error(path.string() + ": bad header");
  const TorusGrid g = s.grid();
  s.values.resize(g.size() * per_cell(s.rank, s.dim));
  in.read(reinterpret_cast<char*>(s.values.data()),
          static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  if (!in) throw Error(path.string() + ": truncated payload");
  return s;
}

FieldSnapshot to_snapshot(const ScalarField& f) {
  FieldSnapshot s{f.grid().dim(), f.grid().cells_per_axis(), 0, {}};
  s.values.assign(f.values().begin(), f.values().end());
  return s;
}

FieldSnapshot to_snapshot(const VectorField& f) {
  const int dim = f.dim();
  FieldSnapshot s{dim, f.grid().cells_per_axis(), 1, {}};
  s.values.resize(f.size() * dim);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (int d = 0; d < dim; ++d) s.values[i * dim + d] = f.component(d)[i];
  return s;
}

FieldSnapshot to_snapshot(const SymTensorField& f) {
  const int dim = f.dim();
  FieldSnapshot s{dim, f.grid().cells_per_axis(), 2, {}};
  s.values.resize(f.grid().size() * dim * dim);
  for (std::size_t c = 0; c < f.grid().size(); ++c)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s.values[(c * dim + i) * dim + j] = f.get(c, i, j);
  return s;
}

ScalarField scalar_from_snapshot(const FieldSnapshot& s) {
  if (s.rank != 0) throw Error("snapshot is not a scalar field");
  return ScalarField(s.grid(), s.values);
}

VectorField vector_from_snapshot(const FieldSnapshot& s) {
  if (s.rank != 1) throw Error("snapshot is not a vector field");
  VectorField v(s.grid());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int d = 0; d < s.dim; ++d) v.component(d)[i] = s.values[i * s.dim + d];
  return v;
}

SymTensorField tensor_from_snapshot(const FieldSnapshot& s, bool trace_free) {
  if (s.rank != 2) throw Error("snapshot is not a tensor field");
  SymTensorField t(s.grid(), trace_free);
  const int dim = s.dim;
  for (std::size_t c = 0; c < s.grid().size(); ++c) {
    Mat m{};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i][j] = s.values[(c * dim + i) * dim + j];
    t.set_matrix(c, m);
  }
  return t;
}

}  // namespace swarmflow
