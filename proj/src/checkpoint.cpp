#include "ifa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "ifa/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace ifa {

namespace {

constexpr char kMagic[4] = {'I', 'F', 'A', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("checkpoint: truncated file");
  return v;
}

void write_tensor(std::ostream& os, const std::string& name, const Matrix& m) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(os, m.rows());
  write_u64(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.flat().data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}

struct NamedTensor {
  std::string name;
  Matrix value;
};

NamedTensor read_tensor(std::istream& is) {
  NamedTensor t;
  const std::uint32_t len = read_u32(is);
  if (len > 4096) throw IoError("checkpoint: implausible tensor name length");
  t.name.resize(len);
  is.read(t.name.data(), len);
  const std::uint64_t rows = read_u64(is);
  const std::uint64_t cols = read_u64(is);
  if (rows * cols > (1ULL << 32)) throw IoError("checkpoint: implausible tensor size");
  t.value = Matrix(rows, cols);
  is.read(reinterpret_cast<char*>(t.value.flat().data()),
          static_cast<std::streamsize>(rows * cols * sizeof(double)));
  if (!is) throw IoError("checkpoint: truncated tensor data");
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, IfaModel& model, std::uint64_t step) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");

  ParamRefs refs = model.param_refs();
  os.write(kMagic, sizeof(kMagic));
  write_u64(os, model.config().hash());
  write_u64(os, step);
  write_u64(os, refs.size() + 1);

  const std::vector<double> enc = model.config().encode();
  Matrix cfg_tensor(1, enc.size());
  std::memcpy(cfg_tensor.flat().data(), enc.data(), enc.size() * sizeof(double));
  write_tensor(os, "__config__", cfg_tensor);

  for (const auto& np : refs) write_tensor(os, np.name, np.param->value);
  if (!os) throw IoError("checkpoint: write failed for '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");

  char magic[4];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint: bad magic in '" + path + "'");

  const std::uint64_t stored_hash = read_u64(is);
  const std::uint64_t step = read_u64(is);
  const std::uint64_t count = read_u64(is);
  if (count == 0) throw IoError("checkpoint: no tensors");

  NamedTensor cfg_tensor = read_tensor(is);
  if (cfg_tensor.name != "__config__")
    throw IoError("checkpoint: first tensor must be __config__");
  const ModelConfig cfg = ModelConfig::decode(cfg_tensor.value.flat());
  if (cfg.hash() != stored_hash)
    throw IoError("checkpoint: config hash mismatch (corrupt or incompatible file)");

  LoadedCheckpoint out;
  out.model = std::make_unique<IfaModel>(cfg, /*seed=*/0);
  out.step = step;

  ParamRefs refs = out.model->param_refs();
  if (count != refs.size() + 1)
    throw IoError("checkpoint: tensor count does not match the model layout");
  for (auto& np : refs) {
    NamedTensor t = read_tensor(is);
    if (t.name != np.name)
      throw IoError("checkpoint: expected tensor '" + np.name + "', found '" + t.name + "'");
    if (!t.value.same_shape(np.param->value))
      throw IoError("checkpoint: shape mismatch for tensor '" + t.name + "'");
    np.param->value = std::move(t.value);
  }
  return out;
}

}  // namespace ifa
