// SPDX-License-Identifier: Apache-2.0
#include "led/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "led/pgm.hpp"  // IoError
#include "led/rng.hpp"
#include "led/tensor.hpp"

namespace led {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t v = 0;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw IoError("checkpoint: truncated file " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError("checkpoint: truncated file " + path);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in, const std::string& path) {
  const std::uint64_t v = get_u64(in, path);
  double d = 0;
  std::memcpy(&d, &v, 8);
  return d;
}

std::string get_string(std::istream& in, const std::string& path) {
  const std::uint64_t len = get_u64(in, path);
  if (len > (1ull << 30)) throw IoError("checkpoint: implausible string length in " + path);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), static_cast<std::streamsize>(len)))
    throw IoError("checkpoint: truncated file " + path);
  return s;
}

void put_payload(std::ostream& out, const Eigen::ArrayXd& a) {
  for (Index i = 0; i < a.size(); ++i) put_f64(out, a[i]);
}

Eigen::ArrayXd get_payload(std::istream& in, Index n, const std::string& path) {
  Eigen::ArrayXd a(n);
  for (Index i = 0; i < n; ++i) a[i] = get_f64(in, path);
  return a;
}

CheckpointMeta read_meta(std::istream& in, const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "LEDF", 4) != 0)
    throw IoError("checkpoint: " + path + " is not a LEDF file");
  const std::uint32_t version = get_u32(in, path);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: " + path + " has format version " + std::to_string(version) +
                  ", expected " + std::to_string(kCheckpointVersion));
  CheckpointMeta meta;
  meta.digest = get_u64(in, path);
  // The digest is the semantic hash of the config, not a hash of the stored
  // text (the text also carries non-digested fields like the epoch budget);
  // consumers re-derive it from the parsed text and compare on load.
  meta.config_text = get_string(in, path);
  meta.epoch = get_u64(in, path);
  meta.rng_state = get_u64(in, path);
  return meta;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<NamedParam>& params, const AdamState& adam) {
  if (adam.m.size() != params.size() || adam.v.size() != params.size())
    throw std::invalid_argument("checkpoint: Adam state tracks " + std::to_string(adam.m.size()) +
                                " tensors, model has " + std::to_string(params.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path);
  out.write("LEDF", 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, meta.digest);
  put_u64(out, meta.config_text.size());
  out.write(meta.config_text.data(), static_cast<std::streamsize>(meta.config_text.size()));
  put_u64(out, meta.epoch);
  put_u64(out, meta.rng_state);
  put_u64(out, static_cast<std::uint64_t>(adam.t));
  put_u64(out, params.size());
  for (const NamedParam& p : params) {
    put_u64(out, p.name.size());
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.tensor->rank()));
    for (Index d : p.tensor->shape()) put_u64(out, static_cast<std::uint64_t>(d));
    put_payload(out, p.tensor->values());
  }
  for (const Eigen::ArrayXd& m : adam.m) put_payload(out, m);
  for (const Eigen::ArrayXd& v : adam.v) put_payload(out, v);
  if (!out) throw IoError("checkpoint: write failed: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, std::uint64_t expect_digest,
                               const std::vector<NamedParam>& params, AdamState& adam) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  CheckpointMeta meta = read_meta(in, path);
  if (expect_digest != 0 && meta.digest != expect_digest)
    throw IoError("checkpoint: " + path + " was written for config digest " +
                  std::to_string(meta.digest) + ", expected " + std::to_string(expect_digest));
  const std::uint64_t adam_t = get_u64(in, path);
  const std::uint64_t count = get_u64(in, path);
  if (count != params.size())
    throw IoError("checkpoint: " + path + " holds " + std::to_string(count) +
                  " tensors, model has " + std::to_string(params.size()));
  std::vector<Shape> shapes;
  shapes.reserve(params.size());
  for (const NamedParam& p : params) {
    const std::string name = get_string(in, path);
    if (name != p.name)
      throw IoError("checkpoint: " + path + ": tensor '" + name + "' where model expects '" +
                    p.name + "'");
    const std::uint32_t rank = get_u32(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<Index>(get_u64(in, path));
    if (shape != p.tensor->shape())
      throw IoError("checkpoint: " + path + ": tensor '" + name + "' has shape " +
                    shape_str(shape) + ", model expects " + shape_str(p.tensor->shape()));
    p.tensor->assign(get_payload(in, shape_size(shape), path));
    shapes.push_back(std::move(shape));
  }
  adam.t = static_cast<long>(adam_t);
  adam.m.clear();
  adam.v.clear();
  for (const Shape& s : shapes) adam.m.push_back(get_payload(in, shape_size(s), path));
  for (const Shape& s : shapes) adam.v.push_back(get_payload(in, shape_size(s), path));
  return meta;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  return read_meta(in, path);
}

}  // namespace led
