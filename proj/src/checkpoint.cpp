#include "qodc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "qodc/errors.hpp"

namespace qodc {

namespace {

constexpr char kMagic[8] = {'Q', 'O', 'D', 'C', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }

  std::vector<std::uint8_t> bytes;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error("checkpoint: truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const auto n = static_cast<std::size_t>(ckpt.params.size());
  if (n != ckpt.spec.param_count() || static_cast<std::size_t>(ckpt.adam.m.size()) != n ||
      static_cast<std::size_t>(ckpt.adam.v.size()) != n) {
    throw InvalidArgument("checkpoint: parameter and optimizer sizes disagree with the network shape");
  }
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.spec.feature_dim));
  w.u32(static_cast<std::uint32_t>(ckpt.spec.action_dim));
  w.u32(static_cast<std::uint32_t>(ckpt.spec.hidden.size()));
  for (auto h : ckpt.spec.hidden) w.u32(static_cast<std::uint32_t>(h));
  w.f64(ckpt.spec.log_std_init);
  w.u64(n);
  for (double p : ckpt.params) w.f64(p);
  w.i64(ckpt.adam.step);
  for (double p : ckpt.adam.m) w.f64(p);
  for (double p : ckpt.adam.v) w.f64(p);
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.spec.feature_dim = r.u32();
  ckpt.spec.action_dim = r.u32();
  const auto layers = r.u32();
  ckpt.spec.hidden.resize(layers);
  for (auto& h : ckpt.spec.hidden) h = r.u32();
  ckpt.spec.log_std_init = r.f64();
  const auto n = r.u64();
  if (n != ckpt.spec.param_count()) throw Error("checkpoint: parameter count does not match dims");
  ckpt.params.resize(static_cast<long>(n));
  for (auto& p : ckpt.params) p = r.f64();
  ckpt.adam = AdamState(n);
  ckpt.adam.step = r.i64();
  for (auto& p : ckpt.adam.m) p = r.f64();
  for (auto& p : ckpt.adam.v) p = r.f64();
  if (!r.done()) throw Error("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace qodc
