// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sad/config.hpp"
#include "sad/error.hpp"

namespace sad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'A', 'D', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_str(std::string_view s) {
    put<std::uint64_t>(s.size());
    out_.append(s);
  }
  void put_doubles(const std::vector<double>& v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void get_doubles(std::vector<double>& v, std::size_t n) {
    need(n * sizeof(double));
    v.resize(n);
    std::memcpy(v.data(), in_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (n > in_.size() - pos_) throw IoError("checkpoint: truncated data");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_model(Writer& w, const char* name, const nets::ModelParams& params,
                 const AdamState& opt) {
  w.put_str(name);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put_str(p.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.shape.size()));
    for (auto d : p.shape) w.put<std::uint64_t>(d);
    w.put_doubles(p.value);
  }
  w.put<std::uint64_t>(opt.step);
  w.put<std::uint64_t>(opt.m.size());
  w.put_doubles(opt.m);
  w.put_doubles(opt.v);
}

void read_model(Reader& r, const char* name, nets::ModelParams& params, AdamState& opt) {
  const std::string got = r.get_str();
  if (got != name)
    throw IoError("checkpoint: expected model '" + std::string(name) + "', found '" + got +
                  "'");
  const auto n = r.get<std::uint32_t>();
  if (n != params.size())
    throw IoError("checkpoint: model '" + got + "' has an unexpected parameter count");
  for (auto& p : params) {
    const std::string pname = r.get_str();
    if (pname != p.name)
      throw IoError("checkpoint: parameter '" + pname + "' does not match '" + p.name + "'");
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (shape != p.shape) throw IoError("checkpoint: shape mismatch for " + got + "." + pname);
    r.get_doubles(p.value, p.size());
  }
  opt.step = r.get<std::uint64_t>();
  const auto m = static_cast<std::size_t>(r.get<std::uint64_t>());
  if (m != 0 && m != params.count())
    throw IoError("checkpoint: optimizer state size mismatch for " + got);
  r.get_doubles(opt.m, m);
  r.get_doubles(opt.v, m);
}

}  // namespace

ModelBundle ModelBundle::create(std::uint64_t seed, std::size_t bins) {
  nets::Generator::Options gopt;
  gopt.bins = bins;
  return ModelBundle{nets::Generator(gopt, derive_seed(seed, 1)),
                     nets::Splitter(derive_seed(seed, 2)),
                     nets::MetricDiscriminator(derive_seed(seed, 3)),
                     nets::MetricDiscriminator(derive_seed(seed, 4)),
                     nets::MetricDiscriminator(derive_seed(seed, 5)),
                     {}, {}, {}, {}, {}};
}

std::uint64_t ModelBundle::checksum() const {
  const std::uint64_t parts[5] = {generator.params().checksum(), splitter.params().checksum(),
                                  d_bak.params().checksum(), d_sig.params().checksum(),
                                  d_ovl.params().checksum()};
  return nets::fnv1a(parts, sizeof parts);
}

std::string serialize_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(c.config_hash);
  w.put<std::int32_t>(c.epoch);
  w.put<std::uint64_t>(c.models.generator.bins());
  w.put_str(c.rng_state);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.meta.size()));
  for (const auto& [k, v] : c.meta) {
    w.put_str(k);
    w.put_str(v);
  }
  write_model(w, "generator", c.models.generator.params(), c.models.opt_generator);
  write_model(w, "splitter", c.models.splitter.params(), c.models.opt_splitter);
  write_model(w, "d_bak", c.models.d_bak.params(), c.models.opt_bak);
  write_model(w, "d_sig", c.models.d_sig.params(), c.models.opt_sig);
  write_model(w, "d_ovl", c.models.d_ovl.params(), c.models.opt_ovl);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
    throw IoError("checkpoint: bad magic");
  if (r.get<std::uint32_t>() != kVersion) throw IoError("checkpoint: unsupported version");
  const auto hash = r.get<std::uint64_t>();
  const auto epoch = r.get<std::int32_t>();
  const auto bins = r.get<std::uint64_t>();
  if (bins < 2 || bins > (1u << 20)) throw IoError("checkpoint: implausible bin count");
  Checkpoint c{ModelBundle::create(0, static_cast<std::size_t>(bins)), epoch, hash, {}, {}};
  c.rng_state = r.get_str();
  const auto n_meta = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.get_str();
    c.meta[k] = r.get_str();
  }
  read_model(r, "generator", c.models.generator.params(), c.models.opt_generator);
  read_model(r, "splitter", c.models.splitter.params(), c.models.opt_splitter);
  read_model(r, "d_bak", c.models.d_bak.params(), c.models.opt_bak);
  read_model(r, "d_sig", c.models.d_sig.params(), c.models.opt_sig);
  read_model(r, "d_ovl", c.models.d_ovl.params(), c.models.opt_ovl);
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

std::string checkpoint_id(const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  return to_hex(nets::fnv1a(bytes.data(), bytes.size()));
}

}  // namespace sad
