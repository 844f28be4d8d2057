#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "softpg/harness.hpp"

namespace softpg {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'G', 'P', 'O', 'L', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  __builtin_memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("policy file: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("policy file: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  __builtin_memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_policy(const std::string& path, const Policy& policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out.write(kMagic, 8);
  if (policy.discrete()) {
    const CategoricalHead& head = policy.categorical();
    put_u32(out, 1);  // head kind
    put_u32(out, 0);  // sigma scheme (none)
    put_u32(out, 0);  // squashed (no)
    put_u32(out, static_cast<std::uint32_t>(head.n_actions()));
    put_u32(out, 0);  // act_dim
    const auto& sizes = head.net().layer_sizes();
    put_u32(out, static_cast<std::uint32_t>(sizes.size()));
    for (int s : sizes) put_u32(out, static_cast<std::uint32_t>(s));
  } else {
    const GaussianHead& head = policy.gaussian();
    put_u32(out, 0);
    put_u32(out, static_cast<std::uint32_t>(head.scheme()));
    put_u32(out, head.squashed() ? 1 : 0);
    put_u32(out, 0);
    put_u32(out, static_cast<std::uint32_t>(head.act_dim()));
    const auto& sizes = head.net().layer_sizes();
    put_u32(out, static_cast<std::uint32_t>(sizes.size()));
    for (int s : sizes) put_u32(out, static_cast<std::uint32_t>(s));
    for (int d = 0; d < head.act_dim(); ++d) put_f64(out, head.act_low()[d]);
    for (int d = 0; d < head.act_dim(); ++d) put_f64(out, head.act_high()[d]);
  }
  const Eigen::VectorXd flat = policy.flatten();
  put_u64(out, static_cast<std::uint64_t>(flat.size()));
  for (long i = 0; i < flat.size(); ++i) put_f64(out, flat[i]);
  if (!out) throw std::runtime_error("policy file: write failed: " + path);
}

Policy load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error("policy file: bad magic: " + path);
  const std::uint32_t kind = get_u32(in);
  const std::uint32_t scheme = get_u32(in);
  const std::uint32_t squashed = get_u32(in);
  const std::uint32_t n_actions = get_u32(in);
  const std::uint32_t act_dim = get_u32(in);
  const std::uint32_t n_sizes = get_u32(in);
  if (n_sizes < 2 || n_sizes > 64)
    throw std::runtime_error("policy file: bad layer count");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(get_u32(in));
  std::vector<int> hidden(sizes.begin() + 1, sizes.end() - 1);

  Rng scratch(0);  // parameters are overwritten below
  if (kind == 1) {
    CategoricalHead head(sizes.front(), static_cast<int>(n_actions), hidden,
                         scratch);
    const std::uint64_t count = get_u64(in);
    if (count != static_cast<std::uint64_t>(head.param_count()))
      throw std::runtime_error("policy file: parameter count mismatch");
    Eigen::VectorXd flat(count);
    for (std::uint64_t i = 0; i < count; ++i) flat[i] = get_f64(in);
    head.set_from_flat(flat);
    return Policy(std::move(head));
  }
  if (kind != 0) throw std::runtime_error("policy file: unknown head kind");
  if (scheme < 1 || scheme > 4)
    throw std::runtime_error("policy file: bad sigma scheme");
  Eigen::VectorXd low(act_dim), high(act_dim);
  for (std::uint32_t d = 0; d < act_dim; ++d) low[d] = get_f64(in);
  for (std::uint32_t d = 0; d < act_dim; ++d) high[d] = get_f64(in);
  GaussianHead head(sizes.front(), static_cast<int>(act_dim), hidden,
                    static_cast<SigmaScheme>(scheme), squashed != 0, low, high,
                    scratch);
  const std::uint64_t count = get_u64(in);
  if (count != static_cast<std::uint64_t>(head.param_count()))
    throw std::runtime_error("policy file: parameter count mismatch");
  Eigen::VectorXd flat(count);
  for (std::uint64_t i = 0; i < count; ++i) flat[i] = get_f64(in);
  head.set_from_flat(flat);
  return Policy(std::move(head));
}

}  // namespace softpg
