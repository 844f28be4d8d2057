#include "softpg/rng.hpp"

#include <cmath>
#include <numbers>

namespace softpg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t master_seed, Stream family,
                   std::uint64_t index) {
  std::uint64_t s = mix64(master_seed);
  s = mix64(s ^ static_cast<std::uint64_t>(family));
  s = mix64(s ^ index);
  return Rng(s);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniform_int(int n) {
  return static_cast<int>(
      (static_cast<unsigned __int128>(next_u64()) *
       static_cast<unsigned __int128>(n)) >> 64);
}

}  // namespace softpg
