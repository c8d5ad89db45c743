#include "tweedie/random.hpp"

#include <cmath>
#include <numbers>

namespace tweedie {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ v;
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::initializer_list<std::uint64_t> ids) {
  // FNV-1a over the label, then chained splitmix finalizers.
  std::uint64_t label_hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    label_hash ^= c;
    label_hash *= 0x100000001b3ULL;
  }
  std::uint64_t h = mix(master, label_hash);
  for (std::uint64_t id : ids) h = mix(h, id + 0x632be59bd9b4e019ULL);
  return mix(h, ids.size());
}

Stream::Stream(std::uint64_t key) {
  for (auto& word : state_) word = splitmix64(key);
}

Stream::result_type Stream::operator()() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Stream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Stream::uniform_open() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::below(std::uint64_t bound) {
  // Lemire's nearly-divisionless method.
  __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace tweedie
