#include "platsim/seeds.hpp"

namespace platsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root ^ splitmix64(h));
}

SeedSet SeedSet::from_root(std::uint64_t root) {
  return {derive_seed(root, "market"), derive_seed(root, "knowledge"), derive_seed(root, "shock"),
          derive_seed(root, "episode")};
}

}  // namespace platsim
