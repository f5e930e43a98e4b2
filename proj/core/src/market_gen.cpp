#include "platsim/market_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "platsim/seeds.hpp"

namespace platsim {

const char* to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::core_and_niche: return "core_and_niche";
    case StructureKind::two_core: return "two_core";
    case StructureKind::uniform: break;
  }
  return "uniform";
}

std::optional<StructureKind> parse_structure_kind(std::string_view name) {
  if (name == "uniform") return StructureKind::uniform;
  if (name == "core_and_niche") return StructureKind::core_and_niche;
  if (name == "two_core") return StructureKind::two_core;
  return std::nullopt;
}

MarketStructure MarketStructure::uniform() { return {StructureKind::uniform, {}}; }

MarketStructure MarketStructure::core_and_niche() {
  return {StructureKind::core_and_niche, {{{0.5, 0.4}, 0.2}}};
}

MarketStructure MarketStructure::two_core() {
  return {StructureKind::two_core, {{{0.7, 0.3}, 0.17}, {{0.3, 0.7}, 0.17}}};
}

MarketStructure MarketStructure::of(StructureKind kind) {
  switch (kind) {
    case StructureKind::core_and_niche: return core_and_niche();
    case StructureKind::two_core: return two_core();
    case StructureKind::uniform: break;
  }
  return uniform();
}

namespace {

constexpr long kRejectionGuard = 1'000'000;

LatentPoint truncated_gaussian(const MarketStructure::Core& core, Rng& rng) {
  std::normal_distribution<double> n0(core.mean.taste, core.sigma);
  std::normal_distribution<double> n1(core.mean.price_level, core.sigma);
  for (long i = 0; i < kRejectionGuard; ++i) {
    const LatentPoint p{n0(rng), n1(rng)};
    if (p.taste >= 0.0 && p.taste <= 1.0 && p.price_level >= 0.0 && p.price_level <= 1.0) return p;
  }
  throw std::runtime_error("truncated Gaussian sampler exceeded its rejection guard");
}

// Draws n locations; returns core labels alongside.
std::vector<LatentPoint> draw_locations(const MarketStructure& structure, int n, Rng& rng, std::vector<int>& labels) {
  std::vector<LatentPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  labels.assign(static_cast<std::size_t>(n), 0);
  if (structure.cores.empty()) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      const double a = u(rng);
      const double b = u(rng);
      out.push_back({a, b});
    }
    return out;
  }
  const int n_cores = static_cast<int>(structure.cores.size());
  // Contiguous blocks; earlier cores take the remainder.
  const int base = n / n_cores;
  const int extra = n % n_cores;
  int idx = 0;
  for (int c = 0; c < n_cores; ++c) {
    const int count = base + (c < extra ? 1 : 0);
    for (int j = 0; j < count; ++j, ++idx) {
      labels[static_cast<std::size_t>(idx)] = c;
      out.push_back(truncated_gaussian(structure.cores[static_cast<std::size_t>(c)], rng));
    }
  }
  return out;
}

}  // namespace

SampledMarket sample_market(const MarketStructure& structure, int n_buyers, int n_sellers, std::uint64_t seed,
                            int arrivals_per_epoch, double query_variance) {
  if (n_buyers < 1 || n_sellers < 1) {
    throw std::invalid_argument("sample_market: need at least one buyer and one seller");
  }
  if (arrivals_per_epoch < 0 || query_variance < 0.0) {
    throw std::invalid_argument("sample_market: arrivals and query variance must be nonnegative");
  }
  SampledMarket m;
  Rng buyer_rng(derive_seed(seed, "buyers"));
  Rng seller_rng(derive_seed(seed, "sellers"));

  const auto buyer_locs = draw_locations(structure, n_buyers, buyer_rng, m.buyer_core);
  const double stddev = std::sqrt(query_variance);
  m.buyers.reserve(buyer_locs.size());
  for (int b = 0; b < n_buyers; ++b) {
    BuyerSpec spec;
    spec.id = b;
    spec.location = buyer_locs[static_cast<std::size_t>(b)];
    spec.query_stddev = stddev;
    spec.epoch_budget = spec.location.price_level * arrivals_per_epoch;
    m.buyers.push_back(std::move(spec));
  }

  const auto seller_locs = draw_locations(structure, n_sellers, seller_rng, m.seller_core);
  std::uniform_real_distribution<double> cost(0.2, 0.4);
  m.sellers.reserve(seller_locs.size());
  for (int s = 0; s < n_sellers; ++s) {
    SellerSpec spec;
    spec.id = s;
    spec.location = seller_locs[static_cast<std::size_t>(s)];
    spec.cost_fraction = cost(seller_rng);
    spec.shutdown_threshold = 2;
    m.sellers.push_back(spec);
  }
  return m;
}

KnowledgeMatrix::KnowledgeMatrix(int n_buyers, int n_sellers)
    : n_buyers_(n_buyers), n_sellers_(n_sellers),
      cells_(static_cast<std::size_t>(n_buyers) * static_cast<std::size_t>(n_sellers), 0) {}

bool KnowledgeMatrix::known(AgentId buyer, AgentId seller) const {
  return cells_.at(static_cast<std::size_t>(buyer) * static_cast<std::size_t>(n_sellers_) +
                   static_cast<std::size_t>(seller)) != 0;
}

void KnowledgeMatrix::set(AgentId buyer, AgentId seller, bool value) {
  cells_.at(static_cast<std::size_t>(buyer) * static_cast<std::size_t>(n_sellers_) + static_cast<std::size_t>(seller)) =
      value ? 1 : 0;
}

std::vector<AgentId> KnowledgeMatrix::known_by(AgentId buyer) const {
  std::vector<AgentId> out;
  for (AgentId s = 0; s < n_sellers_; ++s) {
    if (known(buyer, s)) out.push_back(s);
  }
  return out;
}

double KnowledgeMatrix::density() const {
  if (cells_.empty()) return 0.0;
  std::size_t on = 0;
  for (auto c : cells_) on += c;
  return static_cast<double>(on) / static_cast<double>(cells_.size());
}

KnowledgeMatrix sample_knowledge(int n_buyers, int n_sellers, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("sample_knowledge: rho must lie in [0,1]");
  if (n_buyers < 0 || n_sellers < 0) throw std::invalid_argument("sample_knowledge: negative dimensions");
  KnowledgeMatrix k(n_buyers, n_sellers);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (AgentId b = 0; b < n_buyers; ++b) {
    for (AgentId s = 0; s < n_sellers; ++s) k.set(b, s, u(rng) < rho);
  }
  return k;
}

const char* to_string(ShockStage stage) {
  switch (stage) {
    case ShockStage::warm_up: return "warm_up";
    case ShockStage::shock: return "shock";
    case ShockStage::post: return "post";
    case ShockStage::pre: break;
  }
  return "pre";
}

ShockSchedule sample_shock_schedule(int epochs, int pre, int post, double intensity_min, double intensity_max,
                                    double base_friction, std::uint64_t seed) {
  if (pre < 3 || post < 3 || pre + post >= epochs) {
    throw std::invalid_argument("sample_shock_schedule: need pre >= 3, post >= 3 and pre + post < K (got K=" +
                                std::to_string(epochs) + ", pre=" + std::to_string(pre) +
                                ", post=" + std::to_string(post) + ")");
  }
  if (!(intensity_min <= intensity_max) || intensity_min < 0.0) {
    throw std::invalid_argument("sample_shock_schedule: need 0 <= I_min <= I_max");
  }
  if (!(base_friction > 0.0)) throw std::invalid_argument("sample_shock_schedule: base friction must be positive");

  Rng rng(seed);
  ShockSchedule out;
  out.intensity = intensity_min == intensity_max
                      ? intensity_min
                      : std::uniform_real_distribution<double>(intensity_min, intensity_max)(rng);
  std::lognormal_distribution<double> shape(0.0, 0.5);
  out.frictions.reserve(static_cast<std::size_t>(epochs));
  for (int k = 0; k < epochs; ++k) {
    if (k < pre) {
      out.frictions.push_back(base_friction);
      out.stages.push_back(ShockStage::pre);
    } else if (k >= epochs - post) {
      out.frictions.push_back(base_friction);
      out.stages.push_back(ShockStage::post);
    } else {
      const double mu = out.intensity * shape(rng);
      out.frictions.push_back(mu > 0.0 ? mu : base_friction);
      out.stages.push_back(ShockStage::shock);
    }
  }
  return out;
}

ShockSchedule constant_schedule(int epochs, double friction) {
  if (epochs < 1) throw std::invalid_argument("constant_schedule: need at least one epoch");
  if (!(friction >= 0.0)) throw std::invalid_argument("constant_schedule: friction must be >= 0");
  ShockSchedule out;
  out.frictions.assign(static_cast<std::size_t>(epochs), friction);
  out.stages.assign(static_cast<std::size_t>(epochs), ShockStage::pre);
  return out;
}

const char* to_string(SellerClass c) {
  switch (c) {
    case SellerClass::core: return "core";
    case SellerClass::niche: return "niche";
    case SellerClass::cheap: return "cheap";
    case SellerClass::other: break;
  }
  return "other";
}

namespace {

double lower_quartile(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double pos = 0.25 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

SellerClassFlags seller_class_flags(const SellerSpec& seller, const MarketStructure& structure,
                                    std::span<const BuyerSpec> buyers, std::span<const SellerSpec> sellers,
                                    const SellerClassOptions& options) {
  SellerClassFlags f;
  if (options.cheap_price_cutoff) {
    f.cheap = seller.price() < *options.cheap_price_cutoff;
  } else if (!sellers.empty()) {
    std::vector<double> prices;
    prices.reserve(sellers.size());
    for (const auto& s : sellers) prices.push_back(s.price());
    f.cheap = seller.price() <= lower_quartile(std::move(prices));
  }
  if (structure.cores.empty()) return f;

  const MarketStructure::Core* center = &structure.cores.front();
  for (const auto& c : structure.cores) {
    if (euclidean_distance(seller.location, c.mean) < euclidean_distance(seller.location, center->mean)) center = &c;
  }
  const double sigma = center->sigma;
  const double from_center = euclidean_distance(seller.location, center->mean);
  int nearby = 0;
  for (const auto& b : buyers) {
    if (euclidean_distance(b.location, seller.location) <= sigma) ++nearby;
  }
  f.core = from_center <= sigma && nearby >= 2;
  f.niche = from_center > 2.0 * sigma && nearby <= 1;
  return f;
}

SellerClass seller_class(const SellerSpec& seller, const MarketStructure& structure, std::span<const BuyerSpec> buyers,
                         std::span<const SellerSpec> sellers, const SellerClassOptions& options) {
  const auto f = seller_class_flags(seller, structure, buyers, sellers, options);
  if (f.cheap) return SellerClass::cheap;
  if (f.core) return SellerClass::core;
  if (f.niche) return SellerClass::niche;
  return SellerClass::other;
}

}  // namespace platsim
