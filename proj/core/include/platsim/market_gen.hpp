#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "platsim/model.hpp"

namespace platsim {

enum class StructureKind { uniform, core_and_niche, two_core };

const char* to_string(StructureKind kind);
std::optional<StructureKind> parse_structure_kind(std::string_view name);

/// Spatial distribution of agents in the latent space.
struct MarketStructure {
  struct Core {
    LatentPoint mean;
    double sigma = 0.0;
  };

  StructureKind kind = StructureKind::uniform;
  std::vector<Core> cores;  // empty for uniform

  static MarketStructure uniform();
  static MarketStructure core_and_niche();
  static MarketStructure two_core();
  static MarketStructure of(StructureKind kind);
};

struct SampledMarket {
  std::vector<BuyerSpec> buyers;
  std::vector<SellerSpec> sellers;
  // Index of the core each agent was drawn from (0 for uniform markets).
  std::vector<int> buyer_core;
  std::vector<int> seller_core;
};

/// Draws agent locations, cost fractions and budgets. Buyers get an empty
/// known-seller set; see sample_knowledge.
///
/// For multi-core structures the first ceil(n/2) agents of each side are drawn
/// from the first core. Truncated Gaussians use rejection sampling and throw
/// std::runtime_error after 10^6 rejected draws.
SampledMarket sample_market(const MarketStructure& structure, int n_buyers, int n_sellers, std::uint64_t seed,
                            int arrivals_per_epoch = 10, double query_variance = 0.02);

class KnowledgeMatrix {
 public:
  KnowledgeMatrix() = default;
  KnowledgeMatrix(int n_buyers, int n_sellers);

  int n_buyers() const { return n_buyers_; }
  int n_sellers() const { return n_sellers_; }
  bool known(AgentId buyer, AgentId seller) const;
  void set(AgentId buyer, AgentId seller, bool value);
  std::vector<AgentId> known_by(AgentId buyer) const;
  double density() const;

 private:
  int n_buyers_ = 0;
  int n_sellers_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Entry (b,s) is Bern(rho), i.i.d. Draws are made in row-major order from one
/// uniform stream, so for a fixed seed the known sets are nested in rho.
KnowledgeMatrix sample_knowledge(int n_buyers, int n_sellers, double rho, std::uint64_t seed);

enum class ShockStage { warm_up, pre, shock, post };

const char* to_string(ShockStage stage);

/// World friction for epochs 1..K (index 0 is epoch 1).
struct ShockSchedule {
  std::vector<double> frictions;
  std::vector<ShockStage> stages;
  double intensity = 0.0;

  int epochs() const { return static_cast<int>(frictions.size()); }
};

/// Pre/post windows at `base_friction`; shock epochs are intensity * Lognormal(0, 0.5)
/// with intensity ~ U[intensity_min, intensity_max]. A non-positive draw is
/// replaced by `base_friction`.
ShockSchedule sample_shock_schedule(int epochs, int pre, int post, double intensity_min, double intensity_max,
                                    double base_friction, std::uint64_t seed);

/// Every epoch at one friction, labelled pre-shock.
ShockSchedule constant_schedule(int epochs, double friction);

enum class SellerClass { core, niche, cheap, other };

const char* to_string(SellerClass c);

struct SellerClassFlags {
  bool core = false;
  bool niche = false;
  bool cheap = false;
};

struct SellerClassOptions {
  // When set, "cheap" means price below this cutoff instead of the lower quartile.
  std::optional<double> cheap_price_cutoff;
};

SellerClassFlags seller_class_flags(const SellerSpec& seller, const MarketStructure& structure,
                                    std::span<const BuyerSpec> buyers, std::span<const SellerSpec> sellers,
                                    const SellerClassOptions& options = {});

/// Reporting label; cheap takes precedence over core/niche.
SellerClass seller_class(const SellerSpec& seller, const MarketStructure& structure, std::span<const BuyerSpec> buyers,
                         std::span<const SellerSpec> sellers, const SellerClassOptions& options = {});

}  // namespace platsim
