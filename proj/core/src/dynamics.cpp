#include "platsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace platsim {

void Market::validate() const {
  const int ns = n_sellers();
  for (int b = 0; b < n_buyers(); ++b) {
    const auto& spec = buyers[static_cast<std::size_t>(b)];
    if (spec.id != b) throw std::invalid_argument("market: buyer ids must be dense and ascending");
    if (spec.query_stddev < 0.0 || spec.epoch_budget < 0.0) {
      throw std::invalid_argument("market: buyer " + std::to_string(b) + " has negative stddev or budget");
    }
    for (AgentId s : spec.known_sellers) {
      if (s < 0 || s >= ns) throw std::invalid_argument("market: buyer " + std::to_string(b) + " knows unknown seller");
    }
    if (!std::is_sorted(spec.known_sellers.begin(), spec.known_sellers.end())) {
      throw std::invalid_argument("market: known sellers must be ascending");
    }
  }
  for (int s = 0; s < ns; ++s) {
    const auto& spec = sellers[static_cast<std::size_t>(s)];
    if (spec.id != s) throw std::invalid_argument("market: seller ids must be dense and ascending");
    if (spec.cost_fraction < 0.0 || spec.cost_fraction >= 1.0 || spec.shutdown_threshold < 1 || spec.fixed_cost < 0.0) {
      throw std::invalid_argument("market: seller " + std::to_string(s) + " has invalid attributes");
    }
  }
}

MarketState MarketState::initial(const Market& market) {
  MarketState st;
  st.buyers.resize(market.buyers.size());
  st.sellers.resize(market.sellers.size());
  for (std::size_t b = 0; b < market.buyers.size(); ++b) st.buyers[b].budget_remaining = market.buyers[b].epoch_budget;
  return st;
}

std::vector<AgentId> MarketState::subscribed_sellers() const {
  std::vector<AgentId> out;
  for (std::size_t s = 0; s < sellers.size(); ++s) {
    if (sellers[s].on_platform && !sellers[s].bankrupt) out.push_back(static_cast<AgentId>(s));
  }
  return out;
}

WorldOption world_choice(const BuyerSpec& buyer, std::span<const double> utility, double friction, double budget,
                         std::span<const SellerSpec> sellers, std::span<const AgentState> seller_states) {
  WorldOption w;
  for (AgentId s : buyer.known_sellers) {
    const auto i = static_cast<std::size_t>(s);
    if (seller_states[i].bankrupt || sellers[i].price() > budget) continue;
    if (!w.best || utility[i] > w.best_utility) {
      w.best = s;
      w.best_utility = utility[i];
    }
  }
  if (w.best && w.best_utility > friction) {
    w.candidate = w.best;
    w.surplus = w.best_utility - friction;
  }
  return w;
}

PlatformOption platform_option(std::optional<AgentId> recommended, std::span<const double> utility, double budget,
                               std::span<const SellerSpec> sellers) {
  PlatformOption p;
  if (!recommended) return p;
  p.recommended = recommended;
  p.recommended_utility = utility[static_cast<std::size_t>(*recommended)];
  if (sellers[static_cast<std::size_t>(*recommended)].price() <= budget) {
    p.candidate = recommended;
    p.utility = p.recommended_utility;
  }
  return p;
}

TransactionOutcome buyer_transact(const Market& market, MarketState& state, AgentId buyer, const WorldOption& world,
                                  const PlatformOption& platform, const FeeSchedule& fees) {
  auto& bs = state.buyers.at(static_cast<std::size_t>(buyer));
  TransactionOutcome out;
  out.world_candidate = world.candidate;
  out.platform_candidate = platform.candidate;
  if (platform.candidate) {
    const auto& ss = state.sellers.at(static_cast<std::size_t>(*platform.candidate));
    if (!bs.on_platform) throw std::invalid_argument("buyer_transact: platform option for an off-platform buyer");
    if (!ss.on_platform || ss.bankrupt) {
      throw std::invalid_argument("buyer_transact: platform option points at seller " +
                                  std::to_string(*platform.candidate) + " which is off-platform or bankrupt");
    }
  }

  const double up = platform.candidate ? platform.utility : 0.0;
  const double uw = world.candidate ? world.surplus : 0.0;
  if (platform.candidate && up >= uw && up > 0.0) {
    out.chosen = platform.candidate;
    out.channel = Channel::platform;
    out.buyer_surplus = up;
  } else if (world.candidate && uw > 0.0) {
    out.chosen = world.candidate;
    out.channel = Channel::world;
    out.buyer_surplus = uw;
  }
  if (!out.chosen) return out;

  const auto& seller = market.sellers[static_cast<std::size_t>(*out.chosen)];
  auto& ss = state.sellers[static_cast<std::size_t>(*out.chosen)];
  out.seller_surplus = transaction_seller_surplus(seller.price(), seller.cost_fraction, fees.referral_rate, out.channel);
  bs.budget_remaining -= seller.price();
  if (out.channel == Channel::platform) {
    bs.epoch_surplus_platform += out.buyer_surplus;
    bs.platform_tx_count += 1;
    ss.epoch_surplus_platform += out.seller_surplus;
    ss.platform_tx_count += 1;
  } else {
    bs.epoch_surplus_world += out.buyer_surplus;
    bs.world_tx_count += 1;
    ss.epoch_surplus_world += out.seller_surplus;
    ss.world_tx_count += 1;
  }
  return out;
}

LatentPoint sample_query(const BuyerSpec& buyer, int arrival, Rng& rng) {
  if (!buyer.scripted_queries.empty()) {
    return buyer.scripted_queries[static_cast<std::size_t>(arrival) % buyer.scripted_queries.size()];
  }
  if (buyer.query_stddev == 0.0) return buyer.location;
  std::normal_distribution<double> n0(buyer.location.taste, buyer.query_stddev);
  std::normal_distribution<double> n1(buyer.location.price_level, buyer.query_stddev);
  const double a = n0(rng);
  const double b = n1(rng);
  return clip_unit({a, b});
}

namespace {

void reset_epoch_counters(AgentState& a) {
  a.epoch_surplus_world = 0.0;
  a.epoch_surplus_platform = 0.0;
  a.platform_tx_count = 0;
  a.world_tx_count = 0;
}

}  // namespace

EpochLedger run_epoch(const Market& market, MarketState& state, const EpochSettings& settings,
                      MatchingPolicy* policy, Rng& query_rng, UtilityTable* utilities) {
  const int nb = market.n_buyers();
  const int ns = market.n_sellers();
  if (nb > 0 && settings.timesteps < nb) throw std::invalid_argument("run_epoch: need T >= number of buyers");
  if (!(settings.friction >= 0.0)) throw std::invalid_argument("run_epoch: friction must be >= 0");
  settings.fees.validate();

  const FeeSchedule& fees = settings.fees;
  EpochLedger ledger;
  ledger.epoch = settings.epoch;
  ledger.fees = fees;
  ledger.friction = settings.friction;

  for (int b = 0; b < nb; ++b) {
    auto& a = state.buyers[static_cast<std::size_t>(b)];
    reset_epoch_counters(a);
    a.budget_remaining = market.buyers[static_cast<std::size_t>(b)].epoch_budget;
    if (a.on_platform) {
      a.epoch_surplus_platform = -fees.buyer_subscription;
      ledger.revenue.buyer_subscriptions += fees.buyer_subscription;
    }
  }
  for (int s = 0; s < ns; ++s) {
    auto& a = state.sellers[static_cast<std::size_t>(s)];
    if (a.bankrupt) {
      a.on_platform = false;
      continue;
    }
    reset_epoch_counters(a);
    if (a.on_platform) {
      a.epoch_surplus_platform = -fees.seller_subscription;
      ledger.revenue.seller_subscriptions += fees.seller_subscription;
    }
  }

  const auto subscribed = state.subscribed_sellers();
  if (policy) policy->begin_epoch({market.sellers, subscribed, fees});

  std::vector<double> row(static_cast<std::size_t>(ns));
  if (utilities) {
    utilities->n_sellers = ns;
    utilities->values.assign(static_cast<std::size_t>(settings.timesteps) * static_cast<std::size_t>(ns), 0.0);
  }
  ledger.transactions.reserve(static_cast<std::size_t>(settings.timesteps));

  for (int t = 0; nb > 0 && t < settings.timesteps; ++t) {
    const AgentId b = t % nb;
    const int arrival = t / nb;
    const auto& buyer = market.buyers[static_cast<std::size_t>(b)];
    auto& bs = state.buyers[static_cast<std::size_t>(b)];

    const LatentPoint q = sample_query(buyer, arrival, query_rng);
    for (int s = 0; s < ns; ++s) row[static_cast<std::size_t>(s)] = market.kernel(q, market.sellers[static_cast<std::size_t>(s)].location);
    if (utilities) std::copy(row.begin(), row.end(), utilities->values.begin() + static_cast<std::ptrdiff_t>(t) * ns);

    const WorldOption world =
        world_choice(buyer, row, settings.friction, bs.budget_remaining, market.sellers, state.sellers);
    PlatformOption platform;
    if (bs.on_platform && policy) {
      const auto rec = policy->recommend({t, b, arrival, q, row});
      if (rec && !std::binary_search(subscribed.begin(), subscribed.end(), *rec)) {
        throw std::logic_error("matching policy recommended seller " + std::to_string(*rec) +
                               " which is not subscribed");
      }
      platform = platform_option(rec, row, bs.budget_remaining, market.sellers);
    }

    const TransactionOutcome out = buyer_transact(market, state, b, world, platform, fees);
    if (out.channel == Channel::platform) {
      const auto& seller = market.sellers[static_cast<std::size_t>(*out.chosen)];
      ledger.revenue.referrals += seller.price() * fees.referral_rate;
      if (policy) policy->on_platform_transaction(*out.chosen);
    }

    TransactionRecord rec;
    rec.epoch = settings.epoch;
    rec.t = t;
    rec.buyer = b;
    rec.buyer_on_platform = bs.on_platform;
    rec.query = q;
    rec.world_best = world.best;
    rec.world_best_utility = world.best_utility;
    rec.world_candidate = world.candidate;
    rec.world_surplus = world.surplus;
    rec.recommended = platform.recommended;
    rec.recommended_utility = platform.recommended_utility;
    rec.platform_candidate = platform.candidate;
    rec.platform_utility = platform.utility;
    rec.chosen = out.chosen;
    rec.channel = out.channel;
    rec.buyer_surplus = out.buyer_surplus;
    rec.seller_surplus = out.seller_surplus;
    rec.price = out.chosen ? market.sellers[static_cast<std::size_t>(*out.chosen)].price() : 0.0;
    ledger.transactions.push_back(rec);
  }

  ledger.buyers.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    const auto& a = state.buyers[static_cast<std::size_t>(b)];
    auto& e = ledger.buyers[static_cast<std::size_t>(b)];
    e.on_platform = a.on_platform;
    e.arrivals = settings.timesteps / nb + (b < settings.timesteps % nb ? 1 : 0);
    e.surplus_world = a.epoch_surplus_world;
    e.surplus_platform = a.epoch_surplus_platform;
    e.platform_tx = a.platform_tx_count;
    e.world_tx = a.world_tx_count;
  }
  ledger.sellers.resize(static_cast<std::size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    const auto& a = state.sellers[static_cast<std::size_t>(s)];
    auto& e = ledger.sellers[static_cast<std::size_t>(s)];
    if (a.bankrupt) {
      e.active = false;
      continue;
    }
    e.on_platform = a.on_platform;
    e.surplus_world = a.epoch_surplus_world;
    e.surplus_platform = a.epoch_surplus_platform;
    e.fixed_cost = market.sellers[static_cast<std::size_t>(s)].fixed_cost;
    e.platform_tx = a.platform_tx_count;
    e.world_tx = a.world_tx_count;
  }
  ledger.finalized = true;
  return ledger;
}

void close_epoch(const Market& market, MarketState& state, const EpochLedger& ledger) {
  if (!ledger.finalized) throw std::logic_error("close_epoch: ledger is not finalized");
  if (ledger.sellers.size() != state.sellers.size()) throw std::invalid_argument("close_epoch: ledger size mismatch");
  for (std::size_t s = 0; s < state.sellers.size(); ++s) {
    auto& a = state.sellers[s];
    if (a.bankrupt) continue;
    if (ledger.sellers[s].surplus() <= 0.0) {
      a.consecutive_nonpositive_epochs += 1;
    } else {
      a.consecutive_nonpositive_epochs = 0;
    }
    if (a.consecutive_nonpositive_epochs >= market.sellers[s].shutdown_threshold) {
      a.bankrupt = true;
      a.on_platform = false;
    }
  }
}

}  // namespace platsim
