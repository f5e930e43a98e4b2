#include "platsim/subscription.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace platsim {

SubscriptionEstimate price_estimate(const EstimateBasis& basis, const FeeSchedule& new_fees) {
  const double own_fee = basis.seller ? new_fees.seller_subscription : new_fees.buyer_subscription;
  return {basis.xi_world, basis.platform_gross - own_fee - new_fees.referral_rate * basis.referral_base};
}

UtilityTable utility_table(const Market& market, const EpochLedger& ledger) {
  UtilityTable table;
  table.n_sellers = market.n_sellers();
  int t_max = 0;
  for (const auto& r : ledger.transactions) t_max = std::max(t_max, r.t + 1);
  table.values.assign(static_cast<std::size_t>(t_max) * static_cast<std::size_t>(table.n_sellers), 0.0);
  for (const auto& r : ledger.transactions) {
    for (int s = 0; s < table.n_sellers; ++s) {
      table.values[static_cast<std::size_t>(r.t) * static_cast<std::size_t>(table.n_sellers) + static_cast<std::size_t>(s)] =
          market.kernel(r.query, market.sellers[static_cast<std::size_t>(s)].location);
    }
  }
  return table;
}

namespace {

double world_surplus(const TransactionRecord& r, double friction) {
  return r.world_best ? std::max(r.world_best_utility - friction, 0.0) : 0.0;
}

// Mirrors buyer_transact: platform wins ties and needs positive utility.
bool platform_wins(double up, double uw) { return up >= uw && up > 0.0; }
bool world_wins(double up, double uw) { return uw > 0.0 && !platform_wins(up, uw); }

// Sellers on the platform last epoch that are still solvent.
std::vector<AgentId> previous_platform_sellers(const CounterfactualContext& ctx) {
  std::vector<AgentId> out;
  for (std::size_t s = 0; s < ctx.previous.sellers.size(); ++s) {
    const auto& e = ctx.previous.sellers[s];
    if (e.active && e.on_platform && !ctx.state.sellers[s].bankrupt) out.push_back(static_cast<AgentId>(s));
  }
  return out;
}

void check_ledger(const CounterfactualContext& ctx) {
  if (!ctx.previous.finalized) throw std::logic_error("subscription estimate: previous ledger is not finalized");
  if (ctx.utilities.n_sellers != ctx.market.n_sellers()) {
    throw std::invalid_argument("subscription estimate: utility table does not match the market");
  }
}

}  // namespace

EstimateBasis buyer_basis(const CounterfactualContext& ctx, AgentId buyer) {
  check_ledger(ctx);
  if (buyer < 0 || static_cast<std::size_t>(buyer) >= ctx.previous.buyers.size()) {
    throw std::out_of_range("subscription estimate: buyer " + std::to_string(buyer) + " is absent from the ledger");
  }
  const bool was_on = ctx.previous.buyers[static_cast<std::size_t>(buyer)].on_platform;
  std::vector<AgentId> platform_sellers;
  if (!was_on) platform_sellers = previous_platform_sellers(ctx);

  EstimateBasis basis;
  for (const auto& r : ctx.previous.transactions) {
    if (r.buyer != buyer) continue;
    const double uw = world_surplus(r, ctx.new_friction);
    basis.xi_world += uw;
    double up = r.platform_utility;
    if (!was_on) {
      const auto row = ctx.utilities.row(r.t);
      const auto best = myopic(row, platform_sellers);
      up = best ? row[static_cast<std::size_t>(*best)] : 0.0;
    }
    basis.platform_gross += std::max(uw, up);
  }
  return basis;
}

EstimateBasis seller_basis(const CounterfactualContext& ctx, AgentId seller) {
  check_ledger(ctx);
  if (seller < 0 || static_cast<std::size_t>(seller) >= ctx.previous.sellers.size()) {
    throw std::out_of_range("subscription estimate: seller " + std::to_string(seller) + " is absent from the ledger");
  }
  const auto si = static_cast<std::size_t>(seller);
  if (ctx.state.sellers[si].bankrupt) {
    throw std::invalid_argument("subscription estimate: seller " + std::to_string(seller) + " is bankrupt");
  }
  const SellerSpec& spec = ctx.market.sellers[si];
  const bool was_on = ctx.previous.sellers[si].active && ctx.previous.sellers[si].on_platform;
  const FeeSchedule& old_fees = ctx.previous.fees;

  std::vector<AgentId> pool = previous_platform_sellers(ctx);
  std::vector<double> tracker(ctx.previous.sellers.size(), 0.0);
  for (AgentId s : pool) tracker[static_cast<std::size_t>(s)] = ctx.previous.sellers[static_cast<std::size_t>(s)].surplus_platform;
  if (was_on) {
    pool.erase(std::remove(pool.begin(), pool.end(), seller), pool.end());
  } else {
    pool.insert(std::upper_bound(pool.begin(), pool.end(), seller), seller);
    tracker[si] = -old_fees.seller_subscription;
  }

  int n_world_off = 0;  // n^{w'}
  int n_platform = 0;   // n^{p*}
  int n_world_on = 0;   // n^{w*}
  for (const auto& r : ctx.previous.transactions) {
    const bool world_best = r.world_best && *r.world_best == seller;
    const double uw = world_surplus(r, ctx.new_friction);
    if (was_on) {
      if (world_best) {
        double up_without = 0.0;
        if (r.buyer_on_platform) {
          const auto row = ctx.utilities.row(r.t);
          const auto alt = recommend(row, pool, ctx.strategy, tracker, old_fees, ctx.market.sellers);
          if (alt) up_without = row[static_cast<std::size_t>(*alt)];
        }
        if (world_wins(up_without, uw)) ++n_world_off;
        if (world_wins(r.platform_utility, uw)) ++n_world_on;
      }
      if (r.recommended && *r.recommended == seller && r.platform_candidate &&
          platform_wins(r.platform_utility, uw)) {
        ++n_platform;
      }
    } else {
      if (world_best && world_wins(r.platform_utility, uw)) ++n_world_off;
      if (r.buyer_on_platform) {
        const auto row = ctx.utilities.row(r.t);
        const auto alt = recommend(row, pool, ctx.strategy, tracker, old_fees, ctx.market.sellers);
        const double up = alt ? row[static_cast<std::size_t>(*alt)] : 0.0;
        if (alt && *alt == seller) {
          if (platform_wins(up, uw)) ++n_platform;
        } else if (world_best && world_wins(up, uw)) {
          ++n_world_on;
        }
      } else if (world_best && uw > 0.0) {
        ++n_world_on;
      }
    }
  }

  const double margin = transaction_seller_surplus(spec.price(), spec.cost_fraction, 0.0, Channel::world);
  EstimateBasis basis;
  basis.seller = true;
  basis.xi_world = n_world_off * margin - spec.fixed_cost;
  basis.platform_gross = (n_platform + n_world_on) * margin - spec.fixed_cost;
  basis.referral_base = n_platform * spec.price();
  return basis;
}

SubscriptionEstimate estimate_buyer(const CounterfactualContext& ctx, AgentId buyer, const FeeSchedule& new_fees) {
  new_fees.validate();
  return price_estimate(buyer_basis(ctx, buyer), new_fees);
}

SubscriptionEstimate estimate_seller(const CounterfactualContext& ctx, AgentId seller, const FeeSchedule& new_fees) {
  new_fees.validate();
  return price_estimate(seller_basis(ctx, seller), new_fees);
}

InertiaBonus inertia_bonus(const AgentState& state) {
  if (state.inertia == 0) throw std::invalid_argument("inertia_bonus: inertia must be nonzero");
  InertiaBonus b;
  if (state.on_platform && state.inertia > 0) b.platform = std::log(static_cast<double>(state.inertia));
  if (!state.on_platform && state.inertia < 0) b.world = std::log(static_cast<double>(-state.inertia));
  return b;
}

double subscribe_probability(const SubscriptionEstimate& estimate, const InertiaBonus& bonus) {
  const double d = (estimate.xi_platform + bonus.platform) - (estimate.xi_world + bonus.world);
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

bool subscribe_decision(const SubscriptionEstimate& estimate, const InertiaBonus& bonus, double uniform) {
  return uniform < subscribe_probability(estimate, bonus);
}

bool subscribe_decision(const SubscriptionEstimate& estimate, const InertiaBonus& bonus, Rng& rng) {
  return subscribe_decision(estimate, bonus, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

int update_inertia(int chi, bool subscribed) {
  if (chi == 0) throw std::invalid_argument("update_inertia: inertia must be nonzero");
  if (chi > 0) return subscribed ? chi + 1 : -1;
  return subscribed ? 1 : chi - 1;
}

AgentState update_inertia(AgentState state, bool subscribed) {
  state.inertia = update_inertia(state.inertia, subscribed);
  return state;
}

int sample_initial_inertia(int bound, Rng& rng) {
  if (bound < 1) throw std::invalid_argument("sample_initial_inertia: bound must be >= 1");
  const int k = std::uniform_int_distribution<int>(0, 2 * bound - 1)(rng);
  return k < bound ? k - bound : k - bound + 1;
}

DecisionDraws DecisionDraws::draw(int n_buyers, int n_sellers, Rng& rng) {
  DecisionDraws d;
  const auto n = static_cast<std::size_t>(n_buyers + n_sellers);
  d.wake.resize(n);
  d.choice.resize(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    d.wake[i] = u(rng);
    d.choice[i] = u(rng);
  }
  return d;
}

void wake_and_decide(MarketState& state, std::span<const EstimateBasis> bases, const FeeSchedule& fees,
                     const DecisionDraws& draws, const SubscriptionConfig& config) {
  const std::size_t nb = state.buyers.size();
  const std::size_t n = nb + state.sellers.size();
  if (bases.size() != n || draws.wake.size() != n || draws.choice.size() != n) {
    throw std::invalid_argument("wake_and_decide: bases and draws must cover every agent");
  }
  for (std::size_t i = 0; i < n; ++i) {
    AgentState& a = i < nb ? state.buyers[i] : state.sellers[i - nb];
    if (a.bankrupt) continue;
    const bool awake = draws.wake[i] < config.p_wake;
    bool subscribe = a.on_platform;
    if (awake) {
      const auto est = price_estimate(bases[i], fees);
      if (config.mode == DecisionMode::best_response) {
        subscribe = est.xi_platform >= est.xi_world;
      } else {
        subscribe = subscribe_decision(est, inertia_bonus(a), draws.choice[i]);
      }
    }
    if (awake || config.sleepers_accrue_inertia) a.inertia = update_inertia(a.inertia, subscribe);
    a.on_platform = subscribe;
  }
}

std::vector<EstimateBasis> compute_bases(const CounterfactualContext& ctx) {
  std::vector<EstimateBasis> out;
  out.reserve(ctx.state.buyers.size() + ctx.state.sellers.size());
  for (std::size_t b = 0; b < ctx.state.buyers.size(); ++b) out.push_back(buyer_basis(ctx, static_cast<AgentId>(b)));
  for (std::size_t s = 0; s < ctx.state.sellers.size(); ++s) {
    if (ctx.state.sellers[s].bankrupt) {
      out.push_back({true, 0.0, 0.0, 0.0});
    } else {
      out.push_back(seller_basis(ctx, static_cast<AgentId>(s)));
    }
  }
  return out;
}

}  // namespace platsim
