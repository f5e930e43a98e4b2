#include "platsim/observation.hpp"

#include <stdexcept>

namespace platsim {

ObservationLayout ObservationLayout::make(int n_buyers, int n_sellers, bool time_features) {
  if (n_buyers < 0 || n_sellers < 0) throw std::invalid_argument("observation layout: negative agent counts");
  ObservationLayout l;
  l.n_buyers = n_buyers;
  l.n_sellers = n_sellers;
  l.time_features = time_features;
  auto add = [&](const char* name, int len) {
    l.fields.push_back({name, l.length, len});
    l.length += len;
  };
  const int n = n_buyers;
  const int m = n_sellers;
  add("buyer_subscribed", n);
  add("seller_subscribed", m);
  add("buyer_location", 2 * n);
  add("seller_location", 2 * m);
  add("buyer_platform_tx", n);
  add("buyer_platform_surplus", n);
  add("seller_platform_tx", m);
  add("seller_platform_surplus", m);
  add("recommendations", n * m);
  add("platform_transactions", n * m);
  add("fees", 3);
  add("strategy", 2);
  add("friction", 1);
  if (time_features) add("time", 3);
  return l;
}

const ObservationField& ObservationLayout::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return f;
  }
  throw std::out_of_range("observation layout has no field '" + name + "'");
}

PlatformView platform_view(const Market& market, const MarketState& state, const EpochLedger* reference,
                           const FeeSchedule& fees, const MatchingStrategy& strategy, double friction, int epoch,
                           ShockStage stage, int remaining) {
  const auto n = static_cast<std::size_t>(market.n_buyers());
  const auto m = static_cast<std::size_t>(market.n_sellers());
  PlatformView v;
  v.buyer_subscribed.resize(n);
  v.seller_subscribed.resize(m);
  v.buyer_location.resize(n);
  v.seller_location.resize(m);
  for (std::size_t b = 0; b < n; ++b) {
    v.buyer_subscribed[b] = state.buyers[b].on_platform;
    if (v.buyer_subscribed[b]) v.buyer_location[b] = market.buyers[b].location;
  }
  for (std::size_t s = 0; s < m; ++s) {
    v.seller_subscribed[s] = state.sellers[s].on_platform && !state.sellers[s].bankrupt;
    if (v.seller_subscribed[s]) v.seller_location[s] = market.sellers[s].location;
  }
  v.buyer_platform_tx.assign(n, 0);
  v.buyer_platform_surplus.assign(n, 0.0);
  v.seller_platform_tx.assign(m, 0);
  v.seller_platform_surplus.assign(m, 0.0);
  v.recommendations.assign(n * m, 0);
  v.platform_transactions.assign(n * m, 0);
  if (reference) {
    for (std::size_t b = 0; b < n && b < reference->buyers.size(); ++b) {
      const auto& e = reference->buyers[b];
      if (!e.on_platform) continue;
      v.buyer_platform_tx[b] = e.platform_tx;
      v.buyer_platform_surplus[b] = e.surplus_platform;
    }
    for (std::size_t s = 0; s < m && s < reference->sellers.size(); ++s) {
      const auto& e = reference->sellers[s];
      if (!e.active || !e.on_platform) continue;
      v.seller_platform_tx[s] = e.platform_tx;
      v.seller_platform_surplus[s] = e.surplus_platform;
    }
    for (const auto& r : reference->transactions) {
      if (!r.buyer_on_platform) continue;
      const auto row = static_cast<std::size_t>(r.buyer) * m;
      if (r.recommended) v.recommendations[row + static_cast<std::size_t>(*r.recommended)] += 1;
      if (r.channel == Channel::platform) v.platform_transactions[row + static_cast<std::size_t>(*r.chosen)] += 1;
    }
  }
  v.fees = fees;
  v.strategy = strategy;
  v.friction = friction;
  v.epoch = epoch;
  v.stage = stage;
  v.remaining = remaining;
  return v;
}

Observation observe(const ObservationLayout& layout, const PlatformView& view) {
  if (view.buyer_subscribed.size() != static_cast<std::size_t>(layout.n_buyers) ||
      view.seller_subscribed.size() != static_cast<std::size_t>(layout.n_sellers)) {
    throw std::invalid_argument("observe: view does not match the layout");
  }
  Observation o;
  o.values.reserve(static_cast<std::size_t>(layout.length));
  auto& x = o.values;
  for (bool b : view.buyer_subscribed) x.push_back(b ? 1.0 : 0.0);
  for (bool b : view.seller_subscribed) x.push_back(b ? 1.0 : 0.0);
  for (const auto& p : view.buyer_location) {
    x.push_back(p.taste);
    x.push_back(p.price_level);
  }
  for (const auto& p : view.seller_location) {
    x.push_back(p.taste);
    x.push_back(p.price_level);
  }
  for (int v : view.buyer_platform_tx) x.push_back(v);
  for (double v : view.buyer_platform_surplus) x.push_back(v);
  for (int v : view.seller_platform_tx) x.push_back(v);
  for (double v : view.seller_platform_surplus) x.push_back(v);
  for (int v : view.recommendations) x.push_back(v);
  for (int v : view.platform_transactions) x.push_back(v);
  x.push_back(view.fees.buyer_subscription);
  x.push_back(view.fees.seller_subscription);
  x.push_back(view.fees.referral_rate);
  x.push_back(static_cast<double>(static_cast<int>(view.strategy.rule)));
  x.push_back(view.strategy.threshold());
  x.push_back(view.friction);
  if (layout.time_features) {
    x.push_back(view.epoch);
    x.push_back(static_cast<double>(static_cast<int>(view.stage)));
    x.push_back(view.remaining);
  }
  if (x.size() != static_cast<std::size_t>(layout.length)) throw std::logic_error("observe: layout length mismatch");
  return o;
}

}  // namespace platsim
