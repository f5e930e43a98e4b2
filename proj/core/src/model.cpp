#include "platsim/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace platsim {

LatentPoint clip_unit(LatentPoint p) {
  p.taste = std::clamp(p.taste, 0.0, 1.0);
  p.price_level = std::clamp(p.price_level, 0.0, 1.0);
  return p;
}

double euclidean_distance(const LatentPoint& a, const LatentPoint& b) {
  return std::hypot(a.taste - b.taste, a.price_level - b.price_level);
}

double matching_utility(const LatentPoint& q, const LatentPoint& s, double c) {
  return std::exp(-c * euclidean_distance(q, s));
}

double UtilityKernel::operator()(const LatentPoint& q, const LatentPoint& s) const {
  const double d = euclidean_distance(q, s);
  if (kind == Kind::linear) return intercept - scale * d;
  return std::exp(-scale * d);
}

void FeeSchedule::validate() const {
  auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
  if (bad(buyer_subscription) || bad(seller_subscription) || bad(referral_rate) || referral_rate > 1.0) {
    throw std::invalid_argument("invalid fee schedule: subscriptions must be finite and >= 0, referral rate in [0,1]");
  }
}

const char* to_string(Channel c) {
  switch (c) {
    case Channel::platform: return "platform";
    case Channel::world: return "world";
    case Channel::none: break;
  }
  return "none";
}

double transaction_seller_surplus(double price, double cost_fraction, double referral_rate, Channel channel) {
  switch (channel) {
    case Channel::platform: return price * (1.0 - cost_fraction - referral_rate);
    case Channel::world: return price * (1.0 - cost_fraction);
    case Channel::none: break;
  }
  return 0.0;
}

EpochTotals epoch_totals(const EpochLedger& ledger) {
  if (!ledger.finalized) throw std::logic_error("epoch_totals: ledger is not finalized");
  EpochTotals t;
  for (const auto& b : ledger.buyers) t.buyer_surplus += b.surplus();
  for (const auto& s : ledger.sellers) {
    if (s.active) t.seller_surplus += s.surplus();
  }
  t.platform_revenue = ledger.revenue.total();
  t.welfare = t.buyer_surplus + t.seller_surplus + t.platform_revenue;
  return t;
}

double platform_side_surplus(const EpochLedger& ledger) {
  double total = 0.0;
  for (const auto& b : ledger.buyers) total += b.surplus_platform;
  for (const auto& s : ledger.sellers) {
    if (s.active) total += s.surplus_platform;
  }
  return total;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;

  void bytes(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  void real(double v) { bytes(std::bit_cast<std::uint64_t>(v)); }
  void integer(long long v) { bytes(static_cast<std::uint64_t>(v)); }
  void id(const std::optional<AgentId>& v) { integer(v ? *v : -1); }
};

}  // namespace

std::uint64_t ledger_digest(const EpochLedger& ledger) {
  Fnv1a f;
  f.integer(ledger.epoch);
  f.real(ledger.fees.buyer_subscription);
  f.real(ledger.fees.seller_subscription);
  f.real(ledger.fees.referral_rate);
  f.real(ledger.friction);
  for (const auto& b : ledger.buyers) {
    f.integer(b.on_platform);
    f.integer(b.arrivals);
    f.real(b.surplus_world);
    f.real(b.surplus_platform);
    f.integer(b.platform_tx);
    f.integer(b.world_tx);
  }
  for (const auto& s : ledger.sellers) {
    f.integer(s.active);
    f.integer(s.on_platform);
    f.real(s.surplus_world);
    f.real(s.surplus_platform);
    f.real(s.fixed_cost);
    f.integer(s.platform_tx);
    f.integer(s.world_tx);
  }
  f.real(ledger.revenue.buyer_subscriptions);
  f.real(ledger.revenue.seller_subscriptions);
  f.real(ledger.revenue.referrals);
  for (const auto& r : ledger.transactions) {
    f.integer(r.t);
    f.integer(r.buyer);
    f.real(r.query.taste);
    f.real(r.query.price_level);
    f.id(r.world_candidate);
    f.id(r.recommended);
    f.id(r.chosen);
    f.integer(static_cast<int>(r.channel));
    f.real(r.buyer_surplus);
    f.real(r.seller_surplus);
  }
  return f.h;
}

}  // namespace platsim
