#include "platsim/platform_env.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace platsim {

const char* to_string(EnvMode mode) { return mode == EnvMode::matching ? "matching" : "fee_setting"; }

std::optional<EnvMode> parse_env_mode(std::string_view name) {
  if (name == "fee_setting") return EnvMode::fee_setting;
  if (name == "matching") return EnvMode::matching;
  return std::nullopt;
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (market.n_buyers < 0 || market.n_sellers < 1) fail("market.n_buyers must be >= 0 and market.n_sellers >= 1");
  if (!(market.rho >= 0.0 && market.rho <= 1.0)) fail("market.rho must lie in [0,1]");
  if (!(market.utility_scale > 0.0)) fail("market.utility_scale must be > 0");
  if (!(market.query_variance >= 0.0)) fail("market.query_variance must be >= 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (timesteps < market.n_buyers) fail("timesteps must be >= n_buyers");
  if (!(warmup_friction >= 0.0)) fail("warmup_friction must be >= 0");
  if (shock.enabled) {
    if (shock.pre < 3 || shock.post < 3 || shock.pre + shock.post >= epochs) {
      fail("shock windows need pre >= 3, post >= 3 and pre + post < epochs");
    }
    if (!(shock.intensity_min >= 0.0 && shock.intensity_min <= shock.intensity_max)) {
      fail("shock intensity needs 0 <= intensity_min <= intensity_max");
    }
    if (!(shock.base_friction > 0.0)) fail("shock.base_friction must be > 0");
  } else if (!(shock.constant_friction >= 0.0)) {
    fail("shock.constant_friction must be >= 0");
  }
  if (!(subscription.p_wake >= 0.0 && subscription.p_wake <= 1.0)) fail("subscription.p_wake must lie in [0,1]");
  if (inertia_bound < 1) fail("inertia_bound must be >= 1");
  if (fixed_strategy.threshold_tick < 0 || fixed_strategy.threshold_tick > 10) fail("fixed_strategy threshold tick");
  if (!(discount > 0.0 && discount <= 1.0)) fail("discount must lie in (0,1]");
  regime.validate();
  fixed_fees.validate();
}

FeeSchedule EnvConfig::matching_fees() const {
  return regime.kind == RegimeKind::fee_freeze ? regime.frozen : fixed_fees;
}

WelfareReport welfare_report(const EpochLedger& ledger, const RegulationRegime& regime) {
  const auto totals = epoch_totals(ledger);
  WelfareReport w;
  w.buyer_surplus = totals.buyer_surplus;
  w.seller_surplus = totals.seller_surplus;
  w.revenue = totals.platform_revenue;
  w.tax = tax_amount(ledger.revenue, regime);
  w.welfare = w.buyer_surplus + w.seller_surplus + (w.revenue - w.tax) + w.tax;
  return w;
}

double EpisodeRecord::discounted_return(double gamma) const {
  double g = 1.0;
  double total = 0.0;
  for (double r : rewards) {
    total += g * r;
    g *= gamma;
  }
  return total;
}

Market sample_env_market(const EnvConfig& config, const SeedSet& seeds) {
  const auto& p = config.market;
  const int arrivals = p.n_buyers > 0 ? config.timesteps / p.n_buyers : 0;
  // An empty demand side samples one buyer and drops it; seller draws use their own stream.
  auto sampled = sample_market(MarketStructure::of(p.structure), std::max(p.n_buyers, 1), p.n_sellers, seeds.market,
                               arrivals, p.query_variance);
  sampled.buyers.resize(static_cast<std::size_t>(p.n_buyers));
  const auto knowledge = sample_knowledge(p.n_buyers, p.n_sellers, p.rho, seeds.knowledge);
  Market m;
  m.buyers = std::move(sampled.buyers);
  m.sellers = std::move(sampled.sellers);
  for (auto& b : m.buyers) b.known_sellers = knowledge.known_by(b.id);
  m.kernel = UtilityKernel::exponential(p.utility_scale);
  return m;
}

ShockSchedule sample_env_schedule(const EnvConfig& config, const SeedSet& seeds) {
  const auto& s = config.shock;
  if (!s.enabled) return constant_schedule(config.epochs, s.constant_friction);
  return sample_shock_schedule(config.epochs, s.pre, s.post, s.intensity_min, s.intensity_max, s.base_friction,
                               seeds.shock);
}

PlatformEnv::PlatformEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  layout_ = ObservationLayout::make(config_.market.n_buyers, config_.market.n_sellers, config_.time_features);
  fee_actions_ = fee_tick_space(config_.regime);
  fee_index_.assign(static_cast<std::size_t>(kSubscriptionTicks) * kSubscriptionTicks * kReferralTicks, -1);
  for (std::size_t i = 0; i < fee_actions_.size(); ++i) {
    const auto& t = fee_actions_[i];
    fee_index_[static_cast<std::size_t>((t.buyer * kSubscriptionTicks + t.seller) * kReferralTicks + t.referral)] =
        static_cast<int>(i);
  }
}

int PlatformEnv::action_count() const {
  return config_.mode == EnvMode::matching ? kMatchingActionCount : static_cast<int>(fee_actions_.size());
}

int PlatformEnv::fee_action_index(const FeeTicks& t) const {
  if (t.buyer < 0 || t.buyer >= kSubscriptionTicks || t.seller < 0 || t.seller >= kSubscriptionTicks ||
      t.referral < 0 || t.referral >= kReferralTicks) {
    return -1;
  }
  return fee_index_[static_cast<std::size_t>((t.buyer * kSubscriptionTicks + t.seller) * kReferralTicks + t.referral)];
}

double PlatformEnv::friction_for(int epoch) const {
  if (epoch == 0) return config_.warmup_friction;
  return record_.schedule.frictions.at(static_cast<std::size_t>(epoch - 1));
}

ShockStage PlatformEnv::stage_for(int epoch) const {
  if (epoch == 0) return ShockStage::warm_up;
  return record_.schedule.stages.at(static_cast<std::size_t>(epoch - 1));
}

Observation PlatformEnv::reset(std::uint64_t seed) {
  const auto seeds = SeedSet::from_root(seed);
  return reset(seed, sample_env_market(config_, seeds), sample_env_schedule(config_, seeds));
}

Observation PlatformEnv::reset(std::uint64_t seed, Market market, ShockSchedule schedule) {
  market.validate();
  if (market.n_buyers() != config_.market.n_buyers || market.n_sellers() != config_.market.n_sellers) {
    throw std::invalid_argument("reset: market size differs from the config");
  }
  if (schedule.epochs() != config_.epochs) throw std::invalid_argument("reset: schedule length differs from epochs");

  record_ = {};
  record_.seed = seed;
  record_.seeds = SeedSet::from_root(seed);
  record_.mode = config_.mode;
  record_.market = std::move(market);
  record_.schedule = std::move(schedule);
  state_ = MarketState::initial(record_.market);

  Rng inertia_rng(derive_seed(record_.seeds.episode, "inertia"));
  auto init = [&](AgentState& a) {
    a.inertia = sample_initial_inertia(config_.inertia_bound, inertia_rng);
    a.on_platform = config_.platform_enabled && a.inertia > 0;
  };
  for (auto& a : state_.buyers) init(a);
  for (auto& a : state_.sellers) init(a);

  started_ = true;
  epoch_ = 0;
  const MatchingStrategy warm_strategy =
      config_.mode == EnvMode::fee_setting ? config_.fixed_strategy : MatchingStrategy::myopic();
  EpochRecord warm;
  warm.ledger = run(0, FeeSchedule{}, warm_strategy, friction_for(0));
  warm.stage = ShockStage::warm_up;
  warm.strategy = warm_strategy;
  warm.welfare = welfare_report(warm.ledger, config_.regime);
  for (const auto& s : state_.sellers) warm.seller_bankrupt.push_back(s.bankrupt);
  record_.epochs.push_back(std::move(warm));

  epoch_ = 1;
  current_strategy_ = warm_strategy;
  if (config_.mode == EnvMode::fee_setting) {
    current_fees_ = FeeSchedule{};
    prepare_decisions(nullptr);
  } else {
    current_fees_ = config_.platform_enabled ? config_.matching_fees() : FeeSchedule{};
    prepare_decisions(&current_fees_);
  }
  record_.observations.push_back(observation());
  return record_.observations.back();
}

void PlatformEnv::prepare_decisions(const FeeSchedule* fees) {
  bases_.clear();
  draws_ = {};
  if (epoch_ > config_.epochs || !config_.platform_enabled) return;
  const CounterfactualContext ctx{record_.market, state_, record_.epochs.back().ledger, last_utilities_,
                                  last_strategy_, friction_for(epoch_)};
  bases_ = compute_bases(ctx);
  Rng rng(derive_seed(record_.seeds.episode, "decisions:" + std::to_string(epoch_)));
  draws_ = DecisionDraws::draw(record_.market.n_buyers(), record_.market.n_sellers(), rng);
  if (fees) decide(*fees);
}

void PlatformEnv::decide(const FeeSchedule& fees) {
  if (!config_.platform_enabled || bases_.empty()) return;
  wake_and_decide(state_, bases_, fees, draws_, config_.subscription);
}

EpochLedger PlatformEnv::run(int epoch, const FeeSchedule& fees, const MatchingStrategy& strategy, double friction) {
  const FeeSchedule effective = config_.platform_enabled ? fees : FeeSchedule{};
  StrategyMatcher matcher(strategy, config_.tracker_update);
  Rng query_rng(derive_seed(record_.seeds.episode, "queries:" + std::to_string(epoch)));
  EpochLedger ledger = run_epoch(record_.market, state_, {epoch, effective, friction, config_.timesteps},
                                 config_.platform_enabled ? &matcher : nullptr, query_rng, &last_utilities_);
  close_epoch(record_.market, state_, ledger);
  last_strategy_ = strategy;
  return ledger;
}

Observation PlatformEnv::observation() const {
  const bool live = epoch_ >= 1 && epoch_ <= config_.epochs;
  const EpochLedger* reference = record_.epochs.empty() ? nullptr : &record_.epochs.back().ledger;
  const auto view = platform_view(record_.market, state_, reference, current_fees_, current_strategy_,
                                  live ? friction_for(epoch_) : 0.0, epoch_,
                                  live ? stage_for(epoch_) : ShockStage::post, std::max(config_.epochs - epoch_ + 1, 0));
  return observe(layout_, view);
}

StepResult PlatformEnv::step(int action) {
  if (action < 0 || action >= action_count()) {
    throw ActionError("action " + std::to_string(action) + " outside [0, " + std::to_string(action_count()) + ")");
  }
  if (config_.mode == EnvMode::matching) return step_strategy(MatchingStrategy::from_action(action));
  return step_fees(fee_actions_[static_cast<std::size_t>(action)].schedule());
}

StepResult PlatformEnv::step_fees(const FeeSchedule& fees) {
  if (config_.mode != EnvMode::fee_setting) throw std::logic_error("step_fees: fees are fixed in matching mode");
  if (!started_) throw std::logic_error("step: reset the environment first");
  if (done()) throw std::logic_error("step: episode is done");
  FeeTicks ticks;
  try {
    ticks = fee_ticks(fees);
  } catch (const std::invalid_argument& e) {
    throw ActionError(e.what());
  }
  if (fee_action_index(ticks) < 0) throw ActionError("fee schedule not admitted by the regulation regime");

  const int k = epoch_;
  decide(fees);
  EpochRecord rec;
  rec.ledger = run(k, fees, config_.fixed_strategy, friction_for(k));
  rec.stage = stage_for(k);
  rec.strategy = config_.fixed_strategy;
  rec.reward = reward(rec.ledger, config_.regime, RewardTiming::same_epoch);
  rec.welfare = welfare_report(rec.ledger, config_.regime);
  for (const auto& s : state_.sellers) rec.seller_bankrupt.push_back(s.bankrupt);
  record_.epochs.push_back(std::move(rec));

  current_fees_ = fees;
  epoch_ += 1;
  prepare_decisions(nullptr);
  return finish_step(record_.epochs.back().reward);
}

StepResult PlatformEnv::step_strategy(const MatchingStrategy& strategy) {
  if (config_.mode != EnvMode::matching) throw std::logic_error("step_strategy: matching is fixed in fee-setting mode");
  if (!started_) throw std::logic_error("step: reset the environment first");
  if (done()) throw std::logic_error("step: episode is done");
  if (strategy.threshold_tick < 0 || strategy.threshold_tick > 10) throw ActionError("threshold tick outside [0,10]");

  const int k = epoch_;
  EpochRecord rec;
  rec.ledger = run(k, current_fees_, strategy, friction_for(k));
  rec.stage = stage_for(k);
  rec.strategy = strategy;
  rec.welfare = welfare_report(rec.ledger, config_.regime);
  for (const auto& s : state_.sellers) rec.seller_bankrupt.push_back(s.bankrupt);
  current_strategy_ = strategy;
  epoch_ += 1;

  // Subscription revenue of the next epoch is credited to this step.
  prepare_decisions(&current_fees_);
  RevenueBreakdown next;
  if (epoch_ <= config_.epochs && config_.platform_enabled) {
    for (const auto& b : state_.buyers) {
      if (b.on_platform) next.buyer_subscriptions += current_fees_.buyer_subscription;
    }
    for (const auto& s : state_.sellers) {
      if (s.on_platform && !s.bankrupt) next.seller_subscriptions += current_fees_.seller_subscription;
    }
  }
  rec.reward = reward(rec.ledger, config_.regime, RewardTiming::next_epoch_subscriptions, next);
  record_.epochs.push_back(std::move(rec));
  return finish_step(record_.epochs.back().reward);
}

StepResult PlatformEnv::finish_step(const RewardBreakdown& breakdown) {
  StepResult r;
  r.observation = observation();
  r.reward = breakdown.total;
  r.done = done();
  r.breakdown = breakdown;
  r.ledger_digest = ledger_digest(record_.epochs.back().ledger);
  record_.rewards.push_back(r.reward);
  record_.observations.push_back(r.observation);
  if (r.done) record_.final_state = state_;
  return r;
}

Policy constant_policy(int action) {
  return [action](const Observation&) { return action; };
}

Policy random_policy(std::uint64_t seed, int action_count) {
  if (action_count < 1) throw std::invalid_argument("random_policy: action_count must be >= 1");
  auto rng = std::make_shared<Rng>(seed);
  return [rng, action_count](const Observation&) {
    return std::uniform_int_distribution<int>(0, action_count - 1)(*rng);
  };
}

EpisodeRecord run_episode(const EnvConfig& config, const Policy& policy, std::uint64_t seed) {
  PlatformEnv env(config);
  Observation obs = env.reset(seed);
  while (!env.done()) obs = env.step(policy(obs)).observation;
  return env.record();
}

}  // namespace platsim
