#include "platsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace platsim {

using nlohmann::json;

namespace {

const char* to_string(DecisionMode m) { return m == DecisionMode::best_response ? "best_response" : "logit"; }
const char* to_string(TrackerUpdate u) {
  return u == TrackerUpdate::on_recommendation ? "on_recommendation" : "on_transaction";
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

// Walks one object, remembering which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) fail(where(key), "expected a boolean");
        out = v->get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) fail(where(key), "expected an integer");
        out = v->get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) fail(where(key), "expected a number");
        out = v->get<T>();
      } else {
        if (!v->is_string()) fail(where(key), "expected a string");
        out = v->get<std::string>();
      }
    } catch (const json::exception& e) {
      fail(where(key), e.what());
    }
  }

  template <class E, class Parse>
  void read_enum(const std::string& key, E& out, Parse parse, const char* allowed) {
    std::string name;
    if (!get(key)) return;
    read(key, name);
    auto parsed = parse(name);
    if (!parsed) fail(where(key), "unknown value '" + name + "' (allowed: " + allowed + ")");
    out = *parsed;
  }

  std::optional<Section> child(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return Section(*v, where(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
std::optional<E> by_name(std::string_view name, std::initializer_list<E> values) {
  for (E v : values) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

void read_fees(Section& parent, const std::string& key, FeeSchedule& fees) {
  auto s = parent.child(key);
  if (!s) return;
  s->read("P_B", fees.buyer_subscription);
  s->read("P_S", fees.seller_subscription);
  s->read("P_R", fees.referral_rate);
  s->finish();
}

void read_cap(Section& s, const std::string& key, std::optional<double>& cap) {
  const json* v = s.get(key);
  if (!v) return;
  if (v->is_null()) {
    cap.reset();
    return;
  }
  double x = 0.0;
  s.read(key, x);
  cap = x;
}

json fees_json(const FeeSchedule& f) {
  return json{{"P_B", f.buyer_subscription}, {"P_S", f.seller_subscription}, {"P_R", f.referral_rate}};
}

json cap_json(const std::optional<double>& c) { return c ? json(*c) : json(nullptr); }

json to_json(const EnvConfig& c) {
  json j;
  j["market"] = {{"structure", to_string(c.market.structure)},
                 {"n_buyers", c.market.n_buyers},
                 {"n_sellers", c.market.n_sellers},
                 {"rho", c.market.rho},
                 {"utility_scale", c.market.utility_scale},
                 {"query_variance", c.market.query_variance}};
  j["shock"] = {{"enabled", c.shock.enabled},
                {"pre", c.shock.pre},
                {"post", c.shock.post},
                {"intensity_min", c.shock.intensity_min},
                {"intensity_max", c.shock.intensity_max},
                {"base_friction", c.shock.base_friction},
                {"constant_friction", c.shock.constant_friction}};
  j["dynamics"] = {{"epochs", c.epochs}, {"timesteps", c.timesteps}, {"warmup_friction", c.warmup_friction}};
  j["subscription"] = {{"p_wake", c.subscription.p_wake},
                       {"sleepers_accrue_inertia", c.subscription.sleepers_accrue_inertia},
                       {"decision_mode", to_string(c.subscription.mode)},
                       {"inertia_bound", c.inertia_bound}};
  j["platform"] = {{"mode", to_string(c.mode)},
                   {"enabled", c.platform_enabled},
                   {"strategy",
                    {{"rule", to_string(c.fixed_strategy.rule)}, {"threshold_tick", c.fixed_strategy.threshold_tick}}},
                   {"fees", fees_json(c.fixed_fees)},
                   {"tracker_update", to_string(c.tracker_update)},
                   {"time_features", c.time_features},
                   {"discount", c.discount}};
  j["regulation"] = {{"kind", to_string(c.regime.kind)},
                     {"alpha", c.regime.alpha},
                     {"tax_category", to_string(c.regime.tax_category)},
                     {"tax_rate", c.regime.tax_rate},
                     {"caps",
                      {{"P_B", cap_json(c.regime.caps.buyer_subscription)},
                       {"P_S", cap_json(c.regime.caps.seller_subscription)},
                       {"P_R", cap_json(c.regime.caps.referral_rate)}}},
                     {"frozen", fees_json(c.regime.frozen)}};
  return j;
}

EnvConfig from_json(const json& j) {
  EnvConfig c;
  Section root(j, "");
  if (auto s = root.child("market")) {
    s->read_enum("structure", c.market.structure, parse_structure_kind, "uniform, core_and_niche, two_core");
    s->read("n_buyers", c.market.n_buyers);
    s->read("n_sellers", c.market.n_sellers);
    s->read("rho", c.market.rho);
    s->read("utility_scale", c.market.utility_scale);
    s->read("query_variance", c.market.query_variance);
    s->finish();
  }
  if (auto s = root.child("shock")) {
    s->read("enabled", c.shock.enabled);
    s->read("pre", c.shock.pre);
    s->read("post", c.shock.post);
    s->read("intensity_min", c.shock.intensity_min);
    s->read("intensity_max", c.shock.intensity_max);
    s->read("base_friction", c.shock.base_friction);
    s->read("constant_friction", c.shock.constant_friction);
    s->finish();
  }
  if (auto s = root.child("dynamics")) {
    s->read("epochs", c.epochs);
    s->read("timesteps", c.timesteps);
    s->read("warmup_friction", c.warmup_friction);
    s->finish();
  }
  if (auto s = root.child("subscription")) {
    s->read("p_wake", c.subscription.p_wake);
    s->read("sleepers_accrue_inertia", c.subscription.sleepers_accrue_inertia);
    s->read_enum(
        "decision_mode", c.subscription.mode,
        [](std::string_view n) { return by_name(n, {DecisionMode::logit, DecisionMode::best_response}); },
        "logit, best_response");
    s->read("inertia_bound", c.inertia_bound);
    s->finish();
  }
  if (auto s = root.child("platform")) {
    s->read_enum("mode", c.mode, parse_env_mode, "fee_setting, matching");
    s->read("enabled", c.platform_enabled);
    if (auto st = s->child("strategy")) {
      st->read_enum(
          "rule", c.fixed_strategy.rule,
          [](std::string_view n) { return by_name(n, {MatchingRule::seller_aware, MatchingRule::profit_driven}); },
          "seller_aware, profit_driven");
      st->read("threshold_tick", c.fixed_strategy.threshold_tick);
      st->finish();
    }
    read_fees(*s, "fees", c.fixed_fees);
    s->read_enum(
        "tracker_update", c.tracker_update,
        [](std::string_view n) {
          return by_name(n, {TrackerUpdate::on_transaction, TrackerUpdate::on_recommendation});
        },
        "on_transaction, on_recommendation");
    s->read("time_features", c.time_features);
    s->read("discount", c.discount);
    s->finish();
  }
  if (auto s = root.child("regulation")) {
    s->read_enum("kind", c.regime.kind, parse_regime_kind, "laissez_faire, surplus_aware, tax, fee_cap, fee_freeze");
    s->read("alpha", c.regime.alpha);
    s->read_enum("tax_category", c.regime.tax_category, parse_tax_category,
                 "buyer_subs, seller_subs, referrals, all_seller_fees");
    s->read("tax_rate", c.regime.tax_rate);
    if (auto caps = s->child("caps")) {
      read_cap(*caps, "P_B", c.regime.caps.buyer_subscription);
      read_cap(*caps, "P_S", c.regime.caps.seller_subscription);
      read_cap(*caps, "P_R", c.regime.caps.referral_rate);
      caps->finish();
    }
    read_fees(*s, "frozen", c.regime.frozen);
    s->finish();
  }
  root.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

EnvConfig parse_config(std::string_view json_text) { return from_json(parse_json(json_text, "config")); }

std::string dump_config(const EnvConfig& config) { return to_json(config).dump(2) + "\n"; }

EnvConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json(parse_json(buf.str(), path.string()));
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + what);
  }
}

void save_config(const EnvConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << dump_config(config);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

EnvConfig apply_overrides(const EnvConfig& config, std::span<const std::string> overrides) {
  json j = to_json(config);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "': expected path=value");
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    json* node = &j;
    std::string::size_type start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty() || !node->is_object() || !node->contains(key)) {
        throw ConfigError("override '" + o + "': unknown key '" + path.substr(0, dot) + "'");
      }
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = value;
  }
  return from_json(j);
}

std::uint64_t config_hash(const EnvConfig& config) {
  const std::string s = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace platsim
