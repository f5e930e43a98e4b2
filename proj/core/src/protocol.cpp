#include "platsim/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "platsim/config.hpp"

namespace platsim::protocol {

using nlohmann::json;

std::string format_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("protocol: non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

class Writer {
 public:
  Writer() = default;
  explicit Writer(const char* type) { field("type", type); }

  Writer& key(const char* k) {
    if (!first_) out_ += ',';
    first_ = false;
    string(k);
    out_ += ':';
    return *this;
  }

  Writer& field(const char* k, const std::string& v) { return key(k).string(v); }
  Writer& field(const char* k, const char* v) { return key(k).string(v); }
  Writer& field(const char* k, bool v) {
    key(k);
    out_ += v ? "true" : "false";
    return *this;
  }
  Writer& field(const char* k, std::int64_t v) {
    key(k);
    out_ += std::to_string(v);
    return *this;
  }
  Writer& field(const char* k, std::uint64_t v) {
    key(k);
    out_ += std::to_string(v);
    return *this;
  }
  Writer& field(const char* k, int v) { return field(k, static_cast<std::int64_t>(v)); }
  Writer& field(const char* k, double v) {
    key(k);
    out_ += format_double(v);
    return *this;
  }
  Writer& field(const char* k, const std::vector<double>& v) {
    key(k);
    out_ += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out_ += ',';
      out_ += format_double(v[i]);
    }
    out_ += ']';
    return *this;
  }

  Writer& string(std::string_view s) {
    out_ += '"';
    for (char c : s) {
      const auto u = static_cast<unsigned char>(c);
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (u < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", u);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
    return *this;
  }

  Writer& raw(std::string_view s) {
    out_ += s;
    return *this;
  }

  std::string finish() {
    out_ += '}';
    return std::move(out_);
  }

 private:
  std::string out_ = "{";
  bool first_ = true;
};

std::string fields_json(const std::vector<LayoutField>& fields) {
  std::string out = "[";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += Writer().field("name", fields[i].name).field("offset", fields[i].offset).field("length", fields[i].length).finish();
  }
  return out + "]";
}

std::string info_json(const StepInfo& info) {
  return Writer()
      .field("epoch", info.epoch)
      .field("stage", info.stage)
      .field("friction", info.friction)
      .field("buyer_subscriptions", info.buyer_subscriptions)
      .field("seller_subscriptions", info.seller_subscriptions)
      .field("referrals", info.referrals)
      .field("tax", info.tax)
      .field("surplus_bonus", info.surplus_bonus)
      .field("welfare", info.welfare)
      .field("ledger_digest", info.ledger_digest)
      .finish();
}

struct Serializer {
  std::string operator()(const Hello& m) const {
    return Writer("hello").field("protocol_version", m.protocol_version).finish();
  }
  std::string operator()(const Reset& m) const {
    Writer w("reset");
    w.field("config_ref", m.config_ref).field("seed", m.seed);
    if (m.mode) w.field("mode", to_string(*m.mode));
    return w.finish();
  }
  std::string operator()(const Step& m) const { return Writer("step").field("action", m.action).finish(); }
  std::string operator()(const Close&) const { return Writer("close").finish(); }
  std::string operator()(const Ready& m) const {
    Writer w("ready");
    w.field("protocol_version", m.protocol_version)
        .field("mode", to_string(m.mode))
        .field("action_count", m.action_count)
        .key("observation_layout")
        .raw("{\"length\":" + std::to_string(m.observation_length) + ",\"fields\":" + fields_json(m.fields) + "}")
        .field("observation", m.observation);
    return w.finish();
  }
  std::string operator()(const State& m) const {
    Writer w("state");
    w.field("observation", m.observation).field("reward", m.reward).field("done", m.done).key("info").raw(
        info_json(m.info));
    return w.finish();
  }
  std::string operator()(const Error& m) const {
    return Writer("error").field("code", m.code).field("detail", m.detail).finish();
  }
};

[[noreturn]] void bad(const std::string& what) { throw ParseError(what); }

// Strict object access: every key must be consumed.
class Obj {
 public:
  Obj(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) bad(what_ + ": expected an object");
  }

  const json& need(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end()) bad(what_ + ": missing field '" + k + "'");
    return *it;
  }
  const json* maybe(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string str(const std::string& k) {
    const json& v = need(k);
    if (!v.is_string()) bad(what_ + ": '" + k + "' must be a string");
    return v.get<std::string>();
  }
  std::int64_t integer(const std::string& k) {
    const json& v = need(k);
    if (!v.is_number_integer()) bad(what_ + ": '" + k + "' must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      bad(what_ + ": '" + k + "' out of range");
    }
    return v.get<std::int64_t>();
  }
  int int32(const std::string& k) {
    const auto v = integer(k);
    if (v < INT32_MIN || v > INT32_MAX) bad(what_ + ": '" + k + "' out of range");
    return static_cast<int>(v);
  }
  std::uint64_t unsigned64(const std::string& k) {
    const json& v = need(k);
    if (!v.is_number_unsigned()) bad(what_ + ": '" + k + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  double number(const std::string& k) { return as_double(need(k), k); }
  bool boolean(const std::string& k) {
    const json& v = need(k);
    if (!v.is_boolean()) bad(what_ + ": '" + k + "' must be a boolean");
    return v.get<bool>();
  }
  std::vector<double> numbers(const std::string& k) {
    const json& v = need(k);
    if (!v.is_array()) bad(what_ + ": '" + k + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(as_double(x, k));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) bad(what_ + ": unknown field '" + it.key() + "'");
    }
  }

 private:
  double as_double(const json& v, const std::string& k) const {
    if (!v.is_number()) bad(what_ + ": '" + k + "' must be a number");
    return v.get<double>();
  }

  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

Message parse_ready(Obj& o) {
  Ready r;
  r.protocol_version = o.int32("protocol_version");
  const std::string mode = o.str("mode");
  const auto m = parse_env_mode(mode);
  if (!m) bad("ready: unknown mode '" + mode + "'");
  r.mode = *m;
  r.action_count = o.int32("action_count");
  Obj layout(o.need("observation_layout"), "observation_layout");
  r.observation_length = layout.int32("length");
  const json& fields = layout.need("fields");
  if (!fields.is_array()) bad("observation_layout: 'fields' must be an array");
  for (const auto& f : fields) {
    Obj fo(f, "observation_layout field");
    r.fields.push_back({fo.str("name"), fo.int32("offset"), fo.int32("length")});
    fo.finish();
  }
  layout.finish();
  r.observation = o.numbers("observation");
  return r;
}

Message parse_state(Obj& o) {
  State s;
  s.observation = o.numbers("observation");
  s.reward = o.number("reward");
  s.done = o.boolean("done");
  Obj i(o.need("info"), "info");
  s.info.epoch = i.int32("epoch");
  s.info.stage = i.str("stage");
  s.info.friction = i.number("friction");
  s.info.buyer_subscriptions = i.number("buyer_subscriptions");
  s.info.seller_subscriptions = i.number("seller_subscriptions");
  s.info.referrals = i.number("referrals");
  s.info.tax = i.number("tax");
  s.info.surplus_bonus = i.number("surplus_bonus");
  s.info.welfare = i.number("welfare");
  s.info.ledger_digest = i.str("ledger_digest");
  i.finish();
  return s;
}

}  // namespace

std::string serialize(const Message& message) { return std::visit(Serializer{}, message); }

const char* type_name(const Message& message) {
  static constexpr const char* names[] = {"hello", "reset", "step", "close", "ready", "state", "error"};
  return names[message.index()];
}

Message parse(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  Obj body(j, "message");
  const std::string type = body.str("type");
  Message out;
  if (type == "hello") {
    out = Hello{body.int32("protocol_version")};
  } else if (type == "reset") {
    Reset r;
    r.config_ref = body.str("config_ref");
    r.seed = body.unsigned64("seed");
    if (body.maybe("mode")) {
      const std::string mode = body.str("mode");
      r.mode = parse_env_mode(mode);
      if (!r.mode) bad("reset: unknown mode '" + mode + "' (allowed: fee_setting, matching)");
    }
    out = r;
  } else if (type == "step") {
    out = Step{body.integer("action")};
  } else if (type == "close") {
    out = Close{};
  } else if (type == "ready") {
    out = parse_ready(body);
  } else if (type == "state") {
    out = parse_state(body);
  } else if (type == "error") {
    Error e;
    e.code = body.str("code");
    e.detail = body.str("detail");
    out = e;
  } else {
    bad("unknown message type '" + type + "'");
  }
  body.finish();
  return out;
}

Ready make_ready(const ObservationLayout& layout, EnvMode mode, int action_count, std::vector<double> observation) {
  Ready r;
  r.mode = mode;
  r.action_count = action_count;
  r.observation_length = layout.length;
  for (const auto& f : layout.fields) r.fields.push_back({f.name, f.offset, f.length});
  r.observation = std::move(observation);
  return r;
}

StepInfo make_info(const PlatformEnv& env, const StepResult& result) {
  const auto& rec = env.record().epochs.back();
  StepInfo info;
  info.epoch = rec.ledger.epoch;
  info.stage = to_string(rec.stage);
  info.friction = rec.ledger.friction;
  info.buyer_subscriptions = result.breakdown.revenue.buyer_subscriptions;
  info.seller_subscriptions = result.breakdown.revenue.seller_subscriptions;
  info.referrals = result.breakdown.revenue.referrals;
  info.tax = result.breakdown.tax;
  info.surplus_bonus = result.breakdown.surplus_bonus;
  info.welfare = rec.welfare.welfare;
  info.ledger_digest = hex64(result.ledger_digest);
  return info;
}

}  // namespace platsim::protocol
