#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/protocol_gen.hpp"
#include "platsim/protocol.hpp"

using namespace platsim;
using namespace platsim::protocol;

TEST_SUITE("protocol") {
  TEST_CASE("wire format") {
    CHECK(serialize(Hello{}) == R"({"type":"hello","protocol_version":1})");
    CHECK(serialize(Step{3}) == R"({"type":"step","action":3})");
    CHECK(serialize(Close{}) == R"({"type":"close"})");
    CHECK(serialize(Reset{"default", 7, EnvMode::matching}) ==
          R"({"type":"reset","config_ref":"default","seed":7,"mode":"matching"})");
    CHECK(serialize(Reset{"", 7, std::nullopt}) == R"({"type":"reset","config_ref":"","seed":7})");
    CHECK(serialize(Error{"order", "a \"b\"\n"}) == R"({"type":"error","code":"order","detail":"a \"b\"\n"})");
  }

  TEST_CASE("doubles") {
    CHECK(format_double(1.0) == "1.0");
    CHECK(format_double(-0.0) == "-0.0");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1e300) == "1.0000000000000001e+300");
    CHECK_THROWS_AS(format_double(NAN), std::invalid_argument);
    CHECK_THROWS_AS(serialize(State{{INFINITY}, 0.0, false, {}}), std::invalid_argument);
  }

  TEST_CASE("parse is order-insensitive") {
    CHECK(parse(R"({"seed":4,"type":"reset","config_ref":"x"})") == Message{Reset{"x", 4, std::nullopt}});
    CHECK(parse(R"( {"action": 12, "type": "step"} )") == Message{Step{12}});
  }

  TEST_CASE("generated messages round trip") {
    test::MessageGenerator gen(1);
    for (int i = 0; i < 3000; ++i) {
      const Message m = gen.next();
      const std::string line = serialize(m);
      CHECK(line.find('\n') == std::string::npos);
      const Message back = parse(line);
      CHECK(back == m);
      CHECK(serialize(back) == line);
    }
  }

  TEST_CASE("malformed lines") {
    const char* bad[] = {
        "",
        "not json",
        "[1,2]",
        R"({"type":"teleport"})",
        R"({"action":1})",
        R"({"type":"step"})",
        R"({"type":"step","action":"1"})",
        R"({"type":"step","action":1.5})",
        R"({"type":"step","action":1,"extra":true})",
        R"({"type":"reset","config_ref":"a","seed":-1})",
        R"({"type":"reset","config_ref":"a","seed":1,"mode":"chaos"})",
        R"({"type":"hello","protocol_version":99999999999})",
        R"({"type":"state","observation":[1,"x"],"reward":0,"done":false,"info":{}})",
        R"({"type":"step","action":1}{"type":"close"})",
    };
    for (const char* line : bad) {
      CAPTURE(line);
      CHECK_THROWS_AS(parse(line), ParseError);
    }
  }

  TEST_CASE("type names") {
    CHECK(std::string(type_name(Hello{})) == "hello");
    CHECK(std::string(type_name(State{})) == "state");
    CHECK(std::string(type_name(Error{})) == "error");
  }

  TEST_CASE("ready mirrors the layout") {
    const auto layout = ObservationLayout::make(2, 3, true);
    const auto r = make_ready(layout, EnvMode::matching, 21);
    CHECK(r.observation_length == layout.length);
    REQUIRE(r.fields.size() == layout.fields.size());
    for (std::size_t i = 0; i < r.fields.size(); ++i) {
      CHECK(r.fields[i].name == layout.fields[i].name);
      CHECK(r.fields[i].offset == layout.fields[i].offset);
    }
    CHECK(r.observation.empty());
  }
}
