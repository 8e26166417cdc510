#include <cmath>

#include "holocycles/json_io.hpp"
#include "support.hpp"

using namespace holocycles;
namespace jio = holocycles::json_io;

namespace {

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("field parsing") {
  const auto j = jio::parse(R"({"p": [{"i": 1, "j": 0, "c": 1}], "q": [{"i": 0, "j": 1, "c": [0.5, 2]}]})", "field");
  const auto f = jio::get_field(j, "$");
  CHECK(f.degree() == 1);
  CHECK(f.P(2.0, 3.0) == Complex{2.0});
  CHECK(f.Q(2.0, 1.0) == Complex{0.5, 2.0});

  CHECK(message_of([] { jio::parse("{\"p\": [", "broken.json"); }).find("broken.json: malformed JSON") != std::string::npos);
  REQUIRE_CODE(jio::parse("{", "x"), ErrorCode::InvalidArgument);

  const auto bad_c = jio::parse(R"({"p": [{"i": 1, "j": 0, "c": "one"}], "q": []})", "f");
  CHECK(message_of([&] { jio::get_field(bad_c, "$"); }).find("at $.p[0].c:") != std::string::npos);
  const auto missing = jio::parse(R"({"p": [{"i": 1, "c": 1}], "q": []})", "f");
  CHECK(message_of([&] { jio::get_field(missing, "$"); }).find("at $.p[0]: missing key \"j\"") != std::string::npos);
  const auto neg = jio::parse(R"({"p": [{"i": -1, "j": 0, "c": 1}], "q": []})", "f");
  CHECK(message_of([&] { jio::get_field(neg, "$"); }).find("at $.p[0]") != std::string::npos);
  const auto empty = jio::parse(R"({"p": [], "q": []})", "f");
  REQUIRE_CODE(jio::get_field(empty, "$"), ErrorCode::InvalidArgument);
  CHECK(jio::get_complex(jio::Json(2.5), "$") == Complex{2.5});
  REQUIRE_CODE(jio::get_complex(jio::Json::array({1.0}), "$"), ErrorCode::InvalidArgument);
  REQUIRE_CODE(jio::get_int(jio::Json(1.5), "$"), ErrorCode::InvalidArgument);
}

TEST_CASE("path parsing") {
  const auto circle = jio::get_path(jio::parse(R"({"kind": "circle", "turns": 2, "radius": 0.5})", "p"), "$");
  CHECK(std::abs(circle.start() - 0.5) < 1e-15);
  CHECK(std::abs(circle.end() - 0.5) < 1e-12);
  CHECK(std::abs(circle.point(0.125) - Complex{0.0, 0.5}) < 1e-12);

  const auto loop = jio::get_path(jio::parse(R"({"kind": "loop", "center": 3, "start": 1})", "p"), "$");
  CHECK(std::abs(loop.point(0.5) - 5.0) < 1e-12);

  const auto poly = jio::get_path(jio::parse(R"([[0, [1, 0]], [1, [2, 0]]])", "p"), "$");
  CHECK(std::abs(poly.point(0.5) - 1.5) < 1e-15);

  const auto segs = jio::get_path(jio::parse(R"({"kind": "segments", "segments": [
      {"kind": "line", "from": 1, "to": 2},
      {"kind": "arc", "center": 0, "radius": 2, "theta0": 0, "theta1": 3.141592653589793}]})", "p"), "$");
  CHECK(std::abs(segs.point(0.25) - 1.5) < 1e-12);
  CHECK(std::abs(segs.end() + 2.0) < 1e-12);

  CHECK(message_of([] { jio::get_path(jio::parse(R"({"kind": "spiral"})", "p"), "$"); }).find("at $.kind:") != std::string::npos);
  CHECK(message_of([] {
          jio::get_path(jio::parse(R"({"kind": "segments", "segments": [{"kind": "line", "from": 1}]})", "p"), "$");
        }).find("at $.segments[0]: missing key \"to\"") != std::string::npos);
  REQUIRE_CODE(jio::get_path(jio::parse(R"({"kind": "circle", "radius": -1})", "p"), "$"), ErrorCode::InvalidArgument);
}

TEST_CASE("deterministic writer") {
  jio::Json j;
  j["name"] = "demo";
  j["value"] = 0.1;
  j["nan"] = std::nan("");
  j["pair"] = jio::complex_json({1.0 / 3.0, -2.0});
  j["list"] = jio::Json::array({jio::Json{{"n", 1}}, jio::Json{{"n", 2}}});
  j["empty"] = jio::Json::array();
  const auto text = jio::to_text(j);
  CHECK(text == jio::to_text(j));
  CHECK(text.find("\"value\": 0.10000000000000001") != std::string::npos);
  CHECK(text.find("\"nan\": null") != std::string::npos);
  CHECK(text.find("[0.33333333333333331, -2]") != std::string::npos);
  CHECK(text.find("\"empty\": []") != std::string::npos);
  CHECK(text.back() == '\n');
  // Keys keep insertion order.
  CHECK(text.find("\"name\"") < text.find("\"value\""));
  // Round trip is lossless.
  const auto back = jio::parse(text, "t");
  CHECK(back["value"].get<double>() == 0.1);
  CHECK(back["pair"][0].get<double>() == 1.0 / 3.0);
  CHECK(jio::to_text(back) == text);
}
