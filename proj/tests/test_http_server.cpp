#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <fstream>

#include "border_forge/error.hpp"
#include "border_forge/http_server.hpp"
#include "support/fixtures.hpp"

// After Eigen: <resolv.h> defines a _res macro that Eigen uses as a name.
#include <httplib.h>

using namespace border_forge;
namespace fx = border_forge::fixtures;
using json = nlohmann::json;

namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct Server {
  TeachService service;
  std::filesystem::path static_dir = fx::temp_dir("static");
  std::unique_ptr<HttpServer> http;

  Server() {
    service.register_map("lab", fx::lab_map());
    std::ofstream(static_dir / "index.html") << "<!doctype html><title>console</title>";
    std::filesystem::create_directories(static_dir / "js");
    std::ofstream(static_dir / "js" / "app.js") << "console.log('hi');";
    http = std::make_unique<HttpServer>(service, ServerOptions{"127.0.0.1", 0, static_dir, 2});
    http->start();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", http->port());
    c.set_read_timeout(5, 0);
    return c;
  }
};

json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

void check_error(const httplib::Result& r, int status, const std::string& cls) {
  REQUIRE(r);
  CHECK(r->status == status);
  const json j = json::parse(r->body);
  CHECK(j["class"] == cls);
  CHECK(j.contains("message"));
  CHECK(j.contains("detail"));
}

std::string new_session(httplib::Client& c) {
  const auto r = c.Post("/sessions", R"({"map": "lab"})", "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 201);
  return json::parse(r->body)["id"];
}

void post_point(httplib::Client& c, const std::string& id, WorldPoint p) {
  const auto r = c.Post("/sessions/" + id + "/points", json{{"x", p.x}, {"y", p.y}}.dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 200);
}

void draw(httplib::Client& c, const std::string& id, const VirtualBorder& v) {
  for (const auto& p : v.chain.points) post_point(c, id, p);
  const json meta{{"closed", v.chain.closed}, {"seed", {v.seed.x, v.seed.y}}, {"delta", v.delta}};
  const auto r = c.Post("/sessions/" + id + "/meta", meta.dump(), "application/json");
  REQUIRE(r);
  REQUIRE(r->status == 200);
}

class EventClient {
 public:
  EventClient(unsigned short port, const std::string& target) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", target);
  }
  json next() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
  void close() { ws_.close(websocket::close_code::normal); }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

}  // namespace

TEST_CASE("health and session listing") {
  Server s;
  auto c = s.client();
  const auto health = c.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(body_of(health)["status"] == "ok");

  const std::string id = new_session(c);
  const json list = body_of(c.Get("/sessions"));
  REQUIRE(list["sessions"].size() == 1);
  CHECK(list["sessions"][0]["id"] == id);

  const json info = body_of(c.Get("/sessions/" + id));
  CHECK(info["revision"] == 0);
  CHECK(info["geometry"]["width"] == fx::kLabWidth);
  CHECK(info["geometry"]["resolution"] == fx::kLabResolution);
  CHECK(body_of(c.Get("/maps"))["maps"].size() == 2);
}

TEST_CASE("teaching loop over HTTP") {
  Server s;
  auto c = s.client();
  const std::string id = new_session(c);

  draw(c, id, fx::carpet_border(1.0));
  const json draft = body_of(c.Get("/sessions/" + id));
  CHECK(draft["draft"]["points"].size() == 4);
  CHECK(draft["draft"]["closed"] == true);
  CHECK(draft["revision"] == 5);

  const auto plan_target = "/sessions/" + id + "/render.png?start=0.4,1.75&goal=5.7,1.75";
  const auto before = c.Get(plan_target);
  REQUIRE(before);
  CHECK(before->status == 200);
  CHECK(before->get_header_value("Content-Type") == "image/png");
  CHECK(before->get_header_value("X-Revision") == "5");
  CHECK(before->get_header_value("X-Plan-Status") == "ok");
  const RgbImage img = decode_png({before->body.begin(), before->body.end()});
  CHECK(img.width() == fx::kLabWidth);
  CHECK(img == s.service.render(id, PlanRequest{fx::kLabStart, fx::kLabGoal}).image);

  const json commit = body_of(c.Post("/sessions/" + id + "/commit", "", "application/json"));
  CHECK(commit["revision"] == 6);
  CHECK(commit["connected_cells"].get<std::size_t>() > 0);
  CHECK(commit["session"]["borders"] == 1);

  const auto blocked = c.Get("/sessions/" + id + "/render.png?start=0.4,1.75&goal=3.05,1.75");
  REQUIRE(blocked);
  CHECK(blocked->get_header_value("X-Plan-Status") == "no_path");

  const auto exported = c.Get("/sessions/" + id + "/export");
  REQUIRE(exported);
  const BorderScript script = parse_script(exported->body);
  CHECK(apply_script(fx::lab_map(), script).current() == s.service.current_map(id));

  const json undone = body_of(c.Post("/sessions/" + id + "/undo", "", "application/json"));
  CHECK(undone["revision"] == 7);
  CHECK(undone["borders"] == 0);
  CHECK(s.service.current_map(id) == fx::lab_map());

  const json plan = body_of(c.Get("/sessions/" + id + "/plan?start=0.4,1.75&goal=5.7,1.75"));
  CHECK(plan["length"].get<double>() > 5.0);

  const json cleared = body_of(c.Delete("/sessions/" + id + "/draft"));
  CHECK(cleared["draft"]["points"].empty());

  const json posed = body_of(c.Post("/sessions/" + id + "/pose-ray",
                                    R"({"xyz": [2, 1, 1], "rpy": [0, 0, 0], "direction": [1, 0, -1], "append": true})",
                                    "application/json"));
  CHECK(posed["point"][0].get<double>() == doctest::Approx(3.0));
  CHECK(posed["session"]["draft"]["points"].size() == 1);
}

TEST_CASE("error bodies") {
  Server s;
  auto c = s.client();
  const std::string id = new_session(c);
  check_error(c.Get("/sessions/nope"), 404, "not_found");
  check_error(c.Post("/sessions", R"({"map": "attic"})", "application/json"), 404, "not_found");
  check_error(c.Post("/sessions/" + id + "/points", "{\"x\": 1", "application/json"), 400, "parse");
  check_error(c.Post("/sessions/" + id + "/points", R"({"x": 100, "y": 1})", "application/json"), 422,
              "out_of_bounds");
  check_error(c.Post("/sessions/" + id + "/meta", R"({"delta": 1.5})", "application/json"), 422, "invalid_delta");
  check_error(c.Post("/sessions/" + id + "/commit", "", "application/json"), 422, "no_draft");
  check_error(c.Post("/sessions/" + id + "/undo", "", "application/json"), 422, "empty_session");
  check_error(c.Get("/sessions/" + id + "/render.png?start=1,1"), 400, "parse");
  check_error(c.Get("/sessions/" + id + "/commit"), 405, "method_not_allowed");
  check_error(c.Get("/sessions/" + id + "/events"), 426, "upgrade_required");

  VirtualBorder v = fx::carpet_border();
  v.seed = v.chain.points[2];
  draw(c, id, v);
  check_error(c.Post("/sessions/" + id + "/commit", "", "application/json"), 422, "seed_on_barrier");
}

TEST_CASE("static assets") {
  Server s;
  auto c = s.client();
  const auto index = c.Get("/");
  REQUIRE(index);
  CHECK(index->status == 200);
  CHECK(index->get_header_value("Content-Type") == "text/html");
  CHECK(index->body.find("console") != std::string::npos);
  const auto js = c.Get("/js/app.js");
  REQUIRE(js);
  CHECK(js->get_header_value("Content-Type") == "application/javascript");
  check_error(c.Get("/missing.css"), 404, "not_found");
  check_error(c.Get("/../secret"), 404, "not_found");
  check_error(c.Get("/js/%2e%2e/%2e%2e/etc/passwd"), 404, "not_found");
}

TEST_CASE("WebSocket events follow revisions") {
  Server s;
  auto c = s.client();
  const std::string id = new_session(c);
  EventClient events(s.http->port(), "/sessions/" + id + "/events");
  const json hello = events.next();
  CHECK(hello["event"] == "hello");
  CHECK(hello["revision"] == 0);

  post_point(c, id, {1, 1});
  json e = events.next();
  CHECK(e["event"] == "draft");
  CHECK(e["revision"] == 1);
  CHECK(e["session"] == id);

  // Events of other sessions are not delivered here.
  const std::string other = new_session(c);
  post_point(c, other, {1, 1});
  draw(c, id, fx::carpet_border());
  std::vector<std::string> seen;
  for (int i = 0; i < 5; ++i) {
    e = events.next();
    CHECK(e["session"] == id);
    CHECK(e["revision"] == i + 2);
    seen.push_back(e["event"]);
  }
  CHECK(seen.back() == "meta");
  c.Post("/sessions/" + id + "/commit", "", "application/json");
  e = events.next();
  CHECK(e["event"] == "commit");
  CHECK(e["revision"] == 7);
  events.close();

  CHECK_THROWS_AS(EventClient(s.http->port(), "/sessions/nope/events"), boost::system::system_error);
}

TEST_CASE("binding an occupied port fails cleanly") {
  Server s;
  TeachService other;
  HttpServer clash(other, ServerOptions{"127.0.0.1", s.http->port(), {}, 1});
  try {
    clash.start();
    FAIL("expected bind failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("stop is idempotent and unblocks wait") {
  Server s;
  std::thread waiter([&] { s.http->wait(); });
  s.http->stop();
  waiter.join();
  s.http->stop();
}
