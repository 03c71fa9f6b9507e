#include "border_forge/http_server.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <spdlog/spdlog.h>

#include <cctype>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>

namespace border_forge {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kIo: return 500;
    default: return 422;
  }
}

namespace {

struct Target {
  std::vector<std::string> segments;
  std::map<std::string, std::string> query;
};

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else if (s[i] == '+') {
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  const std::string_view path = target.substr(0, q);
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto part = path.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (!part.empty()) t.segments.push_back(url_decode(part));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (q != std::string_view::npos) {
    std::string_view rest = target.substr(q + 1);
    while (!rest.empty()) {
      const auto amp = rest.find('&');
      const auto pair = rest.substr(0, amp);
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos) {
        t.query[url_decode(pair)] = "";
      } else {
        t.query[url_decode(pair.substr(0, eq))] = url_decode(pair.substr(eq + 1));
      }
      if (amp == std::string_view::npos) break;
      rest = rest.substr(amp + 1);
    }
  }
  return t;
}

Response make_response(const Request& req, http::status status, std::string body, std::string_view content_type) {
  Response res{status, req.version()};
  res.set(http::field::server, "border_forge");
  res.set(http::field::content_type, beast::string_view(content_type.data(), content_type.size()));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const Request& req, const json& body, http::status status = http::status::ok) {
  return make_response(req, status, body.dump(), "application/json");
}

Response error_response(const Request& req, int status, std::string_view cls, const std::string& message,
                        const std::string& detail) {
  return json_response(req, {{"class", cls}, {"message", message}, {"detail", detail}},
                       static_cast<http::status>(status));
}

Response error_response(const Request& req, const Error& e) {
  std::string detail = e.detail();
  if (e.border_index()) detail += (detail.empty() ? "" : "; ") + ("border " + std::to_string(*e.border_index()));
  return error_response(req, http_status_for(e.code()), e.class_name(), e.what(), detail);
}

json parse_body(const Request& req) {
  if (req.body().empty()) return json::object();
  try {
    json j = json::parse(req.body());
    if (!j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "malformed JSON at byte " + std::to_string(e.byte), e.what());
  }
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw Error(ErrorCode::kParse, std::string("expected number field '") + key + "'");
  return j[key].get<double>();
}

WorldPoint point_field(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error(ErrorCode::kParse, std::string("expected [x, y] for '") + key + "'");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Eigen::Vector3d vec3_field(const json& j, const char* key, Eigen::Vector3d fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array() || v.size() != 3) throw Error(ErrorCode::kParse, std::string("expected [a, b, c] for '") + key + "'");
  for (const auto& e : v)
    if (!e.is_number()) throw Error(ErrorCode::kParse, std::string("expected [a, b, c] for '") + key + "'");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".txt") return "text/plain";
  return "application/octet-stream";
}

std::optional<PlanRequest> plan_query(const Target& t) {
  const auto s = t.query.find("start");
  const auto g = t.query.find("goal");
  if (s == t.query.end() && g == t.query.end()) return std::nullopt;
  if (s == t.query.end() || g == t.query.end()) throw Error(ErrorCode::kParse, "start and goal must be given together");
  return PlanRequest{parse_point(s->second), parse_point(g->second)};
}

json path_json(const Path& path) {
  json pts = json::array();
  for (const auto& p : path.points) pts.push_back({p.x, p.y});
  return {{"length", path.length}, {"cost", path.cost}, {"points", pts}};
}

class Router {
 public:
  Router(TeachService& service, std::filesystem::path static_dir)
      : service_(service), static_dir_(std::move(static_dir)) {}

  Response handle(const Request& req) {
    try {
      return dispatch(req);
    } catch (const Error& e) {
      return error_response(req, e);
    } catch (const std::exception& e) {
      spdlog::error("request {} failed: {}", std::string(req.target()), e.what());
      return error_response(req, 500, "internal", e.what(), "");
    }
  }

 private:
  Response dispatch(const Request& req) {
    const Target t = parse_target(std::string(req.target()));
    const auto& s = t.segments;
    const auto method = req.method();

    if (method == http::verb::options) {
      Response res = make_response(req, http::status::no_content, "", "text/plain");
      res.set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
      res.set(http::field::access_control_allow_headers, "Content-Type");
      return res;
    }
    if (s.size() == 1 && s[0] == "healthz") {
      require(method, http::verb::get);
      return json_response(req, {{"status", "ok"}});
    }
    if (s.size() == 1 && s[0] == "maps") {
      require(method, http::verb::get);
      return json_response(req, {{"maps", service_.map_names()}});
    }
    if (!s.empty() && s[0] == "sessions") return sessions(req, t);
    if (method == http::verb::get && !static_dir_.empty()) return static_file(req, s);
    throw Error(ErrorCode::kNotFound, "no such route", std::string(req.target()));
  }

  Response sessions(const Request& req, const Target& t) {
    const auto& s = t.segments;
    const auto method = req.method();
    if (s.size() == 1) {
      if (method == http::verb::get) {
        json list = json::array();
        for (const auto& info : service_.list_sessions()) list.push_back(info.to_json());
        return json_response(req, {{"sessions", list}});
      }
      require(method, http::verb::post);
      const json body = parse_body(req);
      const std::string map = body.value("map", std::string("default"));
      const std::string id = service_.create_session(map);
      return json_response(req, service_.session_info(id).to_json(), http::status::created);
    }

    const std::string& id = s[1];
    if (s.size() == 2) {
      require(method, http::verb::get);
      return json_response(req, service_.session_info(id).to_json());
    }
    if (s.size() != 3) throw Error(ErrorCode::kNotFound, "no such route", std::string(req.target()));
    const std::string& action = s[2];

    if (action == "points") {
      require(method, http::verb::post);
      const json body = parse_body(req);
      service_.add_draft_point(id, {number_field(body, "x"), number_field(body, "y")});
      return json_response(req, service_.session_info(id).to_json());
    }
    if (action == "meta") {
      require(method, http::verb::post);
      const json body = parse_body(req);
      DraftMeta meta;
      if (body.contains("closed")) {
        if (!body["closed"].is_boolean()) throw Error(ErrorCode::kParse, "expected boolean field 'closed'");
        meta.closed = body["closed"].get<bool>();
      }
      if (body.contains("seed")) {
        if (body["seed"].is_null()) {
          meta.clear_seed = true;
        } else {
          meta.seed = point_field(body["seed"], "seed");
        }
      }
      if (body.contains("delta")) meta.delta = number_field(body, "delta");
      service_.set_draft_meta(id, meta);
      return json_response(req, service_.session_info(id).to_json());
    }
    if (action == "draft") {
      require(method, http::verb::delete_);
      service_.clear_draft(id);
      return json_response(req, service_.session_info(id).to_json());
    }
    if (action == "commit") {
      require(method, http::verb::post);
      const CommitSummary summary = service_.commit_draft(id);
      json body = summary.to_json();
      body["session"] = service_.session_info(id).to_json();
      return json_response(req, body);
    }
    if (action == "undo") {
      require(method, http::verb::post);
      service_.undo_last(id);
      return json_response(req, service_.session_info(id).to_json());
    }
    if (action == "render.png") {
      require(method, http::verb::get);
      const RenderFrame frame = service_.render(id, plan_query(t));
      Response res = make_response(req, http::status::ok, {}, "image/png");
      const auto bytes = encode_png(frame.image);
      res.body().assign(bytes.begin(), bytes.end());
      res.set("X-Revision", std::to_string(frame.revision));
      res.set("X-Plan-Status", plan_status_name(frame.plan_status));
      if (frame.path) res.set("X-Path-Length", format_double(frame.path->length));
      res.set(http::field::cache_control, "no-store");
      res.set(http::field::access_control_expose_headers, "X-Revision, X-Plan-Status, X-Path-Length");
      res.prepare_payload();
      return res;
    }
    if (action == "plan") {
      require(method, http::verb::get);
      const auto request = plan_query(t);
      if (!request) throw Error(ErrorCode::kParse, "start and goal are required");
      return json_response(req, path_json(service_.plan(id, *request)));
    }
    if (action == "export") {
      require(method, http::verb::get);
      return make_response(req, http::status::ok, serialize_script(service_.export_session(id)),
                           "application/json");
    }
    if (action == "pose-ray") {
      require(method, http::verb::post);
      const json body = parse_body(req);
      PoseRay ray;
      ray.sos_from_tango = Pose3::from_xyz_rpy(vec3_field(body, "xyz", Eigen::Vector3d::Zero()),
                                               vec3_field(body, "rpy", Eigen::Vector3d::Zero()));
      ray.direction = vec3_field(body, "direction", -Eigen::Vector3d::UnitZ());
      const bool append = body.value("append", false);
      const WorldPoint hit = service_.pose_ray(id, ray, append);
      return json_response(req, {{"point", {hit.x, hit.y}}, {"session", service_.session_info(id).to_json()}});
    }
    if (action == "events") {
      service_.session_info(id);
      return error_response(req, 426, "upgrade_required", "events require a WebSocket upgrade", "");
    }
    throw Error(ErrorCode::kNotFound, "no such route", std::string(req.target()));
  }

  Response static_file(const Request& req, const std::vector<std::string>& segments) {
    std::filesystem::path rel;
    for (const auto& seg : segments) {
      if (seg == ".." || seg.find('\\') != std::string::npos) throw Error(ErrorCode::kNotFound, "no such file");
      rel /= seg;
    }
    std::filesystem::path file = static_dir_ / rel;
    if (segments.empty() || std::filesystem::is_directory(file)) file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kNotFound, "no such file", rel.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return make_response(req, http::status::ok, buf.str(), mime_type(file));
  }

  static void require(http::verb got, http::verb want) {
    if (got != want) throw MethodNotAllowed{};
  }

 public:
  struct MethodNotAllowed {};

 private:
  TeachService& service_;
  std::filesystem::path static_dir_;
};

// Pushes session events to one WebSocket client.
class EventStream : public std::enable_shared_from_this<EventStream> {
 public:
  EventStream(tcp::socket&& socket, TeachService& service, std::string session_id)
      : ws_(std::move(socket)), service_(service), session_id_(std::move(session_id)) {}

  ~EventStream() {
    if (token_) service_.unsubscribe(token_);
  }

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&EventStream::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<EventStream> weak = shared_from_this();
    auto exec = ws_.get_executor();
    token_ = service_.subscribe([weak, exec, id = session_id_](const SessionEvent& e) {
      if (e.session_id != id) return;
      net::post(exec, [weak, text = e.to_json().dump()] {
        if (auto self = weak.lock()) self->send(text);
      });
    });
    try {
      const auto info = service_.session_info(session_id_);
      send(SessionEvent{session_id_, info.revision, "hello"}.to_json().dump());
    } catch (const Error&) {
      return;
    }
    do_read();
  }

  void send(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&EventStream::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  // Client messages are ignored; reading keeps close frames and pings flowing.
  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&EventStream::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    buffer_.consume(buffer_.size());
    do_read();
  }

  websocket::stream<beast::tcp_stream> ws_;
  TeachService& service_;
  std::string session_id_;
  std::uint64_t token_ = 0;
  std::deque<std::string> queue_;
  beast::flat_buffer buffer_;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket&& socket, TeachService& service, Router& router)
      : stream_(std::move(socket)), service_(service), router_(router) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&Connection::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec) return;
    spdlog::debug("{} {}", std::string(req_.method_string()), std::string(req_.target()));

    if (websocket::is_upgrade(req_)) {
      const Target t = parse_target(std::string(req_.target()));
      if (t.segments.size() == 3 && t.segments[0] == "sessions" && t.segments[2] == "events") {
        try {
          service_.session_info(t.segments[1]);
        } catch (const Error& e) {
          return write(error_response(req_, e));
        }
        stream_.expires_never();
        std::make_shared<EventStream>(stream_.release_socket(), service_, t.segments[1])->run(std::move(req_));
        return;
      }
      return write(error_response(req_, 404, "not_found", "no WebSocket endpoint here", std::string(req_.target())));
    }

    Response res;
    try {
      res = router_.handle(req_);
    } catch (const Router::MethodNotAllowed&) {
      res = error_response(req_, 405, "method_not_allowed", "method not allowed", std::string(req_.target()));
    }
    write(std::move(res));
  }

  void write(Response res) {
    res_ = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&Connection::on_write, shared_from_this(), res_->need_eof()));
  }

  void on_write(bool close_after, beast::error_code ec, std::size_t) {
    if (ec) return;
    if (close_after) return close();
    res_.reset();
    do_read();
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  Request req_;
  std::shared_ptr<Response> res_;
  TeachService& service_;
  Router& router_;
};

}  // namespace

struct HttpServer::Impl {
  Impl(TeachService& service, ServerOptions opts)
      : service(service), options(std::move(opts)), router(service, options.static_dir), acceptor(ioc) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != net::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
        if (!acceptor.is_open()) return;
      } else {
        std::make_shared<Connection>(std::move(socket), service, router)->run();
      }
      do_accept();
    });
  }

  TeachService& service;
  ServerOptions options;
  Router router;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopping = false;
  bool stopped = false;
};

HttpServer::HttpServer(TeachService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
  Impl& s = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(s.options.address, ec);
  if (ec) throw Error(ErrorCode::kInvalidArgument, "invalid listen address", s.options.address);
  const tcp::endpoint endpoint{address, s.options.port};
  const std::string where = s.options.address + ":" + std::to_string(s.options.port);

  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(endpoint, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    s.acceptor.close();
    throw Error(ErrorCode::kIo, "cannot listen on " + where, ec.message());
  }
  s.do_accept();
  const int n = std::max(1, s.options.threads);
  for (int i = 0; i < n; ++i) s.threads.emplace_back([&s] { s.ioc.run(); });
  spdlog::debug("listening on {}:{}", s.options.address, port());
}

unsigned short HttpServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

void HttpServer::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.mutex);
    if (s.stopping) return;
    s.stopping = true;
  }
  net::post(s.ioc, [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
  });
  s.ioc.stop();
  for (auto& t : s.threads) {
    if (t.joinable()) t.join();
  }
  s.threads.clear();
  {
    std::lock_guard lock(s.mutex);
    s.stopped = true;
  }
  s.stopped_cv.notify_all();
}

void HttpServer::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

}  // namespace border_forge
