#include "border_forge/cli.hpp"

#include <CLI11.hpp>

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "border_forge/border_engine.hpp"
#include "border_forge/evaluation.hpp"
#include "border_forge/frames.hpp"
#include "border_forge/http_server.hpp"
#include "border_forge/planner.hpp"
#include "border_forge/raster.hpp"
#include "border_forge/teach_service.hpp"

namespace border_forge {

using json = nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (error_category(code)) {
    case ErrorCategory::kParse: return kExitParse;
    case ErrorCategory::kGeometry: return kExitGeometry;
    case ErrorCategory::kPlanning: return kExitPlanning;
    case ErrorCategory::kOther: break;
  }
  return kExitOther;
}

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("border_forge");
    spdlog::set_default_logger(logger);
  });
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("BORDER_FORGE_LOG")) {
    level = spdlog::level::from_str(env);
    // from_str falls back to off for unknown names; keep warnings instead.
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

namespace {

struct ApplyArgs {
  std::string map, script, out;
  std::string barrier_mode = "occupied";
  bool trinary = false;
};

struct EvalArgs {
  std::string prior, posterior, gt, out;
  bool include_barrier = true;
};

struct PlanArgs {
  std::string map, start, goal, out, region;
  double inflation = kDefaultInflationRadius;
};

struct ServeArgs {
  std::string map, address = "127.0.0.1", static_dir, frames, barrier_mode = "occupied";
  int port = 8080;
  double inflation = kDefaultInflationRadius;
  int threads = 2;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file", path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write file", path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create output directory", dir.string());
}

BarrierMode barrier_mode_from(const std::string& name) {
  return name == "strict" ? BarrierMode::kStrict : BarrierMode::kOccupied;
}

int cmd_apply(const ApplyArgs& a, std::ostream& out) {
  const auto mode = a.trinary ? std::optional<LoadMode>(LoadMode::kTrinary) : std::nullopt;
  const OccupancyGridMap prior = load_map(a.map, mode);
  const BorderScript script = load_script(a.script);
  const BorderSession session = apply_script(prior, script, {barrier_mode_from(a.barrier_mode)});

  const fs::path dir = a.out;
  ensure_dir(dir);
  save_map(session.current(), dir / "posterior.yaml");

  json log = script_to_json(session.script());
  json applied = json::array();
  for (std::size_t i = 0; i < session.applied().size(); ++i) {
    const AppliedBorder& b = session.applied()[i];
    applied.push_back({{"index", i},
                       {"connected_cells", b.connected_cells},
                       {"barrier_cells", b.barrier.count()},
                       {"cells_changed", b.cells_changed}});
  }
  log["applied"] = applied;
  log["barrier_mode"] = a.barrier_mode;
  write_text(dir / "session.json", log.dump(2) + "\n");

  out << json{{"posterior", (dir / "posterior.yaml").string()}, {"borders", session.applied().size()}, {"applied", applied}}
             .dump()
      << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const OccupancyGridMap prior = load_map(a.prior);
  const OccupancyGridMap posterior = load_map(a.posterior);
  const OccupancyGridMap gt_map = load_map(a.gt);

  ExtractOptions options;
  options.include_barrier = a.include_barrier;
  if (!a.include_barrier) {
    // Barrier cells come from replaying the session log written by apply.
    const fs::path log = fs::path(a.posterior).parent_path() / "session.json";
    if (!fs::exists(log)) throw Error(ErrorCode::kIo, "excluding the barrier needs the session log", log.string());
    const json j = json::parse(std::ifstream(log), nullptr, false);
    const BarrierMode mode =
        j.is_object() && j.value("barrier_mode", std::string("occupied")) == "strict" ? BarrierMode::kStrict
                                                                                      : BarrierMode::kOccupied;
    options.barrier = session_barrier(apply_script(prior, load_script(log), {mode}));
  }
  const RegionMask ud = extract_virtual_area(prior, posterior, options);
  RegionMask gt = ground_truth_from_map(gt_map, prior);
  // The border line is excluded from both areas or from neither.
  if (!options.include_barrier) gt.cells.subtract(options.barrier);
  const AccuracyReport report = jaccard(gt, ud);

  const fs::path dir = a.out;
  ensure_dir(dir);
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  render_overlay(prior, gt, ud, dir / "overlay.png");
  out << report.to_json().dump() << "\n";
  return kExitOk;
}

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  const OccupancyGridMap map = load_map(a.map);
  const WorldPoint start = parse_point(a.start);
  const WorldPoint goal = parse_point(a.goal);
  const Path path = plan_path(build_costmap(map, a.inflation), start, goal);

  json pts = json::array();
  for (const auto& p : path.points) pts.push_back({p.x, p.y});
  json result{{"length", path.length}, {"cost", path.cost}, {"waypoints", pts}};

  RgbImage image = render_map(map);
  if (!a.region.empty()) {
    const OccupancyGridMap region_map = load_map(a.region);
    if (!region_map.same_geometry(map)) throw Error(ErrorCode::kGeometryMismatch, "region map geometry differs");
    CellMask region = map.empty_mask();
    for (int row = 0; row < map.height(); ++row)
      for (int col = 0; col < map.width(); ++col)
        if (region_map.is_occupied({col, row})) region.insert({col, row});
    result["crosses_region"] = path_crosses_region(path, region);
    for (const auto& c : region.cells())
      if (!map.is_occupied(c)) paint_cell(image, c, colors::kYellow);
  }
  for (const auto& c : path.cells) paint_cell(image, c, colors::kBlue);

  const fs::path dir = a.out;
  ensure_dir(dir);
  write_text(dir / "path.json", result.dump(2) + "\n");
  write_png(image, dir / "path.png");
  out << result.dump() << "\n";
  return kExitOk;
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  ServiceOptions options;
  options.border.barrier_mode = barrier_mode_from(a.barrier_mode);
  options.inflation_radius = a.inflation;
  if (!a.frames.empty()) options.frames = load_frame_graph(a.frames);
  TeachService service(std::move(options));
  service.register_map_file(a.map);

  ServerOptions server_options;
  server_options.address = a.address;
  server_options.port = static_cast<unsigned short>(a.port);
  server_options.static_dir = a.static_dir;
  server_options.threads = a.threads;
  HttpServer server(service, server_options);
  boost::asio::io_context signal_ioc;
  boost::asio::signal_set signals(signal_ioc, SIGINT, SIGTERM);
  server.start();
  out << json{{"event", "listening"}, {"address", a.address}, {"port", server.port()}}.dump() << std::endl;

  signals.async_wait([&](const boost::system::error_code&, int) { server.stop(); });
  std::thread signal_thread([&] { signal_ioc.run(); });
  server.wait();
  signal_ioc.stop();
  signal_thread.join();
  out << json{{"event", "stopped"}}.dump() << std::endl;
  return kExitOk;
}

void report_error(std::ostream& err, int code, std::string_view cls, const std::string& message,
                  const std::string& detail, std::optional<std::size_t> border_index) {
  err << "error: " << cls << ": " << message;
  if (!detail.empty()) err << " (" << detail << ")";
  if (border_index) err << " [border " << *border_index << "]";
  err << "\n";
  json line{{"level", "error"}, {"class", cls}, {"message", message}, {"detail", detail}, {"exit_code", code}};
  line["border_index"] = border_index ? json(*border_index) : json(nullptr);
  err << line.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Virtual borders for occupancy grid maps", "border_forge"};
  app.require_subcommand(1);

  ApplyArgs apply;
  auto* apply_cmd = app.add_subcommand("apply", "Apply a border script to a map");
  apply_cmd->add_option("--map", apply.map, "Prior map metadata (.yaml)")->required();
  apply_cmd->add_option("--script", apply.script, "Border script (.json)")->required();
  apply_cmd->add_option("--out", apply.out, "Output directory")->required();
  apply_cmd->add_option("--barrier-mode", apply.barrier_mode, "Value written on border cells")
      ->check(CLI::IsMember({"occupied", "strict"}));
  apply_cmd->add_flag("--trinary", apply.trinary, "Force trinary decoding of the prior");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Jaccard accuracy of a posterior against ground truth");
  eval_cmd->add_option("--prior", eval.prior)->required();
  eval_cmd->add_option("--posterior", eval.posterior)->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth map; occupied cells form the area")->required();
  eval_cmd->add_option("--out", eval.out)->required();
  eval_cmd->add_flag("--include-barrier,!--exclude-barrier", eval.include_barrier,
                     "Count border cells as part of the area (default on)");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a path on a map");
  plan_cmd->add_option("--map", plan.map)->required();
  plan_cmd->add_option("--start", plan.start, "x,y in meters")->required();
  plan_cmd->add_option("--goal", plan.goal, "x,y in meters")->required();
  plan_cmd->add_option("--out", plan.out)->required();
  plan_cmd->add_option("--inflation", plan.inflation, "Inflation radius in meters")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--region", plan.region, "Map whose occupied cells mark a region to test for crossing");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the teaching server");
  serve_cmd->add_option("--map", serve.map)->required();
  serve_cmd->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--address", serve.address);
  serve_cmd->add_option("--static", serve.static_dir, "Directory of UI assets");
  serve_cmd->add_option("--frames", serve.frames, "Frame graph (.yaml)");
  serve_cmd->add_option("--inflation", serve.inflation)->check(CLI::NonNegativeNumber);
  serve_cmd->add_option("--barrier-mode", serve.barrier_mode)->check(CLI::IsMember({"occupied", "strict"}));
  serve_cmd->add_option("--threads", serve.threads)->check(CLI::Range(1, 64));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, kExitParse, "usage", e.what(), "", std::nullopt);
    return kExitParse;
  }

  try {
    if (apply_cmd->parsed()) return cmd_apply(apply, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (plan_cmd->parsed()) return cmd_plan(plan, out);
    if (serve_cmd->parsed()) return cmd_serve(serve, out);
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    report_error(err, code, e.class_name(), e.what(), e.detail(), e.border_index());
    return code;
  } catch (const std::exception& e) {
    report_error(err, kExitOther, "internal", e.what(), "", std::nullopt);
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace border_forge
