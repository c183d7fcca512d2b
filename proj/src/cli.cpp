#include "ogmc/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ogmc/metrics.hpp"
#include "ogmc/morphology.hpp"
#include "ogmc/nrrd.hpp"
#include "ogmc/pipeline.hpp"
#include "ogmc/skeleton_graph.hpp"
#include "ogmc/synth.hpp"

namespace ogmc::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Encoding encoding(bool gzip) { return gzip ? Encoding::gzip : Encoding::raw; }

void write_json(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path);
}

std::string scalar_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  }
  throw UsageError("config key '" + key + "' must be a string, number, boolean or array of those");
}

// Applies config values to options of `app` not given on the command line.
void apply_config(CLI::App& app, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file " + path);
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config " + path + " must hold a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") throw UsageError("config files cannot nest 'config'");
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (!opt) throw UsageError("unknown config key '" + key + "' for subcommand " + app.get_name());
    if (opt->count() > 0) continue;  // command line wins
    std::vector<std::string> parts;
    if (value.is_array()) {
      for (const auto& v : value) parts.push_back(scalar_text(v, key));
    } else {
      parts.push_back(scalar_text(value, key));
    }
    try {
      opt->add_result(parts);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

struct RepairArgs {
  std::string input, output, report, config;
  bool gzip = false;
  bool omit_timings = false;
  double epsilon = 1.41421356;
  double d_max = 30.0;
  int window = kDefaultEndpointWindow;
  double kappa_min = 1.0;
  double resample_step = 0.0;
  double x_min_fraction = 0.25;
  std::string transport = "frenet";
  double sigma = 0.0;
  double delta = 0.05;
  double box_margin = 1.5;
  double geodesic_step = 0.5;
  double radius_floor = 1.0;
  int surface_samples = 32;
  double surface_tol = 1e-6;
  int surface_max_iter = 500;
  bool rethin = false;

  RepairParams params() const {
    RepairParams p;
    p.epsilon = epsilon;
    p.d_max_vox = d_max;
    p.window = window;
    p.kappa_min = kappa_min;
    if (resample_step > 0.0) p.resample_step_mm = resample_step;
    p.x_min_fraction = x_min_fraction;
    p.transport = transport == "parallel" ? FrameTransport::parallel : FrameTransport::frenet_field;
    if (sigma > 0.0) p.sigma_mm = sigma;
    p.delta = delta;
    p.box_margin = box_margin;
    p.geodesic_step = geodesic_step;
    p.radius_floor_vox = radius_floor;
    p.surface.samples = surface_samples;
    p.surface.tol = surface_tol;
    p.surface.max_iter = surface_max_iter;
    p.rethin = rethin;
    return p;
  }
};

void add_repair_options(CLI::App* sub, RepairArgs& a) {
  sub->add_option("--input,-i", a.input, "Input mask (NRRD)")->required();
  sub->add_option("--output,-o", a.output, "Repaired mask (NRRD)")->required();
  sub->add_option("--report", a.report, "RepairReport JSON path ('-' for stdout)");
  sub->add_flag("--gzip", a.gzip, "Write gzip-encoded NRRD");
  sub->add_flag("--omit-timings", a.omit_timings, "Write runtime_s as 0 so reports are byte-stable");
  sub->add_option("--epsilon", a.epsilon, "TFD acceptance bound")->default_str("1.41421356");
  sub->add_option("--d-max", a.d_max, "Endpoint distance gate in voxels of the smallest spacing")->capture_default_str();
  sub->add_option("--window", a.window, "Endpoint chain length in skeleton voxels")->capture_default_str();
  sub->add_option("--kappa-min", a.kappa_min, "Curvature (1/mm) below which a frame is degenerate")
      ->capture_default_str();
  sub->add_option("--resample-step", a.resample_step, "Chain resampling step in mm; 0 = smallest spacing")
      ->capture_default_str();
  sub->add_option("--x-min-fraction", a.x_min_fraction, "Connector plausibility gate as a fraction of the gap")
      ->capture_default_str();
  sub->add_option("--transport", a.transport, "Frame transport along the connector")
      ->check(CLI::IsMember({"frenet", "parallel"}))
      ->capture_default_str();
  sub->add_option("--sigma", a.sigma, "Speed-field smoothing in mm; 0 = 2 x smallest spacing")->capture_default_str();
  sub->add_option("--delta", a.delta, "Speed floor in (0, 1)")->capture_default_str();
  sub->add_option("--box-margin", a.box_margin, "Fast-marching box margin in pair distances")->capture_default_str();
  sub->add_option("--geodesic-step", a.geodesic_step, "Backtracking step in voxels")->capture_default_str();
  sub->add_option("--radius-floor", a.radius_floor, "Minimum tube radius in voxels")->capture_default_str();
  sub->add_option("--surface-samples", a.surface_samples, "Points per boundary curve of the minimal surface")
      ->capture_default_str();
  sub->add_option("--surface-tol", a.surface_tol, "Relative area change that stops the relaxation")
      ->capture_default_str();
  sub->add_option("--surface-max-iter", a.surface_max_iter, "Relaxation step limit")->capture_default_str();
  sub->add_flag("--rethin", a.rethin, "Re-skeletonize after every connection instead of grafting");
}

struct SkeletonArgs {
  std::string input, output, graph, config;
  bool gzip = false;
};

struct EdgeArgs {
  std::string input, output, config, element = "cross6";
  int radius = 1;
  bool gzip = false;
};

struct MetricsArgs {
  std::string pred, gt, output, config;
  double tolerance = 0.0;
};

struct SynthArgs {
  std::string output, truth, broken, cuts_log, config;
  bool gzip = false;
  std::uint64_t seed = 0;
  std::vector<int> dims{128, 128, 128};
  std::vector<double> spacing{1.0, 1.0, 1.0};
  int depth = 2;
  double radius_root = 3.0;
  double taper = 0.75;
  double radius_floor = 1.5;
  double angle_min = 25.0, angle_max = 45.0;
  double length_min = 22.0, length_max = 34.0;
  int fractures = 0;
  double cut_radius_min = 2.0, cut_radius_max = 5.0;
};

int do_repair(const RepairArgs& a, std::ostream& out) {
  const RepairParams params = a.params();
  try {
    validate(params);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const Mask seg = read_mask(a.input);
  const RepairResult r = repair(seg, params);
  write_nrrd(r.mask, a.output, encoding(a.gzip));
  if (!a.report.empty()) write_json(to_json(r.report, !a.omit_timings), a.report, out);
  return ok;
}

int do_skeleton(const SkeletonArgs& a, std::ostream& out) {
  const Mask seg = read_mask(a.input);
  const Mask skel = skeletonize(seg);
  write_nrrd(skel, a.output, encoding(a.gzip));
  if (!a.graph.empty()) write_json(to_json(build_graph(skel, distance_transform(seg))), a.graph, out);
  return ok;
}

int do_edge(const EdgeArgs& a) {
  const Mask seg = read_mask(a.input);
  StructuringElement se;
  se.shape = a.element == "cube26" ? StructuringElement::Shape::cube26 : StructuringElement::Shape::cross6;
  se.radius = a.radius;
  write_nrrd(edge_map(seg, se), a.output, encoding(a.gzip));
  return ok;
}

int do_metrics(const MetricsArgs& a, std::ostream& out) {
  const Mask pred = read_mask(a.pred);
  const Mask gt = read_mask(a.gt);
  std::optional<double> tol;
  if (a.tolerance > 0.0) tol = a.tolerance;
  write_json(to_json(topology_report(pred, gt, tol)), a.output, out);
  return ok;
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  SynthParams p;
  p.seed = a.seed;
  p.extent = {a.dims[0], a.dims[1], a.dims[2]};
  p.spacing = {a.spacing[0], a.spacing[1], a.spacing[2]};
  p.depth = a.depth;
  p.radius_root_mm = a.radius_root;
  p.taper = a.taper;
  p.radius_floor_vox = a.radius_floor;
  p.branch_angle_deg = {a.angle_min, a.angle_max};
  p.length_mm = {a.length_min, a.length_max};
  if (a.dims.size() != 3 || a.spacing.size() != 3) throw UsageError("--dims and --spacing take three values");
  SynthVolume v;
  try {
    v = generate_tree(p);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  write_nrrd(v.mask, a.output, encoding(a.gzip));
  json truth = to_json(v.truth);
  truth["parameters"] = to_json(p);
  if (a.fractures > 0) {
    FractureParams fp;
    fp.cuts = a.fractures;
    fp.seed = a.seed + 1;
    fp.radius_vox = {a.cut_radius_min, a.cut_radius_max};
    FractureResult fr;
    try {
      fr = fracture(v.mask, v.truth, fp);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    if (!a.broken.empty()) write_nrrd(fr.mask, a.broken, encoding(a.gzip));
    truth["fracture"] = to_json(fr);
  }
  if (!a.truth.empty()) write_json(truth, a.truth, out);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orientation-guided repair of fragmented vessel segmentations", "ogmc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  RepairArgs repair_args;
  auto* repair_cmd = app.add_subcommand("repair", "Reconnect fragmented vessel trees");
  add_repair_options(repair_cmd, repair_args);
  repair_cmd->add_option("--config", repair_args.config, "JSON file with option values");

  SkeletonArgs skel_args;
  auto* skel_cmd = app.add_subcommand("skeleton", "Thin a mask to its centerline skeleton");
  skel_cmd->add_option("--input,-i", skel_args.input, "Input mask (NRRD)")->required();
  skel_cmd->add_option("--output,-o", skel_args.output, "Skeleton mask (NRRD)")->required();
  skel_cmd->add_option("--graph", skel_args.graph, "Skeleton graph JSON path ('-' for stdout)");
  skel_cmd->add_flag("--gzip", skel_args.gzip, "Write gzip-encoded NRRD");
  skel_cmd->add_option("--config", skel_args.config, "JSON file with option values");

  EdgeArgs edge_args;
  auto* edge_cmd = app.add_subcommand("edge", "Morphological edge map (dilation minus erosion)");
  edge_cmd->add_option("--input,-i", edge_args.input, "Input mask (NRRD)")->required();
  edge_cmd->add_option("--output,-o", edge_args.output, "Edge mask (NRRD)")->required();
  edge_cmd->add_option("--element", edge_args.element, "Structuring element")
      ->check(CLI::IsMember({"cross6", "cube26"}))
      ->capture_default_str();
  edge_cmd->add_option("--radius", edge_args.radius, "Structuring element radius")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  edge_cmd->add_flag("--gzip", edge_args.gzip, "Write gzip-encoded NRRD");
  edge_cmd->add_option("--config", edge_args.config, "JSON file with option values");

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Topology and overlap metrics of a prediction");
  metrics_cmd->add_option("--pred", metrics_args.pred, "Predicted mask (NRRD)")->required();
  metrics_cmd->add_option("--gt", metrics_args.gt, "Reference mask (NRRD)")->required();
  metrics_cmd->add_option("--output,-o", metrics_args.output, "TopologyReport JSON path (default stdout)");
  metrics_cmd->add_option("--nsd-tolerance", metrics_args.tolerance, "NSD tolerance in mm; 0 = smallest spacing")
      ->capture_default_str();
  metrics_cmd->add_option("--config", metrics_args.config, "JSON file with option values");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic vessel tree, optionally fractured");
  synth_cmd->add_option("--output,-o", synth_args.output, "Unbroken mask (NRRD)")->required();
  synth_cmd->add_option("--truth", synth_args.truth, "GroundTruth JSON path ('-' for stdout)");
  synth_cmd->add_option("--broken", synth_args.broken, "Fractured mask (NRRD), needs --fractures");
  synth_cmd->add_flag("--gzip", synth_args.gzip, "Write gzip-encoded NRRD");
  synth_cmd->add_option("--seed", synth_args.seed, "Seed for every random draw")->capture_default_str();
  synth_cmd->add_option("--dims", synth_args.dims, "Grid size nx ny nz")->expected(3)->capture_default_str();
  synth_cmd->add_option("--spacing", synth_args.spacing, "Voxel spacing in mm")->expected(3)->capture_default_str();
  synth_cmd->add_option("--depth", synth_args.depth, "Bifurcation levels below the root")->capture_default_str();
  synth_cmd->add_option("--radius-root", synth_args.radius_root, "Root radius in mm")->capture_default_str();
  synth_cmd->add_option("--taper", synth_args.taper, "Child to parent radius ratio")->capture_default_str();
  synth_cmd->add_option("--radius-floor", synth_args.radius_floor, "Minimum radius in voxels")->capture_default_str();
  synth_cmd->add_option("--angle-min", synth_args.angle_min, "Smallest branch angle in degrees")->capture_default_str();
  synth_cmd->add_option("--angle-max", synth_args.angle_max, "Largest branch angle in degrees")->capture_default_str();
  synth_cmd->add_option("--length-min", synth_args.length_min, "Shortest segment in mm")->capture_default_str();
  synth_cmd->add_option("--length-max", synth_args.length_max, "Longest segment in mm")->capture_default_str();
  synth_cmd->add_option("--fractures", synth_args.fractures, "Number of ball cuts")->capture_default_str();
  synth_cmd->add_option("--cut-radius-min", synth_args.cut_radius_min, "Smallest cut radius in voxels")
      ->capture_default_str();
  synth_cmd->add_option("--cut-radius-max", synth_args.cut_radius_max, "Largest cut radius in voxels")
      ->capture_default_str();
  synth_cmd->add_option("--config", synth_args.config, "JSON file with option values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run 'ogmc --help' for usage)\n";
    return usage_error;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const std::string config = sub == repair_cmd    ? repair_args.config
                               : sub == skel_cmd    ? skel_args.config
                               : sub == edge_cmd    ? edge_args.config
                               : sub == metrics_cmd ? metrics_args.config
                                                    : synth_args.config;
    if (!config.empty()) apply_config(*sub, config);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }

  try {
    if (sub == repair_cmd) return do_repair(repair_args, out);
    if (sub == skel_cmd) return do_skeleton(skel_args, out);
    if (sub == edge_cmd) return do_edge(edge_args);
    if (sub == metrics_cmd) return do_metrics(metrics_args, out);
    return do_synth(synth_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return data_error;
  }
}

}  // namespace ogmc::cli
