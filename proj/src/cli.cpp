#include "gcpbench/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "gcpbench/config.hpp"

namespace gcpbench::cli {

namespace {

struct CommonOptions {
  std::string configPath;
  std::string stampUnit = "s";
};

RunConfig resolveConfig(const CommonOptions& opts) {
  std::string path = opts.configPath;
  if (path.empty()) {
    if (const char* env = std::getenv("GCPBENCH_CONFIG"); env && *env) path = env;
  }
  return path.empty() ? RunConfig{} : loadRunConfig(path);
}

double stampScale(const CommonOptions& opts) { return opts.stampUnit == "ns" ? 1e-9 : 1.0; }

std::ifstream openInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

void writeJson(const std::string& path, const Json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
  } else {
    writeTextFile(path, text);
  }
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CalibrationSet loadCalibration(const std::string& defaults, const std::string& user) {
  CalibrationSet calib;
  if (!defaults.empty()) calib = calibrationFromJson(Json::parse(readTextFile(defaults)));
  // Participant-supplied extrinsics replace the defaults frame by frame.
  if (!user.empty()) {
    for (auto& [frame, t] : calibrationFromJson(Json::parse(readTextFile(user)))) calib[frame] = t;
  }
  return calib;
}

std::vector<GroundControlPoint> loadSurvey(const std::string& path) {
  auto in = openInput(path);
  return readSurveyCsv(in);
}

std::vector<GCPObservation> loadObservations(const std::string& path, double scale) {
  auto in = openInput(path);
  return readObservationsCsv(in, scale);
}

void addCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.configPath, "Run configuration JSON (falls back to $GCPBENCH_CONFIG)");
  cmd->add_option("--stamp-unit", opts.stampUnit, "Timestamp unit of input files")
      ->check(CLI::IsMember({"s", "ns"}));
}

// ---------------------------------------------------------------------------

int cmdSimulate(const CommonOptions& common, const std::string& outPath, std::uint64_t seed,
                std::optional<int> revolutions, std::ostream&) {
  RunConfig cfg = resolveConfig(common);
  if (revolutions) cfg.revolutions = *revolutions;
  cfg.validate();
  const auto scans = simulateScan(cfg.scanner, cfg.ground, cfg.fiducial, cfg.revolutions, seed);
  std::ostringstream os;
  Json meta = toJson(cfg);
  meta["seed"] = seed;
  os << "# config," << meta.dump() << '\n';
  writeScansCsv(os, scans);
  writeTextFile(outPath, os.str());
  return kExitOk;
}

int cmdDetect(const CommonOptions& common, const std::string& scansPath, const std::string& outPath,
              const std::string& accPath, std::ostream& out) {
  const RunConfig cfg = resolveConfig(common);
  auto in = openInput(scansPath);
  const auto scans = readScansCsv(in);
  HoughAccumulator acc;
  const DetectionResult det = detectGCP(scans, cfg.detector, accPath.empty() ? nullptr : &acc);
  Json j = toJson(det);
  j["config"] = toJson(cfg);
  writeJson(outPath, j, out);
  if (!accPath.empty()) {
    std::ostringstream os;
    os << "# origin_u," << formatDouble(acc.origin().x()) << ",origin_v," << formatDouble(acc.origin().y())
       << ",cell_size," << formatDouble(acc.cellSize()) << '\n';
    for (Eigen::Index r = 0; r < acc.rows(); ++r) {
      for (Eigen::Index c = 0; c < acc.cols(); ++c) {
        if (c) os << ',';
        os << formatDouble(acc.weights()(r, c));
      }
      os << '\n';
    }
    writeTextFile(accPath, os.str());
  }
  return kExitOk;
}

struct EvaluateOptions {
  std::string traj, obs, gcps, calib, defaultCalib, out;
  int site = 1;
};

int cmdEvaluate(const CommonOptions& common, const EvaluateOptions& o, std::ostream& out) {
  const RunConfig cfg = resolveConfig(common);
  const double scale = stampScale(common);
  const Trajectory traj = loadTrajectory(o.traj, scale);
  const auto obs = loadObservations(o.obs, scale);
  const auto gcps = loadSurvey(o.gcps);
  const CalibrationSet calib = loadCalibration(o.defaultCalib, o.calib);
  const EvaluationReport report =
      evaluateSequence(traj, obs, calib, gcps, cfg.brackets, siteMultiplier(o.site), cfg.maxGap);
  Json j = toJson(report);
  j["site"] = o.site;
  j["calibration"] = toJson(calib);
  j["config"] = toJson(cfg);
  writeJson(o.out, j, out);
  return kExitOk;
}

int cmdEvaluateMulti(const CommonOptions& common, const EvaluateOptions& o, std::ostream& out) {
  const RunConfig cfg = resolveConfig(common);
  const double scale = stampScale(common);
  const auto trajPaths = splitList(o.traj);
  const auto obsPaths = splitList(o.obs);
  if (trajPaths.size() != obsPaths.size() || trajPaths.empty()) {
    throw CLI::ValidationError("--trajs and --obs need the same number of comma-separated files");
  }
  std::vector<Trajectory> trajs;
  std::vector<std::vector<GCPObservation>> obs;
  for (std::size_t i = 0; i < trajPaths.size(); ++i) {
    trajs.push_back(loadTrajectory(trajPaths[i], scale));
    obs.push_back(loadObservations(obsPaths[i], scale));
  }
  const auto gcps = loadSurvey(o.gcps);
  const CalibrationSet calib = loadCalibration(o.defaultCalib, o.calib);
  const EvaluationReport report = evaluateMultiSession(trajs, obs, calib, gcps, cfg.brackets,
                                                       siteMultiplier(o.site), cfg.maxGap, cfg.multiSession);
  Json j = toJson(report);
  j["site"] = o.site;
  j["sequences"] = trajPaths;
  j["calibration"] = toJson(calib);
  j["config"] = toJson(cfg);
  writeJson(o.out, j, out);
  return kExitOk;
}

int cmdValidate(const CommonOptions& common, const std::string& trajPath, const std::string& span,
                const std::string& outPath, std::ostream& out) {
  const RunConfig cfg = resolveConfig(common);
  const auto parts = splitList(span);
  double t0 = 0.0, t1 = 0.0;
  if (parts.size() != 2) throw CLI::ValidationError("--span expects t0,t1");
  try {
    t0 = std::stod(parts[0]);
    t1 = std::stod(parts[1]);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--span expects two numbers");
  }
  const ValidationReport report = validateSubmission(readTextFile(trajPath), t0, t1, cfg.validation, stampScale(common));
  Json j = toJson(report);
  j["config"] = toJson(cfg);
  writeJson(outPath, j, out);
  return report.accepted ? kExitOk : kExitFailure;
}

int cmdDiff(const CommonOptions& common, const std::string& prevPath, const std::string& currPath,
            const std::string& gcpPath, const std::string& outPath, std::ostream& out) {
  const RunConfig cfg = resolveConfig(common);
  const double scale = stampScale(common);
  const Trajectory prev = loadTrajectory(prevPath, scale);
  const Trajectory curr = loadTrajectory(currPath, scale);
  std::vector<double> gcpTimes;
  std::vector<std::string> gcpNames;
  for (const auto& o : loadObservations(gcpPath, scale)) {
    gcpTimes.push_back(o.timestamp);
    gcpNames.push_back(o.gcpName);
  }
  const DiffReport diff = diffSubmissions(prev, curr, gcpTimes, cfg.validation);
  const auto jumps = detectDiscontinuities(curr, gcpTimes, cfg.validation);
  Json j = toJson(diff);
  Json flagged = Json::array();
  for (std::size_t g : diff.flaggedGCPs) flagged.push_back(Json{{"name", gcpNames[g]}, {"timestamp", gcpTimes[g]}});
  j["flagged_gcp_names"] = flagged;
  j["discontinuities"] = toJson(jumps);
  j["config"] = toJson(cfg);
  writeJson(outPath, j, out);
  return kExitOk;
}

int cmdReport(const std::string& inPath, const std::string& plotDir) {
  const Json in = Json::parse(readTextFile(inPath));
  const EvaluationReport report = evaluationReportFromJson(in);
  const std::string configLine = in.contains("config") ? "# config," + in.at("config").dump() + "\n" : "";
  namespace fs = std::filesystem;
  fs::create_directories(plotDir);

  std::ostringstream errors;
  errors << configLine << "index,name,sequence,covered,error_m,score\n";
  std::vector<double> covered;
  for (std::size_t i = 0; i < report.gcps.size(); ++i) {
    const auto& g = report.gcps[i];
    errors << i << ',' << g.name << ',' << g.sequence << ',' << (g.covered ? 1 : 0) << ','
           << (g.error ? formatDouble(*g.error) : std::string()) << ',' << g.score << '\n';
    if (g.error) covered.push_back(*g.error);
  }
  writeTextFile(fs::path(plotDir) / "errors.csv", errors.str());

  std::ostringstream hist;
  std::ostringstream curve;
  hist << configLine << "bin_lo,bin_hi,count,density\n";
  curve << configLine;
  if (!covered.empty()) {
    const double maxErr = *std::max_element(covered.begin(), covered.end());
    const auto bins = static_cast<std::size_t>(std::max(5.0, std::ceil(std::sqrt(static_cast<double>(covered.size())))));
    const double width = maxErr > 0.0 ? maxErr / static_cast<double>(bins) : 1.0;
    std::vector<std::size_t> counts(bins, 0);
    for (double e : covered) counts[std::min(bins - 1, static_cast<std::size_t>(e / width))]++;
    for (std::size_t b = 0; b < bins; ++b) {
      const double density = static_cast<double>(counts[b]) / (static_cast<double>(covered.size()) * width);
      hist << formatDouble(b * width) << ',' << formatDouble((b + 1) * width) << ',' << counts[b] << ','
           << formatDouble(density) << '\n';
    }
    if (covered.size() >= 2) {
      const RayleighFit fit = rayleighFit(covered);
      curve << "# sigma," << formatDouble(fit.sigma) << ",r95," << formatDouble(fit.quantile(0.95)) << ",r99.7,"
            << formatDouble(fit.quantile(0.997)) << '\n';
      curve << "x,pdf\n";
      const double xmax = 1.2 * std::max(maxErr, fit.quantile(0.997));
      for (int k = 0; k <= 100; ++k) {
        const double x = xmax * k / 100.0;
        curve << formatDouble(x) << ',' << formatDouble(fit.pdf(x)) << '\n';
      }
    }
  }
  writeTextFile(fs::path(plotDir) / "histogram.csv", hist.str());
  writeTextFile(fs::path(plotDir) / "rayleigh.csv", curve.str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GCP detection and sparse-ground-truth SLAM evaluation toolkit", "gcpbench"};
  app.require_subcommand(1);
  CommonOptions common;

  auto* simulate = app.add_subcommand("simulate", "Simulate scans of a floor fiducial");
  addCommon(simulate, common);
  std::string simOut;
  std::uint64_t seed = 0;
  std::optional<int> revolutions;
  simulate->add_option("--out", simOut, "Scan CSV to write")->required();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--revolutions", revolutions, "Override simulation.revolutions");

  auto* detect = app.add_subcommand("detect", "Estimate the fiducial center from scans");
  addCommon(detect, common);
  std::string scansPath, detOut, accOut;
  detect->add_option("--scans", scansPath, "Scan CSV")->required();
  detect->add_option("--out", detOut, "Detection JSON (stdout if omitted)");
  detect->add_option("--accumulator", accOut, "Optional CSV dump of the blurred Hough grid");

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Score one trajectory against surveyed GCPs");
  addCommon(evaluate, common);
  evaluate->add_option("--traj", eval.traj, "Trajectory file")->required();
  evaluate->add_option("--obs", eval.obs, "GCP observation CSV")->required();
  evaluate->add_option("--gcps", eval.gcps, "GCP survey CSV")->required();
  evaluate->add_option("--calib", eval.calib, "Participant extrinsics JSON (overrides defaults)");
  evaluate->add_option("--default-calib", eval.defaultCalib, "Default extrinsics JSON");
  evaluate->add_option("--site", eval.site, "Site number; site 3 doubles the maximum score")
      ->check(CLI::Range(1, 3));
  evaluate->add_option("--out", eval.out, "Report JSON (stdout if omitted)");

  EvaluateOptions multi;
  auto* evaluateMulti = app.add_subcommand("evaluate-multi", "Score several sessions sharing one frame");
  addCommon(evaluateMulti, common);
  evaluateMulti->add_option("--trajs", multi.traj, "Comma-separated trajectory files")->required();
  evaluateMulti->add_option("--obs", multi.obs, "Comma-separated observation CSVs, one per trajectory")->required();
  evaluateMulti->add_option("--gcps", multi.gcps, "GCP survey CSV")->required();
  evaluateMulti->add_option("--calib", multi.calib, "Participant extrinsics JSON (overrides defaults)");
  evaluateMulti->add_option("--default-calib", multi.defaultCalib, "Default extrinsics JSON");
  evaluateMulti->add_option("--site", multi.site, "Site number")->check(CLI::Range(1, 3));
  evaluateMulti->add_option("--out", multi.out, "Report JSON (stdout if omitted)");

  auto* validate = app.add_subcommand("validate", "Check a submission file");
  addCommon(validate, common);
  std::string valTraj, valSpan, valOut;
  validate->add_option("--traj", valTraj, "Trajectory file")->required();
  validate->add_option("--span", valSpan, "Expected time span t0,t1")->required();
  validate->add_option("--out", valOut, "Validation JSON (stdout if omitted)");

  auto* diff = app.add_subcommand("diff", "Compare two submissions of one sequence");
  addCommon(diff, common);
  std::string prevPath, currPath, diffGcps, diffOut;
  diff->add_option("--prev", prevPath, "Earlier trajectory")->required();
  diff->add_option("--curr", currPath, "Later trajectory")->required();
  diff->add_option("--gcps", diffGcps, "GCP observation CSV giving the GCP timestamps")->required();
  diff->add_option("--out", diffOut, "Diff JSON (stdout if omitted)");

  auto* report = app.add_subcommand("report", "Emit plot data from an evaluation report");
  std::string reportIn, plotDir;
  report->add_option("--in", reportIn, "Report JSON")->required();
  report->add_option("--plots", plotDir, "Output directory for CSV series")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*simulate) return cmdSimulate(common, simOut, seed, revolutions, out);
    if (*detect) return cmdDetect(common, scansPath, detOut, accOut, out);
    if (*evaluate) return cmdEvaluate(common, eval, out);
    if (*evaluateMulti) return cmdEvaluateMulti(common, multi, out);
    if (*validate) return cmdValidate(common, valTraj, valSpan, valOut, out);
    if (*diff) return cmdDiff(common, prevPath, currPath, diffGcps, diffOut, out);
    if (*report) return cmdReport(reportIn, plotDir);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gcpbench::cli
