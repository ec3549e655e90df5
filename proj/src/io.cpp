#include "gcpbench/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace gcpbench {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parseDouble(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::vector<std::string_view> splitWhitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> splitComma(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Visits data lines of a CSV stream: comments (#) and blank lines skipped, a
// leading header row equal to `header` skipped.
template <typename Fn>
void forEachCsvRow(std::istream& in, const std::vector<std::string>& header, Fn&& fn) {
  std::string line;
  std::size_t lineNo = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = splitComma(t);
    if (first) {
      first = false;
      bool isHeader = fields.size() == header.size();
      for (std::size_t i = 0; isHeader && i < fields.size(); ++i) isHeader = fields[i] == header[i];
      if (isHeader) continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": expected " +
                                             std::to_string(header.size()) + " fields");
    }
    fn(fields, lineNo);
  }
}

double requireDouble(std::string_view field, std::size_t lineNo) {
  double v = 0.0;
  if (!parseDouble(field, v)) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

int requireInt(std::string_view field, std::size_t lineNo) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": bad integer '" + std::string(field) + "'");
  }
  return v;
}

Json vec3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3From(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, std::string(what) + " must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const char* severityName(Severity s) { return s == Severity::Error ? "error" : "warning"; }

}  // namespace

std::string formatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

// ---------------------------------------------------------------------------
// Trajectories

Trajectory ParsedTrajectory::toTrajectory(const std::string& bodyFrame) const {
  std::vector<TimedPose> poses;
  poses.reserve(records.size());
  for (const auto& r : records) poses.push_back({r.timestamp, RigidTransformd(r.rotation, r.translation)});
  return Trajectory(std::move(poses), bodyFrame);
}

ParsedTrajectory parseTrajectory(std::string_view text, double stampScale) {
  ParsedTrajectory out;
  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = splitWhitespace(line);
    if (fields.empty()) continue;
    double v[8];
    bool ok = fields.size() == 8;
    for (std::size_t i = 0; ok && i < 8; ++i) ok = parseDouble(fields[i], v[i]);
    if (!ok) {
      out.findings.push_back({Severity::Error, "malformed_line",
                              fields.size() == 8 ? "unparseable number on line " + std::to_string(lineNo)
                                                 : "expected 8 fields, got " + std::to_string(fields.size()) +
                                                       " on line " + std::to_string(lineNo),
                              std::nullopt, lineNo});
      continue;
    }
    PoseRecord r;
    r.line = lineNo;
    r.timestamp = v[0] * stampScale;
    r.translation = Eigen::Vector3d(v[1], v[2], v[3]);
    r.rotation = Eigen::Quaterniond(v[7], v[4], v[5], v[6]);
    out.records.push_back(r);
  }
  if (out.records.empty()) {
    out.findings.push_back({Severity::Error, "empty_trajectory", "no poses in file", std::nullopt, std::nullopt});
  }
  return out;
}

std::string formatTrajectory(const Trajectory& traj) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& p : traj.poses()) {
    const auto& t = p.pose.translation();
    const auto& q = p.pose.rotation();
    for (double v : {p.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z()}) {
      out += formatDouble(v);
      out += ' ';
    }
    out += formatDouble(q.w());
    out += '\n';
  }
  return out;
}

std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

Trajectory loadTrajectory(const std::filesystem::path& path, double stampScale) {
  const ParsedTrajectory parsed = parseTrajectory(readTextFile(path), stampScale);
  for (const auto& f : parsed.findings) {
    if (f.severity == Severity::Error) throw Error(ErrorCode::ParseError, path.string() + ": " + f.message);
  }
  return parsed.toTrajectory();
}

// ---------------------------------------------------------------------------
// Scans

void writeScansCsv(std::ostream& out, const std::vector<LidarScan>& scans) {
  std::size_t ringCount = 0;
  for (const auto& s : scans) ringCount = std::max(ringCount, s.rings.size());
  out << "# ring_count," << ringCount << '\n';
  out << "# revolution,ring,azimuth_rad,x,y,z,intensity\n";
  for (const auto& scan : scans) {
    for (const auto& ring : scan.rings) {
      for (const auto& s : ring.samples) {
        out << scan.revolutionIndex << ',' << ring.ringIndex << ',' << formatDouble(s.azimuth) << ','
            << formatDouble(s.point.x()) << ',' << formatDouble(s.point.y()) << ',' << formatDouble(s.point.z())
            << ',' << formatDouble(s.intensity) << '\n';
      }
    }
  }
}

std::vector<LidarScan> readScansCsv(std::istream& in) {
  std::vector<LidarScan> scans;
  std::map<int, std::size_t> scanIndex;
  int ringCount = 0;
  std::string line;
  std::size_t lineNo = 0;
  auto scanFor = [&](int revolution) -> LidarScan& {
    auto [it, inserted] = scanIndex.emplace(revolution, scans.size());
    if (inserted) {
      LidarScan s;
      s.revolutionIndex = revolution;
      for (int r = 0; r < ringCount; ++r) s.rings.push_back(Ring{r, {}});
      scans.push_back(std::move(s));
    }
    return scans[it->second];
  };
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto fields = splitComma(trim(t.substr(1)));
      if (fields.size() == 2 && fields[0] == "ring_count") ringCount = requireInt(fields[1], lineNo);
      continue;
    }
    const auto f = splitComma(t);
    if (f.size() != 7) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": expected 7 fields");
    LidarScan& scan = scanFor(requireInt(f[0], lineNo));
    const int ringIdx = requireInt(f[1], lineNo);
    auto it = std::find_if(scan.rings.begin(), scan.rings.end(), [&](const Ring& r) { return r.ringIndex == ringIdx; });
    if (it == scan.rings.end()) {
      scan.rings.push_back(Ring{ringIdx, {}});
      it = std::prev(scan.rings.end());
    }
    RingSample s;
    s.azimuth = requireDouble(f[2], lineNo);
    s.point = Point3(requireDouble(f[3], lineNo), requireDouble(f[4], lineNo), requireDouble(f[5], lineNo));
    s.intensity = requireDouble(f[6], lineNo);
    s.range = s.point.norm();
    it->samples.push_back(s);
  }
  for (auto& scan : scans) {
    std::stable_sort(scan.rings.begin(), scan.rings.end(),
                     [](const Ring& a, const Ring& b) { return a.ringIndex < b.ringIndex; });
  }
  return scans;
}

// ---------------------------------------------------------------------------
// Survey and observations

std::vector<GroundControlPoint> readSurveyCsv(std::istream& in) {
  std::vector<GroundControlPoint> out;
  forEachCsvRow(in, {"name", "x", "y", "z"}, [&](const auto& f, std::size_t lineNo) {
    out.push_back({std::string(f[0]),
                   Point3(requireDouble(f[1], lineNo), requireDouble(f[2], lineNo), requireDouble(f[3], lineNo))});
  });
  return out;
}

void writeSurveyCsv(std::ostream& out, const std::vector<GroundControlPoint>& gcps) {
  out << "name,x,y,z\n";
  for (const auto& g : gcps) {
    out << g.name << ',' << formatDouble(g.surveyedPosition.x()) << ',' << formatDouble(g.surveyedPosition.y())
        << ',' << formatDouble(g.surveyedPosition.z()) << '\n';
  }
}

std::vector<GCPObservation> readObservationsCsv(std::istream& in, double stampScale) {
  std::vector<GCPObservation> out;
  forEachCsvRow(in, {"timestamp", "gcp_name", "sensor_frame", "px", "py", "pz"},
                [&](const auto& f, std::size_t lineNo) {
                  out.push_back({requireDouble(f[0], lineNo) * stampScale, std::string(f[1]), std::string(f[2]),
                                 Point3(requireDouble(f[3], lineNo), requireDouble(f[4], lineNo),
                                        requireDouble(f[5], lineNo))});
                });
  return out;
}

void writeObservationsCsv(std::ostream& out, const std::vector<GCPObservation>& obs) {
  out << "timestamp,gcp_name,sensor_frame,px,py,pz\n";
  for (const auto& o : obs) {
    out << formatDouble(o.timestamp) << ',' << o.gcpName << ',' << o.sensorFrame << ','
        << formatDouble(o.pointInSensorFrame.x()) << ',' << formatDouble(o.pointInSensorFrame.y()) << ','
        << formatDouble(o.pointInSensorFrame.z()) << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

Json toJson(const RigidTransformd& t) {
  const auto& q = t.rotation();
  return Json{{"t", vec3(t.translation())}, {"q", Json::array({q.w(), q.x(), q.y(), q.z()})}};
}

RigidTransformd transformFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "transform must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "t" && key != "q") throw Error(ErrorCode::ParseError, "unknown transform key '" + key + "'");
  }
  const Eigen::Vector3d t = j.contains("t") ? vec3From(j.at("t"), "t") : Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  if (j.contains("q")) {
    const Json& jq = j.at("q");
    if (!jq.is_array() || jq.size() != 4) throw Error(ErrorCode::ParseError, "q must be [qw, qx, qy, qz]");
    q = Eigen::Quaterniond(jq[0].get<double>(), jq[1].get<double>(), jq[2].get<double>(), jq[3].get<double>());
  }
  return RigidTransformd(q, t);
}

CalibrationSet calibrationFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "calibration must be an object of frames");
  CalibrationSet calib;
  for (const auto& [frame, value] : j.items()) calib[frame] = transformFromJson(value);
  return calib;
}

Json toJson(const CalibrationSet& calib) {
  Json j = Json::object();
  for (const auto& [frame, t] : calib) j[frame] = toJson(t);
  return j;
}

Json toJson(const DetectionResult& det) {
  return Json{{"center", vec3(det.center)},
              {"in_plane_center", Json::array({det.inPlaneCenter.x(), det.inPlaneCenter.y()})},
              {"votes", det.votes},
              {"peak_weight", det.peakWeight},
              {"edge_count", det.edgeCount},
              {"plane", Json{{"normal", vec3(det.plane.normal)}, {"offset", det.plane.offset}}}};
}

Json toJson(const EvaluationReport& report) {
  Json rows = Json::array();
  for (const auto& g : report.gcps) {
    rows.push_back(Json{{"name", g.name},
                        {"timestamp", g.timestamp},
                        {"sequence", g.sequence},
                        {"covered", g.covered},
                        {"error", g.error ? Json(*g.error) : Json(nullptr)},
                        {"score", g.score},
                        {"reason", g.reason}});
  }
  return Json{{"sequence_score", report.sequenceScore},
              {"rmse_ate", report.rmseAte},
              {"gcp_coverage", report.gcpCoverage},
              {"multiplier", report.multiplier},
              {"alignment", toJson(report.alignment)},
              {"gcps", rows}};
}

EvaluationReport evaluationReportFromJson(const Json& j) {
  EvaluationReport r;
  r.sequenceScore = j.at("sequence_score").get<double>();
  r.rmseAte = j.at("rmse_ate").get<double>();
  r.gcpCoverage = j.at("gcp_coverage").get<double>();
  r.multiplier = j.at("multiplier").get<double>();
  if (j.contains("alignment")) r.alignment = transformFromJson(j.at("alignment"));
  for (const auto& row : j.at("gcps")) {
    GCPResult g;
    g.name = row.at("name").get<std::string>();
    g.timestamp = row.at("timestamp").get<double>();
    g.sequence = row.value("sequence", 0);
    g.covered = row.at("covered").get<bool>();
    if (!row.at("error").is_null()) g.error = row.at("error").get<double>();
    g.score = row.at("score").get<int>();
    g.reason = row.value("reason", std::string());
    r.gcps.push_back(std::move(g));
  }
  return r;
}

Json toJson(const ValidationReport& report) {
  Json findings = Json::array();
  for (const auto& f : report.findings) {
    Json jf{{"severity", severityName(f.severity)}, {"code", f.code}, {"message", f.message}};
    jf["timestamp"] = f.timestamp ? Json(*f.timestamp) : Json(nullptr);
    jf["line"] = f.line ? Json(*f.line) : Json(nullptr);
    findings.push_back(std::move(jf));
  }
  return Json{{"accepted", report.accepted}, {"findings", findings}};
}

Json toJson(const DiffReport& report) {
  Json windows = Json::array();
  for (const auto& w : report.windows) {
    windows.push_back(Json{{"t_start", w.tStart}, {"t_end", w.tEnd}, {"peak_displacement", w.peakDisplacement}});
  }
  Json samples = Json::array();
  for (std::size_t i = 0; i < report.timestamps.size(); ++i) {
    samples.push_back(Json::array({report.timestamps[i], report.displacements[i]}));
  }
  return Json{{"median", report.median},   {"mad", report.mad},
              {"threshold", report.threshold}, {"windows", windows},
              {"flagged_gcps", report.flaggedGCPs}, {"displacements", samples}};
}

Json toJson(const std::vector<DiscontinuityFlag>& flags) {
  Json out = Json::array();
  for (const auto& f : flags) {
    out.push_back(Json{{"t_start", f.tStart},
                       {"t_end", f.tEnd},
                       {"speed", f.speed},
                       {"gcp_index", f.gcpIndex ? Json(*f.gcpIndex) : Json(nullptr)},
                       {"severity", severityName(f.severity)}});
  }
  return out;
}

}  // namespace gcpbench
