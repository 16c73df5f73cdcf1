#include "badc/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "badc/error.hpp"

namespace badc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ReportError("missing artifact " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::vector<ParetoPoint> parse_pareto_csv(const std::string& text, int adc_bits) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ReportError("pareto.csv is empty");
  const auto header = split(line);
  if (header.size() < 6 || header[0] != "point_id" || header[3] != "transistor_count") {
    throw ReportError("pareto.csv has an unexpected header");
  }
  std::vector<ParetoPoint> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ReportError("pareto.csv row " + std::to_string(row) + " has the wrong cell count");
    }
    try {
      ParetoPoint p;
      p.point_id = std::stoi(cells[0]);
      p.generation = std::stoi(cells[1]);
      p.accuracy = std::stod(cells[2]);
      p.transistors = std::stol(cells[3]);
      p.dpos = std::stoi(cells[4]);
      for (std::size_t c = 5; c < cells.size(); ++c) {
        p.masks.push_back(LevelMask::from_hex(adc_bits, cells[c]));
      }
      p.model_file = "models/point_" + std::to_string(p.point_id) + ".json";
      points.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ReportError("pareto.csv row " + std::to_string(row) + ": " + e.what());
    }
  }
  return points;
}

ReportInput load_report_input(const std::string& dir) {
  const fs::path d(dir);
  ReportInput in;
  json summary;
  try {
    summary = json::parse(read_file(d / "summary.json"));
    in.adc_bits = summary.at("adc_bits").get<int>();
    in.baseline_accuracy = summary.at("baseline").at("accuracy").get<double>();
    in.flash_system = summary.at("areas").at("flash_system").at("transistors").get<long>();
    in.binary_system = summary.at("areas").at("binary_system").at("transistors").get<long>();
    in.feature_names = summary.at("dataset").at("feature_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ReportError(std::string("corrupt summary.json: ") + e.what());
  }
  in.points = parse_pareto_csv(read_file(d / "pareto.csv"), in.adc_bits);
  return in;
}

Gains compute_gains(long flash_system, long binary_system, long pruned_system) {
  Gains g;
  g.flash_to_binary = ratio(static_cast<double>(flash_system), static_cast<double>(binary_system));
  g.binary_to_pruned = ratio(static_cast<double>(binary_system), static_cast<double>(pruned_system));
  g.flash_to_pruned = ratio(static_cast<double>(flash_system), static_cast<double>(pruned_system));
  return g;
}

std::string plotdata_csv(const ReportInput& in) {
  std::ostringstream out;
  const auto flash = static_cast<double>(in.flash_system);
  out << "accuracy,normalized_area,label\n";
  out << fmt("%.6f", in.baseline_accuracy) << ",1.000000,flash\n";
  out << fmt("%.6f", in.baseline_accuracy) << ','
      << fmt("%.6f", ratio(static_cast<double>(in.binary_system), flash)) << ",binary\n";
  for (const auto& p : in.points) {
    out << fmt("%.6f", p.accuracy) << ',' << fmt("%.6f", ratio(static_cast<double>(p.transistors), flash))
        << ",pruned_" << p.point_id << '\n';
  }
  return out.str();
}

ReportOutcome make_report(const ReportInput& in, double max_drop) {
  ReportOutcome r;
  std::ostringstream out;
  out << "baseline accuracy: " << fmt("%.4f", in.baseline_accuracy) << '\n';
  out << "flash system transistors: " << in.flash_system << '\n';
  out << "binary system transistors: " << in.binary_system << '\n';
  out << "archive points: " << in.points.size() << '\n';
  if (in.points.empty()) {
    out << "no point within bound (archive is empty)\n";
    r.text = out.str();
    return r;
  }
  try {
    r.best = select_operating_point(in.points, in.baseline_accuracy, max_drop);
    r.found = true;
  } catch (const OperatingPointNotFound& e) {
    out << "no point within bound: accuracy drop " << fmt("%.4f", max_drop)
        << "; closest point " << e.closest().point_id << " has accuracy "
        << fmt("%.4f", e.closest().accuracy) << " at " << e.closest().transistors
        << " transistors\n";
    r.text = out.str();
    return r;
  }
  r.gains = compute_gains(in.flash_system, in.binary_system, r.best.transistors);
  out << "best point within drop " << fmt("%.4f", max_drop) << ": id " << r.best.point_id
      << ", accuracy " << fmt("%.4f", r.best.accuracy) << ", transistors " << r.best.transistors
      << ", dpos " << r.best.dpos << ", masks";
  for (const auto& m : r.best.masks) out << ' ' << m.to_hex();
  out << '\n';
  out << "gain flash->binary: " << fmt("%.2f", r.gains.flash_to_binary) << "x\n";
  out << "gain binary->pruned: " << fmt("%.2f", r.gains.binary_to_pruned) << "x\n";
  out << "gain flash->pruned: " << fmt("%.2f", r.gains.flash_to_pruned) << "x\n";
  r.text = out.str();
  return r;
}

}  // namespace badc
