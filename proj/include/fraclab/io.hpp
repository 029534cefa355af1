#pragma once

// File interchange for the command-line pipelines: CSV tables with full
// 17-digit doubles, JSON reports, and the response artifact a respond run
// leaves behind for a later invert run.  All writers are deterministic, so
// identical runs produce byte-identical files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclab/config.hpp"
#include "fraclab/response.hpp"

namespace fraclab {

inline std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  require(out.good(), "io-error", "cannot open " + path + " for writing");
  out << text;
  out.close();
  require(out.good(), "io-error", "write to " + path + " failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "missing-data", "missing data file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_json_file(const std::string& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

// Parses a numeric CSV document produced by the writers here: one header
// line, then rows of 17-digit doubles.
struct CsvDocument {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

inline CsvDocument parse_numeric_csv(const std::string& text,
                                     const std::string& origin) {
  std::vector<std::vector<double>> rows;
  CsvDocument doc;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      doc.header = cells;
      first = false;
      continue;
    }
    require(cells.size() == doc.header.size(), "corrupt-data",
            origin + ": row width does not match the header");
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      require(end && *end == '\0' && !c.empty(), "corrupt-data",
              origin + ": cell \"" + c + "\" is not a number");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  require(!doc.header.empty(), "corrupt-data", origin + ": no header line");
  doc.values.resize(static_cast<int>(rows.size()),
                    static_cast<int>(doc.header.size()));
  for (int i = 0; i < doc.values.rows(); ++i)
    for (int j = 0; j < doc.values.cols(); ++j)
      doc.values(i, j) = rows[i][j];
  return doc;
}

// The respond artifact is a pair of files in the run directory: response.csv
// holds the arc angles and one trace column per source, response_meta.json
// records the discretization so a later invert run can reject mismatched
// data instead of silently mixing grids.
struct ResponseArtifact {
  ResponseMatrix response;
  int source_count = 0;
  double source_width = 0.0;
  AngularInterval sigma;
};

inline void write_response_artifact(const std::string& dir,
                                    const ResponseMatrix& R,
                                    const SourceBasis& basis,
                                    const AngularInterval& sigma) {
  std::string csv;
  std::vector<std::string> head{"angle"};
  for (int c = 0; c < R.entries.cols(); ++c)
    head.push_back("source_" + std::to_string(c));
  csv += csv_row(head);
  for (int r = 0; r < R.entries.rows(); ++r) {
    std::vector<std::string> cells{fmt17(R.meta.angles[r])};
    for (int c = 0; c < R.entries.cols(); ++c)
      cells.push_back(fmt17(R.entries(r, c)));
    csv += csv_row(cells);
  }
  write_text_file(path_join(dir, "response.csv"), csv);

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["a"] = R.meta.a;
  meta["radial_count"] = R.meta.radial_count;
  meta["angular_count"] = R.meta.angular_count;
  meta["q_hash"] = R.meta.q_hash;
  meta["source"] = {{"count", basis.size()}, {"width", basis.width}};
  meta["sigma"] = {{"phi0", sigma.phi0}, {"phi1", sigma.phi1}};
  write_json_file(path_join(dir, "response_meta.json"), meta);
}

inline ResponseArtifact read_response_artifact(const std::string& dir) {
  const std::string csv_path = path_join(dir, "response.csv");
  const std::string meta_path = path_join(dir, "response_meta.json");
  const CsvDocument table = parse_numeric_csv(read_text_file(csv_path), csv_path);
  require(table.values.cols() >= 2 && table.header[0] == "angle", "corrupt-data",
          csv_path + ": expected an angle column plus source columns");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    fail("corrupt-data", meta_path + ": " + e.what());
  }

  ResponseArtifact art;
  art.response.entries = table.values.rightCols(table.values.cols() - 1);
  for (int r = 0; r < table.values.rows(); ++r)
    art.response.meta.angles.push_back(table.values(r, 0));
  try {
    art.response.meta.a = meta.at("a").get<double>();
    art.response.meta.radial_count = meta.at("radial_count").get<int>();
    art.response.meta.angular_count = meta.at("angular_count").get<int>();
    art.response.meta.q_hash = meta.at("q_hash").get<std::uint64_t>();
    art.source_count = meta.at("source").at("count").get<int>();
    art.source_width = meta.at("source").at("width").get<double>();
    art.sigma.phi0 = meta.at("sigma").at("phi0").get<double>();
    art.sigma.phi1 = meta.at("sigma").at("phi1").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail("corrupt-data", meta_path + ": " + e.what());
  }
  require(art.source_count == art.response.entries.cols(), "corrupt-data",
          meta_path + ": source count disagrees with the table");
  return art;
}

}  // namespace fraclab
