#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvpiezo/core/config.hpp"
#include "nvpiezo/core/error.hpp"
#include "nvpiezo/noise/types.hpp"
#include "nvpiezo/transduce/types.hpp"

#ifndef NVPIEZO_VERSION
#define NVPIEZO_VERSION "0.1.0"
#endif

namespace nvpiezo::app {

namespace fs = std::filesystem;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest text that parses back to the same double.
inline std::string num(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw DomainError("write to " + path.string() + " failed");
}

inline std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// CSV with a versioned schema line: "# nvpiezo <schema> v<version>",
/// optional "# key=value" metadata lines, then the column header.
class CsvTable {
 public:
  CsvTable(std::string schema, int version, std::vector<std::string> columns)
      : schema_(std::move(schema)), version_(version), columns_(std::move(columns)) {}

  void meta(const std::string& key, const std::string& value) { meta_.push_back(key + "=" + value); }
  void meta(const std::string& key, double value) { meta(key, num(value)); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw DomainError("CSV row width differs from the header");
    rows_.push_back(cells);
  }
  void row(std::initializer_list<double> values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(num(v));
    row(cells);
  }

  std::string str() const {
    std::string out = "# nvpiezo " + schema_ + " v" + std::to_string(version_) + "\n";
    for (const auto& m : meta_) out += "# " + m + "\n";
    out += join(columns_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const fs::path& path) const { write_text(path, str()); }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    return s + "\n";
  }
  std::string schema_;
  int version_;
  std::vector<std::string> columns_;
  std::vector<std::string> meta_;
  std::vector<std::vector<std::string>> rows_;
};

// ------------------------------------------------------------------- manifest

struct RunManifest {
  std::string command;
  std::string config_hash;  // FNV-1a 64 of config.json as written
  std::vector<std::uint64_t> seeds;
  std::string started, finished;
  std::vector<std::string> outputs;
  std::string version = NVPIEZO_VERSION;

  json to_json() const {
    return {{"command", command}, {"config_hash", config_hash}, {"seeds", seeds}, {"started", started},
            {"finished", finished}, {"outputs", outputs}, {"version", version}};
  }
};

/// Output directory of one command. Files are registered as they are
/// written; finish() stores the canonical config and the manifest.
class RunContext {
 public:
  RunContext(fs::path out_dir, std::string command, const ValidatedModel& model)
      : dir_(std::move(out_dir)), config_(serialize(model).dump(2) + "\n") {
    fs::create_directories(dir_);
    manifest_.command = std::move(command);
    manifest_.started = utc_now();
    manifest_.seeds.push_back(model.environment.seed);
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }
  RunManifest& manifest() { return manifest_; }

  void add(const std::string& name) { manifest_.outputs.push_back(name); }
  void write(const std::string& name, const CsvTable& t) {
    t.write(path(name));
    add(name);
  }
  void write(const std::string& name, const json& j) {
    write_json(path(name), j);
    add(name);
  }

  void finish() {
    write_text(path("config.json"), config_);
    add("config.json");
    manifest_.config_hash = hex64(fnv1a64(config_));
    manifest_.finished = utc_now();
    write_json(path("manifest.json"), manifest_.to_json());
  }

 private:
  fs::path dir_;
  std::string config_;
  RunManifest manifest_;
};

// ------------------------------------------------------------- fits and traces

inline json noise_fit_json(const noise::NoiseFit& f) {
  json j = {{"n_seeds", f.n_seeds}};
  static constexpr const char* names[3] = {"x", "y", "z"};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& d = f.component[c];
    j[names[c]] = {{"R0", d.R0}, {"xi", d.xi}, {"omega0", d.omega0}, {"residual", d.residual}};
  }
  return j;
}

inline noise::NoiseFit noise_fit_from_json(const json& j, const std::string& where) {
  noise::NoiseFit f;
  try {
    f.n_seeds = j.value("n_seeds", 1);
    static constexpr const char* names[3] = {"x", "y", "z"};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& d = j.at(names[c]);
      f.component[c] = {d.at("R0").get<double>(), d.at("xi").get<double>(), d.at("omega0").get<double>(),
                        d.value("residual", 0.0)};
    }
  } catch (const json::exception& e) {
    throw DomainError(where + ": not a noise fit (" + e.what() + ")");
  }
  return f;
}

/// Force trace CSV: "# velocity=<m/s>" and "# resolution=<m>" metadata
/// (optional), an optional "t,F" header, then rows of time (s) and force (N).
/// Without a resolution line it is taken as velocity times the first spacing.
inline transduce::ForceTrace parse_force_trace(std::istream& in, const std::string& name) {
  transduce::ForceTrace tr;
  bool have_resolution = false;
  std::string line;
  std::size_t ln = 0;
  auto number = [&](std::string_view s, const char* what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
      throw ParseError(name, ln, std::string("cannot parse ") + what + " from '" + std::string(s) + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++ln;
    std::string_view s(line);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    if (s.empty()) continue;
    if (s.front() == '#') {
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = s.substr(1, eq - 1);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
      if (key == "velocity") tr.velocity = number(s.substr(eq + 1), "velocity");
      if (key == "resolution") {
        tr.resolution = number(s.substr(eq + 1), "resolution");
        have_resolution = true;
      }
      continue;
    }
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) throw ParseError(name, ln, "expected two comma-separated columns");
    if (tr.t.empty() && (s.substr(0, comma).find_first_of("tT") != std::string_view::npos)) continue;  // header
    const auto rest = s.substr(comma + 1);
    if (rest.find(',') != std::string_view::npos) throw ParseError(name, ln, "expected exactly two columns");
    tr.t.push_back(number(s.substr(0, comma), "time"));
    tr.F.push_back(number(rest, "force"));
    if (tr.t.size() > 1 && !(tr.t.back() > tr.t[tr.t.size() - 2]))
      throw ParseError(name, ln, "times must be strictly increasing");
  }
  if (tr.t.size() < 2) throw ParseError(name, ln, "trace needs at least two samples");
  if (!(tr.velocity > 0.0)) throw ParseError(name, 1, "velocity must be > 0");
  if (!have_resolution) tr.resolution = tr.velocity * (tr.t[1] - tr.t[0]);
  return tr;
}

inline transduce::ForceTrace read_force_trace(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open " + path.string());
  return parse_force_trace(f, path.string());
}

inline CsvTable force_trace_table(const transduce::ForceTrace& tr) {
  CsvTable t("force_trace", 1, {"t", "F"});
  t.meta("velocity", tr.velocity);
  t.meta("resolution", tr.resolution);
  for (std::size_t i = 0; i < tr.t.size(); ++i) t.row({tr.t[i], tr.F[i]});
  return t;
}

}  // namespace nvpiezo::app
