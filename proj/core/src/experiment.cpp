// Copyright 2026 The tile360 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tile360/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

#include "json.hpp"

namespace tile360 {
namespace {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Collects issues while walking the document.
class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void fail(const std::string& path, const std::string& message) { issues_.push_back({path, message}); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    for (const auto& item : obj.items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
        fail(path + "." + item.key(), "unknown field");
      }
    }
  }

  std::optional<double> number(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number()) {
      fail(path + "." + key, "expected a number");
      return std::nullopt;
    }
    return it->get<double>();
  }

  // Present-or-default number with a predicate.
  template <typename Pred>
  double number_or(const json& obj, const std::string& path, const char* key, double fallback, Pred ok,
                   const char* requirement) {
    const auto v = number(obj, path, key);
    if (!v) return fallback;
    if (!ok(*v)) {
      fail(path + "." + key, requirement);
      return fallback;
    }
    return *v;
  }

  std::optional<std::int64_t> integer(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    return it->get<std::int64_t>();
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_string()) {
      fail(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    const std::string p = path + "." + key;
    if (!it->is_array()) {
      fail(p, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) {
        fail(p + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back((*it)[i].get<double>());
    }
    return out;
  }

  std::optional<std::uint64_t> seed(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      fail(path + "." + key, "expected a non-negative integer");
      return std::nullopt;
    }
    return it->get<std::uint64_t>();
  }

  bool boolean_or(const json& obj, const std::string& path, const char* key, bool fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) {
      fail(path + "." + key, "expected a boolean");
      return fallback;
    }
    return it->get<bool>();
  }

 private:
  std::vector<ConfigIssue>& issues_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : base / p;
}

auto positive = [](double v) { return v > 0.0; };
auto non_negative = [](double v) { return v >= 0.0; };

CatalogSpec read_catalog_spec(Reader& r, const json& obj, const std::string& path) {
  CatalogSpec spec;
  r.allow(obj, path,
          {"segments", "rows", "cols", "segment_duration_s", "bitrates_kbps", "alpha_range", "beta_range",
           "seed"});
  if (const auto v = r.integer(obj, path, "segments")) {
    if (*v < 1) r.fail(path + ".segments", "must be >= 1");
    else spec.segments = static_cast<int>(*v);
  }
  if (const auto v = r.integer(obj, path, "rows")) {
    if (*v < 1) r.fail(path + ".rows", "must be >= 1");
    else spec.grid.rows = static_cast<int>(*v);
  }
  if (const auto v = r.integer(obj, path, "cols")) {
    if (*v < 1) r.fail(path + ".cols", "must be >= 1");
    else spec.grid.cols = static_cast<int>(*v);
  }
  spec.segment_duration_s =
      r.number_or(obj, path, "segment_duration_s", spec.segment_duration_s, positive, "must be > 0");
  if (const auto v = r.numbers(obj, path, "bitrates_kbps")) {
    try {
      spec.ladder = QualityLadder(*v);
    } catch (const std::invalid_argument& e) {
      r.fail(path + ".bitrates_kbps", e.what());
    }
  }
  const auto range = [&](const char* key, std::pair<double, double>& target) {
    if (const auto v = r.numbers(obj, path, key)) {
      if (v->size() != 2 || !((*v)[0] > 0.0) || !((*v)[0] <= (*v)[1])) {
        r.fail(path + "." + key, "expected [lo, hi] with 0 < lo <= hi");
      } else {
        target = {(*v)[0], (*v)[1]};
      }
    }
  };
  range("alpha_range", spec.alpha_range);
  range("beta_range", spec.beta_range);
  return spec;
}

void read_catalog(Reader& r, const json& root, const std::filesystem::path& base, ExperimentConfig& cfg) {
  const auto it = root.find("catalog");
  if (it == root.end()) {
    r.fail("$.catalog", "missing required field");
    return;
  }
  const std::string path = "$.catalog";
  if (!r.object(*it, path)) return;
  r.allow(*it, path, {"file", "synthesize"});
  const bool has_file = it->contains("file");
  const bool has_synth = it->contains("synthesize");
  if (has_file == has_synth) {
    r.fail(path, "exactly one of 'file' or 'synthesize' is required");
    return;
  }
  if (has_file) {
    const auto file = r.string(*it, path, "file");
    if (!file) return;
    cfg.catalog_source.kind = CatalogSourceKind::kFile;
    cfg.catalog_source.file = resolve(base, *file);
    try {
      cfg.catalog = std::make_shared<const TileCatalog>(load_catalog(cfg.catalog_source.file));
    } catch (const std::exception& e) {
      r.fail(path + ".file", e.what());
    }
    return;
  }
  const json& synth = (*it)["synthesize"];
  const std::string spath = path + ".synthesize";
  if (!r.object(synth, spath)) return;
  cfg.catalog_source.kind = CatalogSourceKind::kSynthesize;
  cfg.catalog_source.spec = read_catalog_spec(r, synth, spath);
  if (const auto s = r.seed(synth, spath, "seed")) cfg.catalog_source.seed = *s;
  try {
    cfg.catalog = std::make_shared<const TileCatalog>(
        synthesize_catalog(cfg.catalog_source.spec, cfg.catalog_source.seed));
  } catch (const std::exception& e) {
    r.fail(spath, e.what());
  }
}

void read_channel(Reader& r, const json& root, const std::filesystem::path& base, ExperimentConfig& cfg) {
  const auto it = root.find("channel");
  if (it == root.end()) {
    r.fail("$.channel", "missing required field");
    return;
  }
  const std::string path = "$.channel";
  if (!r.object(*it, path)) return;
  const json& c = *it;
  const auto type = r.string(c, path, "type");
  if (!type) {
    if (!c.contains("type")) r.fail(path + ".type", "missing required field");
    return;
  }
  const double jitter = r.number_or(
      c, path, "jitter", 0.0, [](double v) { return v >= 0.0 && v < 1.0; }, "must lie in [0, 1)");
  ChannelModel::Variant variant;
  if (*type == "fixed") {
    r.allow(c, path, {"type", "jitter", "bandwidth_kbps"});
    variant = FixedChannel{r.number_or(c, path, "bandwidth_kbps", 10000.0, positive, "must be > 0")};
  } else if (*type == "markov") {
    r.allow(c, path, {"type", "jitter", "states_kbps", "transition_probability", "epoch_s"});
    MarkovChannel m;
    if (const auto v = r.numbers(c, path, "states_kbps")) m.states_kbps = *v;
    m.transition_probability = r.number_or(
        c, path, "transition_probability", m.transition_probability,
        [](double v) { return v >= 0.0 && v <= 1.0; }, "must lie in [0, 1]");
    m.epoch_s = r.number_or(c, path, "epoch_s", m.epoch_s, positive, "must be > 0");
    variant = m;
  } else if (*type == "trace") {
    r.allow(c, path, {"type", "jitter", "file", "steps"});
    const bool has_file = c.contains("file");
    const bool has_steps = c.contains("steps");
    if (has_file == has_steps) {
      r.fail(path, "a trace channel needs exactly one of 'file' or 'steps'");
      return;
    }
    TraceChannel trace;
    if (has_file) {
      const auto file = r.string(c, path, "file");
      if (!file) return;
      cfg.trace_file = resolve(base, *file);
      try {
        trace = load_trace_csv(*cfg.trace_file);
      } catch (const std::exception& e) {
        r.fail(path + ".file", e.what());
        return;
      }
    } else {
      const json& steps = c["steps"];
      if (!steps.is_array()) {
        r.fail(path + ".steps", "expected an array of [start_s, bandwidth_kbps] pairs");
        return;
      }
      for (std::size_t i = 0; i < steps.size(); ++i) {
        const json& s = steps[i];
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
          r.fail(path + ".steps[" + std::to_string(i) + "]", "expected [start_s, bandwidth_kbps]");
          return;
        }
        trace.steps.push_back({s[0].get<double>(), s[1].get<double>()});
      }
    }
    variant = trace;
  } else {
    r.fail(path + ".type", "expected one of fixed | markov | trace");
    return;
  }
  try {
    cfg.channel = ChannelModel(variant, jitter);
  } catch (const std::invalid_argument& e) {
    r.fail(path, e.what());
  }
}

json ladder_json(const QualityLadder& ladder) {
  return json(std::vector<double>(ladder.bitrates().begin(), ladder.bitrates().end()));
}

json channel_json(const ExperimentConfig& cfg) {
  json c;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FixedChannel>) {
          c["type"] = "fixed";
          c["bandwidth_kbps"] = v.bandwidth_kbps;
        } else if constexpr (std::is_same_v<T, MarkovChannel>) {
          c["type"] = "markov";
          c["states_kbps"] = v.states_kbps;
          c["transition_probability"] = v.transition_probability;
          c["epoch_s"] = v.epoch_s;
        } else {
          c["type"] = "trace";
          if (cfg.trace_file) {
            c["file"] = cfg.trace_file->generic_string();
          } else {
            json steps = json::array();
            for (const auto& s : v.steps) steps.push_back({s.start_s, s.bandwidth_kbps});
            c["steps"] = steps;
          }
        }
      },
      cfg.channel.variant());
  c["jitter"] = cfg.channel.jitter();
  return c;
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.catalog_source.kind == CatalogSourceKind::kFile) {
    j["catalog"] = {{"file", cfg.catalog_source.file.generic_string()}};
  } else {
    const CatalogSpec& s = cfg.catalog_source.spec;
    j["catalog"] = {{"synthesize",
                     {{"segments", s.segments},
                      {"rows", s.grid.rows},
                      {"cols", s.grid.cols},
                      {"segment_duration_s", s.segment_duration_s},
                      {"bitrates_kbps", ladder_json(s.ladder)},
                      {"alpha_range", {s.alpha_range.first, s.alpha_range.second}},
                      {"beta_range", {s.beta_range.first, s.beta_range.second}},
                      {"seed", cfg.catalog_source.seed}}}};
  }
  j["channel"] = channel_json(cfg);
  json methods = json::array();
  for (const Method m : cfg.methods) methods.push_back(std::string(method_name(m)));
  j["methods"] = methods;
  j["switch_probabilities"] = cfg.switch_probabilities;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["segments"] = cfg.segments;
  j["buffer"] = {{"startup_s", cfg.buffer.startup_s}, {"min_s", cfg.buffer.min_s}, {"max_s", cfg.buffer.max_s}};
  j["throughput_window"] = cfg.throughput_window;
  j["fov"] = {{"mu", cfg.fov.mu}, {"sigma2", cfg.fov.sigma2}};
  if (cfg.patterns_file) j["fov"]["patterns_file"] = cfg.patterns_file->generic_string();
  j["fine"] = {{"theta", {cfg.fine.theta.average, cfg.fine.theta.spatial, cfg.fine.theta.temporal}},
               {"distortion_threshold", cfg.fine.distortion_threshold},
               {"rate_threshold_kbps", cfg.fine.rate_threshold_kbps},
               {"candidate_cap", cfg.fine.candidate_cap},
               {"search", cfg.fine.search == FineSearch::kExact ? "exact" : "neighborhood"}};
  j["qoe"] = {{"gamma", cfg.qoe.gamma}, {"delta", cfg.qoe.delta}, {"eta", cfg.qoe.eta}, {"b_ref_s", cfg.qoe.b_ref_s}};
  j["missing_distortion"] = cfg.missing_distortion;
  j["output"] = {{"dir", cfg.output_dir.generic_string()}, {"per_segment", cfg.per_segment_csv}};
  return j;
}

double mean_of(std::span<const MetricsRecord> records, double MetricsRecord::*field) {
  double sum = 0.0;
  for (const auto& r : records) sum += r.*field;
  return sum / static_cast<double>(records.size());
}

}  // namespace

ConfigReport parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ConfigReport report;
  Reader r(report.issues);
  json root;
  const bool blank = std::all_of(text.begin(), text.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
  if (blank) {
    root = json::object();
  } else {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      r.fail("$", std::string("parse error: ") + e.what());
      return report;
    }
  }
  if (!r.object(root, "$")) return report;
  r.allow(root, "$",
          {"catalog", "channel", "methods", "switch_probabilities", "replicates", "seed", "segments",
           "buffer", "throughput_window", "fov", "fine", "qoe", "missing_distortion", "output"});

  ExperimentConfig cfg;
  read_catalog(r, root, base_dir, cfg);
  read_channel(r, root, base_dir, cfg);

  if (const auto it = root.find("methods"); it == root.end()) {
    r.fail("$.methods", "missing required field");
  } else if (!it->is_array() || it->empty()) {
    r.fail("$.methods", "expected a non-empty array of method names");
  } else {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "$.methods[" + std::to_string(i) + "]";
      const json& m = (*it)[i];
      const auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
      if (!parsed) {
        r.fail(p, "expected one of aa | adapa | pd | proposed_wo_st | proposed");
      } else if (std::find(cfg.methods.begin(), cfg.methods.end(), *parsed) != cfg.methods.end()) {
        r.fail(p, "duplicate method");
      } else {
        cfg.methods.push_back(*parsed);
      }
    }
  }

  if (const auto v = r.numbers(root, "$", "switch_probabilities")) {
    if (v->empty()) r.fail("$.switch_probabilities", "must not be empty");
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!((*v)[i] >= 0.0 && (*v)[i] <= 1.0)) {
        r.fail("$.switch_probabilities[" + std::to_string(i) + "]", "must lie in [0, 1]");
      }
    }
    std::set<double> unique(v->begin(), v->end());
    if (unique.size() != v->size()) r.fail("$.switch_probabilities", "duplicate values");
    cfg.switch_probabilities = *v;
  }
  if (const auto v = r.integer(root, "$", "replicates")) {
    if (*v < 1) r.fail("$.replicates", "must be >= 1");
    else cfg.replicates = static_cast<int>(*v);
  }
  if (const auto v = r.seed(root, "$", "seed")) cfg.seed = *v;
  if (const auto v = r.integer(root, "$", "segments")) {
    if (*v < 0) r.fail("$.segments", "must be >= 0");
    else cfg.segments = static_cast<int>(*v);
  }

  if (const auto it = root.find("buffer"); it != root.end() && r.object(*it, "$.buffer")) {
    r.allow(*it, "$.buffer", {"startup_s", "min_s", "max_s"});
    cfg.buffer.startup_s = r.number_or(*it, "$.buffer", "startup_s", cfg.buffer.startup_s, positive, "must be > 0");
    cfg.buffer.min_s = r.number_or(*it, "$.buffer", "min_s", cfg.buffer.min_s, positive, "must be > 0");
    cfg.buffer.max_s = r.number_or(*it, "$.buffer", "max_s", cfg.buffer.max_s, positive, "must be > 0");
    if (cfg.buffer.max_s <= cfg.buffer.min_s) r.fail("$.buffer", "max_s must be > min_s");
  }

  // One-segment window unless the channel is jittery.
  cfg.throughput_window = cfg.channel.jitter() > 0.0 ? 4 : 1;
  if (const auto v = r.integer(root, "$", "throughput_window")) {
    if (*v < 1) r.fail("$.throughput_window", "must be >= 1");
    else cfg.throughput_window = static_cast<int>(*v);
  }

  const TileGrid grid = cfg.catalog ? cfg.catalog->grid() : TileGrid{};
  if (const auto it = root.find("fov"); it != root.end() && r.object(*it, "$.fov")) {
    r.allow(*it, "$.fov", {"mu", "sigma2", "patterns_file"});
    cfg.fov.mu = r.number_or(*it, "$.fov", "mu", cfg.fov.mu, [](double) { return true; }, "");
    cfg.fov.sigma2 = r.number_or(*it, "$.fov", "sigma2", cfg.fov.sigma2, positive, "must be > 0");
    if (const auto file = r.string(*it, "$.fov", "patterns_file")) {
      cfg.patterns_file = resolve(base_dir, *file);
      try {
        cfg.patterns = std::make_shared<const std::vector<FovPattern>>(load_patterns(*cfg.patterns_file, grid));
      } catch (const std::exception& e) {
        r.fail("$.fov.patterns_file", e.what());
      }
    }
  }
  if (!cfg.patterns_file) {
    try {
      cfg.patterns = std::make_shared<const std::vector<FovPattern>>(default_patterns(grid));
    } catch (const std::exception& e) {
      r.fail("$.fov.patterns_file", std::string("no default patterns for this grid: ") + e.what());
    }
  }

  if (const auto it = root.find("fine"); it != root.end() && r.object(*it, "$.fine")) {
    const std::string p = "$.fine";
    r.allow(*it, p, {"theta", "distortion_threshold", "rate_threshold_kbps", "candidate_cap", "search"});
    if (const auto v = r.numbers(*it, p, "theta")) {
      if (v->size() != 3) {
        r.fail(p + ".theta", "expected three weights");
      } else {
        const Theta theta{(*v)[0], (*v)[1], (*v)[2]};
        try {
          validate(theta);
          cfg.fine.theta = theta;
        } catch (const std::invalid_argument& e) {
          r.fail(p + ".theta", e.what());
        }
      }
    }
    cfg.fine.distortion_threshold = r.number_or(*it, p, "distortion_threshold", cfg.fine.distortion_threshold,
                                                non_negative, "must be >= 0");
    cfg.fine.rate_threshold_kbps = r.number_or(*it, p, "rate_threshold_kbps", cfg.fine.rate_threshold_kbps,
                                               non_negative, "must be >= 0");
    if (const auto v = r.integer(*it, p, "candidate_cap")) {
      if (*v < 1) r.fail(p + ".candidate_cap", "must be >= 1");
      else cfg.fine.candidate_cap = static_cast<std::size_t>(*v);
    }
    if (const auto v = r.string(*it, p, "search")) {
      if (*v == "exact") cfg.fine.search = FineSearch::kExact;
      else if (*v == "neighborhood") cfg.fine.search = FineSearch::kNeighborhood;
      else r.fail(p + ".search", "expected exact | neighborhood");
    }
  }

  if (const auto it = root.find("qoe"); it != root.end() && r.object(*it, "$.qoe")) {
    const std::string p = "$.qoe";
    r.allow(*it, p, {"gamma", "delta", "eta", "b_ref_s"});
    cfg.qoe.gamma = r.number_or(*it, p, "gamma", cfg.qoe.gamma, non_negative, "must be >= 0");
    cfg.qoe.delta = r.number_or(*it, p, "delta", cfg.qoe.delta, non_negative, "must be >= 0");
    cfg.qoe.eta = r.number_or(*it, p, "eta", cfg.qoe.eta, non_negative, "must be >= 0");
    cfg.qoe.b_ref_s = r.number_or(*it, p, "b_ref_s", cfg.qoe.b_ref_s, non_negative, "must be >= 0");
  }
  cfg.missing_distortion =
      r.number_or(root, "$", "missing_distortion", cfg.missing_distortion, positive, "must be > 0");

  if (const auto it = root.find("output"); it != root.end() && r.object(*it, "$.output")) {
    r.allow(*it, "$.output", {"dir", "per_segment"});
    if (const auto dir = r.string(*it, "$.output", "dir")) cfg.output_dir = resolve(base_dir, *dir);
    cfg.per_segment_csv = r.boolean_or(*it, "$.output", "per_segment", cfg.per_segment_csv);
  } else {
    cfg.output_dir = base_dir / cfg.output_dir;
  }

  if (report.issues.empty()) report.config = std::move(cfg);
  return report;
}

ConfigReport validate_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::exception& e) {
    ConfigReport report;
    report.issues.push_back({"$", e.what()});
    return report;
  }
  return parse_config(text, path.parent_path());
}

std::string normalized_config_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

CatalogSpec catalog_spec_from_json(std::string_view text) {
  std::vector<ConfigIssue> issues;
  Reader r(issues);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("$: parse error: ") + e.what());
  }
  CatalogSpec spec;
  if (r.object(root, "$")) spec = read_catalog_spec(r, root, "$");
  if (!issues.empty()) {
    std::string msg;
    for (const auto& i : issues) msg += i.path + ": " + i.message + "\n";
    throw std::invalid_argument(msg);
  }
  return spec;
}

SessionConfig session_config(const ExperimentConfig& config, Method method, double switch_probability,
                             std::uint64_t seed) {
  SessionConfig s;
  s.catalog = config.catalog;
  s.patterns = config.patterns;
  s.channel = config.channel;
  s.method = method;
  s.buffer = config.buffer;
  s.throughput_window = config.throughput_window;
  s.fov = config.fov;
  s.switch_probability = switch_probability;
  s.fine = config.fine;
  s.qoe = config.qoe;
  s.missing_distortion = config.missing_distortion;
  s.seed = seed;
  s.segments = config.segments;
  return s;
}

ExperimentResults run_grid(const ExperimentConfig& config, int jobs) {
  if (!config.catalog || !config.patterns) throw std::invalid_argument("experiment: unresolved config");
  if (config.methods.empty()) throw std::invalid_argument("experiment: no methods");
  if (config.replicates < 1) throw std::invalid_argument("experiment: replicates must be >= 1");

  ExperimentResults results;
  for (const Method m : config.methods) {
    for (const double p : config.switch_probabilities) {
      for (int rep = 0; rep < config.replicates; ++rep) {
        results.cells.push_back({{m, p, rep, config.seed + static_cast<std::uint64_t>(rep)}, {}});
      }
    }
  }
  // Fail fast on configuration errors before spawning workers.
  validate(session_config(config, config.methods.front(), config.switch_probabilities.front(), config.seed));

  const std::size_t n = results.cells.size();
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  const auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < n; i = next++) {
        CellResult& cell = results.cells[i];
        cell.session =
            run_session(session_config(config, cell.key.method, cell.key.switch_probability, cell.key.seed));
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = n;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  results.aggregate = aggregate(results.cells);
  return results;
}

std::vector<AggregateRow> aggregate(std::span<const CellResult> cells) {
  std::vector<AggregateRow> rows;
  for (const CellResult& cell : cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) {
      return r.method == cell.key.method && r.switch_probability == cell.key.switch_probability;
    });
    if (it == rows.end()) {
      rows.push_back({});
      it = rows.end() - 1;
      it->method = cell.key.method;
      it->switch_probability = cell.key.switch_probability;
    }
    const auto& rec = cell.session.records;
    if (rec.empty()) throw std::invalid_argument("aggregate: session without records");
    it->replicates += 1;
    it->fov_actual_mbps += mean_of(rec, &MetricsRecord::fov_actual_kbps) / 1000.0;
    it->fov_avg_psnr_db += mean_of(rec, &MetricsRecord::fov_avg_psnr_db);
    it->fov_psnr_std_db += mean_of(rec, &MetricsRecord::fov_psnr_std_db);
    it->fov_psnr_temporal_diff_db += mean_of(rec, &MetricsRecord::fov_psnr_temporal_diff_db);
    it->f_value += mean_of(rec, &MetricsRecord::f_value);
    it->qoe += cell.session.qoe;
    it->actual_mbps += mean_of(rec, &MetricsRecord::actual_kbps) / 1000.0;
    it->weighted_psnr_db += mean_of(rec, &MetricsRecord::weighted_psnr_db);
    it->buffer_s += mean_of(rec, &MetricsRecord::buffer_s);
    it->stall_s += mean_of(rec, &MetricsRecord::stall_s);
  }
  for (auto& r : rows) {
    const double k = r.replicates;
    for (double* v : {&r.fov_actual_mbps, &r.fov_avg_psnr_db, &r.fov_psnr_std_db, &r.fov_psnr_temporal_diff_db,
                      &r.f_value, &r.qoe, &r.actual_mbps, &r.weighted_psnr_db, &r.buffer_s, &r.stall_s}) {
      *v /= k;
    }
  }
  return rows;
}

std::string segment_csv(std::span<const MetricsRecord> records) {
  std::string out =
      "segment,predicted_pattern,display_pattern,switched,requested_kbps,actual_kbps,fov_actual_kbps,"
      "weighted_psnr_db,fov_avg_psnr_db,fov_psnr_std_db,fov_psnr_temporal_diff_db,f_value,buffer_s,"
      "stall_s,download_s,fine_f_start,fine_f_result\n";
  for (const auto& r : records) {
    out += std::to_string(r.segment) + ',' + std::to_string(r.predicted_pattern) + ',' +
           std::to_string(r.display_pattern) + ',' + (r.switched ? "1" : "0");
    for (const double v : {r.requested_kbps, r.actual_kbps, r.fov_actual_kbps, r.weighted_psnr_db,
                           r.fov_avg_psnr_db, r.fov_psnr_std_db, r.fov_psnr_temporal_diff_db, r.f_value,
                           r.buffer_s, r.stall_s, r.download_s}) {
      out += ',' + format_number(v);
    }
    out += ',' + (r.fine_f_start ? format_number(*r.fine_f_start) : std::string());
    out += ',' + (r.fine_f_result ? format_number(*r.fine_f_result) : std::string());
    out += '\n';
  }
  return out;
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::string out =
      "method,switch_probability,replicates,fov_actual_bitrate_mbps,fov_avg_psnr_db,fov_psnr_std_db,"
      "fov_psnr_temporal_diff_db,f_value,qoe,actual_bitrate_mbps,weighted_psnr_db,buffer_s,stall_s\n";
  for (const auto& r : rows) {
    out += std::string(method_name(r.method)) + ',' + format_number(r.switch_probability) + ',' +
           std::to_string(r.replicates);
    for (const double v : {r.fov_actual_mbps, r.fov_avg_psnr_db, r.fov_psnr_std_db, r.fov_psnr_temporal_diff_db,
                           r.f_value, r.qoe, r.actual_mbps, r.weighted_psnr_db, r.buffer_s, r.stall_s}) {
      out += ',' + format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string mean_segment_csv(std::span<const CellResult> replicates) {
  std::string out =
      "segment,switch_rate,actual_kbps,fov_actual_kbps,weighted_psnr_db,fov_avg_psnr_db,fov_psnr_std_db,"
      "fov_psnr_temporal_diff_db,f_value,buffer_s,stall_s\n";
  if (replicates.empty()) return out;
  const std::size_t segments = replicates.front().session.records.size();
  const double k = static_cast<double>(replicates.size());
  for (std::size_t l = 0; l < segments; ++l) {
    std::array<double, 10> sum{};
    for (const auto& cell : replicates) {
      const MetricsRecord& r = cell.session.records.at(l);
      const std::array<double, 10> v{r.switched ? 1.0 : 0.0, r.actual_kbps, r.fov_actual_kbps,
                                     r.weighted_psnr_db,     r.fov_avg_psnr_db, r.fov_psnr_std_db,
                                     r.fov_psnr_temporal_diff_db, r.f_value, r.buffer_s, r.stall_s};
      for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
    }
    out += std::to_string(l + 1);
    for (const double s : sum) out += ',' + format_number(s / k);
    out += '\n';
  }
  return out;
}

std::string cell_stem(Method method, double switch_probability) {
  return std::string(method_name(method)) + "_p" + format_number(switch_probability);
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResults& results) {
  json j;
  j["config"] = config_json(config);
  json seeds = json::array();
  for (int r = 0; r < config.replicates; ++r) seeds.push_back(config.seed + static_cast<std::uint64_t>(r));
  j["replicate_seeds"] = seeds;
  json rows = json::array();
  for (const auto& r : results.aggregate) {
    rows.push_back({{"method", std::string(method_name(r.method))},
                    {"switch_probability", r.switch_probability},
                    {"replicates", r.replicates},
                    {"fov_actual_bitrate_mbps", r.fov_actual_mbps},
                    {"fov_avg_psnr_db", r.fov_avg_psnr_db},
                    {"fov_psnr_std_db", r.fov_psnr_std_db},
                    {"fov_psnr_temporal_diff_db", r.fov_psnr_temporal_diff_db},
                    {"f_value", r.f_value},
                    {"qoe", r.qoe},
                    {"actual_bitrate_mbps", r.actual_mbps},
                    {"weighted_psnr_db", r.weighted_psnr_db},
                    {"buffer_s", r.buffer_s},
                    {"stall_s", r.stall_s}});
  }
  j["aggregate"] = rows;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_results(const ExperimentConfig& config, const ExperimentResults& results,
                                                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  fs::create_directories(out_dir);
  const auto emit = [&](const fs::path& rel, const std::string& text) {
    write_text(out_dir / rel, text);
    written.push_back(rel);
  };
  emit("aggregate.csv", aggregate_csv(results.aggregate));
  emit("summary.json", summary_json(config, results));
  if (config.per_segment_csv) {
    fs::create_directories(out_dir / "segments");
    fs::create_directories(out_dir / "mean_segments");
    std::size_t i = 0;
    while (i < results.cells.size()) {
      const CellKey& key = results.cells[i].key;
      const std::string stem = cell_stem(key.method, key.switch_probability);
      std::size_t j = i;
      while (j < results.cells.size() && results.cells[j].key.method == key.method &&
             results.cells[j].key.switch_probability == key.switch_probability) {
        const CellResult& cell = results.cells[j];
        emit(fs::path("segments") / (stem + "_r" + std::to_string(cell.key.replicate) + ".csv"),
             segment_csv(cell.session.records));
        ++j;
      }
      emit(fs::path("mean_segments") / (stem + ".csv"),
           mean_segment_csv(std::span<const CellResult>(results.cells).subspan(i, j - i)));
      i = j;
    }
  }
  return written;
}

}  // namespace tile360
