#pragma once

// Line-delimited JSON interchange: feature sets, ground truth, match output
// and configuration.

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrfmatch/core.hpp"
#include "mrfmatch/eval.hpp"
#include "mrfmatch/progressive.hpp"
#include "mrfmatch/synth.hpp"

namespace mrfmatch {

using json = nlohmann::json;

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

inline json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw InputError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, std::size_t line_no) {
  if (!j.is_object() || !j.contains(key)) {
    throw InputError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": bad field '" + key + "'");
  }
}

// Reads the next non-blank line; false at end of stream.
inline bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Feature sets

inline void write_feature_set(std::ostream& out, const FeatureSet& set) {
  json header = {{"type", "feature_set"},
                 {"width", set.width()},
                 {"height", set.height()},
                 {"descriptor_len", set.descriptor_len()},
                 {"count", set.size()}};
  out << header.dump() << '\n';
  for (const Feature& f : set.features()) {
    json rec = {{"x", f.x},
                {"y", f.y},
                {"scale", f.scale},
                {"orientation", f.orientation},
                {"descriptor", f.descriptor}};
    out << rec.dump() << '\n';
  }
}

inline void save_feature_set(const std::string& path, const FeatureSet& set) {
  auto out = detail::open_output(path);
  write_feature_set(out, set);
  if (!out) throw InputError("write failed: " + path);
}

inline FeatureSet read_feature_set(std::istream& in, IngestOptions options = {}) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_line(in, line, line_no)) throw InputError("empty feature-set file");
  const json header = detail::parse_line(line, line_no);
  if (!header.is_object() || header.value("type", std::string()) != "feature_set") {
    throw InputError("line 1: expected a feature_set header");
  }
  const auto width = detail::field<double>(header, "width", line_no);
  const auto height = detail::field<double>(header, "height", line_no);
  const auto dim = detail::field<std::size_t>(header, "descriptor_len", line_no);
  const auto count = detail::field<std::size_t>(header, "count", line_no);
  if (dim < 1) throw InputError("descriptor_len must be >= 1");

  std::vector<Feature> features;
  features.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!detail::next_line(in, line, line_no)) {
      throw InputError("expected " + std::to_string(count) + " features, found " +
                       std::to_string(i));
    }
    try {
      const json rec = detail::parse_line(line, line_no);
      Feature f;
      f.x = detail::field<double>(rec, "x", line_no);
      f.y = detail::field<double>(rec, "y", line_no);
      f.scale = detail::field<double>(rec, "scale", line_no);
      f.orientation = detail::field<double>(rec, "orientation", line_no);
      f.descriptor = detail::field<std::vector<double>>(rec, "descriptor", line_no);
      if (f.descriptor.size() != dim) throw InputError("inconsistent descriptor length", i);
      features.push_back(std::move(f));
    } catch (const InputError& e) {
      if (e.feature_index()) throw;
      throw InputError(e.what(), i);
    }
  }
  if (detail::next_line(in, line, line_no)) {
    throw InputError("line " + std::to_string(line_no) + ": records beyond the declared count");
  }
  return FeatureSet(width, height, std::move(features), options);
}

inline FeatureSet load_feature_set(const std::string& path, IngestOptions options = {}) {
  auto in = detail::open_input(path);
  return read_feature_set(in, options);
}

// ---------------------------------------------------------------------------
// Ground truth

inline json ground_truth_json(const GroundTruth& gt) {
  json pairs = json::array();
  for (const auto& [r, t] : gt.pairs) pairs.push_back({r, t});
  return {{"pairs", pairs}, {"warp", gt.warp.data()}};
}

inline void save_ground_truth(const std::string& path, const GroundTruth& gt) {
  auto out = detail::open_output(path);
  out << ground_truth_json(gt).dump() << '\n';
}

/// Reads pairs and warp; other GroundTruth fields stay empty.
inline GroundTruth load_ground_truth(const std::string& path) {
  auto in = detail::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  GroundTruth gt;
  try {
    for (const auto& p : j.at("pairs")) {
      gt.pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    const auto w = j.at("warp").get<std::vector<double>>();
    if (w.size() != 9) throw InputError(path + ": warp needs 9 values");
    std::array<double, 9> m{};
    std::copy(w.begin(), w.end(), m.begin());
    gt.warp = Homography(m);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return gt;
}

// ---------------------------------------------------------------------------
// Match output

inline void write_matches(std::ostream& out, const MatchResult& result,
                          const std::string& matcher = "prog") {
  for (const auto& m : result.matches) {
    json rec = {{"ref", m.match.ref}, {"tgt", m.match.tgt}, {"belief", m.belief},
                {"round", m.round}};
    out << rec.dump() << '\n';
  }
  json rounds = json::array();
  for (const auto& r : result.rounds) {
    rounds.push_back({{"round", r.round},
                      {"added", r.added.size()},
                      {"matched", r.matched},
                      {"unmatched", r.unmatched},
                      {"bp_iterations", r.bp_iterations},
                      {"bp_converged", r.bp_converged}});
  }
  json summary = {{"type", "summary"},
                  {"matcher", matcher},
                  {"matches", result.matches.size()},
                  {"rounds", rounds}};
  out << summary.dump() << '\n';
}

/// Reads match records, skipping the summary record.
inline std::vector<Correspondence> read_matches(std::istream& in) {
  std::vector<Correspondence> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_line(in, line, line_no)) {
    const json rec = detail::parse_line(line, line_no);
    if (rec.is_object() && rec.contains("type")) continue;
    out.push_back({detail::field<std::size_t>(rec, "ref", line_no),
                   detail::field<std::size_t>(rec, "tgt", line_no)});
  }
  return out;
}

inline std::vector<Correspondence> load_matches(const std::string& path) {
  auto in = detail::open_input(path);
  return read_matches(in);
}

inline json report_json(const MetricReport& r) {
  return {{"n_features", r.n_features}, {"n_putative", r.n_putative},
          {"n_inlier", r.n_inlier},     {"pmr", r.pmr},
          {"precision", r.precision},   {"ms", r.ms}};
}

// ---------------------------------------------------------------------------
// Configuration

inline json params_json(const MatcherParams& p) {
  return {{"lambda", p.lambda},
          {"kappa", p.kappa},
          {"alpha", std::isfinite(p.alpha) ? json(p.alpha) : json("inf")},
          {"nndr-theta", p.nndr_theta},
          {"seed-count", p.seed_count},
          {"knn", p.knn},
          {"theta-seed", p.theta_seed},
          {"bp-max-iters", p.bp_max_iters},
          {"bp-epsilon", p.bp_epsilon},
          {"rng-seed", p.rng_seed}};
}

/// Overlays the keys present in `j` onto `p`. Keys are the kebab-case flag
/// names; alpha also accepts the string "inf".
inline void apply_params_json(const json& j, MatcherParams& p) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "lambda") p.lambda = v.get<double>();
      else if (key == "kappa") p.kappa = v.get<std::size_t>();
      else if (key == "alpha") {
        p.alpha = v.is_string() && v.get<std::string>() == "inf"
                      ? std::numeric_limits<double>::infinity()
                      : v.get<double>();
      }
      else if (key == "nndr-theta") p.nndr_theta = v.get<double>();
      else if (key == "seed-count") p.seed_count = v.get<std::size_t>();
      else if (key == "knn") p.knn = v.get<std::size_t>();
      else if (key == "theta-seed") p.theta_seed = v.get<double>();
      else if (key == "bp-max-iters") p.bp_max_iters = v.get<std::size_t>();
      else if (key == "bp-epsilon") p.bp_epsilon = v.get<double>();
      else if (key == "rng-seed") p.rng_seed = v.get<std::uint64_t>();
      else throw InputError("unknown config key '" + key + "'");
    } catch (const json::exception&) {
      throw InputError("bad value for config key '" + key + "'");
    }
  }
}

inline MatcherParams load_params(const std::string& path, MatcherParams base = {}) {
  auto in = detail::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    apply_params_json(json::parse(ss.str()), base);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return base;
}

}  // namespace mrfmatch
