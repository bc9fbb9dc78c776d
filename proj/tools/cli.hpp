#pragma once

// Command-line front end. run_cli takes the argument list without the
// program name so tests can drive it in-process.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrfmatch/mrfmatch.hpp"

namespace mrfmatch::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

#ifdef MRFMATCH_VERSION
inline constexpr const char* kVersion = MRFMATCH_VERSION;
#else
inline constexpr const char* kVersion = "unknown";
#endif

/// Per-run record written next to outputs.
struct RunManifest {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  json outputs = json::object();
  json timings_ms = json::object();

  json to_json() const {
    return {{"command", command}, {"version", kVersion}, {"config", config},
            {"inputs", inputs},   {"outputs", outputs},  {"timings_ms", timings_ms}};
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Writes a whole file at once so a failure never leaves partial output.
inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

inline void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError("no such file: " + path);
}

/// Matcher constants as flags; unset flags leave the config file or the
/// defaults in place.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> lambda, nndr_theta, theta_seed, bp_epsilon;
  std::optional<std::size_t> kappa, seed_count, knn, bp_max_iters;
  std::optional<std::string> alpha;
  std::optional<std::uint64_t> rng_seed;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON file of matcher constants");
    app.add_option("--lambda", lambda, "pairwise weight");
    app.add_option("--kappa", kappa, "candidate labels per feature");
    app.add_option("--alpha", alpha, "unmatched cost, or 'inf' to disable the unmatched label");
    app.add_option("--nndr-theta", nndr_theta, "seed ratio-test threshold");
    app.add_option("--seed-count", seed_count, "maximum number of seeds");
    app.add_option("--knn", knn, "neighbors per node");
    app.add_option("--theta-seed", theta_seed, "seed consistency threshold (squared px)");
    app.add_option("--bp-max-iters", bp_max_iters, "belief propagation iteration cap");
    app.add_option("--bp-epsilon", bp_epsilon, "belief propagation convergence threshold");
    app.add_option("--rng-seed", rng_seed, "random seed");
  }

  MatcherConfig resolve() const {
    MatcherParams p;
    if (!config_path.empty()) {
      require_file(config_path);
      p = load_params(config_path, p);
    }
    if (lambda) p.lambda = *lambda;
    if (kappa) p.kappa = *kappa;
    if (alpha) {
      if (*alpha == "inf") {
        p.alpha = std::numeric_limits<double>::infinity();
      } else {
        try {
          std::size_t used = 0;
          p.alpha = std::stod(*alpha, &used);
          if (used != alpha->size()) throw std::invalid_argument(*alpha);
        } catch (const std::exception&) {
          throw InputError("--alpha: not a number: " + *alpha);
        }
      }
    }
    if (nndr_theta) p.nndr_theta = *nndr_theta;
    if (seed_count) p.seed_count = *seed_count;
    if (knn) p.knn = *knn;
    if (theta_seed) p.theta_seed = *theta_seed;
    if (bp_max_iters) p.bp_max_iters = *bp_max_iters;
    if (bp_epsilon) p.bp_epsilon = *bp_epsilon;
    if (rng_seed) p.rng_seed = *rng_seed;
    return MatcherConfig(p);
  }
};

inline MatcherKind matcher_kind(const std::string& name) {
  auto k = parse_matcher(name);
  if (!k) throw InputError("unknown matcher '" + name + "'");
  return *k;
}

// ---------------------------------------------------------------------------
// match

struct MatchArgs {
  std::string ref, tgt, out, matcher = "prog", bp_trace;
  bool allow_overshoot = false;
  ConfigFlags flags;
};

inline int cmd_match(const MatchArgs& a, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "match";
  require_file(a.ref);
  require_file(a.tgt);
  const MatcherKind kind = matcher_kind(a.matcher);
  const MatcherConfig config = a.flags.resolve();

  Stopwatch load_clock;
  const FeatureSet ref = load_feature_set(a.ref, {a.allow_overshoot});
  const FeatureSet tgt = load_feature_set(a.tgt, {a.allow_overshoot});
  manifest.timings_ms["load"] = load_clock.ms();

  Stopwatch match_clock;
  const MatchResult result = run_matcher(kind, ref, tgt, config);
  manifest.timings_ms["match"] = match_clock.ms();

  std::ostringstream body;
  write_matches(body, result, std::string(matcher_name(kind)));
  write_text(a.out, body.str());

  manifest.config = params_json(config.params());
  manifest.config["matcher"] = matcher_name(kind);
  manifest.inputs = {{"ref", a.ref}, {"tgt", a.tgt}};
  manifest.outputs = {{"matches", a.out}};
  if (!a.bp_trace.empty()) {
    std::ostringstream trace;
    for (const auto& r : result.rounds) {
      for (std::size_t i = 0; i < r.bp_deltas.size(); ++i) {
        trace << json{{"round", r.round}, {"iteration", i + 1}, {"delta", r.bp_deltas[i]}}.dump()
              << '\n';
      }
    }
    write_text(a.bp_trace, trace.str());
    manifest.outputs["bp_trace"] = a.bp_trace;
  }
  const std::string manifest_path = a.out + ".manifest.json";
  manifest.outputs["manifest"] = manifest_path;
  write_text(manifest_path, manifest.to_json().dump(2) + "\n");
  log << result.matches.size() << " matches in " << result.rounds.size() << " round(s), "
      << manifest.timings_ms["match"].get<double>() << " ms\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string ref, tgt, matches, gt, out, overlay;
  double tol = kDefaultInlierTolerance;
  bool allow_overshoot = false;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  for (const auto* p : {&a.ref, &a.tgt, &a.matches, &a.gt}) require_file(*p);
  if (!(a.tol >= 0.0)) throw InputError("--tol must be >= 0");
  const FeatureSet ref = load_feature_set(a.ref, {a.allow_overshoot});
  const FeatureSet tgt = load_feature_set(a.tgt, {a.allow_overshoot});
  const auto matches = load_matches(a.matches);
  const GroundTruth gt = load_ground_truth(a.gt);
  const MetricReport report = score(matches, ref, tgt, gt.warp, a.tol);

  if (!a.overlay.empty()) {
    std::ostringstream ov;
    for (const auto& c : matches) {
      if (!c.matched()) continue;
      const Point p = ref.position(c.ref), q = tgt.position(c.tgt);
      ov << json{{"ref_xy", {p.x, p.y}},
                 {"tgt_xy", {q.x, q.y}},
                 {"inlier", is_inlier(c, ref, tgt, gt.warp, a.tol)}}
                .dump()
         << '\n';
    }
    write_text(a.overlay, ov.str());
  }
  json j = report_json(report);
  j["tol"] = a.tol;
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  out << j.dump(2) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out_dir;
  SceneSpec spec;
  double angle_deg = 0.0, scale = 1.0, tx = 0.0, ty = 0.0;
};

inline int cmd_synth(SynthArgs a, std::ostream& log) {
  Stopwatch clock;
  a.spec.warp = similarity_warp(a.spec.width, a.spec.height,
                                a.angle_deg * std::numbers::pi / 180.0, a.scale, a.tx, a.ty);
  const Scene scene = generate(a.spec);
  const double gen_ms = clock.ms();

  std::ostringstream ref, tgt;
  write_feature_set(ref, scene.ref);
  write_feature_set(tgt, scene.tgt);
  const std::string gt = ground_truth_json(scene.truth).dump() + "\n";

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw InputError("cannot create " + a.out_dir + ": " + ec.message());
  const fs::path dir(a.out_dir);
  write_text(dir / "ref.jsonl", ref.str());
  write_text(dir / "tgt.jsonl", tgt.str());
  write_text(dir / "gt.json", gt);

  RunManifest m;
  m.command = "synth";
  m.config = {{"n_features", a.spec.n_features},
              {"width", a.spec.width},
              {"height", a.spec.height},
              {"angle_deg", a.angle_deg},
              {"scale", a.scale},
              {"tx", a.tx},
              {"ty", a.ty},
              {"descriptor_len", a.spec.descriptor_len},
              {"descriptor_noise_sigma", a.spec.descriptor_noise_sigma},
              {"position_noise_sigma", a.spec.position_noise_sigma},
              {"scale_noise_sigma", a.spec.scale_noise_sigma},
              {"orientation_noise_sigma", a.spec.orientation_noise_sigma},
              {"unpaired_fraction", a.spec.unpaired_fraction},
              {"repetition_groups", a.spec.repetition_groups},
              {"repeated_fraction", a.spec.repeated_fraction},
              {"rng_seed", a.spec.rng_seed}};
  m.outputs = {{"ref", (dir / "ref.jsonl").string()},
               {"tgt", (dir / "tgt.jsonl").string()},
               {"gt", (dir / "gt.json").string()}};
  m.timings_ms["generate"] = gen_ms;
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
  log << scene.ref.size() << " reference / " << scene.tgt.size() << " target features, "
      << scene.truth.pairs.size() << " planted pairs\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::vector<std::string> scenes;
  std::vector<std::string> matchers = {"nearest", "nndr1", "nndr2", "nonprog", "prog"};
  std::string out;
  double tol = kDefaultInlierTolerance;
  ConfigFlags flags;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.scenes.empty()) throw InputError("no scenes given");
  std::vector<MatcherKind> kinds;
  for (const auto& n : a.matchers) kinds.push_back(matcher_kind(n));
  const MatcherConfig config = a.flags.resolve();
  for (const auto& s : a.scenes) {
    for (const char* f : {"ref.jsonl", "tgt.jsonl", "gt.json"}) {
      require_file((fs::path(s) / f).string());
    }
  }

  std::vector<NamedReport> reports;
  std::map<std::string, double> wall_ms;
  json per_scene = json::array();
  for (const auto& s : a.scenes) {
    const fs::path dir = fs::path(s).lexically_normal();
    const fs::path trimmed = dir.has_filename() ? dir : dir.parent_path();
    const std::string level = trimmed.parent_path().filename().string();
    const FeatureSet ref = load_feature_set((dir / "ref.jsonl").string());
    const FeatureSet tgt = load_feature_set((dir / "tgt.jsonl").string());
    const GroundTruth gt = load_ground_truth((dir / "gt.json").string());
    for (MatcherKind k : kinds) {
      const std::string name(matcher_name(k));
      Stopwatch clock;
      const MatchResult r = run_matcher(k, ref, tgt, config);
      const double ms = clock.ms();
      wall_ms[name] += ms;
      const MetricReport rep = score(r.correspondences(), ref, tgt, gt.warp, a.tol);
      reports.push_back({name, level, rep});
      json row = report_json(rep);
      row["scene"] = s;
      row["level"] = level;
      row["matcher"] = name;
      row["ms"] = ms;
      per_scene.push_back(row);
    }
  }
  const ComparisonTable table = compare(reports);
  out << render_table(table);
  out << "wall-clock (ms, total over " << a.scenes.size() << " scenes)\n";
  for (MatcherKind k : kinds) {
    const std::string name(matcher_name(k));
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-8s %10.1f\n", name.c_str(), wall_ms[name]);
    out << buf;
  }
  if (!a.out.empty()) {
    json j = {{"scenes", per_scene}, {"config", params_json(config.params())}};
    write_text(a.out, j.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// oracle-check

struct OracleArgs {
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

/// Compares BP on random trees against exhaustive minimization.
inline int cmd_oracle_check(const OracleArgs& a, std::ostream& out) {
  std::mt19937_64 rng(a.seed);
  const MatcherConfig config = default_config().with([](MatcherParams& p) {
    p.bp_epsilon = 0.0;
    p.bp_max_iters = 64;
  });
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const RandomProblem prob = random_problem(rng);
    const BpResult bp = run_bp(prob.graph, config);
    const auto labels = decode_labels(prob.graph, bp.beliefs);
    const double lam = energy_lambda(config.lambda());
    const double bp_energy = total_energy(prob.graph, labels, lam).combined;
    const double best = exhaustive_minimize(prob.graph, lam).best_energy.combined;
    const double gap = bp_energy - best;
    worst = std::max(worst, std::abs(gap));
    if (std::abs(gap) > a.tol) ++failures;
  }
  out << json{{"trials", a.trials}, {"failures", failures}, {"max_gap", worst}}.dump() << '\n';
  return failures == 0 ? kOk : kInternalError;
}

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Feature matching by progressive MRF inference", "mrfmatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "match two feature sets");
  match->add_option("--ref", ma.ref, "reference feature set")->required();
  match->add_option("--tgt", ma.tgt, "target feature set")->required();
  match->add_option("--out", ma.out, "match output (JSON lines)")->required();
  match->add_option("--matcher", ma.matcher, "nearest | nndr1 | nndr2 | nonprog | prog");
  match->add_option("--bp-trace", ma.bp_trace, "write per-iteration BP deltas here");
  match->add_flag("--allow-border-overshoot", ma.allow_overshoot,
                  "accept features slightly outside the image");
  ma.flags.attach(*match);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score matches against ground truth");
  eval->add_option("--ref", ea.ref)->required();
  eval->add_option("--tgt", ea.tgt)->required();
  eval->add_option("--matches", ea.matches)->required();
  eval->add_option("--gt", ea.gt, "ground-truth JSON with a 3x3 warp")->required();
  eval->add_option("--tol", ea.tol, "inlier tolerance in pixels");
  eval->add_option("--out", ea.out, "also write the report here");
  eval->add_option("--overlay", ea.overlay, "write per-match inlier records here");
  eval->add_flag("--allow-border-overshoot", ea.allow_overshoot);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  synth->add_option("--out-dir", sa.out_dir)->required();
  synth->add_option("--n-features", sa.spec.n_features);
  synth->add_option("--width", sa.spec.width);
  synth->add_option("--height", sa.spec.height);
  synth->add_option("--angle-deg", sa.angle_deg, "rotation about the image center");
  synth->add_option("--scale", sa.scale);
  synth->add_option("--tx", sa.tx);
  synth->add_option("--ty", sa.ty);
  synth->add_option("--descriptor-len", sa.spec.descriptor_len);
  synth->add_option("--descriptor-noise", sa.spec.descriptor_noise_sigma);
  synth->add_option("--position-noise", sa.spec.position_noise_sigma);
  synth->add_option("--scale-noise", sa.spec.scale_noise_sigma);
  synth->add_option("--orientation-noise", sa.spec.orientation_noise_sigma);
  synth->add_option("--unpaired", sa.spec.unpaired_fraction);
  synth->add_option("--repetition-groups", sa.spec.repetition_groups);
  synth->add_option("--repeated-fraction", sa.spec.repeated_fraction);
  synth->add_option("--seed", sa.spec.rng_seed);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "run every matcher over scene directories");
  bench->add_option("scenes", ba.scenes, "scene directories; the parent name is the level")
      ->required();
  bench->add_option("--matchers", ba.matchers)->delimiter(',');
  bench->add_option("--out", ba.out, "per-scene results as JSON");
  bench->add_option("--tol", ba.tol);
  ba.flags.attach(*bench);

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle-check", "check BP against brute force on trees");
  oracle->add_option("--trials", oa.trials);
  oracle->add_option("--seed", oa.seed);
  oracle->add_option("--tol", oa.tol);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kOk;
    return kInputError;
  }

  try {
    if (match->parsed()) return cmd_match(ma, err);
    if (eval->parsed()) return cmd_eval(ea, out);
    if (synth->parsed()) return cmd_synth(sa, err);
    if (bench->parsed()) return cmd_bench(ba, out);
    if (oracle->parsed()) return cmd_oracle_check(oa, out);
  } catch (const InsufficientSeeds& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace mrfmatch::cli
