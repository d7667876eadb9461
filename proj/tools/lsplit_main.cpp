// lsplit command-line front end. Talks to the library only through the C
// interface in lsplit/lsplit.h.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsplit/lsplit.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(lsplit_status s) {
  return s == LSPLIT_ERR_INTERNAL || s == LSPLIT_ERR_SOLVER ? kExitInternal : kExitUsage;
}

void check(lsplit_status s) {
  if (s == LSPLIT_OK) return;
  std::string msg = lsplit_last_error();
  if (msg.empty()) msg = lsplit_status_name(s);
  throw Failure{exit_code_for(s), msg};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{kExitUsage, msg}; }

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<lsplit_config, Deleter<lsplit_config, lsplit_config_destroy>>;
using SequencePtr =
    std::unique_ptr<lsplit_sequence, Deleter<lsplit_sequence, lsplit_sequence_destroy>>;
using DecompPtr = std::unique_ptr<lsplit_decomposition,
                                  Deleter<lsplit_decomposition, lsplit_decomposition_destroy>>;
using ReportPtr = std::unique_ptr<lsplit_report, Deleter<lsplit_report, lsplit_report_destroy>>;
using CurvePtr =
    std::unique_ptr<lsplit_pr_curve, Deleter<lsplit_pr_curve, lsplit_pr_curve_destroy>>;

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::string out;
  std::optional<unsigned long long> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  auto* out = cmd->add_option("--out,-o", c.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--config,-c", c.config_path, "Config file (key = value lines)");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--threads", c.threads, "Worker threads");
  cmd->add_option("--set", c.overrides, "Config override key=value (repeatable)");
}

ConfigPtr resolve_config(const Common& c) {
  lsplit_config* raw = nullptr;
  if (!c.config_path.empty()) {
    if (!fs::is_regular_file(c.config_path)) usage_error("config file not found: " + c.config_path);
    check(lsplit_config_load(c.config_path.c_str(), &raw));
  } else {
    check(lsplit_config_create(&raw));
  }
  ConfigPtr cfg(raw);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) usage_error("--set expects key=value, got '" + kv + "'");
    check(lsplit_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (c.seed) check(lsplit_config_set(cfg.get(), "seed", std::to_string(*c.seed).c_str()));
  if (c.threads) check(lsplit_config_set(cfg.get(), "threads", std::to_string(*c.threads).c_str()));
  check(lsplit_config_validate(cfg.get()));
  return cfg;
}

std::string config_get(const lsplit_config* cfg, const char* key) {
  size_t needed = 0;
  check(lsplit_config_get(cfg, key, nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(lsplit_config_get(cfg, key, buf.data(), buf.size(), nullptr));
  buf.resize(needed - 1);
  return buf;
}

std::string canonical(const lsplit_config* cfg) {
  size_t needed = 0;
  check(lsplit_config_canonical(cfg, nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(lsplit_config_canonical(cfg, buf.data(), buf.size(), nullptr));
  buf.resize(needed - 1);
  return buf;
}

void make_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) usage_error("cannot create output directory " + out + ": " + ec.message());
}

// The resolved config goes to <out>/config.txt when there is an output
// directory, otherwise to stderr.
void echo_config(const lsplit_config* cfg, const std::string& out) {
  if (!out.empty()) {
    make_out_dir(out);
    check(lsplit_config_write(cfg, (fs::path(out) / "config.txt").c_str()));
  } else {
    std::cerr << "# resolved config\n" << canonical(cfg);
  }
}

void require_dir(const std::string& dir, const char* what) {
  if (!fs::is_directory(dir)) usage_error(std::string(what) + " not found: " + dir);
}

SequencePtr load_sequence(const std::string& dir, const lsplit_config* cfg,
                          const std::string& mask_flag) {
  require_dir(dir, "sequence directory");
  std::string masks = mask_flag.empty() ? config_get(cfg, "mask_dir") : mask_flag;
  if (!masks.empty()) require_dir(masks, "mask directory");
  lsplit_sequence* raw = nullptr;
  check(lsplit_sequence_load(dir.c_str(), masks.empty() ? nullptr : masks.c_str(), &raw));
  return SequencePtr(raw);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Files in `dir` whose names end with `suffix`, keyed by the remaining stem.
std::map<std::string, fs::path> files_by_stem(const fs::path& dir, const std::string& suffix) {
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      out[name.substr(0, name.size() - suffix.size())] = e.path();
  }
  return out;
}

// ---- decompose ------------------------------------------------------------

struct DecomposeArgs {
  Common common;
  std::string seq_dir;
  std::string masks;
};

int run_decompose(const DecomposeArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  SequencePtr seq = load_sequence(a.seq_dir, cfg.get(), a.masks);
  echo_config(cfg.get(), a.common.out);

  lsplit_decomposition* d_raw = nullptr;
  lsplit_report* r_raw = nullptr;
  check(lsplit_decompose(seq.get(), cfg.get(), &d_raw, &r_raw));
  DecompPtr d(d_raw);
  ReportPtr r(r_raw);

  check(lsplit_decomposition_write(d.get(), a.common.out.c_str()));
  check(lsplit_report_write(r.get(), (fs::path(a.common.out) / "report.txt").c_str()));

  lsplit_report_summary s{};
  check(lsplit_report_summary_get(r.get(), &s));
  std::printf("iterations %d\nconverged %d\nfinal_energy %s\nfinal_grad_norm %s\n", s.iterations,
              s.converged, fmt(s.final_energy).c_str(), fmt(s.final_grad_norm).c_str());
  if (s.aborted) {
    std::fprintf(stderr, "lsplit: solver aborted, see %s/report.txt\n", a.common.out.c_str());
    return kExitInternal;
  }
  return kExitOk;
}

// ---- losses ---------------------------------------------------------------

struct LossesArgs {
  Common common;
  std::string seq_dir;
  std::string decomp_dir;
  std::string masks;
};

int run_losses(const LossesArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  SequencePtr seq = load_sequence(a.seq_dir, cfg.get(), a.masks);
  require_dir(a.decomp_dir, "decomposition directory");
  echo_config(cfg.get(), a.common.out);
  lsplit_decomposition* d_raw = nullptr;
  check(lsplit_decomposition_read(a.decomp_dir.c_str(), &d_raw));
  DecompPtr d(d_raw);
  lsplit_energy_terms t{};
  check(lsplit_losses(seq.get(), d.get(), cfg.get(), &t));
  std::printf("reconstruct %s\nconsistency %s\nrsmooth %s\nssmooth %s\ntotal %s\n",
              fmt(t.reconstruct).c_str(), fmt(t.consistency).c_str(), fmt(t.rsmooth).c_str(),
              fmt(t.ssmooth).c_str(), fmt(t.total).c_str());
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::vector<int> m_list{4, 64};
  int size = 64;
};

int run_bench(const BenchArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  echo_config(cfg.get(), a.common.out);
  if (a.m_list.empty()) usage_error("--m needs at least one frame count");
  const auto seed = std::stoull(config_get(cfg.get(), "seed"));
  std::vector<lsplit_bench_row> rows(a.m_list.size());
  check(lsplit_bench(a.m_list.data(), a.m_list.size(), a.size, seed, rows.data()));

  std::printf("%6s %14s %14s %12s %12s %12s\n", "m", "brute_ms", "closed_ms", "brute_ratio",
              "closed_ratio", "rel_diff");
  for (const auto& r : rows)
    std::printf("%6d %14.4f %14.4f %12.3f %12.3f %12.3e\n", r.frames, r.brute_ms, r.closed_ms,
                r.brute_ms / rows.front().brute_ms, r.closed_ms / rows.front().closed_ms,
                r.rel_diff);
  if (!a.common.out.empty()) {
    std::ofstream f(fs::path(a.common.out) / "bench.txt");
    f << "m brute_ms closed_ms brute_value closed_value rel_diff\n";
    for (const auto& r : rows)
      f << r.frames << ' ' << fmt(r.brute_ms) << ' ' << fmt(r.closed_ms) << ' '
        << fmt(r.brute_value) << ' ' << fmt(r.closed_value) << ' ' << fmt(r.rel_diff) << '\n';
  }
  return kExitOk;
}

// ---- evaluation -----------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred_dir;
  std::string annot_dir;
};

void check_eval_dirs(const EvalArgs& a) {
  require_dir(a.pred_dir, "prediction directory");
  require_dir(a.annot_dir, "annotation directory");
}

int finish_eval(std::size_t scored, const std::vector<std::string>& unmatched) {
  for (const auto& u : unmatched) std::fprintf(stderr, "lsplit: skipped %s\n", u.c_str());
  if (scored == 0) {
    std::fprintf(stderr, "lsplit: nothing to evaluate\n");
    return kExitUsage;
  }
  return kExitOk;
}

int run_eval_iiw(const EvalArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  check_eval_dirs(a);
  echo_config(cfg.get(), a.common.out);
  const auto annots = files_by_stem(a.annot_dir, ".json");
  if (annots.empty()) usage_error("no .json annotations in " + a.annot_dir);
  std::vector<std::string> unmatched;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [stem, json] : annots) {
    const fs::path pred = fs::path(a.pred_dir) / (stem + ".png");
    if (!fs::is_regular_file(pred)) {
      unmatched.push_back(stem + " (no " + pred.string() + ")");
      continue;
    }
    lsplit_whdr_result r{};
    check(lsplit_eval_whdr(pred.c_str(), json.c_str(), nullptr, cfg.get(), &r));
    if (r.evaluated == 0) {
      unmatched.push_back(stem + " (no usable judgments)");
      continue;
    }
    std::printf("%s whdr %s judgments %zu\n", stem.c_str(), fmt(r.whdr).c_str(), r.evaluated);
    sum += r.whdr;
    ++n;
  }
  if (n > 0) std::printf("mean whdr %s images %zu\n", fmt(sum / n).c_str(), n);
  return finish_eval(n, unmatched);
}

int run_eval_saw(const EvalArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  check_eval_dirs(a);
  echo_config(cfg.get(), a.common.out);
  const auto annots = files_by_stem(a.annot_dir, ".png");
  if (annots.empty()) usage_error("no .png label maps in " + a.annot_dir);
  std::vector<std::string> unmatched, shading, labels;
  for (const auto& [stem, label] : annots) {
    const fs::path pred = fs::path(a.pred_dir) / (stem + ".png");
    if (!fs::is_regular_file(pred)) {
      unmatched.push_back(stem + " (no " + pred.string() + ")");
      continue;
    }
    shading.push_back(pred.string());
    labels.push_back(label.string());
  }

  double ap_sum = 0.0;
  std::size_t ap_count = 0;
  for (std::size_t i = 0; i < shading.size(); ++i) {
    const char* s = shading[i].c_str();
    const char* l = labels[i].c_str();
    lsplit_pr_curve* raw = nullptr;
    const lsplit_status st = lsplit_eval_saw(&s, &l, 1, cfg.get(), &raw);
    const std::string stem = fs::path(labels[i]).stem().string();
    if (st == LSPLIT_ERR_INVALID_ARGUMENT) {
      std::printf("%s ap n/a (%s)\n", stem.c_str(), lsplit_last_error());
      continue;
    }
    check(st);
    CurvePtr c(raw);
    std::printf("%s ap %s\n", stem.c_str(), fmt(lsplit_pr_curve_ap(c.get())).c_str());
    ap_sum += lsplit_pr_curve_ap(c.get());
    ++ap_count;
  }
  if (shading.empty()) return finish_eval(0, unmatched);

  std::vector<const char*> sp, lp;
  for (std::size_t i = 0; i < shading.size(); ++i) {
    sp.push_back(shading[i].c_str());
    lp.push_back(labels[i].c_str());
  }
  lsplit_pr_curve* raw = nullptr;
  check(lsplit_eval_saw(sp.data(), lp.data(), sp.size(), cfg.get(), &raw));
  CurvePtr pooled(raw);
  if (ap_count > 0) std::printf("mean ap %s images %zu\n", fmt(ap_sum / ap_count).c_str(), ap_count);
  std::printf("pooled ap %s images %zu\n", fmt(lsplit_pr_curve_ap(pooled.get())).c_str(),
              shading.size());
  if (!a.common.out.empty()) {
    const fs::path path = fs::path(a.common.out) / "pr_curve.txt";
    std::ofstream f(path);
    if (!f) usage_error("cannot write " + path.string());
    f << "# recall precision\n";
    for (std::size_t i = 0; i < lsplit_pr_curve_length(pooled.get()); ++i) {
      double r = 0.0, p = 0.0;
      check(lsplit_pr_curve_point(pooled.get(), i, &r, &p));
      f << fmt(r) << ' ' << fmt(p) << '\n';
    }
  }
  return finish_eval(shading.size(), unmatched);
}

int run_eval_mit(const EvalArgs& a) {
  ConfigPtr cfg = resolve_config(a.common);
  check_eval_dirs(a);
  echo_config(cfg.get(), a.common.out);
  const auto annots = files_by_stem(a.annot_dir, "_reflectance.png");
  if (annots.empty()) usage_error("no *_reflectance.png ground truth in " + a.annot_dir);
  std::vector<std::string> unmatched;
  lsplit_mit_result sum{};
  std::size_t n = 0;
  for (const auto& [stem, gt_r] : annots) {
    const fs::path gt_s = fs::path(a.annot_dir) / (stem + "_shading.png");
    const fs::path mask = fs::path(a.annot_dir) / (stem + "_mask.png");
    const fs::path pr = fs::path(a.pred_dir) / (stem + "_reflectance.png");
    const fs::path ps = fs::path(a.pred_dir) / (stem + "_shading.png");
    std::string missing;
    for (const fs::path& p : {gt_s, pr, ps})
      if (!fs::is_regular_file(p)) missing = p.string();
    if (!missing.empty()) {
      unmatched.push_back(stem + " (no " + missing + ")");
      continue;
    }
    const bool has_mask = fs::is_regular_file(mask);
    lsplit_mit_result r{};
    check(lsplit_eval_mit(pr.c_str(), ps.c_str(), gt_r.c_str(), gt_s.c_str(),
                          has_mask ? mask.c_str() : nullptr, cfg.get(), &r));
    std::printf("%s r_mse %s r_lmse %s r_dssim %s s_mse %s s_lmse %s s_dssim %s\n", stem.c_str(),
                fmt(r.reflectance_mse).c_str(), fmt(r.reflectance_lmse).c_str(),
                fmt(r.reflectance_dssim).c_str(), fmt(r.shading_mse).c_str(),
                fmt(r.shading_lmse).c_str(), fmt(r.shading_dssim).c_str());
    sum.reflectance_mse += r.reflectance_mse;
    sum.reflectance_lmse += r.reflectance_lmse;
    sum.reflectance_dssim += r.reflectance_dssim;
    sum.shading_mse += r.shading_mse;
    sum.shading_lmse += r.shading_lmse;
    sum.shading_dssim += r.shading_dssim;
    ++n;
  }
  if (n > 0) {
    const double k = 1.0 / static_cast<double>(n);
    std::printf("mean r_mse %s r_lmse %s r_dssim %s s_mse %s s_lmse %s s_dssim %s images %zu\n",
                fmt(sum.reflectance_mse * k).c_str(), fmt(sum.reflectance_lmse * k).c_str(),
                fmt(sum.reflectance_dssim * k).c_str(), fmt(sum.shading_mse * k).c_str(),
                fmt(sum.shading_lmse * k).c_str(), fmt(sum.shading_dssim * k).c_str(), n);
  }
  return finish_eval(n, unmatched);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lsplit: reflectance/shading decomposition of fixed-viewpoint image sequences"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Solve for reflectance, shading and illumination");
  c_dec->add_option("seq_dir", dec.seq_dir, "Directory of frames")->required();
  c_dec->add_option("--masks", dec.masks, "Directory of per-frame validity masks");
  add_common(c_dec, dec.common, true);

  LossesArgs los;
  auto* c_los = app.add_subcommand("losses", "Evaluate the energy terms of a decomposition");
  c_los->add_option("seq_dir", los.seq_dir, "Directory of frames")->required();
  c_los->add_option("decomp_dir", los.decomp_dir, "Output of decompose")->required();
  c_los->add_option("--masks", los.masks, "Directory of per-frame validity masks");
  add_common(c_los, los.common, false);

  BenchArgs ben;
  auto* c_ben = app.add_subcommand("bench", "Time brute-force against closed-form all-pairs loss");
  c_ben->add_option("--m", ben.m_list, "Frame counts")->delimiter(',');
  c_ben->add_option("--size", ben.size, "Image side length");
  add_common(c_ben, ben.common, false);

  EvalArgs iiw, saw, mit;
  auto* c_iiw = app.add_subcommand("eval-iiw", "WHDR against IIW judgment files");
  auto* c_saw = app.add_subcommand("eval-saw", "Shading average precision against SAW labels");
  auto* c_mit = app.add_subcommand("eval-mit", "MSE, LMSE and DSSIM against MIT ground truth");
  for (auto [cmd, args] : {std::pair{c_iiw, &iiw}, std::pair{c_saw, &saw}, std::pair{c_mit, &mit}}) {
    cmd->add_option("pred_dir", args->pred_dir, "Predictions")->required();
    cmd->add_option("annot_dir", args->annot_dir, "Annotations")->required();
    add_common(cmd, args->common, false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_dec->parsed()) return run_decompose(dec);
    if (c_los->parsed()) return run_losses(los);
    if (c_ben->parsed()) return run_bench(ben);
    if (c_iiw->parsed()) return run_eval_iiw(iiw);
    if (c_saw->parsed()) return run_eval_saw(saw);
    if (c_mit->parsed()) return run_eval_mit(mit);
  } catch (const Failure& f) {
    std::fprintf(stderr, "lsplit: %s\n", f.message.c_str());
    return f.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lsplit: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
