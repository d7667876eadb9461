#include "lsplit/lsplit.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "lsplit/bench.hpp"
#include "lsplit/config.hpp"
#include "lsplit/decompose_io.hpp"
#include "lsplit/error.hpp"
#include "lsplit/evalkit.hpp"
#include "lsplit/image_io.hpp"
#include "lsplit/imagestack.hpp"
#include "lsplit/parallel.hpp"
#include "lsplit/solver.hpp"

struct lsplit_config {
  lsplit::RunConfig cfg;
};
struct lsplit_sequence {
  lsplit::ImageSequence seq;
};
struct lsplit_decomposition {
  lsplit::Decomposition d;
};
struct lsplit_report {
  lsplit::SolveReport report;
};
struct lsplit_pr_curve {
  lsplit::SawResult result;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_subject;

lsplit_status to_status(lsplit::ErrorCode code) {
  using lsplit::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return LSPLIT_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return LSPLIT_ERR_IO;
    case ErrorCode::DimensionMismatch: return LSPLIT_ERR_DIMENSION_MISMATCH;
    case ErrorCode::EmptyInput: return LSPLIT_ERR_EMPTY_INPUT;
    case ErrorCode::Format: return LSPLIT_ERR_FORMAT;
    case ErrorCode::ShapeMismatch: return LSPLIT_ERR_SHAPE_MISMATCH;
    case ErrorCode::SolverFailure: return LSPLIT_ERR_SOLVER;
    case ErrorCode::Internal: return LSPLIT_ERR_INTERNAL;
  }
  return LSPLIT_ERR_INTERNAL;
}

lsplit_status set_error(lsplit_status s, std::string msg, std::string subject = {}) {
  g_error = std::move(msg);
  g_subject = std::move(subject);
  return s;
}

template <typename F>
lsplit_status guarded(F&& f) noexcept {
  try {
    g_error.clear();
    g_subject.clear();
    f();
    return LSPLIT_OK;
  } catch (const lsplit::Error& e) {
    return set_error(to_status(e.code()), e.what(), e.subject());
  } catch (const std::bad_alloc&) {
    return set_error(LSPLIT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LSPLIT_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(LSPLIT_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr)
    lsplit::fail(lsplit::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

void copy_text(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (cap == 0) return;
  require(buf, "buffer");
  if (cap < text.size() + 1)
    lsplit::fail(lsplit::ErrorCode::InvalidArgument, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
}

void write_text(const char* path, const std::string& text) {
  require(path, "path");
  std::ofstream out(path, std::ios::binary);
  if (!out) lsplit::fail(lsplit::ErrorCode::Io, std::string("cannot write ") + path, path);
  out << text;
  if (!out) lsplit::fail(lsplit::ErrorCode::Io, std::string("cannot write ") + path, path);
}

void check_dims(int frames, int width, int height) {
  if (frames < 1 || width < 1 || height < 1)
    lsplit::fail(lsplit::ErrorCode::InvalidArgument, "dimensions must be positive");
}

void copy_out(const std::vector<lsplit::Image>& imgs, double* out, size_t count) {
  require(out, "output");
  size_t total = 0;
  for (const auto& im : imgs) total += im.data.size();
  if (count != total)
    lsplit::fail(lsplit::ErrorCode::ShapeMismatch,
                 "expected " + std::to_string(total) + " values, got " + std::to_string(count));
  for (const auto& im : imgs) out = std::copy(im.data.begin(), im.data.end(), out);
}

}  // namespace

extern "C" {

const char* lsplit_version(void) { return "0.1.0"; }

const char* lsplit_status_name(lsplit_status status) {
  switch (status) {
    case LSPLIT_OK: return "ok";
    case LSPLIT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LSPLIT_ERR_IO: return "i/o error";
    case LSPLIT_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case LSPLIT_ERR_EMPTY_INPUT: return "empty input";
    case LSPLIT_ERR_FORMAT: return "format error";
    case LSPLIT_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case LSPLIT_ERR_SOLVER: return "solver failure";
    case LSPLIT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lsplit_last_error(void) { return g_error.c_str(); }
const char* lsplit_last_error_subject(void) { return g_subject.c_str(); }

lsplit_status lsplit_set_threads(int threads) {
  return guarded([&] {
    if (threads < 1) lsplit::fail(lsplit::ErrorCode::InvalidArgument, "threads must be at least 1");
    lsplit::set_thread_count(threads);
  });
}

// ---- configuration --------------------------------------------------------

lsplit_status lsplit_config_create(lsplit_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lsplit_config{};
  });
}

lsplit_status lsplit_config_load(const char* path, lsplit_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lsplit_config{lsplit::RunConfig::load(path)};
  });
}

lsplit_status lsplit_config_parse(const char* text, lsplit_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new lsplit_config{lsplit::RunConfig::parse(text)};
  });
}

void lsplit_config_destroy(lsplit_config* cfg) { delete cfg; }

lsplit_status lsplit_config_set(lsplit_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

lsplit_status lsplit_config_get(const lsplit_config* cfg, const char* key, char* buf, size_t cap,
                                size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    copy_text(cfg->cfg.get(key), buf, cap, needed);
  });
}

lsplit_status lsplit_config_validate(const lsplit_config* cfg) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.validate();
  });
}

lsplit_status lsplit_config_canonical(const lsplit_config* cfg, char* buf, size_t cap,
                                      size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    copy_text(cfg->cfg.canonical(), buf, cap, needed);
  });
}

lsplit_status lsplit_config_write(const lsplit_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "config");
    write_text(path, cfg->cfg.canonical());
  });
}

// ---- sequences ------------------------------------------------------------

lsplit_status lsplit_sequence_load(const char* frame_dir, const char* mask_dir,
                                   lsplit_sequence** out) {
  return guarded([&] {
    require(frame_dir, "frame_dir");
    require(out, "out");
    std::optional<std::filesystem::path> masks;
    if (mask_dir && *mask_dir) masks = mask_dir;
    auto seq = lsplit::load_sequence(frame_dir, masks);
    seq.validate(1);
    *out = new lsplit_sequence{std::move(seq)};
  });
}

lsplit_status lsplit_sequence_from_buffers(int frames, int width, int height, const double* rgb,
                                           const double* masks, lsplit_sequence** out) {
  return guarded([&] {
    check_dims(frames, width, height);
    require(rgb, "rgb");
    require(out, "out");
    const size_t n = static_cast<size_t>(width) * height;
    std::vector<lsplit::Image> imgs;
    for (int i = 0; i < frames; ++i) {
      lsplit::Image im(width, height, 3);
      std::copy_n(rgb + i * n * 3, n * 3, im.data.begin());
      imgs.push_back(std::move(im));
    }
    auto seq = lsplit::make_sequence(std::move(imgs));
    if (masks)
      for (int i = 0; i < frames; ++i) std::copy_n(masks + i * n, n, seq.masks[i].data.begin());
    seq.validate(1);
    *out = new lsplit_sequence{std::move(seq)};
  });
}

void lsplit_sequence_destroy(lsplit_sequence* seq) { delete seq; }

lsplit_status lsplit_sequence_dims(const lsplit_sequence* seq, int* frames, int* width,
                                   int* height) {
  return guarded([&] {
    require(seq, "sequence");
    if (frames) *frames = seq->seq.frame_count();
    if (width) *width = seq->seq.width();
    if (height) *height = seq->seq.height();
  });
}

// ---- decomposition --------------------------------------------------------

lsplit_status lsplit_decompose(const lsplit_sequence* seq, const lsplit_config* cfg,
                               lsplit_decomposition** out, lsplit_report** report) {
  return guarded([&] {
    require(seq, "sequence");
    require(cfg, "config");
    require(out, "out");
    cfg->cfg.validate();
    seq->seq.validate(2);
    lsplit::set_thread_count(cfg->cfg.threads);
    const lsplit::LogStack stack = lsplit::to_log_stack(seq->seq, cfg->cfg.energy.eps_img);
    lsplit::SolveResult res = lsplit::minimize(stack, cfg->cfg.energy, cfg->cfg.solve);
    auto* d = new lsplit_decomposition{std::move(res.decomposition)};
    if (report) {
      try {
        *report = new lsplit_report{std::move(res.report)};
      } catch (...) {
        delete d;
        throw;
      }
    }
    *out = d;
  });
}

lsplit_status lsplit_decomposition_from_buffers(int frames, int width, int height,
                                                const double* log_r, const double* log_s,
                                                const double* illum, lsplit_decomposition** out) {
  return guarded([&] {
    check_dims(frames, width, height);
    require(log_r, "log_r");
    require(log_s, "log_s");
    require(illum, "illum");
    require(out, "out");
    auto d = lsplit::Decomposition::zeros(frames, width, height);
    const size_t n = static_cast<size_t>(width) * height;
    for (int i = 0; i < frames; ++i) {
      std::copy_n(log_r + i * n * 3, n * 3, d.log_r[i].data.begin());
      std::copy_n(log_s + i * n, n, d.log_s[i].data.begin());
      for (int k = 0; k < 3; ++k) d.illum[i][k] = illum[i * 3 + k];
    }
    *out = new lsplit_decomposition{std::move(d)};
  });
}

void lsplit_decomposition_destroy(lsplit_decomposition* d) { delete d; }

lsplit_status lsplit_decomposition_dims(const lsplit_decomposition* d, int* frames, int* width,
                                        int* height) {
  return guarded([&] {
    require(d, "decomposition");
    if (frames) *frames = d->d.frame_count();
    if (width) *width = d->d.width();
    if (height) *height = d->d.height();
  });
}

lsplit_status lsplit_decomposition_log_r(const lsplit_decomposition* d, double* out,
                                         size_t count) {
  return guarded([&] {
    require(d, "decomposition");
    copy_out(d->d.log_r, out, count);
  });
}

lsplit_status lsplit_decomposition_log_s(const lsplit_decomposition* d, double* out,
                                         size_t count) {
  return guarded([&] {
    require(d, "decomposition");
    copy_out(d->d.log_s, out, count);
  });
}

lsplit_status lsplit_decomposition_illum(const lsplit_decomposition* d, double* out,
                                         size_t count) {
  return guarded([&] {
    require(d, "decomposition");
    require(out, "output");
    if (count != d->d.illum.size() * 3)
      lsplit::fail(lsplit::ErrorCode::ShapeMismatch, "illumination needs frames*3 values");
    for (const auto& c : d->d.illum) out = std::copy(c.begin(), c.end(), out);
  });
}

lsplit_status lsplit_decomposition_write(const lsplit_decomposition* d, const char* dir) {
  return guarded([&] {
    require(d, "decomposition");
    require(dir, "dir");
    lsplit::write_decomposition(dir, d->d);
  });
}

lsplit_status lsplit_decomposition_read(const char* dir, lsplit_decomposition** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new lsplit_decomposition{lsplit::read_decomposition(dir)};
  });
}

// ---- report ---------------------------------------------------------------

void lsplit_report_destroy(lsplit_report* r) { delete r; }

lsplit_status lsplit_report_summary_get(const lsplit_report* r, lsplit_report_summary* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    const auto& rep = r->report;
    *out = {rep.iterations,
            rep.converged ? 1 : 0,
            rep.aborted ? 1 : 0,
            rep.final_terms.total,
            rep.final_grad_norm,
            rep.grad_tol,
            rep.bisto.iterations,
            rep.bisto.residual};
  });
}

size_t lsplit_report_trace_length(const lsplit_report* r) {
  return r ? r->report.energy_trace.size() : 0;
}

lsplit_status lsplit_report_trace(const lsplit_report* r, size_t index, int* iteration,
                                  double* energy) {
  return guarded([&] {
    require(r, "report");
    if (index >= r->report.energy_trace.size())
      lsplit::fail(lsplit::ErrorCode::InvalidArgument, "trace index out of range");
    if (iteration) *iteration = r->report.energy_trace[index].first;
    if (energy) *energy = r->report.energy_trace[index].second;
  });
}

lsplit_status lsplit_report_text(const lsplit_report* r, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(r, "report");
    copy_text(r->report.to_text(), buf, cap, needed);
  });
}

lsplit_status lsplit_report_write(const lsplit_report* r, const char* path) {
  return guarded([&] {
    require(r, "report");
    write_text(path, r->report.to_text());
  });
}

// ---- energy ---------------------------------------------------------------

lsplit_status lsplit_losses(const lsplit_sequence* seq, const lsplit_decomposition* d,
                            const lsplit_config* cfg, lsplit_energy_terms* out) {
  return guarded([&] {
    require(seq, "sequence");
    require(d, "decomposition");
    require(cfg, "config");
    require(out, "out");
    cfg->cfg.validate();
    seq->seq.validate(1);
    if (d->d.frame_count() != seq->seq.frame_count() || d->d.width() != seq->seq.width() ||
        d->d.height() != seq->seq.height())
      lsplit::fail(lsplit::ErrorCode::ShapeMismatch,
                   "decomposition does not match the sequence dimensions");
    lsplit::set_thread_count(cfg->cfg.threads);
    const lsplit::LogStack stack = lsplit::to_log_stack(seq->seq, cfg->cfg.energy.eps_img);
    const lsplit::Precomputed pre = lsplit::precompute(stack, cfg->cfg.energy);
    const auto t = lsplit::total_energy(stack, d->d, cfg->cfg.energy, pre);
    *out = {t.reconstruct, t.consistency, t.rsmooth, t.ssmooth, t.total};
  });
}

// ---- benchmark ------------------------------------------------------------

lsplit_status lsplit_bench(const int* frame_counts, size_t count, int size, uint64_t seed,
                           lsplit_bench_row* rows) {
  return guarded([&] {
    require(frame_counts, "frame_counts");
    require(rows, "rows");
    const std::vector<int> ms(frame_counts, frame_counts + count);
    const auto res = lsplit::bench_apwls(ms, size, 3, seed);
    for (size_t i = 0; i < res.size(); ++i)
      rows[i] = {res[i].frames,      res[i].brute_ms,     res[i].closed_ms,
                 res[i].brute_value, res[i].closed_value, res[i].rel_diff};
  });
}

// ---- evaluation -----------------------------------------------------------

lsplit_status lsplit_eval_whdr(const char* reflectance_png, const char* judgments_json,
                               const char* mask_png, const lsplit_config* cfg,
                               lsplit_whdr_result* out) {
  return guarded([&] {
    require(reflectance_png, "reflectance_png");
    require(judgments_json, "judgments_json");
    require(cfg, "config");
    require(out, "out");
    const lsplit::Image r = lsplit::read_rgb(reflectance_png);
    const auto j = lsplit::load_iiw_judgments(judgments_json);
    lsplit::Image mask;
    if (mask_png) mask = lsplit::read_mask(mask_png);
    const auto res = lsplit::whdr(r, j, cfg->cfg.whdr_delta, mask_png ? &mask : nullptr);
    *out = {res.whdr, res.weight_total, res.evaluated, res.skipped};
  });
}

lsplit_status lsplit_eval_saw(const char* const* shading_pngs, const char* const* label_pngs,
                              size_t count, const lsplit_config* cfg, lsplit_pr_curve** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    if (count == 0) lsplit::fail(lsplit::ErrorCode::EmptyInput, "no SAW images given");
    require(shading_pngs, "shading_pngs");
    require(label_pngs, "label_pngs");
    std::vector<lsplit::Image> shading, labels;
    for (size_t i = 0; i < count; ++i) {
      shading.push_back(lsplit::read_gray(shading_pngs[i]));
      labels.push_back(lsplit::read_label_map(label_pngs[i]));
    }
    lsplit::SawOptions opts = cfg->cfg.saw;
    opts.seed = cfg->cfg.seed;
    *out = new lsplit_pr_curve{lsplit::saw_ap(shading, labels, opts)};
  });
}

void lsplit_pr_curve_destroy(lsplit_pr_curve* c) { delete c; }

double lsplit_pr_curve_ap(const lsplit_pr_curve* c) { return c ? c->result.ap : 0.0; }

size_t lsplit_pr_curve_length(const lsplit_pr_curve* c) { return c ? c->result.curve.size() : 0; }

lsplit_status lsplit_pr_curve_point(const lsplit_pr_curve* c, size_t index, double* recall,
                                    double* precision) {
  return guarded([&] {
    require(c, "curve");
    if (index >= c->result.curve.size())
      lsplit::fail(lsplit::ErrorCode::InvalidArgument, "curve index out of range");
    if (recall) *recall = c->result.curve[index].recall;
    if (precision) *precision = c->result.curve[index].precision;
  });
}

lsplit_status lsplit_eval_mit(const char* pred_reflectance, const char* pred_shading,
                              const char* gt_reflectance, const char* gt_shading,
                              const char* mask_png, const lsplit_config* cfg,
                              lsplit_mit_result* out) {
  return guarded([&] {
    require(pred_reflectance, "pred_reflectance");
    require(pred_shading, "pred_shading");
    require(gt_reflectance, "gt_reflectance");
    require(gt_shading, "gt_shading");
    require(cfg, "config");
    require(out, "out");
    lsplit::MitGroundTruth gt;
    gt.reflectance = lsplit::read_rgb(gt_reflectance);
    gt.shading = lsplit::read_gray(gt_shading);
    gt.mask = mask_png ? lsplit::read_mask(mask_png)
                       : lsplit::Image(gt.reflectance.width, gt.reflectance.height, 1, 1.0);
    const auto res = lsplit::mit_scores(lsplit::read_rgb(pred_reflectance),
                                        lsplit::read_gray(pred_shading), gt, cfg->cfg.mit);
    *out = {res.reflectance.mse,  res.reflectance.lmse,  res.reflectance.dssim,
            res.shading.mse,      res.shading.lmse,      res.shading.dssim};
  });
}

}  // extern "C"
