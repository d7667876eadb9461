#include "lsplit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lsplit/error.hpp"

namespace lsplit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    fail(ErrorCode::InvalidArgument, "bad value for " + key + ": '" + text + "'", key);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorCode::InvalidArgument, "bad boolean for " + key + ": '" + text + "'", key);
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename Pick>
Field field(Pick pick) {
  using T = std::remove_cvref_t<decltype(pick(std::declval<RunConfig&>()))>;
  return {[pick](const RunConfig& c) {
            const T v = pick(c);
            if constexpr (std::is_same_v<T, bool>) return std::string(v ? "true" : "false");
            else if constexpr (std::is_floating_point_v<T>) return fmt(v);
            else return std::to_string(v);
          },
          [pick](RunConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_same_v<T, bool>) pick(c) = parse_bool(k, v);
            else pick(c) = parse_number<T>(k, v);
          }};
}

#define LSPLIT_FIELD(expr) field([](auto& c) -> auto& { return c.expr; })

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["w_rc"] = LSPLIT_FIELD(energy.w_rc);
    t["w_rsm"] = LSPLIT_FIELD(energy.w_rsm);
    t["w_ssm"] = LSPLIT_FIELD(energy.w_ssm);
    t["bandwidth_x"] = LSPLIT_FIELD(energy.bandwidths.x);
    t["bandwidth_y"] = LSPLIT_FIELD(energy.bandwidths.y);
    t["bandwidth_intensity"] = LSPLIT_FIELD(energy.bandwidths.intensity);
    t["bandwidth_c1"] = LSPLIT_FIELD(energy.bandwidths.c1);
    t["bandwidth_c2"] = LSPLIT_FIELD(energy.bandwidths.c2);
    t["lambda_med"] = LSPLIT_FIELD(energy.lambda_med);
    t["lambda_med_bar"] = LSPLIT_FIELD(energy.lambda_med_bar);
    t["eps_med"] = LSPLIT_FIELD(energy.eps_med);
    t["eps_img"] = LSPLIT_FIELD(energy.eps_img);
    t["bisto_max_iters"] = LSPLIT_FIELD(energy.bisto_max_iters);
    t["bisto_tol"] = LSPLIT_FIELD(energy.bisto_tol);
    t["grayscale_shading"] = LSPLIT_FIELD(energy.grayscale_shading);
    t["max_iters"] = LSPLIT_FIELD(solve.max_iters);
    t["grad_tol"] = LSPLIT_FIELD(solve.grad_tol);
    t["armijo_c"] = LSPLIT_FIELD(solve.armijo_c);
    t["max_halvings"] = LSPLIT_FIELD(solve.max_halvings);
    t["report_every"] = LSPLIT_FIELD(solve.report_every);
    t["seed"] = LSPLIT_FIELD(seed);
    t["threads"] = LSPLIT_FIELD(threads);
    t["whdr_delta"] = LSPLIT_FIELD(whdr_delta);
    t["saw_filter_size"] = LSPLIT_FIELD(saw.filter_size);
    t["saw_smooth_sample_rate"] = LSPLIT_FIELD(saw.smooth_sample_rate);
    t["lmse_window"] = LSPLIT_FIELD(mit.lmse_window);
    t["lmse_step"] = LSPLIT_FIELD(mit.lmse_step);
    t["mask_dir"] = {[](const RunConfig& c) { return c.mask_dir; },
                     [](RunConfig& c, const std::string&, const std::string& v) { c.mask_dir = v; }};
    t["step_rule"] = {
        [](const RunConfig& c) {
          return std::string(c.solve.step_rule == StepRule::ConjugateGradient ? "cg" : "steepest");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "steepest") c.solve.step_rule = StepRule::SteepestDescent;
          else if (v == "cg") c.solve.step_rule = StepRule::ConjugateGradient;
          else fail(ErrorCode::InvalidArgument, "bad value for " + k + ": '" + v + "'", k);
        }};
    t["saw_mode"] = {
        [](const RunConfig& c) {
          return std::string(c.saw.mode == SawMode::Original ? "original" : "log");
        },
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "log") c.saw.mode = SawMode::LogAsymmetric;
          else if (v == "original") c.saw.mode = SawMode::Original;
          else fail(ErrorCode::InvalidArgument, "bad value for " + k + ": '" + v + "'", k);
        }};
    return t;
  }();
  return table;
}

#undef LSPLIT_FIELD

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& t = fields();
  const auto it = t.find(key);
  if (it == t.end()) fail(ErrorCode::InvalidArgument, "unknown config key: " + key, key);
  it->second.set(*this, key, value);
}

std::string RunConfig::get(const std::string& key) const {
  const auto& t = fields();
  const auto it = t.find(key);
  if (it == t.end()) fail(ErrorCode::InvalidArgument, "unknown config key: " + key, key);
  return it->second.get(*this);
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  energy.validate();
  solve.validate();
  if (threads < 1) fail(ErrorCode::InvalidArgument, "threads must be at least 1", "threads");
  if (!(whdr_delta > 0.0)) fail(ErrorCode::InvalidArgument, "whdr_delta must be positive", "whdr_delta");
  if (saw.filter_size < 1)
    fail(ErrorCode::InvalidArgument, "saw_filter_size must be positive", "saw_filter_size");
  if (!(saw.smooth_sample_rate > 0.0 && saw.smooth_sample_rate <= 1.0))
    fail(ErrorCode::InvalidArgument, "saw_smooth_sample_rate must lie in (0,1]",
         "saw_smooth_sample_rate");
  if (mit.lmse_window < 1 || mit.lmse_step < 1)
    fail(ErrorCode::InvalidArgument, "lmse_window and lmse_step must be positive", "lmse_window");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + " lacks '='");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path.string(), path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace lsplit
