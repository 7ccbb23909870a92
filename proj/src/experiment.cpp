// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "trainprecode/pareto.hpp"
#include "trainprecode/precoder.hpp"
#include "trainprecode/rng.hpp"

namespace trainprecode {

namespace {

using nlohmann::json;

constexpr double kLn2 = 0.69314718055994530942;

}  // namespace

RunMode run_mode_from_name(const std::string& name) {
  if (name == "boost") return RunMode::boost;
  if (name == "fixed_budgets") return RunMode::fixed_budgets;
  if (name == "full_fledged") return RunMode::full_fledged;
  if (name == "precoder_only") return RunMode::precoder_only;
  if (name == "none") return RunMode::none;
  throw std::invalid_argument("unknown mode: " + name);
}

const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::boost: return "boost";
    case RunMode::fixed_budgets: return "fixed_budgets";
    case RunMode::full_fledged: return "full_fledged";
    case RunMode::precoder_only: return "precoder_only";
    case RunMode::none: return "none";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  system.validate();
  utility.validate(system.n_tx);
  if (mode == RunMode::fixed_budgets && (!(mu_p > 0.0) || !(mu_q > 0.0)))
    throw std::invalid_argument("config: fixed_budgets mode needs positive budgets");
  if (!(eps > 0.0)) throw std::invalid_argument("config: eps must be positive");
  if (max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
  if (mc_eval_samples < 0) throw std::invalid_argument("config: mc_eval_samples must be >= 0");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig cfg;
  const json& sys = j.at("system");
  cfg.system.n_tx = sys.at("n_tx").get<int>();
  cfg.system.n_rx = sys.at("n_rx").get<int>();
  cfg.system.coherence_time = sys.at("coherence_time").get<int>();
  cfg.system.training_duration = sys.at("training_duration").get<int>();
  cfg.system.power = sys.at("power").get<double>();
  const auto eigs = sys.at("channel_eigs").get<std::vector<double>>();
  cfg.system.channel_eigs =
      Eigen::Map<const Eigen::VectorXd>(eigs.data(), static_cast<Eigen::Index>(eigs.size()));

  const json& util = j.at("utility");
  cfg.utility.kind = kind_from_name(util.at("kind").get<std::string>());
  cfg.utility.streams = util.value("streams", 1);
  cfg.utility.n_rx = cfg.system.n_rx;
  cfg.utility.mc_samples = util.value("mc_samples", 10000);
  cfg.utility.shift = util.value("shift", 1.0);

  cfg.mode = run_mode_from_name(j.at("mode").get<std::string>());
  if (j.contains("budgets")) {
    cfg.mu_p = j["budgets"].value("mu_p", 0.0);
    cfg.mu_q = j["budgets"].value("mu_q", 0.0);
  }
  cfg.eps = j.value("eps", 1e-6);
  cfg.max_iters = j.value("max_iters", 500);
  cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
  cfg.utility.master_seed = cfg.seed;
  if (j.contains("sweep")) cfg.sweep_db = j["sweep"].get<std::vector<double>>();
  cfg.mc_eval_samples = j.value("mc_eval_samples", 0);
  cfg.out_dir = j.value("out", std::string("."));
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string vec_header(const std::string& prefix, Eigen::Index n) {
  std::string out;
  for (Eigen::Index i = 0; i < n; ++i) out += "," + prefix + "_" + std::to_string(i + 1);
  return out;
}

void append_vec(std::string& row, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row += "," + csv_number(v(i));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

IterationRow make_row(const UtilitySpec& spec, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& r) {
  IterationRow row;
  row.p = p;
  row.q = q;
  row.s = snr_profile_vec(p, q, r);
  const UtilityValue v = evaluate(spec, row.s);
  row.utility = v.value;
  row.std_error = v.std_error;
  return row;
}

std::string trace_csv(const IterationTrace& trace, Eigen::Index n) {
  std::string out = "iter,utility,std_error" + vec_header("p", n) + vec_header("q", n) +
                    vec_header("s", n) + "\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const IterationRow& row = trace.rows[i];
    std::string line = std::to_string(i) + "," + csv_number(row.utility) + "," +
                       csv_number(row.std_error);
    append_vec(line, row.p);
    append_vec(line, row.q);
    append_vec(line, row.s);
    out += line + "\n";
  }
  return out;
}

std::string result_csv(const JointResult& res, RunMode mode, Eigen::Index n) {
  std::string out = "mode,t_tau_star,converged,cycle_detected,iterations,utility,std_error,"
                    "utility_fresh,fresh_std_error,rank_star" +
                    vec_header("p", n) + vec_header("q", n) + vec_header("s", n) + "\n";
  std::string line = std::string(run_mode_name(mode)) + "," + std::to_string(res.t_tau_star) +
                     "," + std::to_string(res.trace.converged ? 1 : 0) + "," +
                     std::to_string(res.trace.cycle_detected ? 1 : 0) + "," +
                     std::to_string(res.trace.rows.empty() ? 0 : res.trace.rows.size() - 1) + "," +
                     csv_number(res.utility) + "," + csv_number(res.std_error) + "," +
                     csv_number(res.utility_fresh) + "," + csv_number(res.fresh_std_error) + "," +
                     std::to_string(res.rank_star);
  append_vec(line, res.p_star);
  append_vec(line, res.q_star);
  append_vec(line, res.s_star);
  return out + line + "\n";
}

}  // namespace

JointResult uniform_baseline(const SystemConfig& cfg, const UtilitySpec& spec) {
  cfg.validate();
  const int n = cfg.n_tx;
  const Eigen::VectorXd p0 =
      Eigen::VectorXd::Constant(n, cfg.training_duration * cfg.power / n);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(n, cfg.power / n);
  JointResult out;
  out.trace.rows.push_back(make_row(spec, p0, q0, cfg.channel_eigs));
  out.trace.converged = true;
  out.p_star = p0;
  out.q_star = q0;
  out.s_star = out.trace.rows[0].s;
  out.utility = out.trace.rows[0].utility;
  out.std_error = out.trace.rows[0].std_error;
  out.t_tau_star = cfg.training_duration;
  out.rank_star = n;
  const UtilityValue fresh =
      evaluate(spec.with_seed(rng::derive_seed(spec.master_seed, 0xf5e5u)), out.s_star);
  out.utility_fresh = fresh.value;
  out.fresh_std_error = fresh.std_error;
  return out;
}

JointResult precoder_only_baseline(const SystemConfig& cfg, const UtilitySpec& spec) {
  cfg.validate();
  const int n = cfg.n_tx;
  const Eigen::VectorXd p0 =
      Eigen::VectorXd::Constant(n, cfg.training_duration * cfg.power / n);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(n, cfg.power / n);
  // Residual data power once the uniform pilots are paid for.
  const double mu_q = (cfg.total_energy() - p0.sum()) / cfg.data_slots();

  JointResult out;
  out.trace.rows.push_back(make_row(spec, p0, q0, cfg.channel_eigs));
  const VecStepResult opt = optimize_precoder_vec(p0, cfg.channel_eigs, mu_q, spec, &q0);
  out.trace.rows.push_back({p0, opt.x, opt.s, opt.utility, opt.std_error});
  out.trace.converged = true;
  const bool keep_init = out.trace.rows[0].utility > opt.utility;
  const IterationRow& pick = keep_init ? out.trace.rows[0] : out.trace.rows[1];
  out.p_star = pick.p;
  out.q_star = pick.q;
  out.s_star = pick.s;
  out.utility = pick.utility;
  out.std_error = pick.std_error;
  out.t_tau_star = cfg.training_duration;
  out.rank_star = n;
  const UtilityValue fresh =
      evaluate(spec.with_seed(rng::derive_seed(spec.master_seed, 0xf5e5u)), out.s_star);
  out.utility_fresh = fresh.value;
  out.fresh_std_error = fresh.std_error;
  return out;
}

namespace {

JointResult run_by_mode(const ExperimentConfig& cfg, RunMode mode, const SystemConfig& sys,
                        const UtilitySpec& spec, int* t_tau_out = nullptr) {
  const JointOptions opt{cfg.eps, cfg.max_iters, 1.0};
  JointResult res;
  switch (mode) {
    case RunMode::boost: res = run_boost(sys, spec, opt); break;
    case RunMode::fixed_budgets: res = run_fixed_budgets(sys, spec, cfg.mu_p, cfg.mu_q, opt); break;
    case RunMode::full_fledged: res = run_full_fledged(sys, spec, opt).best; break;
    case RunMode::precoder_only: res = precoder_only_baseline(sys, spec); break;
    case RunMode::none: res = uniform_baseline(sys, spec); break;
  }
  if (t_tau_out) *t_tau_out = res.t_tau_star;
  return res;
}

}  // namespace

int cmd_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.out_dir);
  JointResult res;
  if (cfg.mode == RunMode::full_fledged) {
    const FullFledgedResult full =
        run_full_fledged(cfg.system, cfg.utility, JointOptions{cfg.eps, cfg.max_iters, 1.0});
    res = full.best;
    std::string extra = "t_tau,utility,converged,cycle_detected\n";
    for (std::size_t i = 0; i < full.per_duration.size(); ++i) {
      const JointResult& jr = full.per_duration[i];
      extra += std::to_string(i + 1) + "," + csv_number(jr.utility) + "," +
               std::to_string(jr.trace.converged ? 1 : 0) + "," +
               std::to_string(jr.trace.cycle_detected ? 1 : 0) + "\n";
    }
    write_file(dir / "trace.csv", trace_csv(res.trace, cfg.system.n_tx));
    write_file(dir / "result.csv", result_csv(res, cfg.mode, cfg.system.n_tx));
    write_file(dir / "full_fledged.csv", extra);
  } else {
    res = run_by_mode(cfg, cfg.mode, cfg.system, cfg.utility);
    write_file(dir / "trace.csv", trace_csv(res.trace, cfg.system.n_tx));
    write_file(dir / "result.csv", result_csv(res, cfg.mode, cfg.system.n_tx));
  }
  if (res.trace.cycle_detected) return 2;
  return 0;
}

namespace {

struct SweepCell {
  double rate = 0.0;
  double se = 0.0;
};

// Final allocations are re-scored at the (possibly larger) evaluation sample
// count with the same master seed, so the three modes share one sample set.
SweepCell score(const ExperimentConfig& cfg, const SystemConfig& sys, const JointResult& res) {
  UtilitySpec eval_spec = cfg.utility;
  if (cfg.mc_eval_samples > 0) eval_spec.mc_samples = cfg.mc_eval_samples;
  const UtilityValue v = evaluate(eval_spec, res.s_star);
  SweepCell cell;
  if (cfg.utility.kind == UtilityKind::mmse_bound) {
    cell.rate = -v.value;  // the positive MSE bound; not a rate, no weighting
    cell.se = v.std_error;
  } else {
    const double weight =
        static_cast<double>(sys.coherence_time - res.t_tau_star) / sys.coherence_time;
    cell.rate = weight * v.value / kLn2;  // bits per channel use
    cell.se = weight * v.std_error / kLn2;
  }
  return cell;
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_db.empty()) throw std::invalid_argument("sweep: empty SNR list");
  if (cfg.mode != RunMode::boost && cfg.mode != RunMode::full_fledged)
    throw std::invalid_argument("sweep: mode must be boost or full_fledged");

  std::vector<double> snrs = cfg.sweep_db;
  std::sort(snrs.begin(), snrs.end());

  std::string out =
      "snr_db,rate_joint,rate_precoder_only,rate_none,se_joint,se_precoder,se_none\n";
  for (double db : snrs) {
    SystemConfig sys = cfg.system;
    sys.power = std::pow(10.0, db / 10.0);
    const JointResult joint = run_by_mode(cfg, cfg.mode, sys, cfg.utility);
    const JointResult prec = precoder_only_baseline(sys, cfg.utility);
    const JointResult base = uniform_baseline(sys, cfg.utility);
    const SweepCell cj = score(cfg, sys, joint);
    const SweepCell cp = score(cfg, sys, prec);
    const SweepCell cn = score(cfg, sys, base);
    out += csv_number(db) + "," + csv_number(cj.rate) + "," + csv_number(cp.rate) + "," +
           csv_number(cn.rate) + "," + csv_number(cj.se) + "," + csv_number(cp.se) + "," +
           csv_number(cn.se) + "\n";
  }
  write_file(std::filesystem::path(cfg.out_dir) / "sweep.csv", out);
  return 0;
}

int cmd_pareto(const ExperimentConfig& cfg, int n_dirs) {
  cfg.validate();
  if (n_dirs < 1) throw std::invalid_argument("pareto: --dirs must be >= 1");
  const BorderMode mode =
      cfg.mode == RunMode::fixed_budgets ? BorderMode::fixed_budgets : BorderMode::boost;
  const std::vector<RayResult> border =
      sample_border(n_dirs, mode, cfg.system, cfg.mu_p, cfg.mu_q);

  const Eigen::Index n = cfg.system.n_tx;
  std::string out = vec_header("e", n).substr(1) + ",nu" + vec_header("p", n) +
                    vec_header("q", n) + vec_header("s", n) + "\n";
  for (const RayResult& ray : border) {
    std::string line;
    append_vec(line, ray.e);
    line = line.substr(1) + "," + csv_number(ray.nu);
    append_vec(line, ray.p);
    append_vec(line, ray.q);
    append_vec(line, ray.s);
    out += line + "\n";
  }
  write_file(std::filesystem::path(cfg.out_dir) / "border.csv", out);
  return 0;
}

}  // namespace trainprecode
