#include "vertexnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vn::harness {

namespace fs = std::filesystem;
using geom::Vec;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  try {
    if (key == "env") cfg.env = value;
    else if (key == "policy") cfg.policy = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "episodes") cfg.episodes = std::stoi(value);
    else if (key == "horizon") cfg.horizon = std::stoi(value);
    else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "theta_bar") cfg.theta_bar = std::stod(value);
    else if (key == "gamma") cfg.gamma = std::stod(value);
    else if (key == "tau") cfg.tau = std::stod(value);
    else if (key == "actor_lr") cfg.actor_lr = std::stod(value);
    else if (key == "critic_lr") cfg.critic_lr = std::stod(value);
    else if (key == "batch_size") cfg.batch_size = std::stoi(value);
    else if (key == "buffer_capacity") cfg.buffer_capacity = std::stoull(value);
    else if (key == "warmup") cfg.warmup = std::stoull(value);
    else if (key == "noise_std") cfg.noise_std = std::stod(value);
    else if (key == "noise_decay") cfg.noise_decay = std::stod(value);
    else if (key == "reward_scale") cfg.reward_scale = std::stod(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else throw ConfigError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value for " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

void validate(const ExperimentConfig& cfg) {
  envs::env_from_string(cfg.env);  // throws on unknown name
  if (cfg.policy != "vn" && cfg.policy != "pn") {
    throw ConfigError("policy must be vn or pn");
  }
  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (cfg.theta_bar <= 0.0) throw ConfigError("theta_bar must be > 0");
  if (cfg.delta <= 0.0) throw ConfigError("delta must be > 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.reward_scale <= 0.0) throw ConfigError("reward_scale must be > 0");
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "env=" << cfg.env << '\n'
     << "policy=" << cfg.policy << '\n'
     << "seed=" << cfg.seed << '\n'
     << "episodes=" << cfg.episodes << '\n'
     << "horizon=" << cfg.horizon << '\n'
     << "delta=" << format_double(cfg.delta) << '\n'
     << "theta_bar=" << format_double(cfg.theta_bar) << '\n'
     << "gamma=" << format_double(cfg.gamma) << '\n'
     << "tau=" << format_double(cfg.tau) << '\n'
     << "actor_lr=" << format_double(cfg.actor_lr) << '\n'
     << "critic_lr=" << format_double(cfg.critic_lr) << '\n'
     << "batch_size=" << cfg.batch_size << '\n'
     << "buffer_capacity=" << cfg.buffer_capacity << '\n'
     << "warmup=" << cfg.warmup << '\n'
     << "noise_std=" << format_double(cfg.noise_std) << '\n'
     << "noise_decay=" << format_double(cfg.noise_decay) << '\n'
     << "reward_scale=" << format_double(cfg.reward_scale) << '\n'
     << "out_dir=" << cfg.out_dir << '\n';
  return os.str();
}

void write_metrics_header(std::ostream& os) {
  os << "episode,accumulated_reward,max_violation,fallback_count,steps\n";
}

void write_metrics_row(std::ostream& os, const ddpg::EpisodeMetrics& m) {
  os << m.episode << ',' << format_double(m.accumulated_reward) << ','
     << format_double(m.max_violation) << ',' << m.fallback_count << ','
     << m.steps << '\n';
}

std::vector<ddpg::EpisodeMetrics> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingRun("missing metrics file: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<ddpg::EpisodeMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    ddpg::EpisodeMetrics m;
    row >> m.episode >> m.accumulated_reward >> m.max_violation >>
        m.fallback_count >> m.steps;
    out.push_back(m);
  }
  return out;
}

namespace {

envs::AffineEnv env_from_config(const ExperimentConfig& cfg) {
  return envs::make_env(envs::env_from_string(cfg.env), cfg.theta_bar,
                        cfg.delta, cfg.horizon);
}

ddpg::TrainConfig train_config(const ExperimentConfig& cfg) {
  ddpg::TrainConfig tc;
  tc.episodes = cfg.episodes;
  tc.gamma = cfg.gamma;
  tc.tau = cfg.tau;
  tc.actor_lr = cfg.actor_lr;
  tc.critic_lr = cfg.critic_lr;
  tc.batch_size = cfg.batch_size;
  tc.buffer_capacity = cfg.buffer_capacity;
  tc.warmup = cfg.warmup;
  tc.noise_std = cfg.noise_std;
  tc.noise_decay = cfg.noise_decay;
  tc.reward_scale = cfg.reward_scale;
  return tc;
}

void save_checkpoint(const ExperimentConfig& cfg,
                     const ddpg::TrainResult& result,
                     const std::string& path) {
  std::ofstream os(path);
  os << "vertexnet-checkpoint 1\n"
     << "env " << cfg.env << '\n'
     << "policy " << cfg.policy << '\n'
     << "theta_bar " << std::hexfloat << cfg.theta_bar << '\n'
     << "delta " << std::hexfloat << cfg.delta << '\n'
     << "horizon " << cfg.horizon << '\n';
  const nets::MlpParams& trunk =
      (result.kind == ddpg::PolicyKind::vn) ? result.vn.trunk
                                            : result.pn.trunk;
  nets::save_params(trunk, os);
  nets::save_params(result.critic, os);
}

}  // namespace

int run_train(const ExperimentConfig& cfg) {
  validate(cfg);
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream echo(fs::path(cfg.out_dir) / "config.echo");
    echo << render_config(cfg);
  }
  std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.csv");
  write_metrics_header(metrics);

  const envs::AffineEnv env = env_from_config(cfg);
  const ddpg::PolicyKind kind =
      (cfg.policy == "vn") ? ddpg::PolicyKind::vn : ddpg::PolicyKind::pn;
  try {
    const auto result =
        ddpg::train(env, kind, train_config(cfg), cfg.seed,
                    [&metrics](const ddpg::EpisodeMetrics& m) {
                      write_metrics_row(metrics, m);
                      metrics.flush();
                    });
    save_checkpoint(cfg, result,
                    (fs::path(cfg.out_dir) / "checkpoint.txt").string());
  } catch (const nets::NonFinite& e) {
    std::cerr << "training aborted: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

int run_eval(const std::string& checkpoint_path, const std::string& out_dir) {
  std::ifstream in(checkpoint_path);
  if (!in) throw MissingRun("missing checkpoint: " + checkpoint_path);
  std::string magic, key, env_name, policy;
  int version = 0, horizon = 0;
  std::string theta_tok, delta_tok;
  in >> magic >> version;
  if (magic != "vertexnet-checkpoint") {
    throw MissingRun("not a checkpoint: " + checkpoint_path);
  }
  in >> key >> env_name >> key >> policy >> key >> theta_tok >> key >>
      delta_tok >> key >> horizon;
  const double theta_bar = std::strtod(theta_tok.c_str(), nullptr);
  const double delta = std::strtod(delta_tok.c_str(), nullptr);
  nets::MlpParams trunk = nets::load_params(in);

  const envs::AffineEnv env = envs::make_env(
      envs::env_from_string(env_name), theta_bar, delta, horizon);
  std::mt19937_64 rng(0);
  policies::VnPolicy vn_policy{trunk, env.max_vertices};
  policies::PnPolicy pn_policy = policies::make_pn_policy(env, rng);
  if (policy == "pn") pn_policy.trunk = trunk;

  fs::create_directories(out_dir);
  std::ofstream traj(fs::path(out_dir) / "trajectory.csv");
  traj << "step";
  for (int i = 0; i < env.state_dim; ++i) traj << ",x" << i;
  for (int i = 0; i < env.action_dim; ++i) traj << ",u" << i;
  traj << ",reward,violation_metric";
  const bool hover = env.name == envs::EnvName::hovercraft;
  if (hover) traj << ",sq_dist_target";
  traj << '\n';

  envs::EnvState state = envs::reset(env, rng);
  bool done = false;
  while (!done) {
    Vec u;
    if (policy == "vn") {
      const auto safe = envs::safe_action_polytope(env, state);
      u = policies::vn_act(vn_policy, state.x, safe.polytope, 0.0, rng).action;
    } else {
      u = policies::pn_act(pn_policy, state.x, 0.0, rng);
    }
    const auto outcome = envs::step(env, state, u);
    traj << state.t;
    for (double x : state.x) traj << ',' << format_double(x);
    for (double a : u) traj << ',' << format_double(a);
    traj << ',' << format_double(outcome.reward) << ','
         << format_double(envs::violation_metric(env, outcome.next_state));
    if (hover) {
      const double dx = outcome.next_state.x[0] - 5.0;
      const double dy = outcome.next_state.x[2] - 5.0;
      traj << ',' << format_double(dx * dx + dy * dy);
    }
    traj << '\n';
    state = outcome.next_state;
    done = outcome.done;
  }
  return 0;
}

RunSummary summarize_run(const std::string& dir) {
  RunSummary s;
  s.dir = dir;
  const auto metrics = read_metrics((fs::path(dir) / "metrics.csv").string());
  if (metrics.empty()) throw MissingRun("empty metrics in " + dir);
  s.episodes = static_cast<int>(metrics.size());
  const int k = std::max(1, s.episodes / 10);
  for (int i = 0; i < k; ++i) {
    s.mean_reward_first += metrics[i].accumulated_reward;
    s.mean_reward_last += metrics[s.episodes - 1 - i].accumulated_reward;
  }
  s.mean_reward_first /= k;
  s.mean_reward_last /= k;
  for (const auto& m : metrics) {
    s.max_violation = std::max(s.max_violation, m.max_violation);
    s.total_fallbacks += m.fallback_count;
  }
  const auto echo_path = fs::path(dir) / "config.echo";
  if (fs::exists(echo_path)) {
    const auto cfg = load_config(echo_path.string());
    s.seed = cfg.seed;
    s.env = cfg.env;
    s.policy = cfg.policy;
  }
  return s;
}

namespace {

// Minimal SVG line chart, one polyline per series.
void write_svg_curves(const std::string& path, const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<std::vector<double>>& series) {
  const int w = 800, h = 420, ml = 70, mr = 20, mt = 40, mb = 40;
  double lo = 0.0, hi = 1.0;
  bool first = true;
  std::size_t maxlen = 1;
  for (const auto& s : series) {
    maxlen = std::max(maxlen, s.size());
    for (double v : s) {
      if (first) {
        lo = hi = v;
        first = false;
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ofstream os(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\">\n";
  os << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">"
     << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr
     << "\" height=\"" << h - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"10\" y=\"" << mt + 12 << "\" font-size=\"11\">"
     << format_double(hi) << "</text>\n";
  os << "<text x=\"10\" y=\"" << h - mb << "\" font-size=\"11\">"
     << format_double(lo) << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << colors[si % 8]
       << "\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double fx = (maxlen > 1)
                            ? static_cast<double>(i) /
                                  static_cast<double>(maxlen - 1)
                            : 0.0;
      const double fy = (s[i] - lo) / (hi - lo);
      os << ml + fx * (w - ml - mr) << ',' << (h - mb) - fy * (h - mt - mb)
         << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 14 * si
       << "\" font-size=\"11\" fill=\"" << colors[si % 8] << "\">"
       << labels[si] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace

int run_compare(const std::vector<std::string>& run_dirs,
                const std::string& out_dir) {
  if (run_dirs.empty()) throw MissingRun("no run directories given");
  fs::create_directories(out_dir);

  std::vector<RunSummary> summaries;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rewards, violations;
  for (const auto& dir : run_dirs) {
    summaries.push_back(summarize_run(dir));
    const auto metrics =
        read_metrics((fs::path(dir) / "metrics.csv").string());
    std::vector<double> r, v;
    for (const auto& m : metrics) {
      r.push_back(m.accumulated_reward);
      v.push_back(m.max_violation);
    }
    rewards.push_back(std::move(r));
    violations.push_back(std::move(v));
    const auto& s = summaries.back();
    labels.push_back(fs::path(dir).filename().string() + " (" + s.policy +
                     " seed " + std::to_string(s.seed) + ")");
  }

  std::ofstream sum(fs::path(out_dir) / "summary.csv");
  sum << "run,env,policy,seed,episodes,mean_reward_first10pct,"
         "mean_reward_last10pct,max_violation,total_fallbacks\n";
  for (const auto& s : summaries) {
    sum << s.dir << ',' << s.env << ',' << s.policy << ',' << s.seed << ','
        << s.episodes << ',' << format_double(s.mean_reward_first) << ','
        << format_double(s.mean_reward_last) << ','
        << format_double(s.max_violation) << ',' << s.total_fallbacks << '\n';
  }

  write_svg_curves((fs::path(out_dir) / "reward_curve.svg").string(),
                   "accumulated reward per episode", labels, rewards);
  write_svg_curves((fs::path(out_dir) / "violation_curve.svg").string(),
                   "max constraint violation metric per episode", labels,
                   violations);
  return 0;
}

}  // namespace vn::harness
