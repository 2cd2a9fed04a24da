// hvac: simulation, dataset, training, inference, evaluation, DR and fault workflows.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hvac/apps/dr.hpp"
#include "hvac/apps/fault.hpp"
#include "hvac/data/csv.hpp"
#include "hvac/data/grid.hpp"
#include "hvac/error.hpp"
#include "hvac/eval/metrics.hpp"
#include "hvac/eval/sweeps.hpp"
#include "hvac/model/checkpoint.hpp"
#include "hvac/model/model.hpp"
#include "hvac/model/train.hpp"
#include "hvac/rng.hpp"
#include "hvac/sim/scenario.hpp"
#include "hvac/sim/simulator.hpp"

namespace fs = std::filesystem;
using namespace hvac;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string echo;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

/// Small labelled-table reader for the sidecar files written below.
std::vector<std::map<std::string, std::string>> read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ValidationError(path.string() + ": ragged row '" + line + "'");
    auto& row = rows.emplace_back();
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
  }
  return rows;
}

const std::string& field(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end()) throw ValidationError("missing column '" + key + "'");
  return it->second;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  int minutes = 1440;
  sim::SimConfig cfg{};
  sim::SimState init{};
  std::string fault = "NONE";
  int onset = 0;
  std::string out = "session.csv";
};

void add_sim_options(CLI::App* c, sim::SimConfig& cfg) {
  c->add_option("--noise", cfg.noise_std, "sensor noise std, K")->capture_default_str();
  c->add_option("--t-set", cfg.t_set, "temperature setpoint, K")->capture_default_str();
  c->add_option("--v-set", cfg.v_set, "ventilation setpoint")->capture_default_str();
  c->add_option("--dead-t", cfg.dead_t, "temperature dead band, K")->capture_default_str();
  c->add_option("--dead-v", cfg.dead_v, "ventilation dead band")->capture_default_str();
  c->add_flag("--constant-weather", cfg.constant_weather, "hold the outdoor temperature fixed");
}

int run_simulate(const SimulateArgs& a, const Globals& g) {
  sim::SimConfig cfg = a.cfg;
  cfg.rng_seed = g.seed;
  const sim::FaultSpec fault{sim::fault_from_string(a.fault), a.onset};
  const sim::SessionRecord rec = sim::run_session(cfg, a.init, a.minutes, fault);
  data::Dataset ds;
  ds.sequences.push_back(data::from_record(rec, 0));
  std::ofstream out = open_out(a.out);
  data::write_csv(ds, out);
  return 0;
}

// ---- scenario ------------------------------------------------------------

struct ScenarioArgs {
  bool all = false;
  std::vector<int> ids;
  std::string out;
};

int run_scenario_cmd(const ScenarioArgs& a, const Globals& g) {
  std::vector<int> ids = a.ids;
  if (a.all || ids.empty()) {
    ids.clear();
    for (int i = 1; i <= sim::kScenarioCount; ++i) ids.push_back(i);
  }
  bool all_pass = true;
  std::ostringstream table;
  for (int id : ids) {
    const sim::ScenarioReport r = sim::run_scenario(id, g.seed);
    all_pass = all_pass && r.passed;
    table << "scenario " << id << ' ' << (r.passed ? "PASS" : "FAIL") << "  " << r.description << "  [" << r.detail
          << "]\n";
  }
  std::cout << table.str();
  if (!a.out.empty()) open_out(a.out) << table.str();
  return all_pass ? 0 : 2;
}

// ---- gen-dataset ---------------------------------------------------------

struct GenArgs {
  std::string kind = "train";
  std::size_t size = 0;  // 0 selects the kind's desk-scale default
  int length = 300;
  std::string out = "dataset.csv";
};

void write_dataset(const data::Dataset& ds, const fs::path& path) {
  std::ofstream out = open_out(path);
  data::write_csv(ds, out);
  out.close();
  data::write_metadata(ds, path);
}

int run_gen(const GenArgs& a, const Globals& g) {
  const fs::path out(a.out);
  if (a.kind == "train" || a.kind == "val" || a.kind == "finetune") {
    data::GridSpec spec = a.kind == "train" ? data::GridSpec::training()
                          : a.kind == "val" ? data::GridSpec::validation()
                                            : data::GridSpec::finetune();
    spec.subset_size = a.size ? a.size : (a.kind == "val" ? 200 : 1000);
    if (a.length != spec.sequence_length) {
      spec.session_minutes = spec.session_minutes / spec.sequence_length * a.length;
      spec.sequence_length = a.length;
    }
    spec.rng_seed = derive_key(g.seed, spec.rng_seed);
    write_dataset(data::generate_dataset(spec, derive_key(g.seed, 0x5eed), g.jobs), out);
  } else if (a.kind == "dr") {
    const apps::DrDatasetSpec spec = apps::DrDatasetSpec::standard(a.size ? static_cast<int>(a.size) : 10, g.seed);
    const apps::DrDataset ds = apps::generate_dr_dataset(spec, g.jobs);
    write_dataset(apps::dr_training_set(ds), out);
    std::ofstream labels = open_out(out.string() + ".labels.csv");
    labels << "seq_id,experiment,shift,mode,bound,label,history,max_minutes\n";
    for (const auto& ex : ds.examples)
      labels << ex.window.id << ',' << ex.experiment << ',' << ex.shift << ',' << apps::to_string(ex.mode) << ','
             << fmt("%.17g", ex.bound) << ',' << ex.label << ',' << spec.history << ',' << spec.max_minutes << '\n';
  } else if (a.kind == "fault") {
    apps::FaultDatasetSpec spec;
    spec.seed = g.seed;
    const auto sessions = apps::generate_fault_dataset(spec, a.size ? static_cast<int>(a.size) : 10, g.jobs);
    data::Dataset ds;
    for (const auto& s : sessions) ds.sequences.push_back(s.stream);
    ds.meta["source"] = "fault";
    ds.meta["fault.seed"] = std::to_string(g.seed);
    write_dataset(ds, out);
    std::ofstream labels = open_out(out.string() + ".labels.csv");
    labels << "seq_id,fault_type,onset,onset_approximate,winter\n";
    for (const auto& s : sessions)
      labels << s.id << ',' << sim::to_string(s.fault.type) << ',' << s.fault.onset_minute << ','
             << (s.onset_approximate ? 1 : 0) << ',' << (s.winter ? 1 : 0) << '\n';
  } else {
    throw ValidationError("unknown dataset kind '" + a.kind + "' (train, val, finetune, dr, fault)");
  }
  return 0;
}

// ---- train / finetune ----------------------------------------------------

struct TrainArgs {
  std::string train_csv;
  std::string init;  // checkpoint to start from (required for finetune)
  std::string out = "model.ckpt";
  std::string log;
  model::TrainConfig cfg{};
  model::Architecture arch{};
  double s_process = 0.05;
  double sigma_obs = 0.1;
};

int run_train(const TrainArgs& a, const Globals& g) {
  const data::Dataset ds = data::read_csv(fs::path(a.train_csv));
  model::ModelParams init;
  if (!a.init.empty()) {
    init = model::load_checkpoint(fs::path(a.init));
  } else {
    init = model::make_model(a.arch, g.seed);
    init.s_process = a.s_process;
    init.sigma_obs = a.sigma_obs;
  }
  model::TrainConfig cfg = a.cfg;
  cfg.seed = g.seed;
  std::vector<model::TrainLogEntry> log;
  const int every = std::max(1, cfg.steps / 20);
  const model::ModelParams p = model::train(ds, cfg, init, &log, [&](const model::TrainLogEntry& e) {
    if ((e.step + 1) % every == 0) std::cerr << "step " << e.step + 1 << "  loss " << fmt("%.4f", e.loss) << '\n';
  });
  model::save_checkpoint(p, fs::path(a.out));
  if (!a.log.empty()) model::write_train_log(log, a.log);
  return 0;
}

// ---- denoise / predict ---------------------------------------------------

struct DenoiseArgs {
  std::string checkpoint;
  std::string input;
  std::string out = "denoised.csv";
};

int run_denoise(const DenoiseArgs& a, const Globals&) {
  const model::ModelParams p = model::load_checkpoint(fs::path(a.checkpoint));
  const data::Dataset ds = data::read_csv(fs::path(a.input));
  std::ofstream out = open_out(a.out);
  out << "seq_id,minute,t_obs,mu_tilde,sigma_tilde\n";
  char buf[160];
  for (const auto& s : ds.sequences) {
    const model::DenoiserOutput d = model::denoise(s.t_obs, s.t_out, s.control, p);
    for (std::size_t m = 0; m < s.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%lld,%zu,%.6f,%.6f,%.6f\n", static_cast<long long>(s.id), m, s.t_obs[m],
                    d.mu_tilde[m], d.sigma_tilde[m]);
      out << buf;
    }
  }
  return 0;
}

struct PredictArgs {
  std::string checkpoint;
  std::string input;
  int horizon = 150;
  int history = -1;  // default: every minute before the horizon
  std::size_t seq_index = 0;
  std::string out = "prediction.csv";
};

int run_predict(const PredictArgs& a, const Globals&) {
  const model::ModelParams p = model::load_checkpoint(fs::path(a.checkpoint));
  const data::Dataset ds = data::read_csv(fs::path(a.input));
  if (a.seq_index >= ds.size())
    throw ValidationError("--seq-index " + std::to_string(a.seq_index) + " but the input holds " +
                          std::to_string(ds.size()) + " sequences");
  const data::Sequence& s = ds.sequences[a.seq_index];
  if (a.horizon < 0) throw ValidationError("--horizon must be >= 0");
  const auto horizon = static_cast<std::size_t>(a.horizon);
  const std::size_t history = a.history < 0 ? (s.size() > horizon ? s.size() - horizon : 0)
                                            : static_cast<std::size_t>(a.history);
  if (history < 1 || history + horizon > s.size())
    throw ValidationError("input has " + std::to_string(s.size()) + " minutes; history " + std::to_string(history) +
                          " plus horizon " + std::to_string(horizon) + " does not fit");
  const model::PredictionResult r =
      model::rollout(s.slice(0, history), std::span(s.control).subspan(history, horizon),
                     std::span(s.t_out).subspan(history, horizon), horizon, p);
  std::ofstream out = open_out(a.out);
  out << "minute,t_pred,trust_halfwidth\n";
  char buf[96];
  for (std::size_t k = 0; k < horizon; ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", history + k, r.t_pred[k], r.trust_halfwidth[k]);
    out << buf;
  }
  return 0;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string input;
  std::string kind = "horizon";
  std::vector<int> horizons{30, 60, 90, 120, 150};
  int history = -1;
  std::vector<double> bands{1.0, 0.5, 0.25};
  std::vector<int> n_forgive{0, 1, 2, 3, 4, 5, 10};
  std::vector<double> levels{0.01, 0.1, 0.2, 0.25, 0.3, 0.6, 0.8};
  int noise_horizon = 150;
  std::string out = "metrics.csv";
};

int run_evaluate(const EvaluateArgs& a, const Globals& g) {
  const model::ModelParams p = model::load_checkpoint(fs::path(a.checkpoint));
  const data::Dataset ds = data::read_csv(fs::path(a.input));
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  if (a.kind == "horizon") {
    eval::write_metrics_csv(eval::horizon_sweep(p, ds, a.horizons, g.jobs, a.history), out);
  } else if (a.kind == "fidelity") {
    eval::write_fidelity_csv(eval::fidelity_table(p, ds, a.horizons, a.bands, a.n_forgive, g.jobs), out);
  } else if (a.kind == "noise") {
    eval::write_noise_csv(eval::noise_sweep(p, ds, a.levels, a.noise_horizon, g.seed, g.jobs), out);
  } else {
    throw ValidationError("unknown evaluation kind '" + a.kind + "' (horizon, fidelity, noise)");
  }
  return 0;
}

// ---- dr-plan -------------------------------------------------------------

struct DrArgs {
  std::string checkpoint;
  std::string input;     // history sequence, or a DR dataset with --labels
  std::string forecast;  // optional sequence CSV: t_out and baseline controls
  std::string labels;
  double bound = sim::celsius(20.0);
  std::string mode = "heating";
  int window = 60;
  int max_minutes = 150;
  std::string out = "dr.csv";
};

int run_dr(const DrArgs& a, const Globals& g) {
  const model::ModelParams p = model::load_checkpoint(fs::path(a.checkpoint));
  const data::Dataset ds = data::read_csv(fs::path(a.input));
  if (!a.labels.empty()) {
    const auto rows = read_table(a.labels);
    if (rows.size() != ds.size()) throw ValidationError("labels and dataset disagree on the number of sequences");
    apps::DrDataset dr;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      apps::DrExample ex;
      ex.experiment = std::stoi(field(rows[i], "experiment"));
      ex.shift = std::stoi(field(rows[i], "shift"));
      ex.mode = apps::dr_mode_from_string(field(rows[i], "mode"));
      ex.bound = std::stod(field(rows[i], "bound"));
      ex.label = std::stoi(field(rows[i], "label"));
      ex.window = ds.sequences[i];
      dr.spec.history = std::stoi(field(rows[i], "history"));
      dr.spec.max_minutes = std::stoi(field(rows[i], "max_minutes"));
      dr.examples.push_back(std::move(ex));
    }
    const auto results = apps::evaluate_dr(p, dr, g.jobs);
    apps::write_dr_csv(results, a.out);
    const apps::DrErrorStats st = apps::dr_error_stats(results);
    std::cerr << "n " << st.n << "  rmse " << fmt("%.3f", st.rmse) << "  mean " << fmt("%.3f", st.mean) << "  std "
              << fmt("%.3f", st.std) << '\n';
    return 0;
  }
  apps::DrQuery q;
  q.history = ds.sequences.at(0);
  q.comfort_bound = a.bound;
  q.mode = apps::dr_mode_from_string(a.mode);
  q.max_minutes = a.max_minutes;
  const std::size_t need = static_cast<std::size_t>(a.window - 1 + a.max_minutes);
  if (!a.forecast.empty()) {
    const data::Dataset f = data::read_csv(fs::path(a.forecast));
    q.t_out_forecast = f.sequences.at(0).t_out;
    q.baseline_controls = f.sequences.at(0).control;
  } else {
    q.t_out_forecast.assign(need, q.history.t_out.back());
  }
  const apps::DrPlan plan = apps::dr_plan_start(p, q, a.window);
  std::ofstream out = open_out(a.out);
  out << "start_minute,event_length_pred\n";
  for (std::size_t s = 0; s < plan.lengths.size(); ++s) out << s << ',' << plan.lengths[s] << '\n';
  std::cout << "best_start " << plan.best_start << "  duration " << plan.duration << "  unplanned "
            << plan.lengths.front() << '\n';
  return 0;
}

// ---- fault-detect --------------------------------------------------------

struct FaultArgs {
  std::string checkpoint;
  std::string input;
  std::string labels;
  apps::FaultDetectConfig cfg{};
  std::string out = "faults.csv";
  std::string summary;
};

int run_fault(const FaultArgs& a, const Globals& g) {
  const model::ModelParams p = model::load_checkpoint(fs::path(a.checkpoint));
  const data::Dataset ds = data::read_csv(fs::path(a.input));
  std::vector<apps::FaultSession> sessions(ds.size());
  std::vector<std::map<std::string, std::string>> rows;
  if (!a.labels.empty()) {
    rows = read_table(a.labels);
    if (rows.size() != ds.size()) throw ValidationError("labels and dataset disagree on the number of sequences");
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sessions[i].id = ds.sequences[i].id;
    sessions[i].stream = ds.sequences[i];
    if (!rows.empty()) {
      sessions[i].fault.type = sim::fault_from_string(field(rows[i], "fault_type"));
      sessions[i].fault.onset_minute = std::stoi(field(rows[i], "onset"));
    }
  }
  const auto results = apps::run_fault_detection(p, sessions, a.cfg, g.jobs);
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  apps::write_fault_csv(results, out);
  if (!rows.empty()) {
    std::ostringstream table;
    table << "fault_type,tp,fp,fn,recall,precision,mean_detection_minutes\n";
    for (const auto& r : apps::classify_faults(results))
      table << sim::to_string(r.type) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ',' << fmt("%.4f", r.recall)
            << ',' << fmt("%.4f", r.precision) << ',' << fmt("%.3f", r.mean_detection_minutes) << '\n';
    std::cout << table.str();
    if (!a.summary.empty()) open_out(a.summary) << table.str();
  }
  return 0;
}

/// Resolved globals plus the active subcommand's options, loadable with --config.
void echo_config(const CLI::App& sub, const Globals& g, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "seed=" << g.seed << "\njobs=" << g.jobs << "\n[" << sub.get_name() << "]\n" << sub.config_to_str(true, false);
}

std::string default_echo(const std::string& sub, const std::string& out) {
  return out.empty() ? "hvac-" + sub + ".config.toml" : out + ".config.toml";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-robust room temperature modelling for HVAC: simulate, train, predict, plan."};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "root seed for every random draw")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for generation and evaluation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--echo-config", g.echo, "where to write the resolved configuration");
  app.fallthrough();

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "run one simulated session and write it as CSV");
  sim_cmd->add_option("--minutes", sa.minutes, "session length")->capture_default_str();
  add_sim_options(sim_cmd, sa.cfg);
  sim_cmd->add_option("--t-init", sa.init.t_true, "initial room temperature, K")->capture_default_str();
  sim_cmd->add_option("--t-out-init", sa.init.t_out, "initial outdoor temperature, K")->capture_default_str();
  sim_cmd->add_option("--t-wall-init", sa.init.t_wall, "initial wall temperature, K")->capture_default_str();
  sim_cmd->add_option("--t-heater-init", sa.init.t_heater, "initial heater temperature, K")->capture_default_str();
  sim_cmd->add_option("--vent-init", sa.init.vent_level, "initial ventilation level")->capture_default_str();
  sim_cmd->add_option("--fault", sa.fault, "NONE, HEATER_STUCK_OFF, HEATER_STUCK_ON, AC_STUCK_OFF, AC_STUCK_ON, ENVELOPE_BREAK")
      ->capture_default_str();
  sim_cmd->add_option("--onset", sa.onset, "fault onset minute")->capture_default_str();
  sim_cmd->add_option("--out", sa.out, "output CSV")->capture_default_str();

  ScenarioArgs sc;
  auto* sc_cmd = app.add_subcommand("scenario", "run the simulator validation scenarios");
  sc_cmd->add_flag("--all", sc.all, "run all six scenarios (the default)");
  sc_cmd->add_option("--id", sc.ids, "scenario ids to run")->delimiter(',');
  sc_cmd->add_option("--out", sc.out, "also write the table here");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "generate a training, validation, fine-tuning, DR or fault dataset");
  gen_cmd->add_option("--kind", ga.kind, "train, val, finetune, dr or fault")->capture_default_str();
  gen_cmd->add_option("--size", ga.size,
                      "sequences (train/val/finetune), shifts per experiment (dr) or sessions per type (fault)");
  gen_cmd->add_option("--length", ga.length, "sequence length for grid datasets")->capture_default_str();
  gen_cmd->add_option("--out", ga.out, "output CSV")->capture_default_str();

  auto add_train_options = [](CLI::App* c, TrainArgs& t) {
    c->add_option("--train", t.train_csv, "training sequences CSV")->required();
    c->add_option("--out", t.out, "output checkpoint")->capture_default_str();
    c->add_option("--log", t.log, "loss log CSV");
    c->add_option("--steps", t.cfg.steps, "optimizer steps")->capture_default_str();
    c->add_option("--batch", t.cfg.batch_size, "sequences per step")->capture_default_str();
    c->add_option("--lr", t.cfg.learning_rate, "Adam learning rate")->capture_default_str();
    c->add_option("--clip-norm", t.cfg.clip_norm, "global gradient-norm clip, 0 disables")->capture_default_str();
    c->add_option("--lr-final", t.cfg.final_learning_rate, "cosine-anneal the rate down to this; negative keeps it constant")
        ->capture_default_str();
  };
  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a model from scratch");
  add_train_options(train_cmd, ta);
  train_cmd->add_option("--channels", ta.arch.channels, "denoiser conv channels")->capture_default_str();
  train_cmd->add_option("--kernel", ta.arch.kernel, "denoiser kernel width (odd)")->capture_default_str();
  train_cmd->add_option("--hidden", ta.arch.hidden, "GRU hidden size")->capture_default_str();
  train_cmd->add_option("--head-hidden", ta.arch.head_hidden, "predictor head width")->capture_default_str();
  train_cmd->add_option("--s-process", ta.s_process, "process noise std, K")->capture_default_str();
  train_cmd->add_option("--sigma-obs", ta.sigma_obs, "observation noise for unlabelled data, K")->capture_default_str();

  TrainArgs fa;
  fa.cfg.steps = 4000;
  fa.cfg.batch_size = 64;
  fa.cfg.learning_rate = 1e-4;
  fa.out = "finetuned.ckpt";
  auto* ft_cmd = app.add_subcommand("finetune", "continue training a checkpoint on new data");
  add_train_options(ft_cmd, fa);
  ft_cmd->add_option("--checkpoint", fa.init, "checkpoint to start from")->required();

  DenoiseArgs da;
  auto* den_cmd = app.add_subcommand("denoise", "write mu_tilde and sigma_tilde for every minute");
  den_cmd->add_option("--checkpoint", da.checkpoint, "model checkpoint")->required();
  den_cmd->add_option("--input", da.input, "sequence CSV")->required();
  den_cmd->add_option("--out", da.out, "output CSV")->capture_default_str();

  PredictArgs pa;
  auto* pred_cmd = app.add_subcommand("predict", "forecast one sequence from its history");
  pred_cmd->add_option("--checkpoint", pa.checkpoint, "model checkpoint")->required();
  pred_cmd->add_option("--input", pa.input, "sequence CSV: history, then the future controls and T_out")->required();
  pred_cmd->add_option("--horizon", pa.horizon, "minutes to forecast")->capture_default_str();
  pred_cmd->add_option("--history", pa.history, "history minutes (default: all minutes before the horizon)");
  pred_cmd->add_option("--seq-index", pa.seq_index, "which sequence of the input")->capture_default_str();
  pred_cmd->add_option("--out", pa.out, "output CSV")->capture_default_str();

  EvaluateArgs ea;
  auto* ev_cmd = app.add_subcommand("evaluate", "horizon, fidelity-band or noise sweeps");
  ev_cmd->add_option("--checkpoint", ea.checkpoint, "model checkpoint")->required();
  ev_cmd->add_option("--input", ea.input, "validation CSV with t_true")->required();
  ev_cmd->add_option("--kind", ea.kind, "horizon, fidelity or noise")->capture_default_str();
  ev_cmd->add_option("--horizons", ea.horizons, "forecast horizons")->delimiter(',')->capture_default_str();
  ev_cmd->add_option("--history", ea.history, "history minutes (default 150, or 300 beyond 150)");
  ev_cmd->add_option("--bands", ea.bands, "fidelity bands, K")->delimiter(',')->capture_default_str();
  ev_cmd->add_option("--n-forgive", ea.n_forgive, "forgiven violation run lengths")->delimiter(',')->capture_default_str();
  ev_cmd->add_option("--levels", ea.levels, "noise levels, K")->delimiter(',')->capture_default_str();
  ev_cmd->add_option("--noise-horizon", ea.noise_horizon, "forecast horizon of the noise sweep")->capture_default_str();
  ev_cmd->add_option("--out", ea.out, "output CSV")->capture_default_str();

  DrArgs ra;
  auto* dr_cmd = app.add_subcommand("dr-plan", "demand-response event length and start planning");
  dr_cmd->add_option("--checkpoint", ra.checkpoint, "model checkpoint")->required();
  dr_cmd->add_option("--input", ra.input, "history sequence CSV, or a DR dataset together with --labels")->required();
  dr_cmd->add_option("--labels", ra.labels, "DR labels written by gen-dataset --kind dr");
  dr_cmd->add_option("--forecast", ra.forecast, "sequence CSV giving T_out and the baseline controls ahead");
  dr_cmd->add_option("--bound", ra.bound, "comfort bound, K")->capture_default_str();
  dr_cmd->add_option("--mode", ra.mode, "heating or cooling")->capture_default_str();
  dr_cmd->add_option("--window", ra.window, "candidate start minutes")->capture_default_str();
  dr_cmd->add_option("--max-minutes", ra.max_minutes, "longest event considered")->capture_default_str();
  dr_cmd->add_option("--out", ra.out, "output CSV")->capture_default_str();

  FaultArgs fd;
  auto* fault_cmd = app.add_subcommand("fault-detect", "rolling-RMSE fault detection over recorded streams");
  fault_cmd->add_option("--checkpoint", fd.checkpoint, "model checkpoint")->required();
  fault_cmd->add_option("--input", fd.input, "stream CSV")->required();
  fault_cmd->add_option("--labels", fd.labels, "fault labels written by gen-dataset --kind fault");
  fault_cmd->add_option("--threshold", fd.cfg.threshold, "alarm RMSE, K")->capture_default_str();
  fault_cmd->add_option("--window", fd.cfg.window, "rollout window, minutes")->capture_default_str();
  fault_cmd->add_option("--history", fd.cfg.history, "history minutes per window")->capture_default_str();
  fault_cmd->add_option("--out", fd.out, "per-session CSV")->capture_default_str();
  fault_cmd->add_option("--summary", fd.summary, "per-type classification CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    int rc = 0;
    auto run = [&](auto&& fn, const auto& args, const std::string& out) {
      echo_config(*sub, g, g.echo.empty() ? default_echo(name, out) : g.echo);
      rc = fn(args, g);
    };
    if (name == "simulate") run(run_simulate, sa, sa.out);
    else if (name == "scenario") run(run_scenario_cmd, sc, sc.out);
    else if (name == "gen-dataset") run(run_gen, ga, ga.out);
    else if (name == "train") run(run_train, ta, ta.out);
    else if (name == "finetune") run(run_train, fa, fa.out);
    else if (name == "denoise") run(run_denoise, da, da.out);
    else if (name == "predict") run(run_predict, pa, pa.out);
    else if (name == "evaluate") run(run_evaluate, ea, ea.out);
    else if (name == "dr-plan") run(run_dr, ra, ra.out);
    else if (name == "fault-detect") run(run_fault, fd, fd.out);
    return rc;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
