#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fondrec/dataset.hpp"
#include "fondrec/metrics.hpp"
#include "fondrec/recognizer.hpp"
#include "json.hpp"

namespace fondrec::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct file_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const fs::path &p) {
  std::ifstream f(p);
  if (!f) throw file_error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spill(const fs::path &p, const std::string &text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw file_error("cannot write " + p.string());
  f << text;
}

Dialect dialect_from(const std::string &name) {
  if (name == "ltlf") return Dialect::ltlf;
  if (name == "ppltl") return Dialect::ppltl;
  throw semantic_error("unknown dialect " + name + " (expected ltlf or ppltl)");
}

std::string dialect_name(Dialect d) {
  return d == Dialect::ltlf ? "ltlf" : "ppltl";
}

std::size_t env_state_cap() {
  if (const char *v = std::getenv("FONDREC_STATE_CAP")) {
    char *end = nullptr;
    unsigned long long n = std::strtoull(v, &end, 10);
    if (end != v && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return PlannerOptions{}.state_cap;
}

fs::path resolve(const fs::path &base, const std::string &p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

fs::path parent_of(const fs::path &p) {
  return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

struct RunConfig {
  std::string domain_file, problem_file, config_file, dataset_file;
  std::string goal, family;
  std::string dialect = "ltlf";
  std::string mode = "strong-cyclic";
  std::string space = "original";
  std::string out;            // single-file outputs; empty = stdout
  std::string out_dir = ".";  // multi-file outputs
  int count = 10;
  int hypotheses = 4;
  int max_tries = 400;
  int loop_bound = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::size_t state_cap = env_state_cap();
  std::size_t max_executions = 100000;
  bool online = false;
};

void emit(const RunConfig &c, const std::string &text, std::ostream &out) {
  if (c.out.empty()) {
    out << text << "\n";
  } else {
    spill(c.out, text);
    out << "wrote " << c.out << "\n";
  }
}

int do_compile(const RunConfig &c, std::ostream &out) {
  DomainModel d = parse_domain(slurp(c.domain_file));
  ProblemModel p = parse_problem(slurp(c.problem_file));
  FormulaPtr f = parse_formula(c.goal, dialect_from(c.dialect));
  CompiledProblem cp = compile(d, p, f);
  fs::path dir(c.out_dir);
  spill(dir / "domain.pddl", print_domain(cp.domain));
  spill(dir / "problem.pddl", print_problem(cp.problem));
  out << "wrote " << (dir / "domain.pddl").string() << " and "
      << (dir / "problem.pddl").string() << " (" << cp.state_fluents.size()
      << " automaton states)\n";
  return kOk;
}

int do_plan(const RunConfig &c, std::ostream &out, std::ostream &err) {
  DomainModel d = parse_domain(slurp(c.domain_file));
  ProblemModel p = parse_problem(slurp(c.problem_file));
  FondModel m = ground(d, p);
  PlannerOptions po;
  po.state_cap = c.state_cap;
  std::optional<Policy> pi;
  if (c.mode == "strong-cyclic") {
    pi = solve_strong_cyclic(m, po);
  } else if (c.mode == "strong") {
    pi = solve_strong(m, po);
  } else {
    throw semantic_error("unknown mode " + c.mode +
                         " (expected strong-cyclic or strong)");
  }
  if (!pi) {
    err << "no " << c.mode << " policy exists for " << c.problem_file << "\n";
    return kUnsolvable;
  }
  emit(c, policy_to_json(m, *pi, c.space), out);
  return kOk;
}

RecognitionProblem load_recognition_config(const json &cfg,
                                           const fs::path &base,
                                           RecognizeOptions &opts) {
  RecognitionProblem t;
  t.domain = parse_domain(slurp(resolve(base, cfg.at("domain_file"))));
  t.problem = parse_problem(slurp(resolve(base, cfg.at("problem_file"))));
  for (const json &h : cfg.at("hypotheses"))
    t.hypotheses.push_back(
        {h.at("id"),
         parse_formula(h.at("formula"),
                       dialect_from(h.value("dialect", "ltlf")))});
  t.true_goal = cfg.value("true_goal", "");
  t.observations = cfg.at("observations").get<std::vector<std::string>>();
  if (cfg.contains("priors"))
    opts.priors = cfg.at("priors").get<std::vector<double>>();
  if (cfg.contains("policies"))
    for (const auto &[id, path] : cfg.at("policies").items())
      opts.policies[id] = slurp(resolve(base, path.get<std::string>()));
  return t;
}

int do_recognize(const RunConfig &c, std::ostream &out) {
  json cfg = json::parse(slurp(c.config_file));
  RecognizeOptions opts;
  opts.planner.state_cap = c.state_cap;
  opts.loop_bound = c.loop_bound;
  opts.max_executions = c.max_executions;
  opts.jobs = c.jobs;
  RecognitionProblem t =
      load_recognition_config(cfg, parent_of(c.config_file), opts);
  std::string text;
  if (c.online) {
    OnlineResult r = recognize_online(t, opts);
    json doc = json::parse(online_to_json(r));
    if (!t.true_goal.empty())
      doc["ranked_first"] = ranked_first(r.steps, t.true_goal);
    text = doc.dump(2);
  } else {
    text = result_to_json(recognize_offline(t, opts));
  }
  emit(c, text, out);
  return kOk;
}

int do_dataset(const RunConfig &c, std::ostream &out) {
  DomainModel d = parse_domain(slurp(c.domain_file));
  ProblemModel p = parse_problem(slurp(c.problem_file));
  DatasetOptions o;
  o.hypotheses = c.hypotheses;
  o.max_tries = c.max_tries;
  o.planner.state_cap = c.state_cap;
  o.loop_bound = c.loop_bound;
  o.max_executions = c.max_executions;
  Dataset ds = generate_dataset(d, p, family_from_name(c.family), c.count,
                                c.seed, o);
  json doc;
  doc["domain"] = ds.domain_name;
  doc["family"] = family_name(ds.family);
  doc["seed"] = ds.seed;
  json problems = json::array();
  for (const DatasetEntry &e : ds.entries) {
    json rec;
    rec["domain_file"] = c.domain_file;
    rec["problem_file"] = c.problem_file;
    json hyps = json::array();
    for (const Hypothesis &h : e.problem.hypotheses)
      hyps.push_back({{"id", h.id},
                      {"dialect", dialect_name(h.formula->dialect)},
                      {"formula", print_formula(h.formula)}});
    rec["hypotheses"] = hyps;
    rec["true_goal"] = e.problem.true_goal;
    json obs;
    for (const auto &[level, actions] : e.observations)
      obs[std::to_string(level)] = actions;
    rec["observations"] = obs;
    rec["seed"] = e.seed;
    problems.push_back(rec);
  }
  doc["problems"] = problems;
  emit(c, doc.dump(2), out);
  return kOk;
}

struct EvalCell {
  Outcome outcome;
  std::size_t obs = 0;
  double seconds = 0.0;
  double rf = -1.0;  // ranked-first at full observability, when online
};

int do_eval(const RunConfig &c, std::ostream &out) {
  fs::path dsp(c.dataset_file);
  json doc = json::parse(slurp(dsp));
  fs::path base = parent_of(dsp);

  // Domain/problem texts parse once per distinct file pair.
  std::map<std::pair<std::string, std::string>,
           std::pair<DomainModel, ProblemModel>>
      parsed;
  struct Task {
    RecognitionProblem t;
    int level = 0;
  };
  std::vector<Task> tasks;
  std::vector<int> levels;
  const json &problems = doc.at("problems");
  if (problems.empty()) throw dataset_error("dataset holds no problems");
  for (const json &rec : problems) {
    std::pair<std::string, std::string> key = {rec.at("domain_file"),
                                               rec.at("problem_file")};
    auto it = parsed.find(key);
    if (it == parsed.end())
      it = parsed
               .emplace(key,
                        std::make_pair(
                            parse_domain(slurp(resolve(base, key.first))),
                            parse_problem(slurp(resolve(base, key.second)))))
               .first;
    RecognitionProblem t;
    t.domain = it->second.first;
    t.problem = it->second.second;
    for (const json &h : rec.at("hypotheses"))
      t.hypotheses.push_back(
          {h.at("id"), parse_formula(h.at("formula"),
                                     dialect_from(h.value("dialect", "ltlf")))});
    t.true_goal = rec.at("true_goal");
    for (const auto &[ls, actions] : rec.at("observations").items()) {
      int level = std::stoi(ls);
      if (std::find(levels.begin(), levels.end(), level) == levels.end())
        levels.push_back(level);
      Task task;
      task.t = t;
      task.t.observations = actions.get<std::vector<std::string>>();
      task.level = level;
      tasks.push_back(std::move(task));
    }
  }
  std::sort(levels.begin(), levels.end());

  RecognizeOptions opts;
  opts.planner.state_cap = c.state_cap;
  opts.loop_bound = c.loop_bound;
  opts.max_executions = c.max_executions;

  std::vector<EvalCell> cells(tasks.size());
  auto run_task = [&](std::size_t i) {
    const Task &task = tasks[i];
    auto t0 = std::chrono::steady_clock::now();
    RecognitionResult r = recognize_offline(task.t, opts);
    EvalCell cell;
    cell.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    cell.outcome = {task.t.true_goal, r.argmax,
                    static_cast<int>(task.t.hypotheses.size())};
    cell.obs = task.t.observations.size();
    if (c.online && task.level == 100) {
      OnlineResult o = recognize_online(task.t, opts);
      cell.rf = ranked_first(o.steps, task.t.true_goal);
    }
    cells[i] = std::move(cell);
  };
  int jobs = std::max(1, c.jobs);
  if (jobs == 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1))
          run_task(i);
      });
    for (std::thread &th : pool) th.join();
  }

  json metrics;
  metrics["problems"] = problems.size();
  double hyps_total = 0;
  for (const json &rec : problems)
    hyps_total += static_cast<double>(rec.at("hypotheses").size());
  metrics["hypotheses_mean"] = hyps_total / static_cast<double>(problems.size());

  std::ostringstream table;
  table << " Obs%    |G|   |Obs|   Time(s)     TPR     FPR     FNR      F1\n";
  json by_level;
  double rf_sum = 0;
  int rf_n = 0;
  for (int level : levels) {
    std::vector<Outcome> outs;
    double obs_sum = 0, time_sum = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].level != level) continue;
      outs.push_back(cells[i].outcome);
      obs_sum += static_cast<double>(cells[i].obs);
      time_sum += cells[i].seconds;
      if (cells[i].rf >= 0) {
        rf_sum += cells[i].rf;
        ++rf_n;
      }
    }
    MetricRates r = metric_rates(outs);
    double n = static_cast<double>(outs.size());
    json row;
    row["tpr"] = r.tpr;
    row["fpr"] = r.fpr;
    row["fnr"] = r.fnr;
    row["f1"] = r.f1;
    row["mean_obs"] = obs_sum / n;
    row["zero_denominator"] = r.zero_denominator;
    by_level[std::to_string(level)] = row;
    table << std::setw(5) << level << "  " << std::fixed
          << std::setprecision(1) << std::setw(5) << hyps_total / static_cast<double>(problems.size())
          << std::setprecision(2) << std::setw(8) << obs_sum / n
          << std::setprecision(3) << std::setw(10) << time_sum / n
          << std::setprecision(3) << std::setw(8) << r.tpr << std::setw(8)
          << r.fpr << std::setw(8) << r.fnr << std::setw(8) << r.f1 << "\n";
    table.unsetf(std::ios::fixed);
  }
  metrics["levels"] = by_level;
  if (c.online && rf_n > 0)
    metrics["ranked_first_mean"] = rf_sum / static_cast<double>(rf_n);

  fs::path dir(c.out_dir);
  spill(dir / "metrics.json", metrics.dump(2));
  spill(dir / "table.txt", table.str());
  out << table.str();
  out << "wrote " << (dir / "metrics.json").string() << " and "
      << (dir / "table.txt").string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"FOND planning and recognition of temporally extended goals"};
  app.require_subcommand(1);
  RunConfig c;

  CLI::App *cmp = app.add_subcommand(
      "compile", "Fuse a temporal goal into a FOND domain/problem pair");
  cmp->add_option("--domain", c.domain_file, "domain PDDL file")->required();
  cmp->add_option("--problem", c.problem_file, "problem PDDL file")->required();
  cmp->add_option("--goal", c.goal, "temporal goal formula")->required();
  cmp->add_option("--dialect", c.dialect, "ltlf or ppltl")
      ->capture_default_str();
  cmp->add_option("--out-dir", c.out_dir,
                  "directory for domain.pddl and problem.pddl")
      ->capture_default_str();

  CLI::App *pln = app.add_subcommand(
      "plan", "Solve a FOND problem and emit the policy as JSON");
  pln->add_option("--domain", c.domain_file, "domain PDDL file")->required();
  pln->add_option("--problem", c.problem_file, "problem PDDL file")
      ->required();
  pln->add_option("--mode", c.mode, "strong-cyclic or strong")
      ->capture_default_str();
  pln->add_option("--space", c.space, "space tag stored in the policy JSON")
      ->capture_default_str();
  pln->add_option("--policy", c.out, "output file (default stdout)");
  pln->add_option("--state-cap", c.state_cap,
                  "max interned states (env FONDREC_STATE_CAP)")
      ->capture_default_str();

  CLI::App *rec = app.add_subcommand(
      "recognize", "Rank goal hypotheses against an observation sequence");
  rec->add_option("--config", c.config_file, "recognition problem JSON")
      ->required();
  rec->add_flag("--online", c.online, "reveal observations incrementally");
  rec->add_option("--jobs", c.jobs, "parallel hypothesis planning")
      ->capture_default_str();
  rec->add_option("--out", c.out, "output file (default stdout)");
  rec->add_option("--loop-bound", c.loop_bound,
                  "extra loop traversals per execution")
      ->capture_default_str();
  rec->add_option("--max-executions", c.max_executions,
                  "execution enumeration cap")
      ->capture_default_str();
  rec->add_option("--state-cap", c.state_cap,
                  "max interned states (env FONDREC_STATE_CAP)")
      ->capture_default_str();

  CLI::App *gen = app.add_subcommand(
      "dataset", "Generate a recognition dataset from goal templates");
  gen->add_option("--domain", c.domain_file, "domain PDDL file")->required();
  gen->add_option("--problem", c.problem_file, "problem PDDL file")
      ->required();
  gen->add_option("--family", c.family,
                  "conjunctive, eventually, ordered-eventually, until, once, "
                  "or since")
      ->required();
  gen->add_option("--count", c.count, "problems to generate")
      ->capture_default_str();
  gen->add_option("--seed", c.seed, "dataset seed")->capture_default_str();
  gen->add_option("--hypotheses", c.hypotheses, "goals per problem (>= 4)")
      ->capture_default_str();
  gen->add_option("--max-tries", c.max_tries, "resample budget per problem")
      ->capture_default_str();
  gen->add_option("--out", c.out, "output file (default stdout)");
  gen->add_option("--state-cap", c.state_cap,
                  "max interned states (env FONDREC_STATE_CAP)")
      ->capture_default_str();

  CLI::App *evl = app.add_subcommand(
      "eval", "Score a dataset and emit metrics.json plus table.txt");
  evl->add_option("--dataset", c.dataset_file, "dataset JSON file")
      ->required();
  evl->add_flag("--online", c.online,
                "also compute ranked-first at full observability");
  evl->add_option("--jobs", c.jobs, "parallel problems")->capture_default_str();
  evl->add_option("--out-dir", c.out_dir, "directory for the reports")
      ->capture_default_str();
  evl->add_option("--state-cap", c.state_cap,
                  "max interned states (env FONDREC_STATE_CAP)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    if (cmp->parsed()) return do_compile(c, out);
    if (pln->parsed()) return do_plan(c, out, err);
    if (rec->parsed()) return do_recognize(c, out);
    if (gen->parsed()) return do_dataset(c, out);
    if (evl->parsed()) return do_eval(c, out);
    err << "no subcommand\n";
    return kUsage;
  } catch (const parse_error &e) {
    err << "formula error: " << e.what() << "\n";
    return kFormula;
  } catch (const semantic_error &e) {
    err << "formula error: " << e.what() << "\n";
    return kFormula;
  } catch (const dfa_error &e) {
    err << "formula error: " << e.what() << "\n";
    return kFormula;
  } catch (const compile_error &e) {
    err << "compile error: " << e.what() << "\n";
    return kFormula;
  } catch (const dataset_error &e) {
    err << "dataset error: " << e.what() << "\n";
    return kFormula;
  } catch (const recognizer_error &e) {
    err << "recognition error: " << e.what() << "\n";
    return kFormula;
  } catch (const pddl_error &e) {
    err << "pddl error: " << e.what() << "\n";
    return kFile;
  } catch (const type_error &e) {
    err << "pddl error: " << e.what() << "\n";
    return kFile;
  } catch (const unsupported_error &e) {
    err << "pddl error: " << e.what() << "\n";
    return kFile;
  } catch (const file_error &e) {
    err << "file error: " << e.what() << "\n";
    return kFile;
  } catch (const fs::filesystem_error &e) {
    err << "file error: " << e.what() << "\n";
    return kFile;
  } catch (const json::exception &e) {
    err << "json error: " << e.what() << "\n";
    return kFile;
  } catch (const planner_error &e) {
    err << "planner error: " << e.what() << "\n";
    return kUnsolvable;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace fondrec::cli
