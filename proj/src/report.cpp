#include "localmart/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"
#include "localmart/svg.hpp"

namespace localmart {

using nlohmann::json;

std::string library_version() { return LOCALMART_VERSION; }

namespace {

struct Table {
  std::string header;
  std::vector<std::string> rows;
};

class Outputs {
 public:
  void row(const std::string& file, const std::string& header, const std::string& line) {
    auto& t = tables_[file];
    t.header = header;
    t.rows.push_back(line);
  }
  void svg(const std::string& file, std::string content) { svgs_[file] = std::move(content); }

  std::vector<std::string> write(const std::filesystem::path& dir) const {
    std::vector<std::string> files;
    for (const auto& [name, t] : tables_) {
      std::ofstream out(dir / name);
      out << t.header << "\n";
      for (const auto& r : t.rows) out << r << "\n";
      if (!out) throw std::runtime_error("failed to write " + (dir / name).string());
      files.push_back(name);
    }
    for (const auto& [name, content] : svgs_) {
      std::ofstream out(dir / name);
      out << content;
      if (!out) throw std::runtime_error("failed to write " + (dir / name).string());
      files.push_back(name);
    }
    return files;
  }

 private:
  std::map<std::string, Table> tables_;
  std::map<std::string, std::string> svgs_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <class... Ts>
std::string csv(const Ts&... parts) {
  std::ostringstream os;
  bool first = true;
  auto one = [&](const auto& p) {
    if (!first) os << ",";
    first = false;
    using P = std::decay_t<decltype(p)>;
    if constexpr (std::is_same_v<P, double>) {
      os << fmt17(p);
    } else if constexpr (std::is_integral_v<P>) {
      os << p;
    } else {
      os << csv_field(std::string(p));
    }
  };
  (one(parts), ...);
  return os.str();
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

json report_json(const ArbitrageReport& r) {
  return {{"verdict", to_string(r.verdict)},
          {"min_gain", num(r.min_gain)},
          {"max_gain", num(r.max_gain)},
          {"mean_gain", num(r.mean_gain)},
          {"frac_positive", num(r.frac_positive)},
          {"frac_negative", num(r.frac_negative)},
          {"n_positive", r.n_positive},
          {"n_negative", r.n_negative},
          {"n_paths", r.n_paths},
          {"tol_zero", num(r.tolerances.tol_zero)},
          {"min_hits", r.tolerances.min_hits}};
}

void emit_gains(Outputs& out, const std::string& task, const std::string& label, const std::vector<double>& gains) {
  for (std::size_t i = 0; i < gains.size(); ++i) {
    out.row("gains.csv", "task,label,path,gain", csv(task, label, i, gains[i]));
  }
}

std::vector<double> default_defect_times(const TimeGrid& grid) {
  const std::size_t n = grid.size();
  const std::size_t m = std::min<std::size_t>(33, n);
  std::vector<double> times;
  for (std::size_t j = 0; j < m; ++j) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(n - 1) /
                                                         static_cast<double>(m - 1)));
    times.push_back(grid[k]);
  }
  return times;
}

json resolved_config(const Scenario& sc, const PathEnsemble& ens) {
  json c;
  c["name"] = sc.name;
  c["master_seed"] = *sc.seed;
  if (sc.process) {
    c["source"] = {{"kind", "process"},
                   {"model", model_name(*sc.process)},
                   {"description", describe(*sc.process)},
                   {"n_paths", sc.n_paths},
                   {"substeps", sc.simulation.substeps},
                   {"scenario_id", sc.simulation.scenario_id}};
  } else {
    c["source"] = {{"kind", "lattice"}, {"tree", sc.lattice->describe()}};
  }
  c["grid"] = {{"points", ens.grid().size()}, {"horizon", ens.grid().horizon()}};
  if (sc.grid && sc.grid->points.empty()) c["grid"]["steps"] = sc.grid->steps;
  json rules = json::array();
  for (const auto& [k, v] : sc.rule_text) rules.push_back({{"name", k}, {"rule", v}});
  json events = json::array();
  for (const auto& [k, v] : sc.event_text) events.push_back({{"name", k}, {"event", v}});
  c["rules"] = rules;
  c["events"] = events;
  json tasks = json::array();
  for (const auto& t : sc.tasks) {
    json params = json::array();
    for (const auto& [k, v] : t.resolved) params.push_back({k, v});
    tasks.push_back({{"type", to_string(t.type)}, {"line", t.line}, {"params", params}});
  }
  c["tasks"] = tasks;
  c["config_text"] = sc.source;
  return c;
}

bool flagged(const std::string& verdict) { return verdict == "ARBITRAGE" || verdict == "VIOLATION_SUSPECTED"; }

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& options) {
  validate_scenario(sc);

  std::optional<Lattice> lattice;
  PathEnsemble ens = [&] {
    if (sc.lattice) {
      lattice = build_lattice(*sc.lattice);
      return lattice->to_ensemble();
    }
    return simulate_ensemble(*sc.process, sc.grid->build(), sc.n_paths, *sc.seed, sc.simulation);
  }();

  Outputs out;
  json tasks = json::array();
  bool any_flag = false;

  for (std::size_t ti = 0; ti < sc.tasks.size(); ++ti) {
    const TaskSpec& t = sc.tasks[ti];
    const std::string label = std::to_string(ti + 1) + "-" + to_string(t.type);
    json r{{"task", label}, {"type", to_string(t.type)}};
    bool flag = false;

    switch (t.type) {
      case TaskType::defect: {
        const auto times = t.times.empty() ? default_defect_times(ens.grid()) : t.times;
        const DefectTable table = martingale_defect(ens, times, t.defect_options);
        json rows = json::array();
        PlotSeries s{"defect", {}, {}, {}};
        for (const auto& row : table.rows) {
          out.row("defect.csv", "task,t,sample_mean,std_error,defect,z_score",
                  csv(label, row.t, row.sample_mean, row.std_error, row.defect, row.z_score));
          rows.push_back({{"t", row.t},
                          {"sample_mean", num(row.sample_mean)},
                          {"std_error", num(row.std_error)},
                          {"defect", num(row.defect)},
                          {"z_score", num(row.z_score)}});
          s.x.push_back(row.t);
          s.y.push_back(row.defect);
          s.err.push_back(3.0 * row.std_error);
        }
        json notes = json::array();
        if (sc.process) {
          if (const auto* cev = std::get_if<Cev>(&*sc.process); cev && cev->a != 0.0) {
            notes.push_back("a != 0: the simulation measure is not a local-martingale measure, so the defect "
                            "mixes drift with strictness; the classification is not a strictness claim");
          }
        }
        r["classification"] = to_string(table.classification);
        r["z_threshold"] = table.options.z_threshold;
        r["consistent_threshold"] = table.options.consistent_threshold;
        r["rows"] = rows;
        r["notes"] = notes;
        out.svg("defect_" + std::to_string(ti + 1) + ".svg",
                svg_line_plot("martingale defect (" + label + ")", "t", "x0 - mean(X_t), bars 3 se", {s}));
        if (!t.pairs.empty()) {
          json pairs = json::array();
          for (const auto& p : stopped_pair_check(ens, t.pairs)) {
            out.row("stopped_pairs.csv", "task,tau0,tau1,mean0,mean1,difference,std_error,z_score",
                    csv(label, p.tau0, p.tau1, p.mean0, p.mean1, p.difference, p.std_error, p.z_score));
            pairs.push_back({{"tau0", p.tau0},
                             {"tau1", p.tau1},
                             {"mean0", num(p.mean0)},
                             {"mean1", num(p.mean1)},
                             {"difference", num(p.difference)},
                             {"std_error", num(p.std_error)},
                             {"z_score", num(p.z_score)}});
          }
          r["stopped_pairs"] = pairs;
        }
        break;
      }
      case TaskType::star_scan: {
        const StarScan scan = star_scan(ens, t.probes, t.star_options);
        json probes = json::array();
        std::vector<PlotSeries> series;
        for (std::size_t pi = 0; pi < scan.reports.size(); ++pi) {
          const auto& rep = scan.reports[pi];
          json entries = json::array();
          PlotSeries s{"probe " + std::to_string(pi + 1), {}, {}, {}};
          for (const auto& e : rep.entries) {
            out.row("star_probes.csv",
                    "task,probe_index,probe,epsilon,p_hat,p_event,n_event,n_joint,ci_low,ci_high,verdict",
                    csv(label, pi + 1, rep.probe, e.epsilon, e.p_hat, e.p_event, e.n_event, e.n_joint, e.ci_low,
                        e.ci_high, to_string(e.verdict)));
            entries.push_back({{"epsilon", e.epsilon},
                               {"p_hat", num(e.p_hat)},
                               {"p_event", num(e.p_event)},
                               {"n_event", e.n_event},
                               {"n_joint", e.n_joint},
                               {"ci_low", num(e.ci_low)},
                               {"ci_high", num(e.ci_high)},
                               {"verdict", to_string(e.verdict)}});
            s.x.push_back(e.epsilon);
            s.y.push_back(e.p_hat);
          }
          probes.push_back({{"probe", rep.probe}, {"n_paths", rep.n_paths}, {"entries", entries}});
          series.push_back(std::move(s));
        }
        r["verdict"] = to_string(scan.overall);
        r["min_count"] = t.star_options.min_count;
        r["probes"] = probes;
        r["caveat"] = "a CONSISTENT scan covers only the listed probes, not every stopping time";
        flag = flagged(to_string(scan.overall));
        out.svg("star_" + std::to_string(ti + 1) + ".svg",
                svg_line_plot("stay-above probability (" + label + ")", "epsilon", "p_hat", series));
        break;
      }
      case TaskType::arb_search: {
        const Tolerances tol = Tolerances::for_ensemble(ens);
        std::vector<double> hist;
        if (!t.candidates.empty()) {
          const SearchResult res = search_single_leg(ens, t.candidates, t.shortsale_restricted, tol);
          json cands = json::array();
          for (const auto& c : res.candidates) {
            const auto& rep = c.report;
            out.row("arb_candidates.csv",
                    "task,candidate_index,sign,candidate,min_gain,max_gain,mean_gain,frac_positive,frac_negative,"
                    "verdict",
                    csv(label, c.index + 1, c.sign, t.candidates[c.index].describe(), rep.min_gain, rep.max_gain,
                        rep.mean_gain, rep.frac_positive, rep.frac_negative, to_string(rep.verdict)));
            json cj = report_json(rep);
            cj["index"] = c.index + 1;
            cj["sign"] = c.sign;
            cands.push_back(cj);
          }
          const auto gains = strategy_gain(res.best, ens);
          emit_gains(out, label, "best: " + res.best.describe(), gains);
          hist = gains;
          r["search"] = {{"verdict", to_string(res.verdict)},
                         {"shortsale_restricted", t.shortsale_restricted},
                         {"best_index", res.best_index + 1},
                         {"best_sign", res.best_sign},
                         {"best_strategy", res.best.describe()},
                         {"best_report", report_json(res.report)},
                         {"candidates", cands}};
          flag = flag || res.verdict == ArbitrageVerdict::arbitrage;
        }
        json strategies = json::array();
        for (std::size_t si = 0; si < t.strategies.size(); ++si) {
          SimpleStrategy s = t.strategies[si];
          s.shortsale_restricted = t.shortsale_restricted;
          const auto gains = strategy_gain(s, ens);
          const auto rep = arbitrage_verdict(s, ens, tol);
          emit_gains(out, label, "strategy " + std::to_string(si + 1), gains);
          if (hist.empty()) hist = gains;
          json sj = report_json(rep);
          sj["strategy"] = s.describe();
          strategies.push_back(sj);
          flag = flag || rep.verdict == ArbitrageVerdict::arbitrage;
        }
        r["strategies"] = strategies;
        r["verdict"] = flag ? "ARBITRAGE" : "NO_ARBITRAGE_FOUND";
        r["caveat"] = "NO_ARBITRAGE_FOUND covers only the listed candidates, not every simple strategy";
        out.svg("gains_" + std::to_string(ti + 1) + ".svg",
                svg_histogram("gains (" + label + ")", "gain", hist));
        break;
      }
      case TaskType::extract: {
        const ExtractionResult res = extract_from_violation(ens, *t.witness);
        emit_gains(out, label, "extracted", res.gains);
        r["witness"] = t.witness->as_probe().describe();
        r["strategy"] = res.strategy.describe();
        r["report"] = report_json(res.report);
        r["grid_slack"] = num(res.grid_slack);
        r["verdict"] = to_string(res.report.verdict);
        flag = res.report.verdict == ArbitrageVerdict::arbitrage;
        out.svg("gains_" + std::to_string(ti + 1) + ".svg",
                svg_histogram("extracted strategy gains (" + label + ")", "gain", res.gains));
        break;
      }
      case TaskType::reduce: {
        std::vector<SimpleStrategy> inputs = t.strategies;
        for (auto& s : inputs) s.shortsale_restricted = true;
        if (inputs.empty()) {
          const auto na = enumerate_no_arbitrage(*lattice, true);
          if (na.certificate) inputs.push_back(na.certificate->strategy);
        }
        json results = json::array();
        for (std::size_t si = 0; si < inputs.size(); ++si) {
          const ReductionResult red = reduce_to_single_leg(ens, inputs[si]);
          emit_gains(out, label, "reduced " + std::to_string(si + 1), red.gains);
          json rj = report_json(red.report);
          rj["input"] = inputs[si].describe();
          rj["output"] = red.strategy.describe();
          rj["k"] = red.k;
          rj["case"] = red.which == ReductionCase::positive_weight        ? "positive_weight"
                       : red.which == ReductionCase::negative_partial_sum ? "negative_partial_sum"
                                                                          : "unchanged";
          results.push_back(rj);
          flag = flag || red.report.verdict == ArbitrageVerdict::arbitrage;
        }
        r["reductions"] = results;
        r["verdict"] = flag ? "ARBITRAGE" : "NO_INPUT";
        break;
      }
      case TaskType::oracle: {
        const auto alphabet = t.alphabet.empty() ? default_alphabet(t.shortsale_restricted) : t.alphabet;
        const NoArbitrageResult na = enumerate_no_arbitrage(*lattice, t.shortsale_restricted, alphabet, t.budget);
        r["shortsale_restricted"] = t.shortsale_restricted;
        r["enumeration"] = {{"no_arbitrage", na.no_arbitrage},
                            {"strategies_examined", na.strategies_examined},
                            {"exhaustiveness", na.exhaustiveness}};
        if (na.certificate) {
          r["enumeration"]["certificate"] = na.certificate->strategy.describe();
          emit_gains(out, label, "certificate", na.certificate->gains);
        }
        if (t.shortsale_restricted) {
          const PairwiseResult pw = pairwise_characterization(*lattice, t.budget);
          r["pairwise"] = {{"no_arbitrage", pw.no_arbitrage}, {"pairs_examined", pw.pairs_examined}};
          if (pw.witness) r["pairwise"]["atom_node"] = pw.witness->atom;
          r["equivalent"] = pw.no_arbitrage == na.no_arbitrage;
        }
        r["verdict"] = na.no_arbitrage ? "NO_ARBITRAGE" : "ARBITRAGE";
        flag = !na.no_arbitrage;
        break;
      }
      case TaskType::invariance: {
        json ij;
        if (t.mode == "oracle") {
          const Lattice mapped = lattice->mapped(*t.map);
          const bool pw0 = pairwise_characterization(*lattice).no_arbitrage;
          const bool pw1 = pairwise_characterization(mapped).no_arbitrage;
          const bool en0 = enumerate_no_arbitrage(*lattice, true).no_arbitrage;
          const bool en1 = enumerate_no_arbitrage(mapped, true).no_arbitrage;
          ij = {{"mode", "oracle"},
                {"map", t.map->describe()},
                {"pairwise", {pw0, pw1}},
                {"enumeration", {en0, en1}},
                {"pass", pw0 == pw1 && en0 == en1}};
          flag = !pw0 || !pw1 || !en0 || !en1;
        } else {
          const InvarianceReport rep = t.mode == "star" ? star_invariance(*t.map, ens, t.probes, t.star_options)
                                                        : s0_invariance(*t.map, ens, t.candidates);
          ij = {{"mode", rep.mode}, {"map", rep.map}, {"before", rep.before}, {"after", rep.after}, {"pass", rep.pass}};
          json ph = json::array();
          for (const auto& [a, b] : rep.p_hats) ph.push_back({num(a), num(b)});
          if (!rep.p_hats.empty()) ij["p_hat_pairs"] = ph;
          flag = flagged(rep.before) || flagged(rep.after);
        }
        r["invariance"] = ij;
        r["verdict"] = ij["pass"].get<bool>() ? "INVARIANT" : "NOT_INVARIANT";
        break;
      }
    }
    r["flagged"] = flag;
    any_flag = any_flag || flag;
    tasks.push_back(r);
  }

  RunResult result;
  result.exit_code = any_flag ? 2 : 0;
  json modules;
  for (const char* m : {"process_lab", "stopping", "strategy_engine", "star_tester", "constructive", "transforms",
                        "diagnostics", "discrete_oracle", "cli_reporting"}) {
    modules[m] = library_version();
  }
  result.report = {{"schema_version", kReportSchemaVersion},
                   {"tool", {{"name", "localmart"}, {"version", library_version()}}},
                   {"module_versions", modules},
                   {"scenario", resolved_config(sc, ens)},
                   {"ensemble", {{"kind", ens.is_exact() ? "exact" : "monte_carlo"}, {"metadata", ens.metadata()}}},
                   {"tasks", tasks},
                   {"exit_code", result.exit_code}};

  result.out_dir = !options.out_dir.empty() ? options.out_dir
                   : !sc.out_dir.empty()    ? sc.out_dir
                                            : "out/" + sc.name;
  if (options.write_files) {
    const std::filesystem::path dir(result.out_dir);
    std::filesystem::create_directories(dir);
    result.files = out.write(dir);
    result.files.insert(result.files.begin(), "report.json");
    result.report["files"] = result.files;
    std::ofstream rj(dir / "report.json");
    rj << result.report.dump(2) << "\n";
    if (!rj) throw std::runtime_error("failed to write report.json");
  }
  return result;
}

}  // namespace localmart
