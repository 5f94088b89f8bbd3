#include "localmart/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"

namespace localmart {

// ---------------------------------------------------------------------------
// expressions

namespace {

class ExprParser {
 public:
  ExprParser(const std::string& text, const Symbols& symbols) : s_(text), sym_(symbols) {}

  void finish() {
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input '" + s_.substr(pos_) + "'");
  }

  StoppingRule rule() {
    const std::string id = ident();
    if (id == "deterministic") {
      expect('(');
      const double t = number();
      expect(')');
      return StoppingRule::deterministic(t);
    }
    if (id == "hit_above" || id == "hit_below") {
      expect('(');
      const double level = number();
      std::optional<StoppingRule> start;
      bool strict = false;
      while (eat(',')) {
        if (peek_ident() == "strict") {
          ident();
          strict = true;
        } else {
          start = rule();
        }
      }
      expect(')');
      const double cap = cap_clause();
      const bool above = id == "hit_above";
      if (!start) {
        if (strict) start = StoppingRule::deterministic(0.0);
        else return above ? StoppingRule::hit_above(level, cap) : StoppingRule::hit_below(level, cap);
      }
      return above ? StoppingRule::hit_above(level, cap, *start, strict)
                   : StoppingRule::hit_below(level, cap, *start, strict);
    }
    if (id == "first_drop") {
      expect('(');
      const StoppingRule base = rule();
      expect(',');
      const double eps = number();
      expect(')');
      return StoppingRule::first_drop(base, eps, cap_clause());
    }
    if (id == "restricted") {
      expect('(');
      const StoppingRule base = rule();
      expect(',');
      const EventPredicate e = event();
      expect(',');
      const double fallback = number();
      expect(')');
      return StoppingRule::restricted(base, e, fallback);
    }
    if (id == "earliest") {
      expect('(');
      const StoppingRule a = rule();
      expect(',');
      const StoppingRule b = rule();
      expect(')');
      return StoppingRule::earliest(a, b);
    }
    auto it = sym_.rules.find(id);
    if (it == sym_.rules.end()) fail("unknown stopping rule '" + id + "'");
    return it->second;
  }

  EventPredicate event() {
    const std::string id = ident();
    if (id == "whole_space") return EventPredicate::whole_space();
    if (id == "nowhere") return EventPredicate::nowhere();
    if (id == "value_below_at" || id == "value_above_at" || id == "value_equals_at") {
      expect('(');
      const StoppingRule r = rule();
      expect(',');
      const double level = number();
      expect(')');
      if (id == "value_below_at") return EventPredicate::value_below_at(r, level);
      if (id == "value_above_at") return EventPredicate::value_above_at(r, level);
      return EventPredicate::value_equals_at(r, level);
    }
    if (id == "strictly_later") {
      expect('(');
      const StoppingRule a = rule();
      expect(',');
      const StoppingRule b = rule();
      expect(')');
      return EventPredicate::strictly_later(a, b);
    }
    if (id == "all_of" || id == "any_of") {
      expect('(');
      std::vector<EventPredicate> parts{event()};
      while (eat(',')) parts.push_back(event());
      expect(')');
      return id == "all_of" ? EventPredicate::all_of(std::move(parts)) : EventPredicate::any_of(std::move(parts));
    }
    if (id == "not") {
      expect('(');
      const EventPredicate e = event();
      expect(')');
      return EventPredicate::negation(e);
    }
    auto it = sym_.events.find(id);
    if (it == sym_.events.end()) fail("unknown event '" + id + "'");
    return it->second;
  }

  WeightRule weight() {
    const std::string id = ident();
    expect('(');
    if (id == "constant") {
      const double c = number();
      expect(')');
      return WeightRule::constant(c);
    }
    if (id == "indicator") {
      const EventPredicate e = event();
      expect(',');
      const double c = number();
      expect(')');
      return WeightRule::indicator(e, c);
    }
    if (id == "positive_indicator") {
      const WeightRule inner = weight();
      expect(',');
      const double c = number();
      expect(')');
      return WeightRule::positive_indicator(inner, c);
    }
    if (id == "sum") {
      std::vector<WeightRule> parts{weight()};
      while (eat(',')) parts.push_back(weight());
      expect(')');
      return WeightRule::sum(std::move(parts));
    }
    if (id == "partial_sum_negative") {
      expect('[');
      SimpleStrategy prefix = strategy();
      expect(']');
      expect(',');
      const double c = number();
      expect(')');
      return WeightRule::partial_sum_negative(std::move(prefix.legs), c);
    }
    fail("unknown weight '" + id + "'");
  }

  SimpleStrategy strategy() {
    SimpleStrategy s;
    if (peek_ident() == "empty") {
      ident();
      return s;
    }
    do {
      const std::string id = ident();
      if (id != "leg") fail("expected 'leg', got '" + id + "'");
      expect('(');
      const StoppingRule entry = rule();
      expect(',');
      const StoppingRule exit = rule();
      expect(',');
      const WeightRule w = weight();
      expect(')');
      s.legs.push_back(Leg{entry, exit, w});
    } while (eat(';'));
    return s;
  }

  MonotoneMap map() {
    const std::string id = ident();
    if (id == "exp") return MonotoneMap(maps::Exp{});
    if (id == "log") return MonotoneMap(maps::Log{});
    expect('(');
    if (id == "affine") {
      const double a = number();
      expect(',');
      const double b = number();
      expect(')');
      return MonotoneMap(maps::Affine{a, b});
    }
    if (id == "power" || id == "neg_power") {
      const double p = number();
      expect(')');
      return id == "power" ? MonotoneMap(maps::Power{p}) : MonotoneMap(maps::NegPower{p});
    }
    if (id == "piecewise_linear" || id == "piecewise_linear_nondecreasing") {
      maps::PiecewiseLinear m;
      m.strict = id == "piecewise_linear";
      do {
        const double x = number();
        expect(':');
        const double y = number();
        m.knots.emplace_back(x, y);
      } while (eat(','));
      expect(')');
      return MonotoneMap(std::move(m));
    }
    fail("unknown map '" + id + "'");
  }

  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(what + " (at column " + std::to_string(pos_ + 1) + " of '" + s_ + "')");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  std::string peek_ident() {
    skip();
    std::size_t e = pos_;
    if (e < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[e])) || s_[e] == '_')) {
      while (e < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[e])) || s_[e] == '_')) ++e;
    }
    return s_.substr(pos_, e - pos_);
  }
  std::string ident() {
    std::string id = peek_ident();
    if (id.empty()) fail("expected a name");
    pos_ += id.size();
    return id;
  }
  double cap_clause() {
    if (peek_ident() != "cap") fail("expected 'cap'");
    ident();
    return number();
  }

  const std::string& s_;
  const Symbols& sym_;
  std::size_t pos_ = 0;
};

template <class F>
auto parse_whole(const std::string& text, const Symbols& symbols, F f) {
  ExprParser p(text, symbols);
  auto out = f(p);
  p.finish();
  return out;
}

}  // namespace

StoppingRule parse_rule(const std::string& text, const Symbols& symbols) {
  return parse_whole(text, symbols, [](ExprParser& p) { return p.rule(); });
}
EventPredicate parse_event(const std::string& text, const Symbols& symbols) {
  return parse_whole(text, symbols, [](ExprParser& p) { return p.event(); });
}
WeightRule parse_weight(const std::string& text, const Symbols& symbols) {
  return parse_whole(text, symbols, [](ExprParser& p) { return p.weight(); });
}
SimpleStrategy parse_strategy(const std::string& text, const Symbols& symbols) {
  return parse_whole(text, symbols, [](ExprParser& p) { return p.strategy(); });
}
MonotoneMap parse_map(const std::string& text) {
  const Symbols none;
  return parse_whole(text, none, [](ExprParser& p) { return p.map(); });
}

// ---------------------------------------------------------------------------
// tasks

std::string to_string(TaskType t) {
  switch (t) {
    case TaskType::defect:
      return "defect";
    case TaskType::star_scan:
      return "star-scan";
    case TaskType::arb_search:
      return "arb-search";
    case TaskType::extract:
      return "extract";
    case TaskType::reduce:
      return "reduce";
    case TaskType::oracle:
      return "oracle";
    case TaskType::invariance:
      return "invariance";
  }
  return "defect";
}

std::optional<TaskType> task_type_from_string(const std::string& name) {
  for (TaskType t : {TaskType::defect, TaskType::star_scan, TaskType::arb_search, TaskType::extract, TaskType::reduce,
                     TaskType::oracle, TaskType::invariance}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

TimeGrid GridSpec::build() const {
  if (!points.empty()) return TimeGrid(points);
  return TimeGrid::uniform(horizon, steps);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double to_double(const std::string& s) {
  const Symbols none;
  ExprParser p(s, none);
  const double v = p.number();
  p.finish();
  return v;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

std::size_t to_count(const std::string& s) {
  const double v = to_double(s);
  if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError("expected a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ValidationError("expected true or false, got '" + s + "'");
}

const std::set<std::string>& allowed_keys(TaskType t) {
  static const std::map<TaskType, std::set<std::string>> keys{
      {TaskType::defect, {"times", "z_threshold", "consistent_threshold", "pair"}},
      {TaskType::star_scan, {"probe", "min_count"}},
      {TaskType::arb_search, {"candidate", "strategy", "shortsale"}},
      {TaskType::extract, {"witness"}},
      {TaskType::reduce, {"strategy"}},
      {TaskType::oracle, {"shortsale", "alphabet", "budget"}},
      {TaskType::invariance, {"map", "mode", "probe", "candidate", "min_count"}},
  };
  return keys.at(t);
}

bool repeatable(const std::string& key) {
  return key == "probe" || key == "candidate" || key == "pair" || key == "strategy";
}

StarProbe parse_probe(const std::string& v, const Symbols& sym) {
  const auto parts = split(v, '|');
  if (parts.size() != 4) throw ValidationError("probe needs 'tau | event | T | eps, ...'");
  return StarProbe{parse_rule(parts[0], sym), parse_event(parts[1], sym), to_double(parts[2]), to_doubles(parts[3])};
}

void apply_task_key(TaskSpec& task, const std::string& key, const std::string& value, const Symbols& sym) {
  std::string canonical = value;
  if (key == "times") {
    task.times = to_doubles(value);
  } else if (key == "z_threshold") {
    task.defect_options.z_threshold = to_double(value);
  } else if (key == "consistent_threshold") {
    task.defect_options.consistent_threshold = to_double(value);
  } else if (key == "pair") {
    const auto parts = split(value, '|');
    if (parts.size() != 2) throw ValidationError("pair needs 'tau0 | tau1'");
    task.pairs.push_back(StoppedPair{parse_rule(parts[0], sym), parse_rule(parts[1], sym)});
    canonical = task.pairs.back().tau0.describe() + " | " + task.pairs.back().tau1.describe();
  } else if (key == "probe") {
    task.probes.push_back(parse_probe(value, sym));
    const auto& p = task.probes.back();
    std::string eps;
    for (std::size_t i = 0; i < p.epsilons.size(); ++i) eps += (i ? ", " : "") + fmt_num(p.epsilons[i]);
    canonical = p.tau.describe() + " | " + p.event.describe() + " | " + fmt_num(p.horizon) + " | " + eps;
  } else if (key == "min_count") {
    task.star_options.min_count = to_count(value);
  } else if (key == "candidate") {
    const auto parts = split(value, '|');
    if (parts.size() != 3) throw ValidationError("candidate needs 'entry | exit | event'");
    task.candidates.push_back(
        LegCandidate{parse_rule(parts[0], sym), parse_rule(parts[1], sym), parse_event(parts[2], sym)});
    const auto& c = task.candidates.back();
    canonical = c.entry.describe() + " | " + c.exit.describe() + " | " + c.event.describe();
  } else if (key == "strategy") {
    task.strategies.push_back(parse_strategy(value, sym));
    canonical = task.strategies.back().describe();
  } else if (key == "shortsale") {
    task.shortsale_restricted = to_bool(value);
  } else if (key == "witness") {
    const StarProbe p = parse_probe(value, sym);
    if (p.epsilons.size() != 1) throw ValidationError("witness takes a single epsilon");
    task.witness = ViolationWitness{p.tau, p.event, p.horizon, p.epsilons.front()};
    canonical = p.describe();
  } else if (key == "alphabet") {
    task.alphabet = to_doubles(value);
  } else if (key == "budget") {
    task.budget = to_double(value);
  } else if (key == "map") {
    task.map = parse_map(value);
    canonical = task.map->describe();
  } else if (key == "mode") {
    if (value != "star" && value != "s0" && value != "oracle") {
      throw ValidationError("mode must be star, s0 or oracle");
    }
    task.mode = value;
  }
  task.resolved.emplace_back(key, canonical);
}

ProcessSpec make_process(const std::map<std::string, std::string>& kv, std::size_t line,
                         const std::map<std::string, std::size_t>& key_lines) {
  auto it = kv.find("model");
  if (it == kv.end()) throw ParseError(line, "[process] needs a model");
  const std::string& model = it->second;
  std::set<std::string> allowed{"model", "substeps", "scenario_id"};
  auto num = [&](const char* key, double fallback) {
    allowed.insert(key);
    auto f = kv.find(key);
    return f == kv.end() ? fallback : to_double(f->second);
  };
  ProcessSpec spec;
  if (model == "brownian") {
    spec = BrownianMotion{num("x0", 0.0), num("sigma", 1.0)};
  } else if (model == "gbm") {
    spec = DriftlessGbm{num("x0", 1.0), num("sigma", 1.0)};
  } else if (model == "cev") {
    spec = Cev{num("x0", 1.0), num("a", 0.0), num("b", 1.0), num("rho", 1.0)};
  } else if (model == "bessel") {
    spec = Bessel{num("x0", 1.0), num("delta", 3.0)};
  } else if (model == "inverse_bessel3") {
    spec = InverseBessel3{num("x0", 1.0)};
  } else if (model == "ds_example") {
    spec = DsExample{num("x0", 1.0), num("cutoff", 0.0)};
  } else if (model == "abs_bm_transform") {
    const double n = num("n", 1.0);
    if (n != std::floor(n)) throw ParseError(line, "abs_bm_transform n must be an integer");
    spec = AbsBmTransform{static_cast<int>(n)};
  } else {
    throw ParseError(line, "unknown model '" + model + "' (see list-models)");
  }
  for (const auto& [k, v] : kv) {
    if (!allowed.count(k)) throw ParseError(key_lines.at(k), "unknown key '" + k + "' for model " + model);
  }
  validate(spec);
  return spec;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  sc.source = text;

  enum class Section { top, process, lattice, grid, rules, events, task };
  Section section = Section::top;
  std::size_t section_line = 0;
  std::map<std::string, std::string> process_kv;
  std::map<std::string, std::size_t> process_lines;
  std::set<std::string> seen_sections;
  std::set<std::string> task_keys_seen;

  std::istringstream is(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
        const std::string header = trim(line.substr(1, line.size() - 2));
        section_line = line_no;
        if (header.rfind("task", 0) == 0 && (header.size() == 4 || std::isspace(static_cast<unsigned char>(header[4])))) {
          const std::string type = trim(header.substr(4));
          const auto t = task_type_from_string(type);
          if (!t) throw ParseError(line_no, "unknown task '" + type + "'");
          sc.tasks.push_back(TaskSpec{});
          sc.tasks.back().type = *t;
          sc.tasks.back().line = line_no;
          task_keys_seen.clear();
          section = Section::task;
          continue;
        }
        static const std::map<std::string, Section> names{{"process", Section::process}, {"lattice", Section::lattice},
                                                          {"grid", Section::grid},       {"rules", Section::rules},
                                                          {"events", Section::events}};
        auto it = names.find(header);
        if (it == names.end()) throw ParseError(line_no, "unknown section [" + header + "]");
        if (!seen_sections.insert(header).second && header != "rules" && header != "events") {
          throw ParseError(line_no, "duplicate section [" + header + "]");
        }
        section = it->second;
        if (section == Section::grid && !sc.grid) sc.grid = GridSpec{};
        continue;
      }

      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError(line_no, "empty key");

      switch (section) {
        case Section::top:
          if (key == "name") sc.name = value;
          else if (key == "seed") sc.seed = std::stoull(value);
          else if (key == "paths") sc.n_paths = to_count(value);
          else if (key == "out") sc.out_dir = value;
          else throw ParseError(line_no, "unknown top-level key '" + key + "'");
          break;
        case Section::process:
          if (!process_kv.emplace(key, value).second) throw ParseError(line_no, "duplicate key '" + key + "'");
          process_lines[key] = line_no;
          if (key == "substeps") sc.simulation.substeps = to_count(value);
          if (key == "scenario_id") sc.simulation.scenario_id = std::stoull(value);
          break;
        case Section::lattice:
          if (key != "tree") throw ParseError(line_no, "[lattice] takes a single 'tree' key");
          sc.lattice = parse_lattice_spec(value);
          break;
        case Section::grid:
          if (key == "horizon") sc.grid->horizon = to_double(value);
          else if (key == "steps") sc.grid->steps = to_count(value);
          else if (key == "points") sc.grid->points = to_doubles(value);
          else throw ParseError(line_no, "unknown grid key '" + key + "'");
          break;
        case Section::rules:
          if (sc.symbols.rules.count(key) || sc.symbols.events.count(key)) {
            throw ParseError(line_no, "name '" + key + "' already defined");
          }
          sc.symbols.rules.emplace(key, parse_rule(value, sc.symbols));
          sc.rule_text.emplace_back(key, sc.symbols.rules.at(key).describe());
          break;
        case Section::events:
          if (sc.symbols.rules.count(key) || sc.symbols.events.count(key)) {
            throw ParseError(line_no, "name '" + key + "' already defined");
          }
          sc.symbols.events.emplace(key, parse_event(value, sc.symbols));
          sc.event_text.emplace_back(key, sc.symbols.events.at(key).describe());
          break;
        case Section::task: {
          TaskSpec& task = sc.tasks.back();
          if (!allowed_keys(task.type).count(key)) {
            throw ParseError(line_no, "unknown key '" + key + "' for task " + to_string(task.type));
          }
          if (!repeatable(key) && !task_keys_seen.insert(key).second) {
            throw ParseError(line_no, "duplicate key '" + key + "'");
          }
          apply_task_key(task, key, value, sc.symbols);
          break;
        }
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }

  if (!process_kv.empty()) sc.process = make_process(process_kv, section_line, process_lines);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  Scenario sc = parse_scenario(os.str());
  if (sc.name.empty()) {
    auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    sc.name = base.substr(0, base.find('.'));
  }
  return sc;
}

void validate_scenario(const Scenario& sc) {
  if (sc.process.has_value() == sc.lattice.has_value()) {
    throw ValidationError("scenario needs exactly one source: a [process] or a [lattice] section");
  }
  if (!sc.seed) throw ValidationError("seed missing (set 'seed = ...' or pass --seed)");
  if (sc.process) {
    if (!sc.grid) throw ValidationError("a [process] source needs a [grid] section");
    if (sc.grid->points.empty() && sc.grid->steps == 0) throw ValidationError("[grid] needs steps or points");
    if (sc.n_paths == 0) throw ValidationError("paths must be positive");
  } else if (sc.grid) {
    throw ValidationError("a [lattice] source defines its own grid; remove [grid]");
  }
  if (sc.tasks.empty()) throw ValidationError("scenario declares no [task ...] sections");
  for (const auto& t : sc.tasks) {
    auto fail = [&](const std::string& what) { throw ParseError(t.line, to_string(t.type) + ": " + what); };
    switch (t.type) {
      case TaskType::defect:
        break;
      case TaskType::star_scan:
        if (t.probes.empty()) fail("needs at least one probe");
        break;
      case TaskType::arb_search:
        if (t.candidates.empty() && t.strategies.empty()) fail("needs a candidate or a strategy");
        break;
      case TaskType::extract:
        if (!t.witness) fail("needs a witness");
        break;
      case TaskType::reduce:
        if (!sc.lattice) fail("runs on lattice sources only");
        break;
      case TaskType::oracle:
        if (!sc.lattice) fail("runs on lattice sources only");
        break;
      case TaskType::invariance:
        if (!t.map) fail("needs a map");
        if (t.mode == "star" && t.probes.empty()) fail("star mode needs probes");
        if (t.mode == "s0" && t.candidates.empty()) fail("s0 mode needs candidates");
        if (t.mode == "oracle" && !sc.lattice) fail("oracle mode runs on lattice sources only");
        break;
    }
  }
}

}  // namespace localmart
