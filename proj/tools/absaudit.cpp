// absaudit: command-line front end for models, abstractions and the property tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "absaudit/audit.hpp"
#include "absaudit/error.hpp"
#include "absaudit/format.hpp"
#include "absaudit/random.hpp"
#include "absaudit/taxonomy.hpp"

#ifndef ABSAUDIT_DATA_DIR
#define ABSAUDIT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace absaudit;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kCapacity = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parse error tagged with the file it came from.
struct FileParseError : std::runtime_error {
  FileParseError(std::string file, const ParseError& e) : std::runtime_error(e.what()), file(std::move(file)), error(e) {}
  std::string file;
  ParseError error;
};

struct Options {
  bool machine = false;
  EnumerationLimits limits;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
auto parsing(const std::string& file, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw FileParseError(file, e);
  }
}

std::shared_ptr<const Scm> load_model(const std::string& path) {
  const std::string text = read_file(path);
  return std::make_shared<const Scm>(parsing(path, [&] { return parse_model(text); }));
}

struct LoadedAbstraction {
  Abstraction abstraction;
  std::string source_path;
  std::string target_path;
};

LoadedAbstraction load_abstraction(const std::string& path, const std::vector<std::string>& models) {
  const std::string text = read_file(path);
  LoadedAbstraction out;
  if (models.size() == 2) {
    out.source_path = models[0];
    out.target_path = models[1];
  } else {
    const auto refs = parsing(path, [&] { return read_abstraction_refs(text); });
    const fs::path dir = fs::path(path).parent_path();
    out.source_path = (dir / refs.source).string();
    out.target_path = (dir / refs.target).string();
  }
  auto source = load_model(out.source_path);
  auto target = load_model(out.target_path);
  out.abstraction = parsing(path, [&] { return parse_abstraction(text, source, target); });
  return out;
}

bool is_abstraction_file(const std::string& path) { return fs::path(path).extension() == ".abs"; }

json verdicts_json(const std::vector<std::pair<std::string_view, Verdict>>& vs) {
  json j = json::object();
  for (const auto& [name, v] : vs) j[std::string(name)] = std::string(to_string(v));
  return j;
}

void print_verdicts(std::ostream& os, const std::vector<std::pair<std::string_view, Verdict>>& vs) {
  std::size_t w = 0;
  for (const auto& [name, v] : vs) w = std::max(w, name.size());
  for (const auto& [name, v] : vs)
    os << "  " << name << std::string(w - name.size() + 2, ' ') << to_string(v) << "\n";
}

json distribution_json(const Distribution& d) {
  json j;
  j["scope"] = json::array();
  for (const auto& v : d.scope) j["scope"].push_back(v.name);
  j["rows"] = json::array();
  const auto shape = d.shape();
  for (std::size_t i = 0; i < d.table.size(); ++i) {
    if (d.table[i] == 0.0) continue;
    auto values = decode_index(i, shape);
    json labels = json::array();
    for (std::size_t k = 0; k < values.size(); ++k) labels.push_back(d.scope[k].domain.label(values[k]));
    j["rows"].push_back({{"values", labels}, {"p", d.table[i]}});
  }
  return j;
}

// ------------------------------------------------------------ commands

int cmd_validate(const Options& o, const std::string& file, const std::vector<std::string>& models) {
  json j{{"command", "validate"}, {"file", file}};
  std::vector<std::string> warnings;
  if (is_abstraction_file(file)) {
    auto loaded = load_abstraction(file, models);
    for (const auto& d : validate_abstraction(loaded.abstraction).defects) warnings.push_back(d.message);
  } else {
    auto scm = load_model(file);
    for (const auto& d : validate_scm(*scm).defects) warnings.push_back(d.message);
  }
  // Errors surface as parse errors; what remains are warnings.
  j["valid"] = true;
  j["warnings"] = warnings;
  if (o.machine) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << file << ": valid\n";
    for (const auto& w : warnings) std::cout << "  warning: " << w << "\n";
  }
  return kOk;
}

int cmd_graph(const Options& o, const std::string& file, const std::vector<std::string>& models, bool dot) {
  if (is_abstraction_file(file)) {
    auto loaded = load_abstraction(file, models);
    const auto& a = loaded.abstraction;
    if (dot) {
      std::cout << emit_dot(a);
      return kOk;
    }
    json j{{"command", "graph"}, {"file", file}};
    json arrows = json::array();
    const auto& nm = a.structural.node_map;
    for (std::size_t r = 0; r < nm.rows(); ++r)
      for (std::size_t c = 0; c < nm.cols(); ++c)
        if (nm(r, c) != 0.0)
          arrows.push_back({{"from", a.source->endogenous[r].name}, {"to", a.target->endogenous[c].name},
                            {"weight", nm(r, c)}});
    j["arrows"] = arrows;
    if (o.machine) {
      std::cout << j.dump(2) << "\n";
    } else {
      for (const auto& arr : arrows) {
        std::cout << arr["from"].get<std::string>() << " => " << arr["to"].get<std::string>();
        if (arr["weight"].get<double>() != 1.0) std::cout << " " << format_probability(arr["weight"].get<double>());
        std::cout << "\n";
      }
    }
    return kOk;
  }
  auto scm = load_model(file);
  if (dot) {
    std::cout << emit_dot(*scm);
    return kOk;
  }
  const Dag g = underlying_graph(*scm);
  json j{{"command", "graph"}, {"file", file}, {"nodes", g.nodes()}, {"edges", json::array()}};
  for (auto [u, v] : g.edges()) j["edges"].push_back({g.name(u), g.name(v)});
  if (o.machine) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "nodes:";
    for (const auto& n : g.nodes()) std::cout << ' ' << n;
    std::cout << "\n";
    for (auto [u, v] : g.edges()) std::cout << g.name(u) << " -> " << g.name(v) << "\n";
  }
  return kOk;
}

Intervention parse_do(const std::vector<std::string>& assignments) {
  Intervention iota;
  for (const auto& s : assignments) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw UsageError("--do expects VAR=VALUE, got '" + s + "'");
    if (!iota.assignments.emplace(s.substr(0, eq), s.substr(eq + 1)).second)
      throw UsageError("variable assigned twice in --do: '" + s.substr(0, eq) + "'");
  }
  return iota;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_dist(const Options& o, const std::string& file, const std::vector<std::string>& dos,
             const std::string& marginal_spec) {
  auto scm = load_model(file);
  const Scm post = intervene(*scm, parse_do(dos));
  Distribution d = joint_distribution(post, o.limits);
  if (!marginal_spec.empty()) d = marginal(d, split_commas(marginal_spec));
  if (o.machine) {
    json j{{"command", "dist"}, {"file", file}, {"interventions", dos}};
    j["distribution"] = distribution_json(d);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << emit_distribution(d);
  }
  return kOk;
}

bool lookup_verdict(const PropertyProfile& p, const std::string& key, Verdict& out) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return false;
  const std::string layer = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);
  std::vector<std::pair<std::string_view, Verdict>> vs;
  if (layer == "structural")
    vs = named(p.structural);
  else if (layer == "distributional")
    vs = named(p.distributional);
  else if (layer == "derived")
    vs = named(p.derived);
  for (const auto& [n, v] : vs)
    if (n == name) {
      out = v;
      return true;
    }
  return false;
}

int cmd_audit(const Options& o, const std::string& file, const std::vector<std::string>& models,
              const std::vector<std::string>& required) {
  auto loaded = load_abstraction(file, models);
  const auto& a = loaded.abstraction;
  const PropertyProfile p = audit(a, o.limits);

  std::vector<std::string> unmet;
  for (const auto& key : required) {
    Verdict v;
    if (!lookup_verdict(p, key, v)) throw UsageError("unknown property '" + key + "' (use LAYER.NAME)");
    if (v != Verdict::True) unmet.push_back(key);
  }

  if (o.machine) {
    json j{{"command", "audit"},
           {"file", file},
           {"source", a.source->name},
           {"target", a.target->name},
           {"direction", a.direction == Direction::MicroToMacro ? "micro-to-macro" : "macro-to-micro"}};
    j["structural"] = verdicts_json(named(p.structural));
    j["distributional"] = verdicts_json(named(p.distributional));
    json per = json::object();
    for (const auto& [name, v] : p.distributional_breakdown) per[name] = verdicts_json(named(v));
    j["distributional_per_variable"] = per;
    j["derived"] = verdicts_json(named(p.derived));
    j["notes"] = p.notes;
    j["unmet_requirements"] = unmet;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "abstraction " << file << "\n";
    std::cout << "  " << a.source->name << " -> " << a.target->name << ", "
              << (a.direction == Direction::MicroToMacro ? "micro-to-macro" : "macro-to-micro") << "\n";
    std::cout << "structural\n";
    print_verdicts(std::cout, named(p.structural));
    std::cout << "distributional\n";
    print_verdicts(std::cout, named(p.distributional));
    for (const auto& [name, v] : p.distributional_breakdown) {
      std::cout << "  [" << name << "]";
      for (const auto& [k, val] : named(v)) std::cout << ' ' << k << '=' << to_string(val);
      std::cout << "\n";
    }
    std::cout << "derived\n";
    print_verdicts(std::cout, named(p.derived));
    if (!p.notes.empty()) {
      std::cout << "notes\n";
      for (const auto& n : p.notes) std::cout << "  " << n << "\n";
    }
    for (const auto& k : unmet) std::cout << "requirement not met: " << k << "\n";
  }
  return unmet.empty() ? kOk : kFailure;
}

int cmd_classify(const Options& o, const std::string& file, const std::vector<std::string>& models) {
  auto loaded = load_abstraction(file, models);
  const auto types = detect_types(loaded.abstraction, o.limits);
  json s = json::array(), d = json::array();
  for (auto t : types.structural) s.push_back(std::string(to_string(t)));
  for (auto t : types.distributional) d.push_back(std::string(to_string(t)));
  if (o.machine) {
    std::cout << json{{"command", "classify"}, {"file", file}, {"structural", s}, {"distributional", d}}.dump(2)
              << "\n";
  } else {
    auto line = [](const json& arr) {
      std::string out;
      for (const auto& x : arr) out += (out.empty() ? "" : ", ") + x.get<std::string>();
      return out.empty() ? std::string("(none)") : out;
    };
    std::cout << "structural:     " << line(s) << "\n";
    std::cout << "distributional: " << line(d) << "\n";
  }
  return kOk;
}

int cmd_tables(const Options& o, const std::string& layer, const std::string& truth_dir) {
  std::vector<Layer> layers;
  if (layer == "structural" || layer == "both") layers.push_back(Layer::Structural);
  if (layer == "distributional" || layer == "both") layers.push_back(Layer::Distributional);

  bool all_match = true;
  json report = json::array();
  for (auto l : layers) {
    const PropertyMatrix computed = l == Layer::Structural ? structural_matrix(o.limits) : distributional_matrix();
    const std::string path = (fs::path(truth_dir) / (std::string(to_string(l)) + ".tbl")).string();
    const std::string text = read_file(path);
    const PropertyMatrix truth = parsing(path, [&] { return parse_matrix(text); });
    const MatrixDiff diff = diff_matrices(computed, truth);
    all_match = all_match && diff.identical();
    if (o.machine) {
      json mism = json::array();
      for (const auto& m : diff.mismatches)
        mism.push_back({{"property", m.row},
                        {"type", m.col},
                        {"computed", std::string(symbol(m.computed))},
                        {"expected", std::string(symbol(m.expected))}});
      json cells = json::object();
      for (std::size_t r = 0; r < computed.rows.size(); ++r) {
        json row = json::object();
        for (std::size_t c = 0; c < computed.cols.size(); ++c)
          row[computed.cols[c]] = std::string(symbol(computed.cells[r][c]));
        cells[computed.rows[r]] = row;
      }
      report.push_back({{"layer", std::string(to_string(l))},
                        {"truth", path},
                        {"matching", diff.matching},
                        {"total", diff.total},
                        {"shape_errors", diff.shape_errors},
                        {"mismatches", mism},
                        {"computed", cells}});
    } else {
      std::cout << emit_matrix(computed);
      for (const auto& e : diff.shape_errors) std::cout << "# shape mismatch: " << e << "\n";
      for (const auto& m : diff.mismatches)
        std::cout << "# mismatch " << m.row << " / " << m.col << ": computed " << symbol(m.computed) << ", expected "
                  << symbol(m.expected) << "\n";
      std::cout << "# " << diff.matching << "/" << diff.total << " cells match\n";
    }
  }
  if (o.machine) std::cout << json{{"command", "tables"}, {"layers", report}, {"match", all_match}}.dump(2) << "\n";
  return all_match ? kOk : kFailure;
}

int cmd_push(const Options& o, const std::string& file, const std::vector<std::string>& models,
             const std::string& dist_spec, bool renormalize) {
  auto loaded = load_abstraction(file, models);
  const auto& a = loaded.abstraction;
  Distribution source_dist;
  if (dist_spec == "computed") {
    source_dist = joint_distribution(*a.source, o.limits);
  } else {
    const std::string text = read_file(dist_spec);
    source_dist = parsing(dist_spec, [&] { return parse_distribution(text, *a.source); });
  }
  const Distribution out = push_distribution(a, source_dist, {renormalize}, o.limits);
  if (o.machine) {
    json j{{"command", "push"}, {"file", file}, {"renormalized", renormalize}};
    j["distribution"] = distribution_json(out);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << emit_distribution(out);
  }
  return kOk;
}

// Randomized law checks over generated abstractions.
int cmd_selftest(const Options& o, unsigned seed, std::size_t count) {
  std::mt19937 rng(seed);
  std::size_t violations = 0, checked = 0;
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what, std::size_t i) {
    ++checked;
    if (!ok) {
      ++violations;
      if (failures.size() < 10) failures.push_back("case " + std::to_string(i) + ": " + what);
    }
  };
  auto applicable = [](Verdict v) { return v != Verdict::NotApplicable; };
  for (std::size_t i = 0; i < count; ++i) {
    const Abstraction a = random_abstraction(rng);
    const PropertyProfile p = audit(a, o.limits);
    const auto& s = p.structural;
    const auto& d = p.distributional;
    if (applicable(s.surjectivity) && applicable(s.injectivity))
      check(s.bijectivity == conjunction({s.surjectivity, s.injectivity}), "structural bijectivity law", i);
    if (applicable(s.fullness) && applicable(s.faithfulness))
      check(s.full_faithfulness == conjunction({s.fullness, s.faithfulness}), "full faithfulness law", i);
    if (applicable(d.surjectivity) && applicable(d.injectivity))
      check(d.bijectivity == conjunction({d.surjectivity, d.injectivity}), "distributional bijectivity law", i);
    if (s.functoriality == Verdict::True && relevant_set(a).size() == a.source->endogenous.size())
      check(s.functionality == Verdict::True, "functoriality on a total map implies functionality", i);
    check(audit(a, o.limits) == p, "audit is repeatable", i);
    const Scm reparsed = parse_model(emit_model(*a.source));
    check(reparsed == *a.source, "model round trip", i);
    const Abstraction again = parse_abstraction(emit_abstraction(a), a.source, a.target);
    check(again == a, "abstraction round trip", i);
  }
  if (o.machine) {
    std::cout << json{{"command", "selftest"},
                      {"seed", seed},
                      {"cases", count},
                      {"checks", checked},
                      {"violations", violations},
                      {"failures", failures}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "seed " << seed << ": " << count << " abstractions, " << checked << " checks, " << violations
              << " violations\n";
    for (const auto& f : failures) std::cout << "  " << f << "\n";
  }
  return violations == 0 ? kOk : kFailure;
}

void report_error(const std::string& kind, const std::string& message, json extra = json::object()) {
  json j{{"error", {{"kind", kind}, {"message", message}}}};
  for (auto& [k, v] : extra.items()) j["error"][k] = v;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit finite structural causal models and abstractions between them."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "absaudit 1.0");

  std::string format = "text";
  app.add_option("--format", format, "Output format: text or machine-readable (json)")
      ->check(CLI::IsMember({"text", "machine-readable", "json"}))
      ->capture_default_str();

  std::string file;
  std::vector<std::string> models;
  auto add_models = [&](CLI::App* sub) {
    sub->add_option("--models", models, "Source and target model files (default: paths named in the file)")
        ->expected(2);
  };

  auto* validate = app.add_subcommand("validate", "Check a model (.scm) or abstraction (.abs)");
  validate->add_option("file", file, "Model or abstraction file")->required();
  add_models(validate);

  bool dot = false;
  auto* graph = app.add_subcommand("graph", "Print the causal graph of a model or the node map of an abstraction");
  graph->add_option("file", file, "Model or abstraction file")->required();
  graph->add_flag("--dot", dot, "Emit Graphviz DOT");
  add_models(graph);

  std::vector<std::string> dos;
  std::string marginal_spec;
  auto* dist = app.add_subcommand("dist", "Joint or marginal distribution, optionally after interventions");
  dist->add_option("model", file, "Model file")->required();
  dist->add_option("--do", dos, "Intervention VAR=VALUE (repeatable)");
  dist->add_option("--marginal", marginal_spec, "Comma-separated variables to keep");

  std::vector<std::string> required;
  auto* audit_cmd = app.add_subcommand("audit", "Audit every structural and distributional property");
  audit_cmd->add_option("abstraction", file, "Abstraction file")->required();
  audit_cmd->add_option("--require", required, "Exit 1 unless LAYER.PROPERTY is true (repeatable)");
  add_models(audit_cmd);

  auto* classify = app.add_subcommand("classify", "Detect the abstraction types that apply");
  classify->add_option("abstraction", file, "Abstraction file")->required();
  add_models(classify);

  std::string layer = "both";
  std::string truth_dir = ABSAUDIT_DATA_DIR;
  auto* tables = app.add_subcommand("tables", "Compute the property tables and compare with the ground truth");
  tables->add_option("--layer", layer, "structural, distributional or both")
      ->check(CLI::IsMember({"structural", "distributional", "both"}))
      ->capture_default_str();
  tables->add_option("--truth-dir", truth_dir, "Directory holding structural.tbl and distributional.tbl")
      ->capture_default_str();

  std::string dist_spec = "computed";
  bool renormalize = false;
  auto* push = app.add_subcommand("push", "Push a source distribution through the outcome maps");
  push->add_option("abstraction", file, "Abstraction file")->required();
  push->add_option("--dist", dist_spec, "'computed' (from the source model) or a .dist file")->capture_default_str();
  push->add_flag("--renormalize", renormalize, "Rescale after pushing through a partial map");
  add_models(push);

  unsigned seed = 1;
  std::size_t count = 1000;
  auto* selftest = app.add_subcommand("selftest", "Check the property laws on random abstractions");
  selftest->add_option("--seed", seed, "Random seed")->capture_default_str();
  selftest->add_option("--count", count, "Number of random abstractions")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kUsage;
  }

  Options o;
  o.machine = format != "text";

  try {
    o.limits = limits_from_environment();
    if (app.got_subcommand(validate)) return cmd_validate(o, file, models);
    if (app.got_subcommand(graph)) return cmd_graph(o, file, models, dot);
    if (app.got_subcommand(dist)) return cmd_dist(o, file, dos, marginal_spec);
    if (app.got_subcommand(audit_cmd)) return cmd_audit(o, file, models, required);
    if (app.got_subcommand(classify)) return cmd_classify(o, file, models);
    if (app.got_subcommand(tables)) return cmd_tables(o, layer, truth_dir);
    if (app.got_subcommand(push)) return cmd_push(o, file, models, dist_spec, renormalize);
    if (app.got_subcommand(selftest)) return cmd_selftest(o, seed, count);
  } catch (const UsageError& e) {
    report_error("usage", e.what());
    return kUsage;
  } catch (const FileParseError& e) {
    report_error("parse", e.error.reason(),
                 {{"file", e.file}, {"line", e.error.line()}, {"column", e.error.column()}});
    return kFailure;
  } catch (const CapacityError& e) {
    report_error("capacity", e.what());
    return kCapacity;
  } catch (const InvalidArgument& e) {
    report_error("invalid", e.what());
    return kFailure;
  } catch (const Error& e) {
    report_error("error", e.what());
    return kFailure;
  }
  return kUsage;
}
