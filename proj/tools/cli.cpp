// Copyright 2026 The FSA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "fsa/analyzer.hpp"
#include "fsa/gse.hpp"
#include "fsa/interp.hpp"
#include "fsa/lang.hpp"
#include "fsa/transforms.hpp"

namespace fsa::cli {
namespace {

using json = nlohmann::json;

struct Options {
  std::string subcommand;
  std::vector<std::string> files;
  std::vector<std::string> transforms;
  std::vector<std::string> assumes;
  std::vector<std::string> params;
  std::string outputs;
  int max_depth = 3;
  bool no_fast_path = false;
  int force_simplify = 0;
  bool json = false;
  uint64_t seed = 1;
  int trials = 200;
  bool verify = false;
};

class InputError : public Error {
 public:
  using Error::Error;
};

Program load_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Program p;
  try {
    p = parse_program(ss.str());
  } catch (const ParseError& e) {
    throw InputError(path + ":" + e.pos().str() + ": " + e.what());
  }
  auto diags = check_well_formed(p);
  if (!diags.empty()) {
    std::string msg = path + ": program is not well formed";
    for (const auto& d : diags) msg += "\n  " + d.str();
    throw InputError(msg);
  }
  return p;
}

Bindings extra_bindings(const Options& o, const Program& p) {
  Bindings b;
  std::vector<Formula> ground;
  for (const auto& a : o.assumes) {
    try {
      parse_assumption(a, p, ground, b.facts);
    } catch (const ParseError& e) {
      throw InputError("bad --assume '" + a + "': " + e.what());
    }
  }
  b.ground = Formula::conj(ground);
  return b;
}

std::vector<std::string> output_list(const Options& o, const Program& p) {
  if (o.outputs.empty()) return p.outputs;
  std::vector<std::string> out;
  std::stringstream ss(o.outputs);
  std::string x;
  while (std::getline(ss, x, ',')) {
    if (!x.empty()) out.push_back(x);
  }
  for (const auto& x : out) {
    if (!p.find_decl(x)) throw InputError("unknown output '" + x + "'");
  }
  return out;
}

InstanceSpec instance_spec(const Options& o, const Program& p) {
  InstanceSpec spec;
  for (const auto& kv : o.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--param expects NAME=VALUE");
    try {
      spec.params[kv.substr(0, eq)] = Int(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("bad --param value '" + kv + "'");
    }
  }
  spec.extra = extra_bindings(o, p);
  return spec;
}

std::vector<TransformSpec> transform_list(const Options& o) {
  if (o.transforms.empty()) throw InputError("missing --transform");
  std::vector<TransformSpec> out;
  for (const auto& t : o.transforms) {
    try {
      out.push_back(TransformSpec::parse(t));
    } catch (const Error& e) {
      throw InputError(e.what());
    }
  }
  return out;
}

json compare_json(const std::string& left, const std::string& right, const CompareReport& r) {
  json arrays = json::array();
  for (const auto& a : r.arrays) {
    arrays.push_back({{"array", a.array},
                      {"cases1", a.left.cases.size()},
                      {"cases2", a.right.cases.size()},
                      {"tested", a.result.tested},
                      {"non_empty", a.result.non_empty},
                      {"matched", a.result.matched}});
  }
  json j = {{"left", left}, {"right", right}, {"equal", r.equal}, {"arrays", arrays}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  if (r.witness) j["witness"] = r.witness->str();
  return j;
}

void collect_compares(const TraceStep& t, json& out) {
  if (t.compare) out.push_back(compare_json(t.left, t.right, *t.compare));
  for (const auto& c : t.children) collect_compares(c, out);
}

json trace_json(const TraceStep& t) {
  json j = {{"depth", t.depth},
            {"rule", t.rule},
            {"left", t.left},
            {"right", t.right},
            {"result", t.result}};
  if (!t.note.empty()) j["note"] = t.note;
  if (!t.children.empty()) {
    j["children"] = json::array();
    for (const auto& c : t.children) j["children"].push_back(trace_json(c));
  }
  return j;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string out = "fsa";
  for (const auto& a : args) {
    bool quote = a.find_first_of(" ;|()") != std::string::npos;
    out += " " + (quote ? "\"" + a + "\"" : a);
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_parse(const Options& o, std::ostream& out, json& rep) {
  Program p = load_program(o.files.at(0));
  rep["verdict"] = "ok";
  rep["program"] = p.name;
  if (!o.json) out << print_program(p);
  return kOk;
}

int cmd_check(const Options& o, std::ostream& out, json& rep) {
  Program p = load_program(o.files.at(0));
  auto specs = transform_list(o);
  CommuteOptions copts;
  copts.max_depth = o.max_depth;
  copts.fast_path = !o.no_fast_path;
  copts.force_simplify = o.force_simplify;
  Program original = p;
  bool legal = true;
  rep["obligations"] = json::array();
  for (const auto& spec : specs) {
    Bindings extra = extra_bindings(o, p);
    CheckResult r;
    try {
      r = check_transformation(p, spec, extra, copts);
    } catch (const BudgetExceeded&) {
      throw;
    } catch (const Error& e) {
      throw InputError(spec.str() + ": " + e.what());
    }
    if (!o.json) {
      out << "transform " << spec.str() << ": " << r.obligations.size() << " obligation"
          << (r.obligations.size() == 1 ? "" : "s") << "\n";
    }
    for (size_t i = 0; i < r.obligations.size(); ++i) {
      const auto& ob = r.obligations[i];
      const auto& v = r.verdicts[i];
      json jo = {{"transform", spec.str()},
                 {"obligation", ob.str()},
                 {"left", ob.left_name},
                 {"right", ob.right_name},
                 {"verdict", to_string(v.outcome)},
                 {"max_depth", v.max_depth_reached},
                 {"trace", trace_json(v.trace)}};
      json compares = json::array();
      collect_compares(v.trace, compares);
      jo["compares"] = compares;
      if (const TraceStep* f = v.first_failure()) {
        json jf = {{"rule", f->rule}, {"left", f->left}, {"right", f->right}, {"note", f->note}};
        if (f->compare && f->compare->witness) jf["witness"] = f->compare->witness->str();
        jo["failure"] = jf;
      }
      rep["obligations"].push_back(jo);
      if (!o.json) {
        out << "obligation " << ob.str() << "\n" << v.trace_text();
        out << "  -> " << to_string(v.outcome) << "\n";
      }
    }
    legal = legal && r.legal();
    p = apply(p, spec);
  }
  rep["verdict"] = legal ? "Legal" : "Unknown";
  if (!o.json) out << "verdict: " << (legal ? "Legal" : "Unknown") << "\n";
  if (legal && o.verify) {
    InstanceSpec ispec = instance_spec(o, original);
    FuzzResult f = equiv_fuzz(original, p, ispec, o.trials, o.seed);
    rep["verify"] = {{"trials", f.trials}, {"equivalent", f.equivalent}};
    if (!f.equivalent) {
      rep["verify"]["diagnosis"] = f.diagnosis;
      rep["verify"]["instance"] = dump_store(*f.counterexample);
      if (!o.json) {
        out << "verify: counterexample after a Legal verdict: " << f.diagnosis << "\n"
            << dump_store(*f.counterexample);
      }
      return kVerifyFailed;
    }
    if (!o.json) out << "verify: " << f.trials << " trials, no counterexample\n";
  }
  return legal ? kOk : kNotProven;
}

int cmd_apply(const Options& o, std::ostream& out, json& rep) {
  Program p = load_program(o.files.at(0));
  for (const auto& spec : transform_list(o)) {
    try {
      p = apply(p, spec);
    } catch (const Error& e) {
      throw InputError(spec.str() + ": " + e.what());
    }
  }
  std::string text = print_program(p);
  rep["verdict"] = "ok";
  rep["program"] = text;
  if (!o.json) out << text;
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out, json& rep) {
  if (o.files.size() != 2) throw InputError("compare expects two files");
  Program a = load_program(o.files[0]);
  Program b = load_program(o.files[1]);
  auto outs = output_list(o, a);
  std::set<std::string> live(outs.begin(), outs.end());
  Bindings bind = a.bindings();
  Bindings extra = extra_bindings(o, a);
  bind.ground = bind.ground && extra.ground;
  bind.facts.insert(bind.facts.end(), extra.facts.begin(), extra.facts.end());
  CompareReport r = compare_programs(a.body, b.body, a, bind, live);
  rep["verdict"] = r.equal ? "equal" : "not equal";
  rep["compares"] = json::array({compare_json(a.name, b.name, r)});
  if (!o.json) {
    for (const auto& ac : r.arrays) {
      out << ac.array << ": cases " << ac.left.cases.size() << " and " << ac.right.cases.size()
          << ", pairs tested " << ac.result.tested << ", non-empty " << ac.result.non_empty
          << ", matched " << ac.result.matched << "\n";
    }
    if (!r.reason.empty()) out << "reason: " << r.reason << "\n";
    if (r.witness) out << "witness " << r.witness->str() << "\n";
    out << (r.equal ? "equal" : "not equal") << "\n";
  }
  return r.equal ? kOk : kNotProven;
}

int cmd_gse(const Options& o, std::ostream& out, json& rep) {
  Program p = load_program(o.files.at(0));
  Bindings bind = p.bindings();
  Bindings extra = extra_bindings(o, p);
  bind.ground = bind.ground && extra.ground;
  bind.facts.insert(bind.facts.end(), extra.facts.begin(), extra.facts.end());
  rep["gses"] = json::array();
  for (const auto& name : output_list(o, p)) {
    Gse g = program_gse(p, name, bind);
    json cases = json::array();
    for (const auto& c : g.cases)
      cases.push_back({{"guard", c.guard.str()}, {"value", c.value.str()}});
    std::string head = name;
    if (!g.index_vars.empty()) {
      head += "(";
      for (size_t i = 0; i < g.index_vars.size(); ++i) head += (i ? "," : "") + g.index_vars[i];
      head += ")";
    }
    rep["gses"].push_back({{"array", name}, {"target", head}, {"cases", cases}});
    if (!o.json) out << head << ": " << g.cases.size() << " cases\n" << g.str();
  }
  rep["verdict"] = "ok";
  return kOk;
}

int cmd_fuzz(const Options& o, std::ostream& out, json& rep) {
  if (o.files.size() != 2) throw InputError("fuzz expects two files");
  Program a = load_program(o.files[0]);
  Program b = load_program(o.files[1]);
  if (!o.outputs.empty()) a.outputs = output_list(o, a);
  FuzzResult f = equiv_fuzz(a, b, instance_spec(o, a), o.trials, o.seed);
  rep["verdict"] = f.equivalent ? "no counterexample" : "counterexample";
  rep["trials"] = f.trials;
  rep["resampled"] = f.resampled;
  if (!f.equivalent) {
    rep["diagnosis"] = f.diagnosis;
    rep["instance"] = dump_store(*f.counterexample);
  }
  if (!o.json) {
    if (f.equivalent) {
      out << "no counterexample in " << f.trials << " trials\n";
    } else {
      out << "counterexample: " << f.diagnosis << "\n" << dump_store(*f.counterexample);
    }
  }
  return f.equivalent ? kOk : kNotProven;
}

int cmd_deps(const Options& o, std::ostream& out, json& rep) {
  Program p = load_program(o.files.at(0));
  bool legal = true;
  rep["dependences"] = json::array();
  for (const auto& spec : transform_list(o)) {
    DependenceReport d;
    try {
      d = dependence_legality(p, spec);
    } catch (const BudgetExceeded&) {
      throw;
    } catch (const Error& e) {
      throw InputError(spec.str() + ": " + e.what());
    }
    for (const auto& x : d.dependences) {
      rep["dependences"].push_back({{"transform", spec.str()},
                                    {"source", x.source},
                                    {"sink", x.sink},
                                    {"kind", x.kind},
                                    {"array", x.array}});
      if (!o.json) out << spec.str() << ": " << x.str() << "\n";
    }
    legal = legal && d.legal;
    p = apply(p, spec);
  }
  rep["verdict"] = legal ? "legal" : "illegal";
  if (!o.json) out << (legal ? "legal" : "illegal") << "\n";
  return legal ? kOk : kNotProven;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fractal symbolic analysis of loop transformations", "fsa"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
    int min_files, max_files;
  };
  const Sub subs[] = {
      {"parse", "Parse and pretty-print a program", 1, 1},
      {"check", "Check legality of transformations", 1, 1},
      {"apply", "Apply transformations and print the result", 1, 1},
      {"compare", "Symbolically compare two programs", 2, 2},
      {"gse", "Print the guarded symbolic expressions of the outputs", 1, 1},
      {"fuzz", "Compare two programs on random instances", 2, 2},
      {"deps", "Dependence-based legality baseline", 1, 1},
  };
  for (const auto& s : subs) {
    CLI::App* c = app.add_subcommand(s.name, s.help);
    c->add_option("files", o.files, "Input programs")
        ->required()
        ->expected(s.min_files, s.max_files);
    c->add_option("--transform", o.transforms, "Transformation, e.g. distribute(j;S1|S2)");
    c->add_option("--assume", o.assumes, "Extra assumption");
    c->add_option("--param", o.params, "Fixed parameter value NAME=VALUE for fuzzing");
    c->add_option("--outputs", o.outputs, "Comma-separated output variables");
    c->add_option("--max-depth", o.max_depth, "Simplification depth budget")
        ->check(CLI::NonNegativeNumber);
    c->add_flag("--no-fast-path", o.no_fast_path, "Disable the footprint disjointness test");
    c->add_option("--force-simplify", o.force_simplify,
                  "Levels to descend before Compare is allowed")
        ->check(CLI::NonNegativeNumber);
    c->add_flag("--json", o.json, "Emit a JSON report");
    c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--trials", o.trials, "Number of random instances")->check(CLI::PositiveNumber);
    c->add_flag("--verify", o.verify, "Fuzz the transformed program after a Legal verdict");
    c->callback([&o, c]() { o.subcommand = c->get_name(); });
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fsa: " << e.what() << "\n";
    return kUsage;
  }

  json rep = {{"command", join_args(args)}};
  auto t0 = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    if (o.subcommand == "parse") {
      code = cmd_parse(o, out, rep);
    } else if (o.subcommand == "check") {
      code = cmd_check(o, out, rep);
    } else if (o.subcommand == "apply") {
      code = cmd_apply(o, out, rep);
    } else if (o.subcommand == "compare") {
      code = cmd_compare(o, out, rep);
    } else if (o.subcommand == "gse") {
      code = cmd_gse(o, out, rep);
    } else if (o.subcommand == "fuzz") {
      code = cmd_fuzz(o, out, rep);
    } else if (o.subcommand == "deps") {
      code = cmd_deps(o, out, rep);
    }
  } catch (const InputError& e) {
    err << "fsa: " << e.what() << "\n";
    return kUsage;
  } catch (const NotSimple& e) {
    err << "fsa: " << e.what() << "\n";
    return kNotProven;
  } catch (const BudgetExceeded& e) {
    err << "fsa: " << e.what() << "\n";
    return kNotProven;
  } catch (const Error& e) {
    err << "fsa: " << e.what() << "\n";
    return kUsage;
  }
  double ms = elapsed_ms(t0);
  rep["time_ms"] = ms;
  if (o.json) {
    out << rep.dump(2) << "\n";
  } else if (o.subcommand == "check" || o.subcommand == "compare") {
    out << "time: " << ms << " ms\n";
  }
  return code;
}

}  // namespace fsa::cli
