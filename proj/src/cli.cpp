#include "qirt/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qirt/distances.hpp"
#include "qirt/measures.hpp"
#include "qirt/repro.hpp"

namespace qirt::cli {

namespace {

using io::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json matrices(const std::vector<ComplexMatrix>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(io::matrix_to_json(m));
  return a;
}

json load_json(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const io::ParseError& e) {
    throw io::ParseError(path + ": " + e.what(), e.line, e.column);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// Loader errors are problems with the invocation, not verdicts.
template <class F>
auto load(const std::string& path, F&& f) {
  const json j = load_json(path);
  try {
    return f(j);
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

InstrumentSet load_set(const std::string& path) { return load(path, io::instrument_set_from_json); }

Instrument load_single(const std::string& path) {
  const InstrumentSet s = load_set(path);
  if (s.size() != 1) throw UsageError(path + ": expected a single instrument");
  return s[0];
}

PovmSet load_povms(const std::string& path) {
  return load(path, [](const json& j) {
    PovmSet out;
    if (j.is_array())
      for (const auto& x : j) out.push_back(io::povm_from_json(x));
    else
      out.push_back(io::povm_from_json(j));
    return out;
  });
}

int verdict_code(const Verdict& v) {
  switch (v.status) {
    case VerdictStatus::Member: return kExitOk;
    case VerdictStatus::NonMember: return kExitFail;
    case VerdictStatus::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int worst(int a, int b) {
  if (a == kExitFail || b == kExitFail) return kExitFail;
  return std::max(a, b);
}

json distance_to_json(const DistanceResult& d) {
  json j{{"value", number(d.value)},
         {"method", to_string(d.method)},
         {"status", to_string(d.status)},
         {"gap", number(d.gap)},
         {"note", d.note}};
  j["achiever"] = d.achiever.size() ? io::matrix_to_json(d.achiever) : json(nullptr);
  return j;
}

json hierarchy_to_json(const HierarchyReport& h) {
  return {{"ip", number(h.ip)},     {"ep", number(h.ep)},     {"sep", number(h.sep)},
          {"mip", number(h.mip)},   {"smip", number(h.smip)}, {"relaxed", h.relaxed},
          {"worst_slack", number(h.worst_slack)}, {"violations", h.violations}, {"ok", h.ok()}};
}

json wiring_to_json(const Wiring& w) {
  json pre = json::array(), post = json::array();
  for (const auto& p : w.pre) pre.push_back(io::instrument_to_json(p));
  for (const auto& row : w.post) post.push_back(io::instrument_set_to_json(row));
  return {{"ancilla", w.ancilla}, {"pre", pre}, {"post", post}};
}

Wiring wiring_from_json(const json& j) {
  Wiring w;
  if (j.is_null()) return w;
  w.ancilla = j.at("ancilla").get<std::size_t>();
  for (const auto& p : j.at("pre")) w.pre.push_back(io::instrument_from_json(p));
  for (const auto& row : j.at("post")) {
    if (!row.is_array()) throw Error("wiring 'post' rows must be arrays of instruments");
    w.post.push_back(io::instrument_set_from_json(row));
  }
  if (w.post.size() != w.pre.size()) throw Error("wiring needs one 'post' row per 'pre' instrument");
  return w;
}

struct SettingsGuard {
  SdpSettings saved = default_sdp_settings();
  ~SettingsGuard() { default_sdp_settings() = saved; }
};

std::uint64_t parse_seed(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used != s.size()) throw UsageError("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("--seed expects an unsigned integer, got '" + s + "'");
  }
}

struct Result {
  int code = kExitOk;
  json inputs = json::object();
  json results = json::array();
  json provenance = json::array();
};

struct Options {
  std::string input, a, b, spec, witness, cls, kind, free, theory, only, case_id;
  std::size_t oracle_samples = 0, trials = 25, max_dim_b = 2, d = 2, n = 2;
  unsigned threads = 0;
  bool extended = false;
  bool oracle_set = false;
};

WitnessFamily family_for(const Options& o, const Config& cfg, std::uint64_t seed) {
  const std::string path = !o.witness.empty() ? o.witness : cfg.witness_family;
  if (path.empty()) return default_witness_family(seed);
  return load(path, witness_family_from_json);
}

Result cmd_validate(const Options& o) {
  Result r;
  r.inputs = {{"input", o.input}};
  const json j = load_json(o.input);
  json out{{"path", o.input}};
  try {
    std::string format;
    if (j.is_array()) {
      format = !j.empty() && j[0].is_object() && j[0].value("format", "") == "povm.v1" ? "povm_set" : "instrument_set";
    } else if (j.is_object()) {
      format = j.value("format", "");
      if (format.empty()) format = j.contains("branches") ? "instrument.v1" : j.contains("elements") ? "povm.v1" : "";
    }
    out["format"] = format;
    if (format == "instrument.v1" || format == "instrument_set") {
      const InstrumentSet s = io::instrument_set_from_json(j);
      json members = json::array();
      for (const auto& i : s)
        members.push_back({{"dim_in", i.dim_in()}, {"dim_out", i.dim_out()}, {"outcomes", i.outcomes()}});
      out["members"] = members;
    } else if (format == "povm.v1" || format == "povm_set") {
      json members = json::array();
      for (const auto& m : j.is_array() ? j : json::array({j})) {
        const Povm p = io::povm_from_json(m);
        members.push_back({{"dim", p.dim()}, {"outcomes", p.outcomes()}});
      }
      out["members"] = members;
    } else if (format == "supermap.v1") {
      const SupermapSpec s = supermap_from_json(j);
      out["terms"] = {{"first", s.has_first()}, {"second", s.has_second()}, {"q", s.q}};
    } else if (format == "pid.v1") {
      const PidSpec s = pid_from_json(j);
      out["outputs"] = s.out_outcomes.size();
    } else if (format == "witness.v1") {
      out["sets"] = witness_family_from_json(j).sets.size();
    } else if (format == "sdp.v1") {
      const SdpProblem p = sdp_from_json(j);
      out["variables"] = p.num_vars();
    } else {
      throw Error("unrecognized document; expected instrument.v1, povm.v1, supermap.v1, pid.v1, witness.v1 or sdp.v1");
    }
    out["valid"] = true;
  } catch (const std::exception& e) {
    out["valid"] = false;
    out["reason"] = e.what();
    r.code = kExitFail;
  }
  r.results.push_back(out);
  r.provenance.push_back("elementary");
  return r;
}

Result cmd_classify(const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  r.inputs = {{"input", o.input}, {"class", o.cls}, {"witness", o.witness}};
  auto push = [&](json item, const Verdict& v) {
    item.update(verdict_to_json(v));
    r.results.push_back(item);
    r.provenance.push_back("computed");
    r.code = worst(r.code, verdict_code(v));
  };
  if (o.cls == "jm") {
    push({{"class", "jm"}}, joint_measurement(load_povms(o.input)));
    return r;
  }
  const InstrumentSet set = load_set(o.input);
  if (o.cls == "tc" || o.cls == "pc" || o.cls == "weak") {
    const Verdict v = o.cls == "tc"   ? is_traditionally_compatible(set)
                      : o.cls == "pc" ? is_parallel_compatible(set)
                                      : is_weakly_compatible(set);
    push({{"class", o.cls}}, v);
    return r;
  }
  WitnessFamily fam;
  if (o.cls == "ib" || o.cls == "wib") fam = family_for(o, cfg, seed);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Instrument& inst = set[i];
    Verdict v;
    if (o.cls == "tp") v = is_trash_and_prepare(inst);
    else if (o.cls == "eb") v = is_entanglement_breaking(inst);
    else if (o.cls == "web") v = is_weak_entanglement_breaking(inst);
    else if (o.cls == "ib") v = breaks_incompatibility(inst, fam);
    else v = is_weak_incompatibility_breaking(inst, fam);
    push({{"class", o.cls}, {"index", i}}, v);
  }
  return r;
}

Result cmd_distance(const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  const std::size_t samples = o.oracle_set ? o.oracle_samples : cfg.oracle_samples;
  r.inputs = {{"kind", o.kind}, {"a", o.a}, {"b", o.b}, {"oracle_samples", samples}};
  DistanceResult d;
  if (o.kind == "channel") {
    const CpMap a = load_single(o.a).channel(), b = load_single(o.b).channel();
    d = diamond_distance(a, b);
    if (samples > 0) {
      r.results.push_back(distance_to_json(d));
      r.provenance.push_back("computed");
      d = diamond_lower_bound(a, b, samples, seed);
    }
  } else if (o.kind == "measurement") {
    const PovmSet a = load_povms(o.a), b = load_povms(o.b);
    if (a.size() != 1 || b.size() != 1) throw UsageError("measurement distance expects single POVMs");
    d = measurement_distance(a[0], b[0]);
  } else if (o.kind == "instrument") {
    d = instrument_distance(load_single(o.a), load_single(o.b));
  } else {
    d = set_distance(load_set(o.a), load_set(o.b));
  }
  r.results.push_back(distance_to_json(d));
  r.provenance.push_back("computed");
  for (const auto& x : r.results)
    if (x["status"] != to_string(SdpStatus::Optimal)) r.code = kExitInconclusive;
  return r;
}

Result cmd_measure(const std::string& which, const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  r.inputs = {{"input", o.input}, {"free", o.free}, {"witness", o.witness}};
  FreeClass tag;
  try {
    tag = parse_free_class(o.free);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const FreeSetSpec free = (tag == FreeClass::IB_Witness || tag == FreeClass::WIB_Witness)
                               ? free_set(tag, family_for(o, cfg, seed))
                               : free_set(tag);
  const InstrumentSet set = load_set(o.input);
  MeasureResult m;
  if (which == "robustness") m = robustness(set, free);
  else if (which == "weight") m = weight(set, free);
  else if (o.extended) m = extended_measure(set, free, o.max_dim_b);
  else m = distance_measure(set, free);
  if (which == "measure" && o.extended) r.inputs["max_dim_b"] = o.max_dim_b;
  json item = measure_to_json(m);
  item["measure"] = which == "measure" ? (o.extended ? "extended" : "distance") : which;
  r.results.push_back(item);
  r.provenance.push_back("computed");
  if (m.status != SdpStatus::Optimal) r.code = kExitInconclusive;
  return r;
}

Result cmd_hierarchy(const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  r.inputs = {{"input", o.input}, {"witness", o.witness}};
  const Instrument inst = load_single(o.input);
  const HierarchyReport h = hierarchy_report(inst, family_for(o, cfg, seed));
  r.results.push_back(hierarchy_to_json(h));
  r.provenance.push_back("computed");
  if (!h.ok()) r.code = kExitFail;
  return r;
}

Result cmd_transform(const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  r.inputs = {{"input", o.input}, {"spec", o.spec}, {"theory", o.theory}, {"witness", o.witness}};
  Theory t;
  try {
    t = parse_theory(o.theory);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const InstrumentSet set = load_set(o.input);
  const json spec = load_json(o.spec);
  const std::string format = spec.is_object() ? spec.value("format", "") : "";
  json item{{"theory", to_string(t)}};
  try {
    InstrumentSet out;
    if (t == Theory::TI) {
      if (format != "pid.v1") throw UsageError(o.spec + ": theory ti expects a pid.v1 spec");
      const PidSpec p = load(o.spec, pid_from_json);
      out = pid_supermap(p, set);
    } else {
      if (format != "supermap.v1") throw UsageError(o.spec + ": expected a supermap.v1 spec");
      const SupermapSpec s = load(o.spec, supermap_from_json);
      const auto checks = check_slots(t, s, family_for(o, cfg, seed));
      json slots = json::array();
      for (const auto& c : checks) {
        json sj = verdict_to_json(c.verdict);
        sj.erase("certificate_data");
        sj["slot"] = c.slot;
        slots.push_back(sj);
        if (c.verdict.status == VerdictStatus::Inconclusive) r.code = kExitInconclusive;
      }
      item["slots"] = slots;
      out = controlled_supermap(s, set);
    }
    item["output"] = io::instrument_set_to_json(out);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    item["error"] = e.what();
    r.code = kExitFail;
  }
  r.results.push_back(item);
  r.provenance.push_back("computed");
  return r;
}

Result cmd_harness(const Options& o, const Config& cfg, std::uint64_t seed) {
  Result r;
  r.inputs = {{"theory", o.theory}, {"trials", o.trials}};
  std::vector<Theory> theories;
  if (o.theory == "all") {
    theories = {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI};
  } else {
    try {
      theories.push_back(parse_theory(o.theory));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const unsigned threads = o.threads ? o.threads : cfg.threads;
  for (Theory t : theories) {
    const HarnessReport h = monotonicity_harness(t, o.trials, seed, threads);
    r.results.push_back(harness_to_json(h));
    r.provenance.push_back("computed");
    if (!h.ok()) r.code = kExitFail;
  }
  return r;
}

Result cmd_repro(const Options& o, std::uint64_t seed, bool timings) {
  Result r;
  if (!o.only.empty() && !o.case_id.empty() && o.only != o.case_id)
    throw UsageError("conflicting case ids '" + o.case_id + "' and '" + o.only + "'");
  const std::string only = !o.only.empty() ? o.only : o.case_id;
  r.inputs = {{"only", only}};
  std::vector<ReproResult> rs;
  try {
    rs = repro_all(seed, only);
  } catch (const Error& e) {
    if (std::string(e.what()).rfind("unknown repro case", 0) == 0) throw UsageError(e.what());
    throw;
  }
  for (const auto& c : rs) {
    r.results.push_back(to_json(c, timings));
    for (const auto& k : c.checks)
      r.provenance.push_back({{"case", c.id}, {"check", k.name}, {"provenance", to_string(k.provenance)}});
    if (!c.pass()) r.code = kExitFail;
  }
  return r;
}

Result cmd_thresholds(const Options& o) {
  Result r;
  r.inputs = {{"d", o.d}, {"n", o.n}};
  if (o.d < 2 || o.n < 1) throw UsageError("thresholds need d >= 2 and n >= 1");
  const DepolarizingThresholds t = depolarizing_thresholds(o.d, o.n);
  r.results.push_back({{"d", o.d}, {"n", o.n}, {"eb", t.eb}, {"ibc" + std::to_string(o.n), t.ibc_n}, {"ibc", t.ibc}});
  r.provenance.push_back("published");
  return r;
}

}  // namespace

Config parse_config(const std::string& text, Config c) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') && val.back() == val.front())
      val = val.substr(1, val.size() - 2);
    auto real = [&] {
      try {
        std::size_t used = 0;
        const double v = std::stod(val, &used);
        if (used != val.size() || !(v > 0)) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw UsageError("config line " + std::to_string(lineno) + ": '" + key + "' needs a positive number");
      }
    };
    auto count = [&] {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(val, &used, 10);
        if (used != val.size()) throw std::invalid_argument("");
        return static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw UsageError("config line " + std::to_string(lineno) + ": '" + key + "' needs a non-negative integer");
      }
    };
    if (key == "gap_tol") c.sdp.gap_tol = real();
    else if (key == "residual_tol") c.sdp.residual_tol = real();
    else if (key == "target_gap") c.sdp.target_gap = real();
    else if (key == "target_residual") c.sdp.target_residual = real();
    else if (key == "certificate_tol") c.sdp.certificate_tol = real();
    else if (key == "max_iter") c.sdp.max_iter = static_cast<int>(count());
    else if (key == "witness_family") c.witness_family = val;
    else if (key == "oracle_samples") c.oracle_samples = count();
    else if (key == "threads") c.threads = static_cast<unsigned>(count());
    else throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

json witness_family_to_json(const WitnessFamily& f) {
  json sets = json::array();
  for (const auto& s : f.sets) {
    json a = json::array();
    for (const auto& p : s) a.push_back(io::povm_to_json(p));
    sets.push_back(a);
  }
  return {{"format", "witness.v1"}, {"note", f.note}, {"sets", sets}};
}

WitnessFamily witness_family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("sets")) throw Error("witness.v1 object needs 'sets'");
  std::vector<PovmSet> sets;
  for (const auto& s : j.at("sets")) {
    PovmSet ps;
    for (const auto& p : s) ps.push_back(io::povm_from_json(p));
    sets.push_back(ps);
  }
  return make_witness_family(std::move(sets), j.value("note", ""));
}

json supermap_to_json(const SupermapSpec& s) {
  return {{"format", "supermap.v1"},
          {"q", s.q},
          {"first", s.has_first() ? wiring_to_json(s.first) : json(nullptr)},
          {"second", s.has_second() ? wiring_to_json(s.second) : json(nullptr)}};
}

SupermapSpec supermap_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "supermap.v1") throw Error("expected a supermap.v1 object");
  SupermapSpec s;
  s.q = j.value("q", 1.0);
  if (!(s.q >= 0.0 && s.q <= 1.0)) throw Error("supermap.v1 'q' must lie in [0, 1]");
  if (j.contains("first")) s.first = wiring_from_json(j.at("first"));
  if (j.contains("second")) s.second = wiring_from_json(j.at("second"));
  if (!s.has_first() && !s.has_second()) throw Error("supermap.v1 needs at least one term");
  return s;
}

json pid_to_json(const PidSpec& s) {
  return {{"format", "pid.v1"},
          {"ancilla", s.ancilla},
          {"f", io::instrument_to_json(Instrument({s.f}, {"0"}, unchecked))},
          {"k", io::instrument_to_json(s.k)},
          {"out_outcomes", s.out_outcomes},
          {"q_table", s.q_table},
          {"p_table", s.p_table}};
}

PidSpec pid_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "pid.v1") throw Error("expected a pid.v1 object");
  PidSpec s;
  s.ancilla = j.at("ancilla").get<std::size_t>();
  const Instrument f = io::instrument_from_json(j.at("f"));
  if (f.outcomes() != 1) throw Error("pid.v1 'f' must have exactly one branch");
  s.f = f.branch(0);
  s.k = io::instrument_from_json(j.at("k"));
  s.out_outcomes = j.at("out_outcomes").get<std::vector<std::size_t>>();
  j.at("q_table").get_to(s.q_table);
  j.at("p_table").get_to(s.p_table);
  return s;
}

json verdict_to_json(const Verdict& v) {
  return {{"status", to_string(v.status)},
          {"margin", number(v.margin)},
          {"relaxation", to_string(v.relaxation)},
          {"certificate", v.certificate},
          {"certificate_data", matrices(v.certificate_data)}};
}

json measure_to_json(const MeasureResult& m) {
  json opt = json::array();
  for (const auto& row : m.optimizer) opt.push_back(matrices(row));
  return {{"value", number(m.value)},
          {"bound_direction", to_string(m.bound)},
          {"status", to_string(m.status)},
          {"gap", number(m.gap)},
          {"iterations", m.iterations},
          {"diagnostics", m.diagnostics},
          {"optimizer", opt}};
}

json harness_to_json(const HarnessReport& h) {
  json recs = json::array();
  for (const auto& t : h.records)
    recs.push_back({{"seed", t.seed},
                    {"q", t.q},
                    {"distance_before", number(t.distance_before)},
                    {"distance_after", number(t.distance_after)},
                    {"measure_before", number(t.measure_before)},
                    {"measure_after", number(t.measure_after)}});
  return {{"theory", to_string(h.theory)},
          {"trials", h.trials},
          {"seed", h.seed},
          {"tolerance", kMonotonicityTol},
          {"max_distance_violation", number(h.max_distance_violation)},
          {"max_measure_violation", number(h.max_measure_violation)},
          {"violations", h.violations},
          {"ok", h.ok()},
          {"free_set", h.free_set_note},
          {"records", recs}};
}

Outcome execute(const std::vector<std::string>& args) {
  SettingsGuard guard;
  CLI::App app{"qirt: resource measures and free transformations for quantum instruments", "qirt"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string seed_text = "0x5EED", config_path, dump_path, output;
  bool timings = false;
  app.add_option("--seed", seed_text, "Seed for every random choice (default 0x5EED)");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--dump-sdp", dump_path, "Write each SDP as sdp.v1 to this path (last one wins)");
  app.add_option("--output,-o", output, "Write the report here instead of stdout");
  app.add_flag("--timings", timings, "Include wall-clock timings in the report");

  Options o;
  const std::vector<std::string> classes{"tp", "eb", "web", "ib", "wib", "tc", "pc", "weak", "jm"};
  const std::vector<std::string> kinds{"channel", "measurement", "instrument", "set"};

  auto* validate = app.add_subcommand("validate", "Check that a JSON document is well formed and valid");
  validate->add_option("input", o.input)->required();

  auto* classify = app.add_subcommand("classify", "Membership test for a free class");
  classify->add_option("--class", o.cls)->required()->check(CLI::IsMember(classes));
  classify->add_option("input", o.input)->required();
  classify->add_option("--witness", o.witness, "witness.v1 family");

  auto* distance = app.add_subcommand("distance", "Diamond-type distance between two objects");
  distance->add_option("--kind", o.kind)->required()->check(CLI::IsMember(kinds));
  distance->add_option("a", o.a)->required();
  distance->add_option("b", o.b)->required();
  auto* samples = distance->add_option("--oracle-samples", o.oracle_samples, "Sampled lower bound for channels");

  std::vector<std::pair<std::string, CLI::App*>> measures;
  for (const char* name : {"robustness", "weight", "measure"}) {
    auto* sub = app.add_subcommand(name, std::string("Resource ") + name + " against a free set");
    sub->add_option("--free", o.free)->required();
    sub->add_option("input", o.input)->required();
    sub->add_option("--witness", o.witness, "witness.v1 family for ib/wib");
    if (std::string(name) == "measure") {
      sub->add_flag("--extended", o.extended, "Extended measure over enlarged inputs");
      sub->add_option("--max-dim-b", o.max_dim_b, "Largest auxiliary dimension for --extended");
    }
    measures.emplace_back(name, sub);
  }

  auto* hierarchy = app.add_subcommand("hierarchy", "All five measures and the hierarchy chains");
  hierarchy->add_option("input", o.input)->required();
  hierarchy->add_option("--witness", o.witness, "witness.v1 family");

  auto* transform = app.add_subcommand("transform", "Apply a free transformation");
  transform->add_option("--theory", o.theory)->required();
  transform->add_option("--spec", o.spec)->required();
  transform->add_option("input", o.input)->required();
  transform->add_option("--witness", o.witness, "witness.v1 family");

  auto* harness = app.add_subcommand("harness", "Random monotonicity trials");
  harness->add_option("--theory", o.theory)->required();
  harness->add_option("--trials", o.trials);
  harness->add_option("--threads", o.threads);

  auto* repro = app.add_subcommand("repro", "Run the worked examples and checks");
  repro->add_option("case", o.case_id);
  repro->add_option("--only", o.only);

  auto* thresholds = app.add_subcommand("thresholds", "Depolarizing noise thresholds");
  thresholds->add_option("--d", o.d);
  thresholds->add_option("--n", o.n);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream os;
    const int code = app.exit(e, os, os);
    return {code == 0 ? kExitOk : kExitUsage, nullptr, os.str(), ""};
  }
  o.oracle_set = samples->count() > 0;

  const auto t0 = std::chrono::steady_clock::now();
  std::string command;
  try {
    const std::uint64_t seed = parse_seed(seed_text);
    Config cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = parse_config(ss.str(), cfg);
    }
    cfg.sdp.dump_path = dump_path;
    default_sdp_settings() = cfg.sdp;

    Result r;
    if (validate->parsed()) command = "validate", r = cmd_validate(o);
    else if (classify->parsed()) command = "classify", r = cmd_classify(o, cfg, seed);
    else if (distance->parsed()) command = "distance", r = cmd_distance(o, cfg, seed);
    else if (hierarchy->parsed()) command = "hierarchy", r = cmd_hierarchy(o, cfg, seed);
    else if (transform->parsed()) command = "transform", r = cmd_transform(o, cfg, seed);
    else if (harness->parsed()) command = "harness", r = cmd_harness(o, cfg, seed);
    else if (repro->parsed()) command = "repro", r = cmd_repro(o, seed, timings);
    else if (thresholds->parsed()) command = "thresholds", r = cmd_thresholds(o);
    else
      for (const auto& [name, sub] : measures)
        if (sub->parsed()) command = name, r = cmd_measure(name, o, cfg, seed);

    if (!config_path.empty()) r.inputs["config"] = config_path;
    json timing = nullptr;
    if (timings)
      timing = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    json report{{"format", "report.v1"}, {"command", command},       {"inputs", r.inputs},
                {"seed", seed},          {"results", r.results},     {"provenance", r.provenance},
                {"timings", timing}};
    return {r.code, report, "", output};
  } catch (const io::ParseError& e) {
    return {kExitUsage, nullptr, std::string("error: ") + e.what(), ""};
  } catch (const UsageError& e) {
    return {kExitUsage, nullptr, std::string("error: ") + e.what(), ""};
  } catch (const std::exception& e) {
    return {kExitFail, nullptr, std::string("error: ") + command + ": " + e.what(), ""};
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  const Outcome res = execute(args);
  if (!res.message.empty()) (res.exit_code == kExitOk ? out : err) << res.message << (res.message.back() == '\n' ? "" : "\n");
  if (!res.report.is_null()) {
    const std::string text = res.report.dump(2);
    if (res.output_path.empty()) {
      out << text << "\n";
    } else {
      std::ofstream f(res.output_path);
      if (!f) {
        err << "error: cannot write " << res.output_path << "\n";
        return kExitUsage;
      }
      f << text << "\n";
    }
  }
  return res.exit_code;
}

}  // namespace qirt::cli
