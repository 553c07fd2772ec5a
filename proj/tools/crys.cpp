// crys: command-line front end. Exit codes: 0 success, 1 a verification
// check failed, 2 usage or validation error, 3 internal error.

#include "crys/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace crys;
using crys::io::Json;
using crys::io::ParseError;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Session {
  std::string command;
  std::optional<int> p, prec, xvars, yvars, m;
  std::optional<Box> box;
  std::string in, out, suite = "default", config;
  bool suite_given = false;
  std::optional<unsigned long long> seed;
  bool timings = false;
};

Box parse_box(const std::string& s) {
  int E = 0, D = 0;
  char comma = 0;
  std::istringstream is(s);
  if (!(is >> E >> comma >> D) || comma != ',' || !is.eof() || E < 0 || D < 0)
    throw UsageError("--box expects E,D with nonnegative integers, got '" + s + "'");
  return Box{E, D};
}

Json read_json_file(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw UsageError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(what) + " '" + path + "': " + e.what());
  }
}

// Config file values fill in whatever the flags left unset.
void apply_config(Session& s, const Json& c) {
  if (!c.is_object()) throw ParseError("config: expected a JSON object");
  auto take_int = [&](const char* key, std::optional<int>& dst) {
    if (!c.contains(key) || dst) return;
    if (!c[key].is_number_integer()) throw ParseError(std::string("config: '") + key + "' must be an integer");
    dst = c[key].get<int>();
  };
  take_int("p", s.p);
  take_int("prec", s.prec);
  take_int("xvars", s.xvars);
  take_int("yvars", s.yvars);
  take_int("m", s.m);
  if (c.contains("box") && !s.box) {
    const Json& b = c["box"];
    if (b.is_string()) s.box = parse_box(b.get<std::string>());
    else if (b.is_array() && b.size() == 2 && b[0].is_number_integer() && b[1].is_number_integer())
      s.box = Box{b[0].get<int>(), b[1].get<int>()};
    else throw ParseError("config: 'box' must be \"E,D\" or [E, D]");
  }
  auto take_str = [&](const char* key, std::string& dst, bool only_if_empty) {
    if (!c.contains(key) || (only_if_empty && !dst.empty())) return;
    if (!c[key].is_string()) throw ParseError(std::string("config: '") + key + "' must be a string");
    dst = c[key].get<std::string>();
  };
  take_str("in", s.in, true);
  take_str("out", s.out, true);
  if (!s.suite_given) take_str("suite", s.suite, false);
  if (c.contains("seed") && !s.seed) {
    if (!c["seed"].is_number_unsigned()) throw ParseError("config: 'seed' must be a nonnegative integer");
    s.seed = c["seed"].get<unsigned long long>();
  }
  if (c.contains("timings") && !s.timings) {
    if (!c["timings"].is_boolean()) throw ParseError("config: 'timings' must be a boolean");
    s.timings = c["timings"].get<bool>();
  }
}

void emit(const Session& s, const Json& j) {
  std::string text = j.dump(2) + "\n";
  if (s.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(s.out);
  if (!f) throw UsageError("cannot write '" + s.out + "'");
  f << text;
}

io::Element input(const Session& s) {
  if (s.in.empty()) throw UsageError(s.command + ": --in is required");
  return io::element_from_json(read_json_file(s.in, "input"));
}

// Flags, when given, must agree with the descriptor carried by the input.
void check_ring(const Session& s, const RingDescriptor& d) {
  if (s.p && *s.p != d.p) throw UsageError("--p " + std::to_string(*s.p) + " disagrees with input prime " + std::to_string(d.p));
  if (s.xvars && *s.xvars != d.nx) throw UsageError("--xvars disagrees with the input descriptor");
  if (s.yvars && *s.yvars != d.ny) throw UsageError("--yvars disagrees with the input descriptor");
}

template <class T>
const T& expect(const io::Element& e, const char* what) {
  if (const T* x = std::get_if<T>(&e)) return *x;
  throw UsageError(std::string("input must be a ") + what + " element");
}

// Divided-series argument; a Witt series is embedded first.
DividedSeries divided_input(const Session& s) {
  io::Element e = input(s);
  DividedSeries u = std::holds_alternative<WittSeries>(e) ? embed_witt(std::get<WittSeries>(e))
                                                          : expect<DividedSeries>(e, "divided or wittseries");
  check_ring(s, u.desc());
  if (s.prec) u = u.with_prec(*s.prec);
  return u;
}

}  // namespace

namespace {

std::vector<DieudonneModule> suite_modules(const Session& s, int p, int N) {
  const std::string& name = s.suite;
  if (name == "default") return default_suite(p, N);
  if (name == "empty") return {};
  if (name == "etale") return {etale(p, 1, N)};
  if (name == "multiplicative") return {multiplicative(p, 1, N)};
  if (name == "supersingular") return {supersingular(p, N)};
  if (name == "mixed") return {direct_sum(etale(p, 1, N), multiplicative(p, 1, N))};
  if (name == "file") {
    if (s.in.empty()) throw UsageError("--suite file needs --in with a dmodule or an array of dmodules");
    Json j = read_json_file(s.in, "suite");
    std::vector<DieudonneModule> out;
    if (j.is_array()) {
      for (const auto& m : j) out.push_back(io::dmodule_from_json(m));
    } else {
      out.push_back(io::dmodule_from_json(j));
    }
    for (const auto& m : out)
      if (m.prec != N) throw UsageError("module '" + m.name + "' has precision " + std::to_string(m.prec) + ", session has " + std::to_string(N));
    return out;
  }
  throw UsageError("unknown suite '" + name + "' (default, empty, etale, multiplicative, supersingular, mixed, file)");
}

Box session_box(const Session& s, int p, int N) {
  Box b = s.box ? *s.box : Box{N + 1, static_cast<int>(ppow(p, N + 1))};
  if (!b.meets_threshold(p, N))
    throw UsageError("box (" + std::to_string(b.E) + "," + std::to_string(b.D) + ") is below the threshold E >= N+1, D >= p^(N+1)");
  return b;
}

int run_verify(const Session& s) {
  int p = s.p.value_or(2), N = s.prec.value_or(2);
  RingDescriptor d(p, s.xvars.value_or(1), s.yvars.value_or(0), N);
  Box box = session_box(s, p, N);
  std::vector<DieudonneModule> suite = suite_modules(s, p, N);
  TheoremReport rep = verify_theorem(suite, d, box);
  emit(s, io::report_to_json(rep, io::ReportOptions{s.suite, d, s.seed.value_or(0), s.timings}));
  return rep.pass ? 0 : 1;
}

int run_points(const Session& s) {
  DieudonneModule m = expect<DieudonneModule>(input(s), "dmodule");
  if (s.p && *s.p != m.p) throw UsageError("--p disagrees with the module prime");
  if (s.prec && *s.prec != m.prec) throw UsageError("--prec disagrees with the module precision");
  RingDescriptor d(m.p, s.xvars.value_or(1), s.yvars.value_or(0), m.prec);
  emit(s, io::to_json(solve_sw(m, d, session_box(s, m.p, m.prec))));
  return 0;
}

int run(const Session& s) {
  const std::string& c = s.command;
  if (c == "verify") return run_verify(s);
  if (c == "points") return run_points(s);
  if (c == "eval") {
    io::Element e = input(s);
    emit(s, io::element_to_json(e));
    return 0;
  }
  if (c == "teich") {
    TiltPoly t = expect<TiltPoly>(input(s), "tilt");
    check_ring(s, t.desc());
    emit(s, io::to_json(teich_series(t, s.prec.value_or(t.desc().prec))));
    return 0;
  }
  if (c == "gamma") {
    if (!s.m) throw UsageError("gamma: --m is required");
    emit(s, io::to_json(gamma(*s.m, divided_input(s))));
    return 0;
  }
  if (c == "fprime") {
    emit(s, io::to_json(fprime(divided_input(s))));
    return 0;
  }
  if (c == "beta") {
    emit(s, io::to_json(beta(divided_input(s))));
    return 0;
  }
  if (c == "fmap") {
    io::Element e = input(s);
    VExpansion x = std::holds_alternative<PFraction>(e) ? to_expansion(std::get<PFraction>(e))
                                                         : expect<VExpansion>(e, "vexpansion or pfraction");
    check_ring(s, x.desc());
    emit(s, io::to_json(f_map(x)));
    return 0;
  }
  if (c == "finv") {
    emit(s, io::to_json(f_inverse(divided_input(s))));
    return 0;
  }
  if (c == "log") {
    TiltPoly t = expect<TiltPoly>(input(s), "tilt");
    check_ring(s, t.desc());
    int N = s.prec.value_or(t.desc().prec);
    UnitElement u(t.is_exact() ? t.with_flat_prec(N) : t);
    emit(s, io::to_json(log_teich(u, N)));
    return 0;
  }
  if (c == "units") {
    emit(s, io::to_json(solve_units(divided_input(s)).value()));
    return 0;
  }
  throw UsageError("unknown command '" + c + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit A_cris, Witt vectors and Dieudonne module solutions"};
  Session s;
  app.add_option("command", s.command, "eval | teich | gamma | fprime | beta | fmap | finv | log | units | points | verify")
      ->required()
      ->check(CLI::IsMember({"eval", "teich", "gamma", "fprime", "beta", "fmap", "finv", "log", "units", "points", "verify"}));
  app.add_option("--config", s.config, "JSON file with session defaults");
  app.add_option("--p", s.p, "prime");
  app.add_option("--prec", s.prec, "precision N (work modulo p^N)");
  app.add_option("--xvars", s.xvars, "number of x-variables");
  app.add_option("--yvars", s.yvars, "number of y-variables (perfect base)");
  std::string box;
  app.add_option("--box", box, "exponent box E,D");
  app.add_option("--in", s.in, "input JSON file");
  app.add_option("--out", s.out, "output file (default stdout)");
  app.add_option("--suite", s.suite, "verify suite: default, empty, etale, multiplicative, supersingular, mixed, file");
  app.add_option("--seed", s.seed, "seed recorded in reports");
  app.add_option("--m", s.m, "order of the divided power (gamma)");
  app.add_flag("--timings", s.timings, "include wall-clock times in reports");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    s.suite_given = app.count("--suite") > 0;
    if (!box.empty()) s.box = parse_box(box);
    if (!s.config.empty()) apply_config(s, read_json_file(s.config, "config"));
    return run(s);
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
