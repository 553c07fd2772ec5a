#pragma once

// JSON wire format. Exponents are lists of ["num", den_exp] pairs, coefficients
// decimal strings; term lists follow the MultiExp order.

#include "crys/dieudonne.hpp"

#include <json.hpp>

#include <string>
#include <variant>

namespace crys::io {

using Json = nlohmann::ordered_json;

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline int int_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) throw ParseError(where + ": field '" + key + "' is not an integer");
  return v.get<int>();
}

inline Int parse_int(const Json& v, const std::string& where) {
  if (v.is_number_integer()) return Int(v.get<long long>());
  if (!v.is_string()) throw ParseError(where + ": expected a decimal string");
  const std::string& s = v.get_ref<const std::string&>();
  std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos)
    throw ParseError(where + ": '" + s + "' is not a decimal integer");
  return Int(s);
}

inline Json int_to_json(const Int& x) { return x.str(); }

}  // namespace detail

inline Json to_json(const RingDescriptor& d) { return {{"p", d.p}, {"nx", d.nx}, {"ny", d.ny}, {"prec", d.prec}}; }

inline RingDescriptor descriptor_from_json(const Json& j) {
  const std::string w = "descriptor";
  try {
    return RingDescriptor(detail::int_field(j, "p", w), detail::int_field(j, "nx", w), detail::int_field(j, "ny", w),
                          detail::int_field(j, "prec", w));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(w + ": " + e.what());
  }
}

inline Json to_json(const MultiExp& e) {
  Json out = Json::array();
  for (const auto& c : e) out.push_back(Json::array({c.num().str(), c.den_exp()}));
  return out;
}

inline MultiExp exp_from_json(const Json& j, const RingDescriptor& d, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d.nvars())
    throw ParseError(where + ": exponent must list " + std::to_string(d.nvars()) + " [num, den_exp] pairs");
  MultiExp e;
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[1].is_number_integer())
      throw ParseError(where + ": exponent coordinate must be [\"num\", den_exp]");
    Int num = detail::parse_int(c[0], where);
    int den = c[1].get<int>();
    if (num < 0 || den < 0) throw ParseError(where + ": negative exponent");
    e.emplace_back(num, den, d.p);
  }
  return e;
}

inline Json terms_to_json(const CoefMap& m) {
  Json out = Json::array();
  for (const auto& [e, c] : m) out.push_back({{"exp", to_json(e)}, {"coef", detail::int_to_json(c)}});
  return out;
}

/// Calls add(e, c) for each term; messages name the offending term.
template <class Add>
void terms_from_json(const Json& j, const RingDescriptor& d, const std::string& where, Add add) {
  if (!j.is_array()) throw ParseError(where + ": 'terms' must be an array");
  for (std::size_t k = 0; k < j.size(); ++k) {
    std::string tw = where + " term " + std::to_string(k);
    MultiExp e = exp_from_json(detail::field(j[k], "exp", tw), d, tw);
    add(e, detail::parse_int(detail::field(j[k], "coef", tw), tw));
  }
}

namespace detail {

inline Json header(const char* kind, const RingDescriptor& d) { return {{"kind", kind}, {"descriptor", to_json(d)}}; }

inline void expect_kind(const Json& j, const char* kind) {
  const Json& k = field(j, "kind", "element");
  if (!k.is_string() || k.get<std::string>() != kind)
    throw ParseError(std::string("element: expected kind '") + kind + "', got " + k.dump());
}

// Parsing wraps library exceptions (bad precision, descriptor mismatch) as ParseError.
template <class Fn>
auto guarded(const std::string& where, Fn fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace detail

inline Json to_json(const TiltPoly& c) {
  Json j = detail::header("tilt", c.desc());
  j["flat_prec"] = c.is_exact() ? Json("exact") : Json(c.flat_prec());
  j["terms"] = terms_to_json(c.terms());
  return j;
}

inline TiltPoly tilt_from_json(const Json& j) {
  detail::expect_kind(j, "tilt");
  RingDescriptor d = descriptor_from_json(detail::field(j, "descriptor", "tilt"));
  const Json& f = detail::field(j, "flat_prec", "tilt");
  int flat = kExactFlat;
  if (f.is_string() && f.get<std::string>() == "exact") flat = kExactFlat;
  else if (f.is_number_integer()) flat = f.get<int>();
  else throw ParseError("tilt: flat_prec must be an integer or \"exact\"");
  return detail::guarded("tilt", [&] {
    TiltPoly c(d, flat);
    terms_from_json(detail::field(j, "terms", "tilt"), d, "tilt", [&](const MultiExp& e, const Int& v) { c.add_term(e, v); });
    return c;
  });
}

inline Json to_json(const WittSeries& w, const char* kind = "wittseries") {
  Json j = detail::header(kind, w.desc());
  j["basis"] = "witt";
  j["prec"] = w.prec();
  j["terms"] = terms_to_json(w.terms());
  return j;
}

inline WittSeries witt_from_json(const Json& j, const char* kind = "wittseries") {
  detail::expect_kind(j, kind);
  RingDescriptor d = descriptor_from_json(detail::field(j, "descriptor", kind));
  int prec = detail::int_field(j, "prec", kind);
  return detail::guarded(kind, [&] {
    WittSeries w(d, prec);
    terms_from_json(detail::field(j, "terms", kind), d, kind, [&](const MultiExp& e, const Int& v) { w.add_term(e, v); });
    return w;
  });
}

inline Json to_json(const WCElement& w) { return to_json(w.series(), "wcelement"); }
inline WCElement wc_from_json(const Json& j) { return WCElement(witt_from_json(j, "wcelement")); }

inline Json to_json(const DividedSeries& u) {
  Json j = detail::header("divided", u.desc());
  j["basis"] = "divided";
  j["prec"] = u.prec();
  j["terms"] = terms_to_json(u.terms());
  return j;
}

inline DividedSeries divided_from_json(const Json& j) {
  detail::expect_kind(j, "divided");
  RingDescriptor d = descriptor_from_json(detail::field(j, "descriptor", "divided"));
  int prec = detail::int_field(j, "prec", "divided");
  return detail::guarded("divided", [&] {
    DividedSeries u(d, prec);
    terms_from_json(detail::field(j, "terms", "divided"), d, "divided",
                    [&](const MultiExp& e, const Int& v) { u.add_term(e, v); });
    return u;
  });
}

inline Json to_json(const VExpansion& x) {
  Json j = detail::header("vexpansion", x.desc());
  j["prec"] = x.prec();
  Json digits = Json::array();
  for (const auto& [m, c] : x.digits()) digits.push_back({{"index", m}, {"digit", to_json(c)}});
  j["digits"] = digits;
  return j;
}

inline VExpansion vexpansion_from_json(const Json& j) {
  detail::expect_kind(j, "vexpansion");
  RingDescriptor d = descriptor_from_json(detail::field(j, "descriptor", "vexpansion"));
  int prec = detail::int_field(j, "prec", "vexpansion");
  return detail::guarded("vexpansion", [&] {
    VExpansion x(d, prec);
    const Json& digits = detail::field(j, "digits", "vexpansion");
    if (!digits.is_array()) throw ParseError("vexpansion: 'digits' must be an array");
    for (std::size_t k = 0; k < digits.size(); ++k) {
      std::string w = "vexpansion digit " + std::to_string(k);
      x.set_digit(detail::int_field(digits[k], "index", w), tilt_from_json(detail::field(digits[k], "digit", w)));
    }
    return x;
  });
}

inline Json to_json(const PFraction& x) {
  Json j = detail::header("pfraction", x.desc());
  j["j"] = x.j;
  j["numerator"] = to_json(x.w);
  return j;
}

inline PFraction pfraction_from_json(const Json& j) {
  detail::expect_kind(j, "pfraction");
  PFraction x{detail::int_field(j, "j", "pfraction"), witt_from_json(detail::field(j, "numerator", "pfraction"))};
  if (x.j < 0) throw ParseError("pfraction: negative j");
  return x;
}

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(x.str());
    out.push_back(r);
  }
  return out;
}

inline Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": matrix must be an array of rows");
  Matrix m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array()) throw ParseError(where + ": row " + std::to_string(i) + " is not an array");
    Row r;
    for (const auto& x : j[i]) r.push_back(parse_int(x, where + " row " + std::to_string(i)));
    m.push_back(std::move(r));
  }
  return m;
}

inline Json ints_to_json(const std::vector<int>& v) { return Json(v); }

inline std::vector<int> ints_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an integer array");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw ParseError(where + ": expected an integer array");
    out.push_back(x.get<int>());
  }
  return out;
}

inline Json box_to_json(const Box& b) { return {{"E", b.E}, {"D", b.D}}; }
inline Box box_from_json(const Json& j) { return Box{int_field(j, "E", "box"), int_field(j, "D", "box")}; }

}  // namespace detail

inline Json to_json(const DieudonneModule& m) {
  Json j{{"kind", "dmodule"}, {"name", m.name}, {"p", m.p}, {"rank", m.rank}, {"prec", m.prec}};
  j["mat_prec"] = m.mat_prec == kExactFlat ? Json("exact") : Json(m.mat_prec);
  j["F"] = detail::matrix_to_json(m.F);
  j["V"] = detail::matrix_to_json(m.V);
  return j;
}

inline DieudonneModule dmodule_from_json(const Json& j) {
  detail::expect_kind(j, "dmodule");
  DieudonneModule m;
  const std::string w = "dmodule";
  m.p = detail::int_field(j, "p", w);
  m.rank = detail::int_field(j, "rank", w);
  m.prec = detail::int_field(j, "prec", w);
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("dmodule: 'name' must be a string");
    m.name = j["name"].get<std::string>();
  }
  if (j.contains("mat_prec") && !(j["mat_prec"].is_string() && j["mat_prec"] == "exact"))
    m.mat_prec = detail::int_field(j, "mat_prec", w);
  m.F = detail::matrix_from_json(detail::field(j, "F", w), "dmodule F");
  m.V = detail::matrix_from_json(detail::field(j, "V", w), "dmodule V");
  detail::guarded(w, [&] {
    m.validate();
    return 0;
  });
  return m;
}

/// Generators are stored sparsely as [column, "value"] pairs over the listed
/// coordinates; each coordinate block lists rank consecutive columns.
inline Json to_json(const SolutionModule& s) {
  Json j = detail::header("solution", s.ring);
  j["N"] = s.N;
  j["rank"] = s.rank;
  j["box"] = detail::box_to_json(s.box);
  Json coords = Json::array();
  for (std::size_t c = 0; c < s.coords.size(); c += std::max(s.rank, 1))
    coords.push_back({{"exp", to_json(s.coords[c].alpha)}, {"t", s.coords[c].t}});
  j["coords"] = coords;
  Json blocks = Json::array();
  for (const auto& [lo, hi] : s.blocks) blocks.push_back(Json::array({lo, hi}));
  j["blocks"] = blocks;
  Json gens = Json::array();
  for (const auto& g : s.generators) {
    Json row = Json::array();
    for (std::size_t c = 0; c < g.size(); ++c)
      if (g[c] != 0) row.push_back(Json::array({c, g[c].str()}));
    gens.push_back(row);
  }
  j["generators"] = gens;
  j["divisors"] = detail::ints_to_json(s.divisors);
  j["box_divisors"] = detail::ints_to_json(s.box_divisors);
  j["box_ok"] = s.box_ok;
  j["warnings"] = s.warnings;
  return j;
}

inline SolutionModule solution_from_json(const Json& j) {
  detail::expect_kind(j, "solution");
  const std::string w = "solution";
  SolutionModule s;
  s.ring = descriptor_from_json(detail::field(j, "descriptor", w));
  s.N = detail::int_field(j, "N", w);
  s.rank = detail::int_field(j, "rank", w);
  if (s.N < 1 || s.rank < 0) throw ParseError("solution: bad N or rank");
  s.box = detail::box_from_json(detail::field(j, "box", w));
  s.reset_index();
  const Json& coords = detail::field(j, "coords", w);
  if (!coords.is_array()) throw ParseError("solution: 'coords' must be an array");
  for (std::size_t k = 0; k < coords.size(); ++k) {
    std::string cw = "solution coord " + std::to_string(k);
    s.add_coords(exp_from_json(detail::field(coords[k], "exp", cw), s.ring, cw), detail::int_field(coords[k], "t", cw));
  }
  for (const auto& b : detail::field(j, "blocks", w)) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_unsigned() || !b[1].is_number_unsigned() ||
        b[0].get<std::size_t>() > b[1].get<std::size_t>() || b[1].get<std::size_t>() > s.ncols())
      throw ParseError("solution: bad block " + b.dump());
    s.blocks.emplace_back(b[0].get<std::size_t>(), b[1].get<std::size_t>());
  }
  const Json& gens = detail::field(j, "generators", w);
  if (!gens.is_array()) throw ParseError("solution: 'generators' must be an array");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    std::string gw = "solution generator " + std::to_string(k);
    Row row(s.ncols(), Int(0));
    if (!gens[k].is_array()) throw ParseError(gw + ": must be an array");
    for (const auto& entry : gens[k]) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_unsigned() ||
          entry[0].get<std::size_t>() >= s.ncols())
        throw ParseError(gw + ": bad entry " + entry.dump());
      row[entry[0].get<std::size_t>()] = detail::parse_int(entry[1], gw);
    }
    s.generators.push_back(std::move(row));
  }
  s.howell = s.canonical(s.generators);
  s.divisors = detail::ints_from_json(detail::field(j, "divisors", w), "solution divisors");
  s.box_divisors = detail::ints_from_json(detail::field(j, "box_divisors", w), "solution box_divisors");
  const Json& ok = detail::field(j, "box_ok", w);
  if (!ok.is_boolean()) throw ParseError("solution: 'box_ok' must be a boolean");
  s.box_ok = ok.get<bool>();
  for (const auto& m : detail::field(j, "warnings", w)) {
    if (!m.is_string()) throw ParseError("solution: warnings must be strings");
    s.warnings.push_back(m.get<std::string>());
  }
  return s;
}

using Element = std::variant<TiltPoly, WittSeries, WCElement, DividedSeries, VExpansion, PFraction, DieudonneModule,
                             SolutionModule>;

/// Dispatch on the "kind" field.
inline Element element_from_json(const Json& j) {
  const Json& k = detail::field(j, "kind", "element");
  if (!k.is_string()) throw ParseError("element: 'kind' must be a string");
  const std::string kind = k.get<std::string>();
  if (kind == "tilt") return tilt_from_json(j);
  if (kind == "wittseries") return witt_from_json(j);
  if (kind == "wcelement") return wc_from_json(j);
  if (kind == "divided") return divided_from_json(j);
  if (kind == "vexpansion") return vexpansion_from_json(j);
  if (kind == "pfraction") return pfraction_from_json(j);
  if (kind == "dmodule") return dmodule_from_json(j);
  if (kind == "solution") return solution_from_json(j);
  throw ParseError("element: unknown kind '" + kind + "'");
}

inline Json element_to_json(const Element& e) {
  return std::visit([](const auto& x) { return to_json(x); }, e);
}

/// Checks that are explicit bijection round trips.
inline bool is_round_trip_check(const std::string& name) {
  return name == "lift_recovers_classical" || name == "f_of_lift_equals_sw" || name == "units_log_round_trip" ||
         name == "log_units_round_trip";
}

struct ReportOptions {
  std::string suite = "default";
  RingDescriptor ring;
  unsigned long long seed = 0;
  bool timings = false;
};

/// Verification report. Wall-clock fields appear only with opt.timings, so
/// equal inputs give byte-identical output otherwise.
inline Json report_to_json(const TheoremReport& rep, const ReportOptions& opt) {
  Json out{{"kind", "report"}, {"suite", opt.suite}, {"seed", opt.seed}};
  out["parameters"] = {{"p", rep.p},
                       {"prec", rep.N},
                       {"xvars", opt.ring.nx},
                       {"yvars", opt.ring.ny},
                       {"box", detail::box_to_json(rep.box)},
                       {"enlarged_box", detail::box_to_json(rep.enlarged)}};
  Json instances = Json::array();
  std::size_t passed = 0;
  double total = 0;
  for (const auto& inst : rep.instances) {
    Json r{{"module", inst.module}, {"pass", inst.pass}};
    r["sw_divisors"] = detail::ints_to_json(inst.sw_divisors);
    r["independent_divisors"] = detail::ints_to_json(inst.independent_divisors);
    bool rt = true;
    Json checks = Json::array();
    for (const auto& c : inst.checks) {
      if (is_round_trip_check(c.name)) rt = rt && c.pass;
      Json cj{{"name", c.name}, {"pass", c.pass}};
      if (!c.detail.empty()) cj["detail"] = c.detail;
      checks.push_back(cj);
    }
    r["round_trips_pass"] = rt;
    r["checks"] = checks;
    if (!inst.pass) {
      for (const auto& c : inst.checks)
        if (!c.pass) {
          r["counterexample"] = {{"check", c.name}, {"detail", c.detail}};
          break;
        }
    }
    if (opt.timings) r["wall_clock_seconds"] = inst.seconds;
    total += inst.seconds;
    passed += inst.pass ? 1 : 0;
    instances.push_back(r);
  }
  out["instances"] = instances;
  out["summary"] = {{"instances", rep.instances.size()},
                    {"passed", passed},
                    {"failed", rep.instances.size() - passed},
                    {"pass", rep.pass}};
  if (opt.timings) out["summary"]["wall_clock_seconds"] = total;
  return out;
}

}  // namespace crys::io
