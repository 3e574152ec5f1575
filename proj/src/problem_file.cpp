#include "bbsoc/problem_file.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bbsoc/error.hpp"
#include "bbsoc/expression.hpp"
#include "bbsoc/problems.hpp"
#include "json.hpp"

namespace bbsoc {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

struct ParsedFunctions {
  int n_x = 0;
  int n_u = 0;
  std::vector<Expression> dynamics;
  std::optional<Expression> lagrange;
  std::optional<Expression> mayer;
  std::vector<Expression> boundary;

  // Point slots: x, u, t.
  template <class T>
  std::vector<T> point_slots(std::span<const T> x, std::span<const T> u, const T& t) const {
    std::vector<T> s(x.begin(), x.end());
    s.insert(s.end(), u.begin(), u.end());
    s.push_back(t);
    return s;
  }

  // Endpoint slots: x0, t0, xf, tf.
  template <class T>
  std::vector<T> endpoint_slots(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf) const {
    std::vector<T> s(x0.begin(), x0.end());
    s.push_back(t0);
    s.insert(s.end(), xf.begin(), xf.end());
    s.push_back(tf);
    return s;
  }

  template <class T>
  void dynamics_at(std::span<const T> x, std::span<const T> u, const T& t, std::span<T> out) const {
    const std::vector<T> s = point_slots(x, u, t);
    for (int i = 0; i < n_x; ++i) out[i] = dynamics[i].evaluate<T>(s);
  }
};

// Thin functor over shared parsed data so copies stay cheap.
struct FileOcp {
  std::shared_ptr<const ParsedFunctions> f;

  template <class T>
  void dynamics(std::span<const T> x, std::span<const T> u, const T& t, std::span<T> out) const {
    f->dynamics_at(x, u, t, out);
  }
  template <class T>
  T lagrange(std::span<const T> x, std::span<const T> u, const T& t) const {
    if (!f->lagrange) return T(0.0);
    const std::vector<T> s = f->point_slots(x, u, t);
    return f->lagrange->evaluate<T>(s);
  }
  template <class T>
  T mayer(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf) const {
    if (!f->mayer) return T(0.0);
    const std::vector<T> s = f->endpoint_slots(x0, t0, xf, tf);
    return f->mayer->evaluate<T>(s);
  }
  template <class T>
  void boundary(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf, std::span<T> out) const {
    if (f->boundary.empty()) return;
    const std::vector<T> s = f->endpoint_slots(x0, t0, xf, tf);
    for (std::size_t k = 0; k < f->boundary.size(); ++k) out[k] = f->boundary[k].evaluate<T>(s);
  }
};

const std::set<std::string>& reserved_names() {
  static const std::set<std::string> names{"t",    "t0",   "tf",   "pi",    "inf",  "initial", "final", "sin",
                                           "cos",  "tan",  "exp",  "log",   "sqrt", "abs",     "sinh",  "cosh",
                                           "tanh", "asin", "acos", "atan",  "atan2", "pow"};
  return names;
}

void check_identifier(const std::string& where, const std::string& name, std::set<std::string>& taken) {
  const bool ok = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                  std::all_of(name.begin(), name.end(),
                              [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
  if (!ok) fail(where, "'" + name + "' is not a valid name");
  if (reserved_names().count(name) != 0) fail(where, "'" + name + "' is reserved");
  if (!taken.insert(name).second) fail(where, "'" + name + "' is defined twice");
}

void check_keys(const std::string& where, const Json& obj, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
      fail(where, "unknown key '" + item.key() + "'");
    }
  }
}

class FileReader {
 public:
  OcpDefinition read(const Json& doc) {
    check_keys("problem", doc,
               {"name", "description", "parameters", "states", "controls", "t0", "tf", "dynamics", "lagrange",
                "mayer", "boundary", "regularization_weight"});
    if (!doc.contains("name") || !doc["name"].is_string()) fail("name", "a string is required");
    ocp_.name = doc["name"].get<std::string>();
    if (doc.contains("parameters")) read_parameters(doc["parameters"]);
    if (!doc.contains("states")) fail("states", "required");
    read_states(doc["states"]);
    if (!doc.contains("controls")) fail("controls", "required");
    read_controls(doc["controls"]);
    ocp_.t0 = doc.contains("t0") ? read_time("t0", doc["t0"]) : TimeSpec::fixed(0.0);
    if (!doc.contains("tf")) fail("tf", "required");
    ocp_.tf = read_time("tf", doc["tf"]);
    if (doc.contains("regularization_weight")) {
      ocp_.regularization_weight = number("regularization_weight", doc["regularization_weight"]);
    }
    read_functions(doc);
    ocp_.validate();
    return ocp_;
  }

 private:
  double number(const std::string& where, const Json& v) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      ExpressionSymbols consts;
      consts.constants = parameters_;
      try {
        return Expression::parse(v.get<std::string>(), consts).constant_value();
      } catch (const Error& e) {
        fail(where, e.what());
      }
    }
    fail(where, "expected a number or a constant expression");
  }

  std::optional<double> optional_number(const Json& obj, const char* key, const std::string& where) const {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    return number(where + "." + key, obj[key]);
  }

  void read_parameters(const Json& params) {
    if (!params.is_object()) fail("parameters", "expected an object");
    for (const auto& item : params.items()) {
      const std::string where = "parameters." + item.key();
      check_identifier(where, item.key(), names_);
      parameters_[item.key()] = number(where, item.value());
    }
  }

  void read_states(const Json& states) {
    if (!states.is_array() || states.empty()) fail("states", "expected a non-empty array");
    ocp_.n_x = static_cast<int>(states.size());
    bool any_bound = false;
    bool any_scale = false;
    std::vector<std::optional<double>> lo, hi, scale;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::string where = "states[" + std::to_string(i) + "]";
      const Json& s = states[i];
      check_keys(where, s, {"name", "initial", "final", "min", "max", "scale", "guess"});
      if (!s.contains("name") || !s["name"].is_string()) fail(where, "name is required");
      const std::string name = s["name"].get<std::string>();
      check_identifier(where, name, names_);
      ocp_.state_names.push_back(name);
      ocp_.initial_state.push_back(optional_number(s, "initial", where));
      ocp_.final_state.push_back(optional_number(s, "final", where));
      ocp_.state_guess.push_back(optional_number(s, "guess", where));
      lo.push_back(optional_number(s, "min", where));
      hi.push_back(optional_number(s, "max", where));
      scale.push_back(optional_number(s, "scale", where));
      any_bound = any_bound || lo.back() || hi.back();
      any_scale = any_scale || scale.back();
    }
    if (any_bound) {
      for (std::size_t i = 0; i < lo.size(); ++i) {
        ocp_.x_min.push_back(lo[i].value_or(-kInf));
        ocp_.x_max.push_back(hi[i].value_or(kInf));
      }
    }
    if (any_scale) {
      for (const auto& s : scale) ocp_.state_scale.push_back(s.value_or(1.0));
    }
  }

  void read_controls(const Json& controls) {
    if (!controls.is_array() || controls.empty()) fail("controls", "expected a non-empty array");
    ocp_.n_u = static_cast<int>(controls.size());
    bool any_guess = false;
    bool any_scale = false;
    std::vector<std::optional<double>> guess, scale;
    for (std::size_t j = 0; j < controls.size(); ++j) {
      const std::string where = "controls[" + std::to_string(j) + "]";
      const Json& c = controls[j];
      check_keys(where, c, {"name", "min", "max", "scale", "guess"});
      if (!c.contains("name") || !c["name"].is_string()) fail(where, "name is required");
      const std::string name = c["name"].get<std::string>();
      check_identifier(where, name, names_);
      ocp_.control_names.push_back(name);
      ocp_.u_min.push_back(optional_number(c, "min", where).value_or(-kInf));
      ocp_.u_max.push_back(optional_number(c, "max", where).value_or(kInf));
      guess.push_back(optional_number(c, "guess", where));
      scale.push_back(optional_number(c, "scale", where));
      any_guess = any_guess || guess.back();
      any_scale = any_scale || scale.back();
    }
    if (any_guess) {
      for (int j = 0; j < ocp_.n_u; ++j) {
        const double lo = ocp_.u_min[j];
        const double hi = ocp_.u_max[j];
        double mid = 0.0;
        if (std::isfinite(lo) && std::isfinite(hi)) {
          mid = 0.5 * (lo + hi);
        } else if (std::isfinite(lo)) {
          mid = lo;
        } else if (std::isfinite(hi)) {
          mid = hi;
        }
        ocp_.control_guess.push_back(guess[j].value_or(mid));
      }
    }
    if (any_scale) {
      for (const auto& s : scale) ocp_.control_scale.push_back(s.value_or(1.0));
    }
  }

  TimeSpec read_time(const std::string& where, const Json& v) const {
    if (!v.is_object()) return TimeSpec::fixed(number(where, v));
    check_keys(where, v, {"guess", "min", "max"});
    const auto lo = optional_number(v, "min", where);
    const auto hi = optional_number(v, "max", where);
    const auto guess = optional_number(v, "guess", where);
    if (!lo || !hi) fail(where, "a free time needs both min and max");
    return TimeSpec::free_in(guess.value_or(0.5 * (*lo + *hi)), *lo, *hi);
  }

  ExpressionSymbols point_symbols() const {
    ExpressionSymbols s;
    s.variables = ocp_.state_names;
    s.variables.insert(s.variables.end(), ocp_.control_names.begin(), ocp_.control_names.end());
    s.variables.push_back("t");
    s.constants = parameters_;
    return s;
  }

  ExpressionSymbols endpoint_symbols() const {
    ExpressionSymbols s;
    const int n = ocp_.n_x;
    s.variables.assign(static_cast<std::size_t>(2 * n + 2), std::string());
    s.variables[n] = "t0";
    s.variables[2 * n + 1] = "tf";
    for (int i = 0; i < n; ++i) s.endpoint_values[ocp_.state_names[i]] = {i, n + 1 + i};
    s.constants = parameters_;
    return s;
  }

  static Expression expression(const std::string& where, const Json& v, const ExpressionSymbols& symbols) {
    if (v.is_number()) return Expression::parse(v.dump(), symbols);
    if (!v.is_string()) fail(where, "expected an expression string");
    try {
      return Expression::parse(v.get<std::string>(), symbols);
    } catch (const Error& e) {
      fail(where, e.what());
    }
  }

  void read_functions(const Json& doc) {
    auto f = std::make_shared<ParsedFunctions>();
    f->n_x = ocp_.n_x;
    f->n_u = ocp_.n_u;
    const ExpressionSymbols point = point_symbols();
    const ExpressionSymbols endpoint = endpoint_symbols();
    if (!doc.contains("dynamics")) fail("dynamics", "required");
    const Json& dyn = doc["dynamics"];
    if (dyn.is_array()) {
      if (static_cast<int>(dyn.size()) != ocp_.n_x) fail("dynamics", "needs one expression per state");
      for (std::size_t i = 0; i < dyn.size(); ++i) {
        f->dynamics.push_back(expression("dynamics[" + std::to_string(i) + "]", dyn[i], point));
      }
    } else if (dyn.is_object()) {
      for (const auto& item : dyn.items()) {
        if (std::find(ocp_.state_names.begin(), ocp_.state_names.end(), item.key()) == ocp_.state_names.end()) {
          fail("dynamics", "'" + item.key() + "' is not a state");
        }
      }
      for (const std::string& name : ocp_.state_names) {
        if (!dyn.contains(name)) fail("dynamics", "missing the rate of '" + name + "'");
        f->dynamics.push_back(expression("dynamics." + name, dyn[name], point));
      }
    } else {
      fail("dynamics", "expected an object keyed by state name or an array");
    }
    if (doc.contains("lagrange")) {
      f->lagrange = expression("lagrange", doc["lagrange"], point);
      ocp_.has_lagrange = true;
    }
    if (doc.contains("mayer")) {
      f->mayer = expression("mayer", doc["mayer"], endpoint);
      ocp_.has_mayer = true;
    }
    if (!ocp_.has_lagrange && !ocp_.has_mayer) fail("problem", "needs a lagrange or a mayer cost");
    if (doc.contains("boundary")) {
      const Json& b = doc["boundary"];
      if (!b.is_array()) fail("boundary", "expected an array of expressions");
      for (std::size_t k = 0; k < b.size(); ++k) {
        f->boundary.push_back(expression("boundary[" + std::to_string(k) + "]", b[k], endpoint));
      }
      ocp_.n_b = static_cast<int>(b.size());
    }
    ocp_.functions = make_ocp_functions(FileOcp{std::move(f)});
  }

  OcpDefinition ocp_;
  std::map<std::string, double> parameters_;
  std::set<std::string> names_;
};

}  // namespace

OcpDefinition parse_problem(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  return FileReader().read(doc);
}

OcpDefinition load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open problem file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_problem(text.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

OcpDefinition resolve_problem(const std::string& name_or_path) {
  const std::vector<std::string> names = builtin_problem_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return builtin_problem(name_or_path);
  std::ifstream probe(name_or_path);
  if (!probe) {
    throw Error(ErrorCode::kNotFound, "'" + name_or_path + "' is neither a built-in problem nor a readable file");
  }
  return load_problem_file(name_or_path);
}

}  // namespace bbsoc
