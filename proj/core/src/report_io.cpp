#include "critpairs/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace critpairs {

namespace {

using nlohmann::json;  // std::map-backed: object keys iterate sorted

std::string to_chars_str(double v, std::chars_format fmt, int precision) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in output");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, fmt, precision);
  return std::string(buf, res.ptr);
}

void escape_into(const std::string& s, std::string& out) {
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
}

// nlohmann's dump() would print floats shortest-round-trip; the file format
// pins 17 significant digits instead, so serialization is done by hand.
void dump_into(const json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += '"';
        escape_into(it.key(), out);
        out += "\": ";
        dump_into(it.value(), out, indent + 1);
      }
      out += '\n';
      out += pad;
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_into(el, out, indent + 1);
      }
      out += '\n';
      out += pad;
      out += ']';
      return;
    }
    case json::value_t::string: {
      out += '"';
      escape_into(j.get_ref<const std::string&>(), out);
      out += '"';
      return;
    }
    case json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case json::value_t::number_float:
      out += to_chars_str(j.get<double>(), std::chars_format::general, 17);
      return;
    case json::value_t::null:
      out += "null";
      return;
    default:
      throw std::logic_error("unsupported json node");
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_json_file(const json& j, const std::string& path) {
  std::string out;
  dump_into(j, out, 0);
  out += '\n';
  write_text(path, out);
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  return json::parse(f);
}

json put_complex(Complex z) { return json::array({z.real(), z.imag()}); }

Complex get_complex(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::runtime_error("complex value must be [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json put_complex_list(const std::vector<Complex>& v) {
  json a = json::array();
  for (Complex z : v) a.push_back(put_complex(z));
  return a;
}

std::vector<Complex> get_complex_list(const json& j) {
  std::vector<Complex> v;
  v.reserve(j.size());
  for (const auto& el : j) v.push_back(get_complex(el));
  return v;
}

const char* kind_name(GaussianEnsemble::Kind k) {
  return k == GaussianEnsemble::Kind::su2 ? "su2" : "radial";
}

GaussianEnsemble::Kind kind_from(const std::string& s) {
  if (s == "su2") return GaussianEnsemble::Kind::su2;
  if (s == "radial") return GaussianEnsemble::Kind::radial;
  throw std::runtime_error("unknown ensemble kind: " + s);
}

const char* mode_name(CoordMode m) {
  return m == CoordMode::fs_normal ? "fs_normal" : "euclidean";
}

CoordMode mode_from(const std::string& s) {
  if (s == "fs_normal") return CoordMode::fs_normal;
  if (s == "euclidean") return CoordMode::euclidean;
  throw std::runtime_error("unknown coordinate mode: " + s);
}

const char* rule_name(RadiusRule r) {
  switch (r) {
    case RadiusRule::r_minus: return "r_minus";
    case RadiusRule::r_plus: return "r_plus";
    default: return "explicit_r";
  }
}

RadiusRule rule_from(const std::string& s) {
  if (s == "r_minus") return RadiusRule::r_minus;
  if (s == "r_plus") return RadiusRule::r_plus;
  if (s == "explicit_r") return RadiusRule::explicit_r;
  throw std::runtime_error("unknown radius rule: " + s);
}

json put_config(const PairingConfig& cfg) {
  json c;
  c["N_list"] = cfg.N_list;
  c["xi"] = put_complex(cfg.xi);
  c["eps"] = cfg.eps;
  c["gamma"] = cfg.gamma;
  c["kind"] = kind_name(cfg.kind);
  c["weight"] = cfg.weight ? json(cfg.weight->name) : json(nullptr);
  c["sigma"] =
      cfg.sigma ? put_complex_list(cfg.sigma->coeffs) : json(nullptr);
  c["trials"] = cfg.trials;
  c["master_seed"] = cfg.master_seed;
  c["coord_mode"] = mode_name(cfg.coord_mode);
  // workers is an execution detail: reports must be byte-identical at any
  // worker count, so it is echoed in the manifest only
  return c;
}

PairingConfig get_config(const json& c) {
  PairingConfig cfg;
  cfg.N_list = c.at("N_list").get<std::vector<long>>();
  cfg.xi = get_complex(c.at("xi"));
  cfg.eps = c.at("eps").get<double>();
  cfg.gamma = c.at("gamma").get<double>();
  cfg.kind = kind_from(c.at("kind").get<std::string>());
  if (!c.at("weight").is_null()) {
    const std::string name = c.at("weight").get<std::string>();
    if (name == "fs") cfg.weight = fs_weight();
    else if (name == "gaussian-planar") cfg.weight = gaussian_planar_weight();
    // weights defined only by lambdas cannot be rebuilt from a name
  }
  if (!c.at("sigma").is_null())
    cfg.sigma = ComplexPolynomial(get_complex_list(c.at("sigma")));
  cfg.trials = c.at("trials").get<long>();
  cfg.master_seed = c.at("master_seed").get<std::uint64_t>();
  cfg.coord_mode = mode_from(c.at("coord_mode").get<std::string>());
  return cfg;
}

}  // namespace

std::string format_double(double v) {
  return to_chars_str(v, std::chars_format::general, 17);
}

std::string format_fixed(double v, int places) {
  return to_chars_str(v, std::chars_format::fixed, places);
}

void write_pairing_json(const PairingReport& rep, const std::string& path) {
  json j;
  j["config"] = put_config(rep.config);
  json rows = json::array();
  for (const auto& s : rep.per_n) {
    json r;
    r["N"] = s.N;
    r["trials"] = s.trials;
    r["invalid"] = s.invalid;
    r["success_count"] = s.success_count;
    r["p_fail"] = s.p_fail;
    r["se_fail"] = s.se_fail;
    r["mean_outer"] = s.mean_outer;
    r["se_mean_outer"] = s.se_mean_outer;
    r["var_outer"] = s.var_outer;
    r["se_var_outer"] = s.se_var_outer;
    r["mean_inner"] = s.mean_inner;
    r["se_mean_inner"] = s.se_mean_inner;
    rows.push_back(std::move(r));
  }
  j["per_n"] = std::move(rows);
  j["fail_slope"] = {{"slope", rep.fail_slope.slope},
                     {"intercept", rep.fail_slope.intercept},
                     {"slope_se", rep.fail_slope.slope_se},
                     {"points_used", rep.fail_slope.points_used}};
  j["outside_summable_regime"] = rep.outside_summable_regime;
  write_json_file(j, path);
}

PairingReport read_pairing_json(const std::string& path) {
  const json j = read_json_file(path);
  PairingReport rep;
  rep.config = get_config(j.at("config"));
  for (const auto& r : j.at("per_n")) {
    PerNStats s;
    s.N = r.at("N").get<long>();
    s.trials = r.at("trials").get<long>();
    s.invalid = r.at("invalid").get<long>();
    s.success_count = r.at("success_count").get<long>();
    s.p_fail = r.at("p_fail").get<double>();
    s.se_fail = r.at("se_fail").get<double>();
    s.mean_outer = r.at("mean_outer").get<double>();
    s.se_mean_outer = r.at("se_mean_outer").get<double>();
    s.var_outer = r.at("var_outer").get<double>();
    s.se_var_outer = r.at("se_var_outer").get<double>();
    s.mean_inner = r.at("mean_inner").get<double>();
    s.se_mean_inner = r.at("se_mean_inner").get<double>();
    rep.per_n.push_back(s);
  }
  const json& f = j.at("fail_slope");
  rep.fail_slope.slope = f.at("slope").get<double>();
  rep.fail_slope.intercept = f.at("intercept").get<double>();
  rep.fail_slope.slope_se = f.at("slope_se").get<double>();
  rep.fail_slope.points_used = f.at("points_used").get<long>();
  rep.outside_summable_regime = j.at("outside_summable_regime").get<bool>();
  return rep;
}

void write_pairing_csv(const PairingReport& rep, const std::string& path) {
  std::string out = "N,trials,fail,p_fail,se,mean_outer,var_outer\n";
  for (const auto& s : rep.per_n) {
    const long fail = (s.trials - s.invalid) - s.success_count;
    out += std::to_string(s.N) + ',' + std::to_string(s.trials) + ',' +
           std::to_string(fail) + ',' + format_double(s.p_fail) + ',' +
           format_double(s.se_fail) + ',' + format_double(s.mean_outer) + ',' +
           format_double(s.var_outer) + '\n';
  }
  write_text(path, out);
}

void write_moment_json(const MomentReport& rep, const std::string& path) {
  json j;
  j["config"] = put_config(rep.config);
  j["rule"] = rule_name(rep.rule);
  j["explicit_radius"] = rep.explicit_radius;
  json rows = json::array();
  for (const auto& m : rep.rows) {
    json r;
    r["N"] = m.N;
    r["radius"] = m.radius;
    r["trials"] = m.trials;
    r["invalid"] = m.invalid;
    r["mc_mean"] = m.mc_mean;
    r["se_mean"] = m.se_mean;
    r["mc_var"] = m.mc_var;
    r["se_var"] = m.se_var;
    r["formula_mean"] = m.formula_mean;
    r["formula_var"] = m.formula_var;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  write_json_file(j, path);
}

MomentReport read_moment_json(const std::string& path) {
  const json j = read_json_file(path);
  MomentReport rep;
  rep.config = get_config(j.at("config"));
  rep.rule = rule_from(j.at("rule").get<std::string>());
  rep.explicit_radius = j.at("explicit_radius").get<double>();
  for (const auto& r : j.at("rows")) {
    MomentRow m;
    m.N = r.at("N").get<long>();
    m.radius = r.at("radius").get<double>();
    m.trials = r.at("trials").get<long>();
    m.invalid = r.at("invalid").get<long>();
    m.mc_mean = r.at("mc_mean").get<double>();
    m.se_mean = r.at("se_mean").get<double>();
    m.mc_var = r.at("mc_var").get<double>();
    m.se_var = r.at("se_var").get<double>();
    m.formula_mean = r.at("formula_mean").get<double>();
    m.formula_var = r.at("formula_var").get<double>();
    rep.rows.push_back(m);
  }
  return rep;
}

void write_displacement_json(const DisplacementReport& rep,
                             const std::string& path) {
  json j;
  j["config"] = put_config(rep.config);
  json rows = json::array();
  for (const auto& d : rep.rows) {
    json r;
    r["N"] = d.N;
    r["successes"] = d.successes;
    r["median_scaled"] = d.median_scaled;
    r["circ_mean_arg"] = d.circ_mean_arg;
    r["circ_sd"] = d.circ_sd;
    r["frac_inward"] = d.frac_inward;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  write_json_file(j, path);
}

DisplacementReport read_displacement_json(const std::string& path) {
  const json j = read_json_file(path);
  DisplacementReport rep;
  rep.config = get_config(j.at("config"));
  for (const auto& r : j.at("rows")) {
    DisplacementRow d;
    d.N = r.at("N").get<long>();
    d.successes = r.at("successes").get<long>();
    d.median_scaled = r.at("median_scaled").get<double>();
    d.circ_mean_arg = r.at("circ_mean_arg").get<double>();
    d.circ_sd = r.at("circ_sd").get<double>();
    d.frac_inward = r.at("frac_inward").get<double>();
    rep.rows.push_back(d);
  }
  return rep;
}

void write_sample_json(const SampleData& s, const std::string& path) {
  json j;
  j["N"] = s.N;
  j["xi"] = s.xi ? put_complex(*s.xi) : json(nullptr);
  j["coefficients"] = put_complex_list(s.coefficients);
  j["zeros"] = put_complex_list(s.zeros);
  j["crits"] = put_complex_list(s.crits);
  write_json_file(j, path);
}

SampleData read_sample_json(const std::string& path) {
  const json j = read_json_file(path);
  SampleData s;
  s.N = j.at("N").get<long>();
  if (!j.at("xi").is_null()) s.xi = get_complex(j.at("xi"));
  s.coefficients = get_complex_list(j.at("coefficients"));
  s.zeros = get_complex_list(j.at("zeros"));
  s.crits = get_complex_list(j.at("crits"));
  return s;
}

void write_figure_csv(const FigureData& fig, const std::string& path) {
  std::string out = "kind,index,re,im\n";
  auto row = [&out](const char* kind, long i, Complex z) {
    out += kind;
    out += ',' + std::to_string(i) + ',' + format_double(z.real()) + ',' +
           format_double(z.imag()) + '\n';
  };
  for (size_t i = 0; i < fig.zeros.size(); ++i)
    row("zero", static_cast<long>(i), fig.zeros[i]);
  for (size_t i = 0; i < fig.crits.size(); ++i)
    row("critical", static_cast<long>(i), fig.crits[i]);
  if (fig.xi) row("xi", 0, *fig.xi);
  write_text(path, out);
}

namespace {

constexpr double kSvgWidth = 800.0;

struct SvgMap {
  const Window* w;
  double height;

  double px(double x) const { return (x - w->x0) / w->width() * kSvgWidth; }
  double py(double y) const { return (w->y1 - y) / w->height() * height; }
};

std::string pt(double v) { return format_fixed(v, 2); }

}  // namespace

void render_svg(const FigureData& fig, const std::string& path) {
  if (fig.window.width() <= 0 || fig.window.height() <= 0)
    throw std::invalid_argument("figure window is empty");
  SvgMap m{&fig.window,
           kSvgWidth * fig.window.height() / fig.window.width()};

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         pt(kSvgWidth) + ' ' + pt(m.height) + "\">\n";
  out += "<rect width=\"" + pt(kSvgWidth) + "\" height=\"" + pt(m.height) +
         "\" fill=\"#ffffff\"/>\n";

  for (const auto& fl : fig.flowlines) {
    if (fl.points.size() < 2) continue;
    // cap rendered vertices; terminal point always kept
    const size_t stride = fl.points.size() / 400 + 1;
    out += "<polyline class=\"flow\" fill=\"none\" stroke=\"#9aa7b8\" "
           "stroke-width=\"0.8\" points=\"";
    for (size_t i = 0; i < fl.points.size(); i += stride) {
      out += pt(m.px(fl.points[i].real())) + ',' +
             pt(m.py(fl.points[i].imag())) + ' ';
    }
    out += pt(m.px(fl.points.back().real())) + ',' +
           pt(m.py(fl.points.back().imag()));
    out += "\"/>\n";
  }

  auto circle = [&](const Circle& c, const char* cls) {
    // chart circles stay circles under the linear window map
    out += "<circle class=\"";
    out += cls;
    out += "\" cx=\"" + pt(m.px(c.center.real())) + "\" cy=\"" +
           pt(m.py(c.center.imag())) + "\" r=\"" +
           pt(c.radius / fig.window.width() * kSvgWidth) +
           "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.2\" "
           "stroke-dasharray=\"5 4\"/>\n";
  };
  if (fig.annulus_inner) circle(*fig.annulus_inner, "annulus");
  if (fig.annulus_outer) circle(*fig.annulus_outer, "annulus");

  for (Complex z : fig.zeros) {
    out += "<circle class=\"zero\" cx=\"" + pt(m.px(z.real())) + "\" cy=\"" +
           pt(m.py(z.imag())) + "\" r=\"4\" fill=\"#111111\"/>\n";
  }
  for (Complex c : fig.crits) {
    out += "<rect class=\"crit\" x=\"" + pt(m.px(c.real()) - 3.5) +
           "\" y=\"" + pt(m.py(c.imag()) - 3.5) +
           "\" width=\"7\" height=\"7\" fill=\"#2457c5\"/>\n";
  }
  if (fig.xi) {
    const double cx = m.px(fig.xi->real()), cy = m.py(fig.xi->imag());
    const double a = 7.0, h = a * 0.5, v = a * 0.8660254;
    out += "<g class=\"xi\" stroke=\"#c0392b\" stroke-width=\"2\">";
    out += "<line x1=\"" + pt(cx - a) + "\" y1=\"" + pt(cy) + "\" x2=\"" +
           pt(cx + a) + "\" y2=\"" + pt(cy) + "\"/>";
    out += "<line x1=\"" + pt(cx - h) + "\" y1=\"" + pt(cy - v) + "\" x2=\"" +
           pt(cx + h) + "\" y2=\"" + pt(cy + v) + "\"/>";
    out += "<line x1=\"" + pt(cx - h) + "\" y1=\"" + pt(cy + v) + "\" x2=\"" +
           pt(cx + h) + "\" y2=\"" + pt(cy - v) + "\"/>";
    out += "</g>\n";
  }
  out += "</svg>\n";
  write_text(path, out);
}

void write_manifest(const RunManifest& m, const std::string& path) {
  json j;
  j["command"] = m.command;
  json cfg;
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["master_seed"] = m.master_seed;
  j["version"] = m.version;
  j["duration_seconds"] = m.duration_seconds;
  j["outputs"] = m.outputs;
  write_json_file(j, path);
}

RunManifest read_manifest(const std::string& path) {
  const json j = read_json_file(path);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  for (const auto& [k, v] : j.at("config").items())
    m.config[k] = v.get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  m.duration_seconds = j.at("duration_seconds").get<double>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(f, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has no '=': " + t);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has empty key");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

}  // namespace critpairs
