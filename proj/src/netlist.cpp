#include "mirrornoise/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mirrornoise/error.hpp"
#include "mirrornoise/units.hpp"

namespace mirrornoise {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_ground_name(std::string_view s) { return s == "0" || lower(s) == "gnd"; }

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u >= 0x7f || c == '=' || c == ',') return false;
  }
  return true;
}

struct Token {
  std::string_view text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

struct SyntaxError {
  int column;
  std::string message;
};

class LineParser {
 public:
  LineParser(Circuit& c, std::vector<Token> toks, int line)
      : circuit_(c), toks_(std::move(toks)), line_(line) {}

  void parse() {
    const char type = static_cast<char>(std::toupper(static_cast<unsigned char>(toks_[0].text[0])));
    switch (type) {
      case 'R':
      case 'C':
        two_terminal_passive(type);
        break;
      case 'M':
        mosfet();
        break;
      case 'E':
        macro_amp();
        break;
      case 'V':
      case 'I':
        source(type);
        break;
      default:
        throw SyntaxError{toks_[0].column, "unknown element type '" + std::string(1, toks_[0].text[0]) + "'"};
    }
  }

 private:
  std::string label() {
    const auto& t = toks_[0];
    if (!valid_identifier(t.text) || t.text.size() < 2) {
      throw SyntaxError{t.column, "invalid element label '" + std::string(t.text) + "'"};
    }
    return canonical_label(t.text);
  }

  const Token& tok(std::size_t i, const char* what) {
    if (i >= toks_.size()) {
      const int col = toks_.empty() ? 1 : toks_.back().column + static_cast<int>(toks_.back().text.size());
      throw SyntaxError{col, std::string("missing ") + what};
    }
    return toks_[i];
  }

  int node_at(std::size_t i, const char* what) {
    const auto& t = tok(i, what);
    if (!valid_identifier(t.text)) {
      throw SyntaxError{t.column, std::string("invalid ") + what + " '" + std::string(t.text) + "'"};
    }
    return circuit_.node(t.text);
  }

  double number(const Token& t, std::string_view text) {
    auto v = parse_eng(text);
    if (!v) throw SyntaxError{t.column, "invalid number '" + std::string(text) + "'"};
    return *v;
  }

  // key=value pairs and bare flags after the positional fields.
  struct Param {
    std::string key;  // upper-case
    std::string_view value;
    bool has_value = false;
    const Token* tok = nullptr;
  };
  std::vector<Param> params_from(std::size_t first) {
    std::vector<Param> out;
    std::set<std::string> seen;
    for (std::size_t i = first; i < toks_.size(); ++i) {
      const auto& t = toks_[i];
      Param p;
      p.tok = &t;
      const auto eq = t.text.find('=');
      if (eq == std::string_view::npos) {
        p.key = upper(t.text);
      } else {
        p.key = upper(t.text.substr(0, eq));
        p.value = t.text.substr(eq + 1);
        p.has_value = true;
        if (p.key.empty() || p.value.empty()) throw SyntaxError{t.column, "malformed parameter '" + std::string(t.text) + "'"};
      }
      if (!seen.insert(p.key).second) throw SyntaxError{t.column, "repeated parameter '" + p.key + "'"};
      out.push_back(p);
    }
    return out;
  }

  double value_of(const Param& p) {
    if (!p.has_value) throw SyntaxError{p.tok->column, "parameter '" + p.key + "' needs a value"};
    return number(*p.tok, p.value);
  }

  void flag_only(const Param& p) {
    if (p.has_value) throw SyntaxError{p.tok->column, "flag '" + p.key + "' takes no value"};
  }

  [[noreturn]] void unknown(const Param& p) {
    throw SyntaxError{p.tok->column, "unknown parameter '" + p.key + "'"};
  }

  void finish(std::string lbl, ElementKind kind, std::vector<int> nodes) {
    Element e;
    e.label = std::move(lbl);
    e.kind = std::move(kind);
    e.nodes = std::move(nodes);
    e.line = line_;
    circuit_.elements.push_back(std::move(e));
  }

  void two_terminal_passive(char type) {
    auto lbl = label();
    const int a = node_at(1, "node");
    const int b = node_at(2, "node");
    const auto& vt = tok(3, "value");
    const double v = number(vt, vt.text);
    if (toks_.size() > 4) throw SyntaxError{toks_[4].column, "unexpected token '" + std::string(toks_[4].text) + "'"};
    if (type == 'R') finish(std::move(lbl), Resistor{v}, {a, b});
    else finish(std::move(lbl), Capacitor{v}, {a, b});
  }

  void mosfet() {
    auto lbl = label();
    std::vector<int> nodes{node_at(1, "drain node"), node_at(2, "gate node"), node_at(3, "source node"),
                           node_at(4, "bulk node")};
    Mosfet m;
    bool have_w = false, have_l = false, have_id = false;
    for (const auto& p : params_from(5)) {
      if (p.key == "W") m.geometry.width = value_of(p), have_w = true;
      else if (p.key == "L") m.geometry.length = value_of(p), have_l = true;
      else if (p.key == "ID") m.bias.id = value_of(p), have_id = true;
      else if (p.key == "GDS") m.gds = value_of(p);
      else if (p.key == "STACK") {
        const double s = value_of(p);
        if (s != std::floor(s) || s < 1 || s > 1e6) throw SyntaxError{p.tok->column, "STACK must be a positive integer"};
        m.geometry.series_stack = static_cast<int>(s);
      } else if (p.key == "P") flag_only(p), m.polarity = Polarity::P;
      else if (p.key == "N") flag_only(p), m.polarity = Polarity::N;
      else if (p.key == "DTMOS") flag_only(p), m.dtmos = true;
      else unknown(p);
    }
    const int col = toks_.back().column;
    if (!have_w) throw SyntaxError{col, "MOSFET requires W="};
    if (!have_l) throw SyntaxError{col, "MOSFET requires L="};
    if (!have_id) throw SyntaxError{col, "MOSFET requires ID="};
    finish(std::move(lbl), m, std::move(nodes));
  }

  void macro_amp() {
    auto lbl = label();
    const int out = node_at(1, "output node");
    const auto& ref = tok(2, "reference node");
    if (!is_ground_name(ref.text)) throw SyntaxError{ref.column, "macro amplifier output must be referenced to 0"};
    const int inp = node_at(3, "non-inverting input node");
    const int inn = node_at(4, "inverting input node");
    MacroAmp a;
    bool have_gain = false;
    for (const auto& p : params_from(5)) {
      if (p.key == "GAIN") a.dc_gain = value_of(p), have_gain = true;
      else if (p.key == "POLE") a.pole_hz = value_of(p);
      else if (p.key == "VNOISE") a.input_noise_psd = value_of(p);
      else unknown(p);
    }
    if (!have_gain) throw SyntaxError{toks_.back().column, "macro amplifier requires GAIN="};
    finish(std::move(lbl), a, {out, inp, inn});
  }

  void source(char type) {
    auto lbl = label();
    const int a = node_at(1, "node");
    const int b = node_at(2, "node");
    double dc = 0.0, ac = 0.0;
    bool have_dc = false;
    for (const auto& p : params_from(3)) {
      if (p.key == "DC") dc = value_of(p), have_dc = true;
      else if (p.key == "AC") ac = value_of(p);
      else unknown(p);
    }
    if (!have_dc) throw SyntaxError{toks_.back().column, "source requires DC="};
    if (type == 'V') finish(std::move(lbl), VSource{dc, ac}, {a, b});
    else finish(std::move(lbl), ISource{dc, ac}, {a, b});
  }

  Circuit& circuit_;
  std::vector<Token> toks_;
  int line_;
};

void parse_directive(Circuit& c, const std::vector<Token>& toks) {
  const std::string name = lower(toks[0].text);
  if (name == ".loopgain") {
    if (!c.loopgain.empty()) throw SyntaxError{toks[0].column, "duplicate .loopgain directive"};
    if (toks.size() < 2) throw SyntaxError{toks[0].column + 9, ".loopgain needs an element label"};
    if (toks.size() > 3) throw SyntaxError{toks[3].column, "unexpected token '" + std::string(toks[3].text) + "'"};
    for (std::size_t i = 1; i < toks.size(); ++i) {
      if (!valid_identifier(toks[i].text)) throw SyntaxError{toks[i].column, "invalid label"};
      c.loopgain.push_back(canonical_label(toks[i].text));
    }
    return;
  }
  if (name == ".noise") {
    if (c.noise) throw SyntaxError{toks[0].column, "duplicate .noise directive"};
    NoiseDirective nd;
    bool have_out = false, have_in = false;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const auto& t = toks[i];
      const auto eq = t.text.find('=');
      if (eq == std::string_view::npos) throw SyntaxError{t.column, "expected key=value"};
      const std::string key = lower(t.text.substr(0, eq));
      const std::string_view val = t.text.substr(eq + 1);
      if (key == "out" && valid_identifier(val)) nd.out_node = canonical_node(val), have_out = true;
      else if (key == "in" && valid_identifier(val)) nd.in_source = canonical_label(val), have_in = true;
      else if (key == "exclude" && !val.empty()) {
        std::string_view rest = val;
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          const auto item = rest.substr(0, comma);
          if (!valid_identifier(item)) throw SyntaxError{t.column, "invalid exclude list"};
          nd.exclude.push_back(canonical_label(item));
          rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
          if (comma != std::string_view::npos && rest.empty()) throw SyntaxError{t.column, "invalid exclude list"};
        }
      } else throw SyntaxError{t.column, "unknown .noise field '" + std::string(t.text) + "'"};
    }
    if (!have_out || !have_in) throw SyntaxError{toks[0].column, ".noise needs out=<node> and in=<source>"};
    c.noise = std::move(nd);
    return;
  }
  throw SyntaxError{toks[0].column, "unknown directive '" + std::string(toks[0].text) + "'"};
}

std::string node_name(const Circuit& c, int idx) { return c.node_names.at(static_cast<std::size_t>(idx)); }

}  // namespace

std::string canonical_label(std::string_view s) { return upper(s); }

std::string canonical_node(std::string_view s) { return is_ground_name(s) ? "0" : lower(s); }

Circuit::Circuit() { node_names.push_back("0"); }

std::optional<int> Circuit::find_node(std::string_view name) const {
  const std::string key = canonical_node(name);
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    if (node_names[i] == key) return static_cast<int>(i);
  }
  return std::nullopt;
}

int Circuit::node(std::string_view name) {
  if (auto idx = find_node(name)) return *idx;
  node_names.push_back(canonical_node(name));
  return static_cast<int>(node_names.size()) - 1;
}

const Element* Circuit::find(std::string_view label) const {
  const std::string key = canonical_label(label);
  for (const auto& e : elements) {
    if (e.label == key) return &e;
  }
  return nullptr;
}

Element* Circuit::find(std::string_view label) {
  return const_cast<Element*>(static_cast<const Circuit&>(*this).find(label));
}

Element& Circuit::add(std::string_view label, ElementKind kind, std::initializer_list<std::string_view> nodes) {
  Element e;
  e.label = canonical_label(label);
  e.kind = std::move(kind);
  for (auto n : nodes) e.nodes.push_back(node(n));
  elements.push_back(std::move(e));
  return elements.back();
}

namespace {

bool same_kind(const ElementKind& a, const ElementKind& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Resistor>) return x.r == y.r;
        else if constexpr (std::is_same_v<T, Capacitor>) return x.c == y.c;
        else if constexpr (std::is_same_v<T, Mosfet>)
          return x.geometry.width == y.geometry.width && x.geometry.length == y.geometry.length &&
                 x.geometry.series_stack == y.geometry.series_stack && x.bias.id == y.bias.id &&
                 x.polarity == y.polarity && x.dtmos == y.dtmos && x.gds == y.gds;
        else if constexpr (std::is_same_v<T, VSource> || std::is_same_v<T, ISource>)
          return x.dc == y.dc && x.ac_mag == y.ac_mag;
        else
          return x.dc_gain == y.dc_gain && x.pole_hz == y.pole_hz && x.input_noise_psd == y.input_noise_psd;
      },
      a);
}

}  // namespace

bool structurally_equal(const Circuit& a, const Circuit& b) {
  if (a.title != b.title || a.elements.size() != b.elements.size() || a.loopgain != b.loopgain) return false;
  if (a.noise.has_value() != b.noise.has_value()) return false;
  if (a.noise && (a.noise->out_node != b.noise->out_node || a.noise->in_source != b.noise->in_source ||
                  a.noise->exclude != b.noise->exclude)) {
    return false;
  }
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    const auto& x = a.elements[i];
    const auto& y = b.elements[i];
    if (x.label != y.label || x.nodes.size() != y.nodes.size() || !same_kind(x.kind, y.kind)) return false;
    for (std::size_t k = 0; k < x.nodes.size(); ++k) {
      if (node_name(a, x.nodes[k]) != node_name(b, y.nodes[k])) return false;
    }
  }
  return true;
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::ostringstream os;
  os << file << ':' << d.line << ':' << d.column << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << ": ";
  if (!d.label.empty()) os << d.label << ": ";
  os << d.message;
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseResult parse_netlist(std::string_view text) {
  ParseResult result;
  Circuit c;
  if (text.empty()) {
    result.diagnostics.push_back({Severity::Error, 1, 1, "", "empty netlist (missing title line)"});
    return result;
  }
  int line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (first) {
      c.title = std::string(line);
      first = false;
      continue;
    }
    auto toks = tokenize(line);
    if (toks.empty() || toks[0].text[0] == '*') continue;
    if (lower(toks[0].text) == ".end") break;
    try {
      if (toks[0].text[0] == '.') {
        parse_directive(c, toks);
      } else {
        const std::string lbl = canonical_label(toks[0].text);
        if (const Element* prev = c.find(lbl)) {
          result.diagnostics.push_back({Severity::Error, line_no, toks[0].column, lbl,
                                        "duplicate label (first defined on line " + std::to_string(prev->line) + ")"});
          continue;
        }
        LineParser(c, std::move(toks), line_no).parse();
      }
    } catch (const SyntaxError& e) {
      result.diagnostics.push_back({Severity::Error, line_no, e.column, "", e.message});
    }
  }
  auto semantic = validate(c);
  result.diagnostics.insert(result.diagnostics.end(), semantic.begin(), semantic.end());
  if (!has_errors(result.diagnostics)) result.circuit = std::move(c);
  return result;
}

std::vector<Diagnostic> validate(const Circuit& c) {
  std::vector<Diagnostic> out;
  auto err = [&](const Element* e, std::string msg) {
    out.push_back({Severity::Error, e ? e->line : 0, 1, e ? e->label : "", std::move(msg)});
  };
  std::map<std::string, int> labels;
  std::vector<int> degree(c.node_names.size(), 0);
  bool touches_ground = false;
  for (const auto& e : c.elements) {
    if (++labels[e.label] == 2) err(&e, "duplicate label");
    for (int n : e.nodes) {
      if (n < 0 || n >= c.node_count()) {
        err(&e, "terminal refers to an undeclared node");
        continue;
      }
      ++degree[static_cast<std::size_t>(n)];
      if (n == kGround) touches_ground = true;
    }
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            if (e.nodes.size() != 2) err(&e, "resistor needs two terminals");
            if (!(k.r > 0)) err(&e, "resistance must be positive");
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            if (e.nodes.size() != 2) err(&e, "capacitor needs two terminals");
            if (!(k.c > 0)) err(&e, "capacitance must be positive");
          } else if constexpr (std::is_same_v<T, Mosfet>) {
            if (e.nodes.size() != 4) err(&e, "MOSFET needs four terminals");
            if (!(k.geometry.width > 0 && k.geometry.length > 0)) err(&e, "W and L must be positive");
            if (k.geometry.series_stack < 1) err(&e, "STACK must be >= 1");
            if (!(k.bias.id > 0)) err(&e, "ID must be positive");
            if (k.gds && !(*k.gds >= 0)) err(&e, "GDS must be non-negative");
            if (k.dtmos && e.nodes.size() == 4 && e.nodes[3] != e.nodes[1]) err(&e, "DTMOS requires bulk tied to gate");
          } else if constexpr (std::is_same_v<T, MacroAmp>) {
            if (e.nodes.size() != 3) err(&e, "macro amplifier needs three terminals");
            if (!std::isfinite(k.dc_gain) || k.dc_gain == 0.0) err(&e, "GAIN must be finite and non-zero");
            if (k.pole_hz && !(*k.pole_hz > 0)) err(&e, "POLE must be positive");
            if (!(k.input_noise_psd >= 0)) err(&e, "VNOISE must be non-negative");
          } else {
            if (e.nodes.size() != 2) err(&e, "source needs two terminals");
          }
        },
        e.kind);
  }
  if (!touches_ground) out.push_back({Severity::Error, 0, 1, "", "no element is connected to ground"});
  for (std::size_t n = 1; n < degree.size(); ++n) {
    if (degree[n] == 1) {
      const Element* owner = nullptr;
      for (const auto& e : c.elements) {
        if (std::find(e.nodes.begin(), e.nodes.end(), static_cast<int>(n)) != e.nodes.end()) owner = &e;
      }
      out.push_back({Severity::Warning, owner ? owner->line : 0, 1, owner ? owner->label : "",
                     "dangling node '" + c.node_names[n] + "'"});
    }
  }
  for (const auto& lbl : c.loopgain) {
    const Element* e = c.find(lbl);
    if (!e) err(nullptr, ".loopgain target '" + lbl + "' not found");
    else if (!e->as<MacroAmp>() && !e->as<Mosfet>()) err(e, ".loopgain target is not a controlled source");
  }
  if (c.loopgain.size() == 2 && c.find(c.loopgain[0]) && c.find(c.loopgain[1]) &&
      c.find(c.loopgain[0])->kind.index() != c.find(c.loopgain[1])->kind.index()) {
    err(nullptr, ".loopgain pair must be of the same element type");
  }
  if (c.noise) {
    if (!c.find_node(c.noise->out_node)) err(nullptr, ".noise output node '" + c.noise->out_node + "' not found");
    const Element* in = c.find(c.noise->in_source);
    if (!in) err(nullptr, ".noise input source '" + c.noise->in_source + "' not found");
    else if (!in->as<VSource>() && !in->as<ISource>()) err(in, ".noise input is not an independent source");
    for (const auto& x : c.noise->exclude) {
      if (!c.find(x)) err(nullptr, ".noise exclude target '" + x + "' not found");
    }
  }
  return out;
}

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  os << c.title << '\n';
  auto nodes = [&](const Element& e) {
    std::string s;
    for (int n : e.nodes) s += ' ' + node_name(c, n);
    return s;
  };
  for (const auto& e : c.elements) {
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            os << e.label << nodes(e) << ' ' << format_exact(k.r);
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            os << e.label << nodes(e) << ' ' << format_exact(k.c);
          } else if constexpr (std::is_same_v<T, Mosfet>) {
            os << e.label << nodes(e) << " W=" << format_exact(k.geometry.width)
               << " L=" << format_exact(k.geometry.length) << " ID=" << format_exact(k.bias.id);
            if (k.geometry.series_stack != 1) os << " STACK=" << k.geometry.series_stack;
            if (k.polarity == Polarity::P) os << " P";
            if (k.dtmos) os << " DTMOS";
            if (k.gds) os << " GDS=" << format_exact(*k.gds);
          } else if constexpr (std::is_same_v<T, MacroAmp>) {
            os << e.label << ' ' << node_name(c, e.nodes[0]) << " 0 " << node_name(c, e.nodes[1]) << ' '
               << node_name(c, e.nodes[2]) << " GAIN=" << format_exact(k.dc_gain);
            if (k.pole_hz) os << " POLE=" << format_exact(*k.pole_hz);
            if (k.input_noise_psd != 0.0) os << " VNOISE=" << format_exact(k.input_noise_psd);
          } else {
            os << e.label << nodes(e) << " DC=" << format_exact(k.dc);
            if (k.ac_mag != 0.0) os << " AC=" << format_exact(k.ac_mag);
          }
        },
        e.kind);
    os << '\n';
  }
  if (!c.loopgain.empty()) {
    os << ".loopgain";
    for (const auto& l : c.loopgain) os << ' ' << l;
    os << '\n';
  }
  if (c.noise) {
    os << ".noise out=" << c.noise->out_node << " in=" << c.noise->in_source;
    if (!c.noise->exclude.empty()) {
      os << " exclude=";
      for (std::size_t i = 0; i < c.noise->exclude.size(); ++i) os << (i ? "," : "") << c.noise->exclude[i];
    }
    os << '\n';
  }
  os << ".end\n";
  return os.str();
}

}  // namespace mirrornoise
