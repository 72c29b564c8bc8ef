#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirrornoise/devmodel.hpp"

namespace mirrornoise {

inline constexpr int kGround = 0;

struct Resistor {
  double r = 0.0;
};
struct Capacitor {
  double c = 0.0;
};
enum class Polarity { N, P };
struct Mosfet {
  MosGeometry geometry;
  MosBias bias;
  Polarity polarity = Polarity::N;
  bool dtmos = false;
  std::optional<double> gds;  // override; otherwise 0 (no channel-length modulation)
};
struct VSource {
  double dc = 0.0;
  double ac_mag = 0.0;
};
struct ISource {
  double dc = 0.0;
  double ac_mag = 0.0;
};
// Single-pole VCVS: out = gain / (1 + j f / pole) * (in+ - in-), with an
// optional white input-referred noise voltage PSD in series with in+.
struct MacroAmp {
  double dc_gain = 1.0;
  std::optional<double> pole_hz;
  double input_noise_psd = 0.0;  // V^2/Hz
};

using ElementKind = std::variant<Resistor, Capacitor, Mosfet, VSource, ISource, MacroAmp>;

// Terminal order: R/C/V/I (n1, n2); Mosfet (d, g, s, b); MacroAmp (out, in+, in-).
struct Element {
  std::string label;  // upper-case, includes the type letter
  ElementKind kind;
  std::vector<int> nodes;
  int line = 0;  // source line, 0 when built programmatically

  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&kind);
  }
};

struct NoiseDirective {
  std::string out_node;
  std::string in_source;
  std::vector<std::string> exclude;
};

class Circuit {
 public:
  Circuit();

  std::string title;
  std::vector<std::string> node_names;  // index 0 is ground "0"
  std::vector<Element> elements;
  std::vector<std::string> loopgain;  // one label, or two for a differential break
  std::optional<NoiseDirective> noise;

  // Index of an existing node; nullopt if absent. Names are case-insensitive.
  std::optional<int> find_node(std::string_view name) const;
  int node(std::string_view name);  // finds or creates
  int node_count() const { return static_cast<int>(node_names.size()); }

  const Element* find(std::string_view label) const;
  Element* find(std::string_view label);

  // Programmatic builders; labels and node names are canonicalized.
  Element& add(std::string_view label, ElementKind kind, std::initializer_list<std::string_view> nodes);
};

bool structurally_equal(const Circuit& a, const Circuit& b);

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 0;
  int column = 0;
  std::string label;  // element label when applicable
  std::string message;
};

// `file:line:col: severity: message`
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

struct ParseResult {
  std::optional<Circuit> circuit;  // present iff no error-severity diagnostics
  std::vector<Diagnostic> diagnostics;
};

// Never throws; every failure is reported as a positioned diagnostic.
ParseResult parse_netlist(std::string_view text);

std::string serialize(const Circuit& c);

// Empty iff every circuit invariant holds.
std::vector<Diagnostic> validate(const Circuit& c);

bool has_errors(const std::vector<Diagnostic>& diags);

std::string canonical_label(std::string_view s);
std::string canonical_node(std::string_view s);

}  // namespace mirrornoise
