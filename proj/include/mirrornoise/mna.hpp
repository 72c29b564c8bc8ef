#pragma once

#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mirrornoise/devmodel.hpp"
#include "mirrornoise/linalg.hpp"
#include "mirrornoise/netlist.hpp"
#include "mirrornoise/parallel.hpp"

namespace mirrornoise {

// Logarithmic grid, endpoints inclusive. points == 1 yields {fstart}.
std::vector<double> log_grid(double fstart, double fstop, int points);
std::vector<double> linear_grid(double start, double stop, int points);

struct SystemMatrix {
  int dimension = 0;
  ComplexMatrix a;
  std::vector<cplx> rhs;
  std::vector<std::string> unknowns;  // "v(node)" then "i(label)"
};

enum class NoiseMechanism { Thermal, Flicker, InputVoltage };
const char* mechanism_name(NoiseMechanism m);
std::optional<NoiseMechanism> parse_mechanism(std::string_view s);

struct NoiseSourceInfo {
  std::string label;
  NoiseMechanism mechanism;
};

struct MnaOptions {
  std::set<std::string> removed;        // elements left out of the system entirely
  std::vector<std::string> loop_break;  // controlled sources whose gain is suspended
};

// Circuit + operating points, indexed for repeated assembly at any frequency.
// Immutable after construction; assembly is safe from concurrent workers.
class MnaSystem {
 public:
  MnaSystem(const Circuit& c, const ProcessParams& p, MnaOptions opts = {});

  int dimension() const { return dim_; }
  const Circuit& circuit() const { return circuit_; }
  const ProcessParams& process() const { return process_; }

  // Unknown index of a node voltage; -1 for ground. Throws Usage if unknown.
  int node_index(std::string_view node) const;

  ComplexMatrix matrix(double f) const;
  // Excitation from the declared AC magnitudes of all independent sources.
  std::vector<cplx> source_rhs() const;
  // Unit AC excitation of one independent source, all others zeroed.
  std::vector<cplx> unit_source_rhs(std::string_view label) const;
  // Unit current into node a and out of node b.
  std::vector<cplx> current_rhs(int node_a, int node_b) const;
  // Unit noise generator at the element's insertion point.
  std::vector<cplx> noise_rhs(const NoiseSourceInfo& src, double f) const;
  // Unit test signal for each loop-break element, signs +1, -1, ...
  std::vector<cplx> loop_rhs() const;
  // -sum(s_k * returned_k) / sum(s_k^2) from a loop-break solution.
  cplx return_ratio(const std::vector<cplx>& x, double f) const;

  const SmallSignal& operating_point(std::string_view label) const;
  double gds(std::string_view label) const;

  // Noise generators present in the circuit (zero-PSD sources omitted).
  std::vector<NoiseSourceInfo> noise_sources(bool flicker) const;
  double noise_psd(const NoiseSourceInfo& src, double f) const;

  cplx macro_gain(const MacroAmp& a, double f) const;

 private:
  struct Device {
    SmallSignal ss;
    double gds = 0.0;
  };
  cplx voltage(const std::vector<cplx>& x, int node) const;
  const Element& element(std::string_view label) const;

  Circuit circuit_;
  ProcessParams process_;
  MnaOptions opts_;
  int dim_ = 0;
  std::vector<int> node_row_;              // node -> unknown, -1 for ground
  std::map<std::string, int> branch_row_;  // V/E label -> unknown
  std::map<std::string, Device> devices_;
};

SystemMatrix stamp(const Circuit& c, double f, const ProcessParams& p = {});

struct AcResult {
  std::vector<double> freq_hz;
  std::vector<cplx> value;

  std::vector<double> magnitude() const;
  std::vector<double> magnitude_db() const;
  std::vector<double> phase_deg() const;
};

AcResult solve_ac(const Circuit& c, std::string_view in_src, std::string_view out_node,
                  const std::vector<double>& f_grid, const ProcessParams& p = {},
                  Exec exec = Exec::Parallel);

cplx transfer_from_source(const Circuit& c, std::string_view label, NoiseMechanism mechanism,
                          std::string_view out_node, double f, const ProcessParams& p = {});

struct NoiseOptions {
  bool flicker = true;
  std::set<std::string> exclude;  // added to any `.noise exclude=` list
};

struct NoiseContribution {
  std::string label;
  NoiseMechanism mechanism;
  std::vector<double> psd;  // output-referred, V^2/Hz per grid point

  std::string column() const;  // "<label>.<mechanism>"
};

struct NoiseReport {
  std::vector<double> freq_hz;
  std::vector<NoiseContribution> contributions;
  std::vector<double> total;               // V^2/Hz
  std::vector<cplx> gain;                  // out / in_src
  std::optional<std::vector<double>> input_referred;  // absent when any |gain| == 0

  // Per-source share of the total at the grid point nearest to f.
  std::vector<std::pair<std::string, double>> breakdown(double f) const;
};

NoiseReport noise_at_output(const Circuit& c, std::string_view out_node, std::string_view in_src,
                            const std::vector<double>& f_grid, const ProcessParams& p = {},
                            const NoiseOptions& opts = {}, Exec exec = Exec::Parallel);

// Uses the circuit's `.noise` directive for ports and exclusions.
NoiseReport noise_at_output(const Circuit& c, const std::vector<double>& f_grid,
                            const ProcessParams& p = {}, const NoiseOptions& opts = {},
                            Exec exec = Exec::Parallel);

AcResult input_impedance(const Circuit& c, std::pair<std::string, std::string> port,
                         const std::vector<double>& f_grid, const ProcessParams& p = {},
                         Exec exec = Exec::Parallel);

// Return ratio of the `.loopgain` target(s).
AcResult loop_gain(const Circuit& c, const std::vector<double>& f_grid, const ProcessParams& p = {},
                   Exec exec = Exec::Parallel);

}  // namespace mirrornoise
