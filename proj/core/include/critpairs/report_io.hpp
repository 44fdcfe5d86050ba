#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "critpairs/electrostatics.hpp"
#include "critpairs/experiments.hpp"

namespace critpairs {

// Deterministic serialization layer. Every writer produces byte-identical
// output for equal inputs: object keys sorted, floats printed with 17
// significant digits through std::to_chars, newline '\n', no locale use
// anywhere. Complex numbers appear in JSON as two-element arrays [re, im].

// One polynomial draw with its divisor and equilibrium set.
struct SampleData {
  long N = 0;
  std::optional<Complex> xi;
  std::vector<Complex> coefficients;
  std::vector<Complex> zeros;
  std::vector<Complex> crits;
};

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // resolved flag -> value
  std::uint64_t master_seed = 0;
  std::string version;
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;
};

void write_pairing_json(const PairingReport& rep, const std::string& path);
PairingReport read_pairing_json(const std::string& path);
// Header row: N,trials,fail,p_fail,se,mean_outer,var_outer
void write_pairing_csv(const PairingReport& rep, const std::string& path);

void write_moment_json(const MomentReport& rep, const std::string& path);
MomentReport read_moment_json(const std::string& path);

void write_displacement_json(const DisplacementReport& rep,
                             const std::string& path);
DisplacementReport read_displacement_json(const std::string& path);

void write_sample_json(const SampleData& s, const std::string& path);
SampleData read_sample_json(const std::string& path);

// Markers only (kind,index,re,im); flow lines live in the SVG.
void write_figure_csv(const FigureData& fig, const std::string& path);

// Fixed-viewBox rendering of the chart window. Zeros are discs with
// class="zero", critical points squares with class="crit", the conditioned
// point an asterisk, the annulus two dashed circles with class="annulus".
void render_svg(const FigureData& fig, const std::string& path);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

// Flat key=value file, # comments and blank lines skipped, later keys win.
// A non-comment line without '=' is a config error.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Shared formatting helpers (used by the CLI for stdout too).
std::string format_double(double v);            // 17 significant digits
std::string format_fixed(double v, int places); // fixed, locale-free

}  // namespace critpairs
