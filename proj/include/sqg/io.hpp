// Persistence: binary field/trajectory/control snapshots, CSV export, the
// key-value configuration schema and run manifests.

#pragma once

#include <map>
#include <optional>
#include <string>

#include "sqg/dynamics.hpp"

namespace sqg {

// .sqgf: little-endian, magic "SQGF", version, kmax, mode count, then
// (k1:i32, k2:i32, re:f64, im:f64) per half-lattice mode in lexicographic
// order.
void save_field(const SpectralField& f, const std::string& path);
SpectralField load_field(const std::string& path);

void save_field_csv(const SpectralField& f, const std::string& path);

// .sqgt / .sqgc: params header block + snapshot sequence at the given stride
// (the final state is always included).
void save_trajectory(const Trajectory& traj, const std::string& path, int stride = 1);
Trajectory load_trajectory(const std::string& path);

void save_control(const ControlPath& g, const SqgParams& p, const std::string& path);
ControlPath load_control(const std::string& path);

// Scalar time-series diagnostics: t, l2, h_alpha_minus_2beta,
// h_2alpha_minus_2beta, residual.
void save_diagnostics_csv(const Trajectory& traj, const std::vector<double>& residual,
                          const std::string& path);

// Key-value text configuration; returns the validated parameters plus any
// unrecognised experiment options for the caller.
struct Config {
    SqgParams params;
    std::map<std::string, std::string> extras;
};
Config config_load(const std::string& path);
Config config_parse(const std::string& text);
std::string params_to_text(const SqgParams& p);
SqgParams params_from_text(const std::string& text);

// FNV-1a 64-bit content digest, hex encoded.
std::string file_digest(const std::string& path);

struct RunManifest {
    std::string tool_version;
    std::string command;
    SqgParams params;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest
    std::string started_at;
    std::string finished_at;

    std::string to_text() const;
    std::string to_json() const;
};

void save_manifest(const RunManifest& m, const std::string& path, bool json);
// Recomputes every recorded digest; throws std::runtime_error on mismatch.
void verify_manifest_digests(const RunManifest& m);

// 17 significant digits, round-trip safe.
std::string format_double(double x);

}  // namespace sqg
