#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lattwave/lattice.hpp"
#include "lattwave/solvers.hpp"

namespace lattwave {

// Initial-datum recipe. Kinds:
//   zero       identically 0
//   constant   amplitude * (re + i*im) everywhere
//   delta      amplitude at the origin
//   gaussian   amplitude * exp(-|m|^2 / width), signed coordinates
//   random     iid complex Gaussians from the run seed
//   blowup_reference  spatially constant data on the closed-form focusing
//                     trajectory (sets the velocity too; uses t0 and p)
//   snapshot   load from a field snapshot file at "path"
// l2_normalize_to > 0 rescales the field to that l^2 norm after assembly.
struct DataSpec {
    std::string kind = "zero";
    double amplitude = 1.0;
    double width = 8.0;
    double re = 1.0;
    double im = 0.0;
    double t0 = 1.0;
    double p = 3.0;
    double l2_normalize_to = 0.0;
    std::string path;
};

struct ScanSpec {
    std::vector<double> eps;          // explicit grid, or:
    int eps_pow2_lo = 0;              // {2^-k : k = lo..hi}, decreasing
    int eps_pow2_hi = 0;
    double threshold_R = 0.1;         // A(t) threshold for lifespan scans
    std::string family = "blowup_reference";   // or "profile" (uses data/velocity)
    std::vector<int> L_grid;          // dichotomy experiment
    int trials = 100;                 // isomorphism experiment
};

// Errors carry the offending key path; thrown before any output is written.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The whole run description. Parsed strictly: unknown keys anywhere are
// ConfigErrors, as are missing required keys and out-of-domain values.
struct RunConfig {
    std::string experiment;   // simulate | lifespan | dichotomy | isomorphism | quadratic_demo
    LatticeBox box;
    EquationSpec equation;
    std::string metric_name = "identity";   // identity | one_plus_u2
    SolverConfig solver;
    DataSpec data;            // initial u
    DataSpec velocity;        // initial du/dt (default zero)
    bool velocity_given = false;
    ScanSpec scan;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::uint64_t hash = 0;   // FNV-1a of the canonical document (seed folded in)

    std::vector<double> eps_grid() const;   // resolved scan grid
};

RunConfig parse_config_text(const std::string& text,
                            std::optional<std::uint64_t> seed_override = {});
RunConfig parse_config_file(const std::string& path,
                            std::optional<std::uint64_t> seed_override = {});

// Assemble (u, du/dt) initial data from the config (seeded).
std::pair<Field, Field> realize_data(const RunConfig& cfg);

Field realize_field(const DataSpec& spec, const LatticeBox& box, Rng& rng);

} // namespace lattwave
