#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "epiwave/mesh.hpp"
#include "epiwave/model.hpp"
#include "epiwave/study.hpp"
#include "epiwave/svir.hpp"

namespace epiwave::io {

enum class ModelKind { Svir, Scalar };

struct MeshBlock {
    double t_max = 1.0;  // time
    double a_max = 1.0;  // age, same unit as time
    std::size_t na = 20;
    std::size_t nx = 21;

    bool operator==(const MeshBlock&) const = default;
};

// Scalar rates are per unit time, kernel_width in units of the unit spatial
// domain, totals in individuals.
struct SvirBlock {
    double c = 0.18564;
    double phi1 = 0.0052;
    double phi2 = 0.00062;
    double delta = 0.0018;
    double gamma = 0.278574;
    double alpha = 500.0;
    double kernel_width = 0.1;
    double total_S0 = 1000.0;
    double I0 = 10.0;
    NewbornRouting routing = NewbornRouting::Susceptible;

    bool operator==(const SvirBlock&) const = default;
};

enum class ScalarInitial { Cosine, Constant, File };

// One compartment with constant coefficients:
//   mortality mu (1/time), diffusivity sigma (length^2/time), fertility
//   birth_rate (1/time) and the self-coupling Lambda(y) = kernel * int int y.
// With initial: file, the slice CSV at initial_file (columns a,x,y1) gives y0
// on the mesh nodes.
struct ScalarBlock {
    double sigma = 0.1;
    double mu = 0.0;
    double birth_rate = 0.0;
    double kernel = 0.0;
    ScalarInitial initial = ScalarInitial::Cosine;
    double amplitude = 1.0;
    std::string initial_file;

    bool operator==(const ScalarBlock&) const = default;
};

struct ModelBlock {
    ModelKind kind = ModelKind::Svir;
    SvirBlock svir;
    ScalarBlock scalar;

    bool operator==(const ModelBlock&) const = default;
};

struct SolverBlock {
    double tau = 0.0;  // time
    double picard_tol = 1e-10;
    std::size_t picard_max = 100;
    std::size_t store_every = 1;
    std::size_t anderson_depth = 5;

    bool operator==(const SolverBlock&) const = default;
};

struct StudyBlock {
    std::vector<double> taus = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    double q1 = 1.0;
    double q2 = 1.0;
    double threshold = 1e-6;  // relative to the initial sup of age-integrated I
    InitialSlope initial_slope = InitialSlope::Zero;
    BirthSlopeLaw slope_law = BirthSlopeLaw::MatchZeroOrder;
    bool use_baseline_g1 = true;

    bool operator==(const StudyBlock&) const = default;
};

struct OutputBlock {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "gnuplot"};

    bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
    MeshBlock mesh;
    ModelBlock model;
    SolverBlock solver;
    StudyBlock study;
    OutputBlock output;

    bool operator==(const RunConfig&) const = default;
};

// Strict parse: unknown keys, wrong types and out-of-range values raise
// ConfigError with "source:line: field" diagnostics. A relative initial_file
// is resolved against base_dir.
RunConfig parse_config_string(const std::string& text, const std::string& source = "<string>",
                              const std::filesystem::path& base_dir = {});
// Reads the file; a missing file raises ConfigError naming the path.
RunConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const RunConfig& cfg);

Mesh to_mesh(const RunConfig& cfg);
SolverConfig to_solver(const RunConfig& cfg);
SvirParams to_svir(const RunConfig& cfg);
SweepOptions to_sweep_options(const RunConfig& cfg);

// Scalar model from the config on m; tau taken from the solver block.
ModelSpec scalar_spec(const RunConfig& cfg, const Mesh& m);

}  // namespace epiwave::io
