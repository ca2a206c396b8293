#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"
#include "epiwave/model.hpp"
#include "epiwave/study.hpp"

namespace epiwave::io {

// S,V,I,R for four compartments, y1..yn otherwise.
std::vector<std::string> compartment_names(std::size_t n);

// %.17g: enough digits for a lossless round trip of any double.
std::string format_double(double v);

struct SliceOptions {
    std::size_t front_compartment = kI;
    double front_threshold = 1e-6;  // relative to the compartment's initial sup
};

// slice_{t_index}.csv for every stored slice (columns a,x,<names>, rows over
// (a, x) with x fastest), boundary_x0.csv with the age-integrated
// compartments at x = 0 for every step, and fronts.csv. Creates dir.
void write_slices(const Run& run, const Mesh& m, const std::filesystem::path& dir, const SliceOptions& opts = {});

void write_fronts(const FrontTrajectory& front, const std::filesystem::path& file);

// sweep.csv, rate_fit.dat (gnuplot columns) and tau_<q>/fronts.csv per tau.
void write_sweep(const SweepResult& res, const std::filesystem::path& dir, bool gnuplot = true);

struct SliceTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

SliceTable read_slice(const std::filesystem::path& file);
// Values of a slice table on m. Throws ShapeMismatch when the (a, x)
// columns do not match the mesh nodes.
StateField slice_to_field(const SliceTable& t, const Mesh& m);

// Writes text to file, raising IoError on failure.
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace epiwave::io
