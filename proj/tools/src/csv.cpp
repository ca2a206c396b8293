#include "epiwave/io/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epiwave/error.hpp"

namespace epiwave::io {

namespace fs = std::filesystem;

std::vector<std::string> compartment_names(std::size_t n) {
    if (n == 4) return {"S", "V", "I", "R"};
    std::vector<std::string> out;
    for (std::size_t c = 0; c < n; ++c) out.push_back("y" + std::to_string(c + 1));
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + file.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write to '" + file.string() + "' failed");
}

namespace {

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

std::string slice_csv(const StateField& y, const Mesh& m, const std::vector<std::string>& names) {
    std::string s = "a,x";
    for (const auto& n : names) s += "," + n;
    s += "\n";
    for (std::size_t j = 0; j < y.ages(); ++j)
        for (std::size_t i = 0; i < y.nx(); ++i) {
            s += format_double(m.age(j));
            s += ",";
            s += format_double(m.x(i));
            for (std::size_t c = 0; c < y.n(); ++c) {
                s += ",";
                s += format_double(y.value(c, j, i));
            }
            s += "\n";
        }
    return s;
}

std::string fronts_csv(const FrontTrajectory& front) {
    std::string s = "t,x\n";
    for (const auto& [t, x] : front) s += format_double(t) + "," + format_double(x) + "\n";
    return s;
}

}  // namespace

void write_fronts(const FrontTrajectory& front, const fs::path& file) { write_text(file, fronts_csv(front)); }

void write_slices(const Run& run, const Mesh& m, const fs::path& dir, const SliceOptions& opts) {
    make_dir(dir);
    if (run.slices.empty()) return;
    const std::size_t n = run.slices.front().n();
    const auto names = compartment_names(n);
    for (std::size_t s = 0; s < run.slices.size(); ++s)
        write_text(dir / ("slice_" + std::to_string(run.time_index[s]) + ".csv"), slice_csv(run.slices[s], m, names));

    std::string b = "t";
    for (const auto& nm : names) b += "," + nm;
    b += "\n";
    for (std::size_t k = 0; k < run.x0_totals.size(); ++k) {
        b += format_double(m.time(k));
        for (double v : run.x0_totals[k]) b += "," + format_double(v);
        b += "\n";
    }
    write_text(dir / "boundary_x0.csv", b);

    const std::size_t comp = opts.front_compartment < n ? opts.front_compartment : 0;
    const double scale = initial_front_scale(run, m, comp);
    FrontTrajectory front;
    if (scale > 0.0 && opts.front_threshold > 0.0) front = front_tracker(run, opts.front_threshold * scale, m, comp);
    write_fronts(front, dir / "fronts.csv");
}

void write_sweep(const SweepResult& res, const fs::path& dir, bool gnuplot) {
    make_dir(dir);
    std::string s = "tau,sup_diff,energy_diff,l2_H,h1_V,sup_t_V,sup_t_H_slope,asymptotic,max_sweeps\n";
    for (std::size_t q = 0; q < res.taus.size(); ++q) {
        const auto& r = res.reports[q];
        s += format_double(res.taus[q]) + "," + format_double(res.sup_diffs[q]) + "," +
             format_double(res.energy_diffs[q]) + "," + format_double(r.l2_H) + "," + format_double(r.h1_V) + "," +
             format_double(r.sup_t_V) + "," + format_double(r.sup_t_H_slope) + "," +
             (res.asymptotic[q] ? "1" : "0") + "," + std::to_string(res.max_sweeps[q]) + "\n";
    }
    write_text(dir / "sweep.csv", s);

    if (gnuplot) {
        std::string g = "# window floor " + format_double(res.floor) + "\n";
        if (res.sup_fit) {
            g += "# sup fit: log10(diff) = " + format_double(res.sup_fit->intercept) + " + " +
                 format_double(res.sup_fit->rate) + " * log10(tau), points " + std::to_string(res.sup_fit->points) +
                 ", rms residual " + format_double(res.sup_fit->residual) + "\n";
        } else {
            g += "# sup fit: none\n";
        }
        if (res.energy_fit) {
            g += "# energy fit: log10(diff) = " + format_double(res.energy_fit->intercept) + " + " +
                 format_double(res.energy_fit->rate) + " * log10(tau), points " +
                 std::to_string(res.energy_fit->points) + "\n";
        }
        g += "# tau sup_diff energy_diff sup_fit asymptotic\n";
        for (std::size_t q = 0; q < res.taus.size(); ++q) {
            const double fit = res.sup_fit ? std::pow(10.0, res.sup_fit->intercept + res.sup_fit->rate *
                                                                                        std::log10(res.taus[q]))
                                           : std::nan("");
            g += format_double(res.taus[q]) + " " + format_double(res.sup_diffs[q]) + " " +
                 format_double(res.energy_diffs[q]) + " " + format_double(fit) + " " +
                 (res.asymptotic[q] ? "1" : "0") + "\n";
        }
        write_text(dir / "rate_fit.dat", g);
    }

    for (std::size_t q = 0; q < res.front_positions.size(); ++q) {
        const fs::path sub = dir / ("tau_" + std::to_string(q));
        make_dir(sub);
        write_text(sub / "tau.txt", format_double(res.taus[q]) + "\n");
        write_fronts(res.front_positions[q], sub / "fronts.csv");
    }
}

SliceTable read_slice(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + file.string() + "'");
    SliceTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "'" + file.string() + "' is empty");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    if (t.header.size() < 3 || t.header[0] != "a" || t.header[1] != "x") {
        throw Error(ErrorCode::IoError, "'" + file.string() + "': header must start with a,x");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(p, &end);
            if (end == p || errno == ERANGE) {
                throw Error(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": bad number");
            }
            row.push_back(v);
            if (*end == ',') {
                p = end + 1;
            } else if (*end == '\0' || *end == '\r') {
                break;
            } else {
                throw Error(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": bad separator");
            }
        }
        if (row.size() != t.header.size()) {
            throw Error(ErrorCode::IoError, file.string() + ":" + std::to_string(lineno) + ": expected " +
                                                std::to_string(t.header.size()) + " columns");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

StateField slice_to_field(const SliceTable& t, const Mesh& m) {
    const std::size_t n = t.header.size() - 2;
    const std::size_t ages = m.age_nodes();
    if (t.rows.size() != ages * m.nx) {
        throw Error(ErrorCode::ShapeMismatch, "slice has " + std::to_string(t.rows.size()) + " rows, mesh needs " +
                                                  std::to_string(ages * m.nx));
    }
    StateField y(n, ages, m.nx, false);
    const double tol = 1e-9;
    for (std::size_t j = 0; j < ages; ++j)
        for (std::size_t i = 0; i < m.nx; ++i) {
            const auto& row = t.rows[j * m.nx + i];
            if (std::abs(row[0] - m.age(j)) > tol * std::max(1.0, m.a_max) || std::abs(row[1] - m.x(i)) > tol) {
                throw Error(ErrorCode::ShapeMismatch, "slice node (" + format_double(row[0]) + ", " +
                                                          format_double(row[1]) + ") is not a mesh node");
            }
            for (std::size_t c = 0; c < n; ++c) y.value(c, j, i) = row[c + 2];
        }
    return y;
}

}  // namespace epiwave::io
