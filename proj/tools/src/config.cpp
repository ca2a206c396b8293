#include "epiwave/io/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "epiwave/birth.hpp"
#include "epiwave/error.hpp"
#include "epiwave/io/csv.hpp"
#include "epiwave/parabolic_model.hpp"

namespace epiwave::io {

namespace {

template <class E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<ModelKind> kKinds[] = {{ModelKind::Svir, "svir"}, {ModelKind::Scalar, "scalar"}};
constexpr EnumName<NewbornRouting> kRoutings[] = {{NewbornRouting::Susceptible, "susceptible"},
                                                  {NewbornRouting::Identity, "identity"},
                                                  {NewbornRouting::None, "none"}};
constexpr EnumName<ScalarInitial> kInitials[] = {
    {ScalarInitial::Cosine, "cosine"}, {ScalarInitial::Constant, "constant"}, {ScalarInitial::File, "file"}};
constexpr EnumName<InitialSlope> kSlopes[] = {{InitialSlope::Zero, "zero"}, {InitialSlope::Compatible, "compatible"}};
constexpr EnumName<BirthSlopeLaw> kLaws[] = {{BirthSlopeLaw::Compatible, "compatible"},
                                             {BirthSlopeLaw::MatchZeroOrder, "match_zero_order"}};

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& what) const {
        std::string where = source_;
        if (at.IsDefined() && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
        throw Error(ErrorCode::ConfigError, where + ": " + field + ": " + what);
    }

    // Requires a mapping whose keys all appear in allowed.
    void check_map(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) const {
        if (!node.IsMap()) fail(node, path, "expected a mapping");
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, join(path, key), "unknown key");
        }
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, double& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        if (!n.IsScalar()) fail(n, join(path, key), "expected a number");
        try {
            out = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(n, join(path, key), "expected a number, got '" + n.Scalar() + "'");
        }
        if (!std::isfinite(out)) fail(n, join(path, key), "must be finite");
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, std::size_t& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        long long v = 0;
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
            v = n.as<long long>();
        } catch (const YAML::Exception&) {
            fail(n, join(path, key), "expected a nonnegative integer");
        }
        if (v < 0) fail(n, join(path, key), "expected a nonnegative integer");
        out = static_cast<std::size_t>(v);
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, bool& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "not a scalar");
            out = n.as<bool>();
        } catch (const YAML::Exception&) {
            fail(n, join(path, key), "expected true or false");
        }
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, std::string& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        if (!n.IsScalar()) fail(n, join(path, key), "expected a string");
        out = n.Scalar();
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, std::vector<double>& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        if (!n.IsSequence()) fail(n, join(path, key), "expected a list of numbers");
        out.clear();
        for (std::size_t q = 0; q < n.size(); ++q) {
            const std::string field = join(path, key) + "[" + std::to_string(q) + "]";
            try {
                out.push_back(n[q].as<double>());
            } catch (const YAML::Exception&) {
                fail(n[q], field, "expected a number");
            }
        }
    }

    void get(const YAML::Node& map, const std::string& path, const char* key, std::vector<std::string>& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        if (!n.IsSequence()) fail(n, join(path, key), "expected a list of strings");
        out.clear();
        for (std::size_t q = 0; q < n.size(); ++q) {
            if (!n[q].IsScalar()) fail(n[q], join(path, key), "expected a string");
            out.push_back(n[q].Scalar());
        }
    }

    template <class E, std::size_t N>
    void get_enum(const YAML::Node& map, const std::string& path, const char* key, const EnumName<E> (&table)[N],
                  E& out) const {
        const YAML::Node n = map[key];
        if (!n) return;
        const std::string s = n.IsScalar() ? n.Scalar() : std::string();
        for (const auto& e : table)
            if (s == e.name) {
                out = e.value;
                return;
            }
        std::string opts;
        for (const auto& e : table) opts += std::string(opts.empty() ? "" : ", ") + e.name;
        fail(n, join(path, key), "expected one of " + opts);
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::string source_;
};

void require(bool ok, const Reader& r, const YAML::Node& at, const std::string& field, const std::string& what) {
    if (!ok) r.fail(at, field, what);
}

// An absent or empty block reads as undefined.
YAML::Node child(const YAML::Node& root, const char* key) {
    const YAML::Node n = root[key];
    if (!n || n.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return n;
}

RunConfig read_root(const YAML::Node& root, const Reader& r, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    if (root.IsNull()) return cfg;
    r.check_map(root, "", {"mesh", "model", "solver", "study", "output"});

    if (const YAML::Node mesh = child(root, "mesh"); mesh) {
        r.check_map(mesh, "mesh", {"t_max", "a_max", "na", "nx"});
        r.get(mesh, "mesh", "t_max", cfg.mesh.t_max);
        r.get(mesh, "mesh", "a_max", cfg.mesh.a_max);
        r.get(mesh, "mesh", "na", cfg.mesh.na);
        r.get(mesh, "mesh", "nx", cfg.mesh.nx);
        require(cfg.mesh.t_max > 0.0, r, mesh["t_max"], "mesh.t_max", "must be positive");
        require(cfg.mesh.a_max > 0.0, r, mesh["a_max"], "mesh.a_max", "must be positive");
        require(cfg.mesh.na >= 2, r, mesh["na"], "mesh.na", "must be at least 2");
        require(cfg.mesh.nx >= 3, r, mesh["nx"], "mesh.nx", "must be at least 3");
        try {
            (void)build_mesh(cfg.mesh.t_max, cfg.mesh.a_max, cfg.mesh.na, cfg.mesh.nx);
        } catch (const Error& e) {
            r.fail(mesh, "mesh", e.what());
        }
    }

    if (const YAML::Node model = child(root, "model"); model) {
        r.check_map(model, "model", {"kind", "svir", "scalar"});
        r.get_enum(model, "model", "kind", kKinds, cfg.model.kind);
        if (const YAML::Node s = child(model, "svir"); s) {
            r.check_map(s, "model.svir",
                        {"c", "phi1", "phi2", "delta", "gamma", "alpha", "kernel_width", "total_S0", "I0", "routing"});
            auto& b = cfg.model.svir;
            r.get(s, "model.svir", "c", b.c);
            r.get(s, "model.svir", "phi1", b.phi1);
            r.get(s, "model.svir", "phi2", b.phi2);
            r.get(s, "model.svir", "delta", b.delta);
            r.get(s, "model.svir", "gamma", b.gamma);
            r.get(s, "model.svir", "alpha", b.alpha);
            r.get(s, "model.svir", "kernel_width", b.kernel_width);
            r.get(s, "model.svir", "total_S0", b.total_S0);
            r.get(s, "model.svir", "I0", b.I0);
            r.get_enum(s, "model.svir", "routing", kRoutings, b.routing);
            for (const char* k : {"c", "delta", "gamma", "total_S0", "I0"}) {
                if (s[k]) require(s[k].as<double>() >= 0.0, r, s[k], std::string("model.svir.") + k, "must be nonnegative");
            }
            require(b.phi1 >= 0.0 && b.phi1 <= 1.0, r, s["phi1"], "model.svir.phi1", "must lie in [0, 1]");
            require(b.phi2 >= 0.0 && b.phi2 <= 1.0, r, s["phi2"], "model.svir.phi2", "must lie in [0, 1]");
            require(b.kernel_width > 0.0, r, s["kernel_width"], "model.svir.kernel_width", "must be positive");
        }
        if (const YAML::Node s = child(model, "scalar"); s) {
            r.check_map(s, "model.scalar",
                        {"sigma", "mu", "birth_rate", "kernel", "initial", "amplitude", "initial_file"});
            auto& b = cfg.model.scalar;
            r.get(s, "model.scalar", "sigma", b.sigma);
            r.get(s, "model.scalar", "mu", b.mu);
            r.get(s, "model.scalar", "birth_rate", b.birth_rate);
            r.get(s, "model.scalar", "kernel", b.kernel);
            r.get_enum(s, "model.scalar", "initial", kInitials, b.initial);
            r.get(s, "model.scalar", "amplitude", b.amplitude);
            r.get(s, "model.scalar", "initial_file", b.initial_file);
            require(b.sigma > 0.0, r, s["sigma"], "model.scalar.sigma", "must be positive");
            if (b.initial == ScalarInitial::File) {
                require(!b.initial_file.empty(), r, s["initial"], "model.scalar.initial_file",
                        "required when initial is 'file'");
                std::filesystem::path p(b.initial_file);
                if (p.is_relative() && !base_dir.empty()) b.initial_file = (base_dir / p).lexically_normal().string();
            }
        }
    }

    if (const YAML::Node s = child(root, "solver"); s) {
        r.check_map(s, "solver", {"tau", "picard_tol", "picard_max", "store_every", "anderson_depth"});
        r.get(s, "solver", "tau", cfg.solver.tau);
        r.get(s, "solver", "picard_tol", cfg.solver.picard_tol);
        r.get(s, "solver", "picard_max", cfg.solver.picard_max);
        r.get(s, "solver", "store_every", cfg.solver.store_every);
        r.get(s, "solver", "anderson_depth", cfg.solver.anderson_depth);
        require(cfg.solver.tau >= 0.0, r, s["tau"], "solver.tau", "must be nonnegative");
        require(cfg.solver.picard_tol > 0.0, r, s["picard_tol"], "solver.picard_tol", "must be positive");
        require(cfg.solver.picard_max >= 1, r, s["picard_max"], "solver.picard_max", "must be at least 1");
        require(cfg.solver.store_every >= 1, r, s["store_every"], "solver.store_every", "must be at least 1");
    }

    if (const YAML::Node s = child(root, "study"); s) {
        r.check_map(s, "study", {"taus", "q1", "q2", "threshold", "initial_slope", "slope_law", "use_baseline_g1"});
        r.get(s, "study", "taus", cfg.study.taus);
        r.get(s, "study", "q1", cfg.study.q1);
        r.get(s, "study", "q2", cfg.study.q2);
        r.get(s, "study", "threshold", cfg.study.threshold);
        r.get_enum(s, "study", "initial_slope", kSlopes, cfg.study.initial_slope);
        r.get_enum(s, "study", "slope_law", kLaws, cfg.study.slope_law);
        r.get(s, "study", "use_baseline_g1", cfg.study.use_baseline_g1);
        const YAML::Node taus = s["taus"];
        for (std::size_t q = 0; taus && q < cfg.study.taus.size(); ++q)
            require(cfg.study.taus[q] > 0.0, r, taus[q], "study.taus[" + std::to_string(q) + "]",
                    "must be positive");
        require(cfg.study.threshold > 0.0, r, s["threshold"], "study.threshold", "must be positive");
    }

    if (const YAML::Node s = child(root, "output"); s) {
        r.check_map(s, "output", {"directory", "formats"});
        r.get(s, "output", "directory", cfg.output.directory);
        r.get(s, "output", "formats", cfg.output.formats);
        const YAML::Node formats = s["formats"];
        for (std::size_t q = 0; formats && q < cfg.output.formats.size(); ++q) {
            const auto& f = cfg.output.formats[q];
            require(f == "csv" || f == "gnuplot", r, formats[q], "output.formats",
                    "unknown format '" + f + "' (csv, gnuplot)");
        }
    }
    return cfg;
}

}  // namespace

RunConfig parse_config_string(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir) {
    const Reader r(source);
    try {
        return read_root(YAML::Load(text), r, base_dir);
    } catch (const YAML::Exception& e) {
        const std::string where = e.mark.is_null() ? source : source + ":" + std::to_string(e.mark.line + 1);
        throw Error(ErrorCode::ConfigError, where + ": " + e.msg);
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_string(text.str(), path.string(), path.parent_path());
}

std::string serialize_config(const RunConfig& cfg) {
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;

    e << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "t_max" << YAML::Value << cfg.mesh.t_max;
    e << YAML::Key << "a_max" << YAML::Value << cfg.mesh.a_max;
    e << YAML::Key << "na" << YAML::Value << cfg.mesh.na;
    e << YAML::Key << "nx" << YAML::Value << cfg.mesh.nx;
    e << YAML::EndMap;

    const auto& sv = cfg.model.svir;
    const auto& sc = cfg.model.scalar;
    e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << name_of(kKinds, cfg.model.kind);
    e << YAML::Key << "svir" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "c" << YAML::Value << sv.c;
    e << YAML::Key << "phi1" << YAML::Value << sv.phi1;
    e << YAML::Key << "phi2" << YAML::Value << sv.phi2;
    e << YAML::Key << "delta" << YAML::Value << sv.delta;
    e << YAML::Key << "gamma" << YAML::Value << sv.gamma;
    e << YAML::Key << "alpha" << YAML::Value << sv.alpha;
    e << YAML::Key << "kernel_width" << YAML::Value << sv.kernel_width;
    e << YAML::Key << "total_S0" << YAML::Value << sv.total_S0;
    e << YAML::Key << "I0" << YAML::Value << sv.I0;
    e << YAML::Key << "routing" << YAML::Value << name_of(kRoutings, sv.routing);
    e << YAML::EndMap;
    e << YAML::Key << "scalar" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "sigma" << YAML::Value << sc.sigma;
    e << YAML::Key << "mu" << YAML::Value << sc.mu;
    e << YAML::Key << "birth_rate" << YAML::Value << sc.birth_rate;
    e << YAML::Key << "kernel" << YAML::Value << sc.kernel;
    e << YAML::Key << "initial" << YAML::Value << name_of(kInitials, sc.initial);
    e << YAML::Key << "amplitude" << YAML::Value << sc.amplitude;
    if (!sc.initial_file.empty()) e << YAML::Key << "initial_file" << YAML::Value << sc.initial_file;
    e << YAML::EndMap;
    e << YAML::EndMap;

    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "tau" << YAML::Value << cfg.solver.tau;
    e << YAML::Key << "picard_tol" << YAML::Value << cfg.solver.picard_tol;
    e << YAML::Key << "picard_max" << YAML::Value << cfg.solver.picard_max;
    e << YAML::Key << "store_every" << YAML::Value << cfg.solver.store_every;
    e << YAML::Key << "anderson_depth" << YAML::Value << cfg.solver.anderson_depth;
    e << YAML::EndMap;

    e << YAML::Key << "study" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "taus" << YAML::Value << YAML::Flow << cfg.study.taus;
    e << YAML::Key << "q1" << YAML::Value << cfg.study.q1;
    e << YAML::Key << "q2" << YAML::Value << cfg.study.q2;
    e << YAML::Key << "threshold" << YAML::Value << cfg.study.threshold;
    e << YAML::Key << "initial_slope" << YAML::Value << name_of(kSlopes, cfg.study.initial_slope);
    e << YAML::Key << "slope_law" << YAML::Value << name_of(kLaws, cfg.study.slope_law);
    e << YAML::Key << "use_baseline_g1" << YAML::Value << cfg.study.use_baseline_g1;
    e << YAML::EndMap;

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << cfg.output.directory;
    e << YAML::Key << "formats" << YAML::Value << YAML::Flow << cfg.output.formats;
    e << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

Mesh to_mesh(const RunConfig& cfg) { return build_mesh(cfg.mesh.t_max, cfg.mesh.a_max, cfg.mesh.na, cfg.mesh.nx); }

SolverConfig to_solver(const RunConfig& cfg) {
    SolverConfig s;
    s.picard_tol = cfg.solver.picard_tol;
    s.picard_max = cfg.solver.picard_max;
    s.store_every = cfg.solver.store_every;
    s.anderson_depth = cfg.solver.anderson_depth;
    return s;
}

SvirParams to_svir(const RunConfig& cfg) {
    SvirParams p = SvirParams::reference(cfg.mesh.a_max);
    const auto& b = cfg.model.svir;
    p.c = b.c;
    p.phi1 = b.phi1;
    p.phi2 = b.phi2;
    p.delta_d = b.delta;
    p.gamma = b.gamma;
    p.alpha = b.alpha;
    p.kernel_width = b.kernel_width;
    p.total_S0 = b.total_S0;
    p.I0 = b.I0;
    p.routing = b.routing;
    p.tau = cfg.solver.tau;
    return p;
}

SweepOptions to_sweep_options(const RunConfig& cfg) {
    SweepOptions o;
    o.q1 = cfg.study.q1;
    o.q2 = cfg.study.q2;
    o.use_baseline_g1 = cfg.study.use_baseline_g1;
    o.initial_slope = cfg.study.initial_slope;
    o.slope_law = cfg.study.slope_law;
    o.front_threshold = cfg.study.threshold;
    return o;
}

ModelSpec scalar_spec(const RunConfig& cfg, const Mesh& m) {
    const auto& b = cfg.model.scalar;
    const std::size_t ages = m.age_nodes();
    const std::size_t nx = m.nx;

    ModelSpec spec;
    spec.n = 1;
    spec.tau = cfg.solver.tau;
    spec.linear = LinearPart::zeros(1, m);
    for (std::size_t j = 0; j < ages; ++j) {
        for (std::size_t i = 0; i < nx; ++i) spec.linear.L(j, i, 0, 0) = b.mu;
        spec.linear.sigma_at(j, 0) = b.sigma;
    }
    if (b.kernel != 0.0) {
        spec.kernels.kernels.push_back(ScalarKernel::separable(std::vector<double>(ages, 1.0), {},
                                                               std::vector<double>(ages, 1.0), {}, nx,
                                                               std::vector<double>(nx * nx, 1.0)));
        spec.kernels.terms = {{0, 0, 0, b.kernel, 0}};
    }
    MatrixTable beta = MatrixTable::zeros(1, m);
    for (double& v : beta.data()) v = b.birth_rate;
    spec.births = make_compatible(beta, spec.linear, 1.0, 1.0, m);

    spec.y0 = StateField(1, ages, nx, false);
    switch (b.initial) {
        case ScalarInitial::Cosine:
            for (std::size_t j = 0; j < ages; ++j)
                for (std::size_t i = 0; i < nx; ++i)
                    spec.y0.value(0, j, i) = b.amplitude * std::cos(std::numbers::pi * m.x(i));
            break;
        case ScalarInitial::Constant:
            for (double& v : spec.y0.values()) v = b.amplitude;
            break;
        case ScalarInitial::File:
            spec.y0 = slice_to_field(read_slice(b.initial_file), m);
            if (spec.y0.n() != 1) {
                throw Error(ErrorCode::ConfigError, "initial_file '" + b.initial_file + "' must hold one compartment");
            }
            break;
    }
    spec.y1 = StateField(1, ages, nx, false);
    if (cfg.study.initial_slope == InitialSlope::Compatible && spec.tau > 0.0) spec.y1 = derived_initial_slope(spec, m);
    return spec;
}

}  // namespace epiwave::io
