#include "lattwave/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lattwave/norms.hpp"

namespace lattwave {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config error: " + msg); }

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
}

void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known) {
            std::string msg = "unknown key '" + item.key() + "' in " + where + " (allowed:";
            for (const char* a : allowed) msg += std::string(" ") + a;
            fail(msg + ")");
        }
    }
}

double num_at(const json& j, const std::string& where, const char* key,
              std::optional<double> def = {}) {
    if (!j.contains(key)) {
        if (def) return *def;
        fail(where + "." + key + " is required");
    }
    const json& v = j.at(key);
    if (!v.is_number()) fail(where + "." + key + " must be a number");
    return v.get<double>();
}

long long int_at(const json& j, const std::string& where, const char* key,
                 std::optional<long long> def = {}) {
    if (!j.contains(key)) {
        if (def) return *def;
        fail(where + "." + key + " is required");
    }
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
    return v.get<long long>();
}

std::string str_at(const json& j, const std::string& where, const char* key,
                   std::optional<std::string> def = {}) {
    if (!j.contains(key)) {
        if (def) return *def;
        fail(where + "." + key + " is required");
    }
    const json& v = j.at(key);
    if (!v.is_string()) fail(where + "." + key + " must be a string");
    return v.get<std::string>();
}

LatticeBox parse_box(const json& j) {
    expect_object(j, "box");
    expect_keys(j, "box", {"d", "L"});
    int d = int(int_at(j, "box", "d"));
    int L = int(int_at(j, "box", "L"));
    try {
        return make_box(d, L);
    } catch (const std::invalid_argument& e) {
        fail(std::string("box: ") + e.what());
    }
}

Nonlinearity parse_forcing(const json& j, int d) {
    expect_object(j, "equation.forcing");
    expect_keys(j, "equation.forcing", {"kind", "mu", "p", "axis"});
    std::string kind = str_at(j, "equation.forcing", "kind");
    if (kind == "none") {
        expect_keys(j, "equation.forcing", {"kind"});
        return Nonlinearity::none();
    }
    if (kind == "power") {
        expect_keys(j, "equation.forcing", {"kind", "mu", "p"});
        double mu = num_at(j, "equation.forcing", "mu");
        double p = num_at(j, "equation.forcing", "p");
        if (mu != 1.0 && mu != -1.0) fail("equation.forcing.mu must be +1 or -1");
        if (!(p > 1.0)) fail("equation.forcing.p must be > 1");
        return Nonlinearity::power(mu, p);
    }
    if (kind == "dt_squared") {
        expect_keys(j, "equation.forcing", {"kind"});
        return Nonlinearity::dt_squared();
    }
    if (kind == "dj_squared") {
        expect_keys(j, "equation.forcing", {"kind", "axis"});
        int axis = int(int_at(j, "equation.forcing", "axis", 1));
        if (axis < 1 || axis > d) fail("equation.forcing.axis out of range for the box");
        return Nonlinearity::dj_squared(axis);
    }
    fail("equation.forcing.kind must be one of none|power|dt_squared|dj_squared");
}

void parse_equation(const json& j, int d, RunConfig& cfg) {
    expect_object(j, "equation");
    expect_keys(j, "equation", {"kind", "metric", "forcing", "b", "bj", "c"});
    std::string kind = str_at(j, "equation", "kind");
    if (kind == "linear")
        cfg.equation.kind = EquationKind::linear;
    else if (kind == "semilinear")
        cfg.equation.kind = EquationKind::semilinear;
    else if (kind == "quasilinear")
        cfg.equation.kind = EquationKind::quasilinear;
    else
        fail("equation.kind must be linear|semilinear|quasilinear");

    cfg.metric_name = str_at(j, "equation", "metric", std::string("identity"));
    if (cfg.metric_name == "identity")
        cfg.equation.metric = nullptr;   // fast path
    else if (cfg.metric_name == "one_plus_u2")
        cfg.equation.metric = one_plus_u2_metric();
    else
        fail("equation.metric must be identity|one_plus_u2");

    if (j.contains("forcing")) cfg.equation.forcing = parse_forcing(j.at("forcing"), d);
    cfg.equation.b = num_at(j, "equation", "b", 0.0);
    cfg.equation.c = num_at(j, "equation", "c", 0.0);
    if (j.contains("bj")) {
        const json& bj = j.at("bj");
        if (!bj.is_array() || bj.size() > 3) fail("equation.bj must be an array of <= 3 numbers");
        for (std::size_t i = 0; i < bj.size(); ++i) {
            if (!bj[i].is_number()) fail("equation.bj entries must be numbers");
            cfg.equation.bj[i] = bj[i].get<double>();
        }
    }
}

void parse_solver(const json& j, RunConfig& cfg) {
    expect_object(j, "solver");
    expect_keys(j, "solver",
                {"dt", "t_max", "method", "picard", "blowup", "k", "sample_every"});
    cfg.solver.dt = num_at(j, "solver", "dt");
    cfg.solver.t_max = num_at(j, "solver", "t_max");
    if (!(cfg.solver.dt > 0.0)) fail("solver.dt must be positive");
    if (!(cfg.solver.t_max >= 0.0)) fail("solver.t_max must be >= 0");

    std::string method = str_at(j, "solver", "method", std::string("rk4"));
    if (method == "exact_linear")
        cfg.solver.method = Method::exact_linear;
    else if (method == "exponential_duhamel")
        cfg.solver.method = Method::exponential_duhamel;
    else if (method == "rk4")
        cfg.solver.method = Method::rk4;
    else if (method == "picard")
        cfg.solver.method = Method::picard;
    else
        fail("solver.method must be exact_linear|exponential_duhamel|rk4|picard");

    if (j.contains("picard")) {
        const json& p = j.at("picard");
        expect_object(p, "solver.picard");
        expect_keys(p, "solver.picard", {"max_iters", "tol", "window", "max_window_halvings"});
        cfg.solver.picard.max_iters = int(int_at(p, "solver.picard", "max_iters", 12));
        cfg.solver.picard.tol = num_at(p, "solver.picard", "tol", 1e-10);
        cfg.solver.picard.window = num_at(p, "solver.picard", "window", 1.0);
        cfg.solver.picard.max_window_halvings =
            int(int_at(p, "solver.picard", "max_window_halvings", 6));
    }
    if (j.contains("blowup")) {
        const json& b = j.at("blowup");
        expect_object(b, "solver.blowup");
        expect_keys(b, "solver.blowup", {"sup_threshold", "max_halvings"});
        cfg.solver.blowup.sup_threshold = num_at(b, "solver.blowup", "sup_threshold", 1e6);
        cfg.solver.blowup.max_halvings = int(int_at(b, "solver.blowup", "max_halvings", 2));
    }
    cfg.solver.k = int(int_at(j, "solver", "k", 0));
    if (cfg.solver.k != 0 && cfg.solver.k != 1) fail("solver.k must be 0 or 1");
    cfg.solver.sample_every = int(int_at(j, "solver", "sample_every", 1));
    if (cfg.solver.sample_every < 1) fail("solver.sample_every must be >= 1");
}

DataSpec parse_data(const json& j, const std::string& where) {
    expect_object(j, where);
    expect_keys(j, where,
                {"kind", "amplitude", "width", "re", "im", "t0", "p", "l2_normalize_to", "path"});
    DataSpec spec;
    spec.kind = str_at(j, where, "kind");
    if (spec.kind != "zero" && spec.kind != "constant" && spec.kind != "delta" &&
        spec.kind != "gaussian" && spec.kind != "random" && spec.kind != "blowup_reference" &&
        spec.kind != "snapshot")
        fail(where + ".kind must be one of zero|constant|delta|gaussian|random|"
                     "blowup_reference|snapshot");
    spec.amplitude = num_at(j, where, "amplitude", 1.0);
    spec.width = num_at(j, where, "width", 8.0);
    if (!(spec.width > 0.0)) fail(where + ".width must be positive");
    spec.re = num_at(j, where, "re", 1.0);
    spec.im = num_at(j, where, "im", 0.0);
    spec.t0 = num_at(j, where, "t0", 1.0);
    spec.p = num_at(j, where, "p", 3.0);
    spec.l2_normalize_to = num_at(j, where, "l2_normalize_to", 0.0);
    if (spec.l2_normalize_to < 0.0) fail(where + ".l2_normalize_to must be >= 0");
    spec.path = str_at(j, where, "path", std::string());
    if (spec.kind == "snapshot" && spec.path.empty()) fail(where + ".path required for snapshot");
    return spec;
}

void parse_scan(const json& j, RunConfig& cfg) {
    expect_object(j, "scan");
    expect_keys(j, "scan", {"eps", "eps_pow2", "threshold_R", "family", "L_grid", "trials"});
    if (j.contains("eps") && j.contains("eps_pow2"))
        fail("scan.eps and scan.eps_pow2 are mutually exclusive");
    if (j.contains("eps")) {
        const json& e = j.at("eps");
        if (!e.is_array() || e.empty()) fail("scan.eps must be a nonempty array");
        for (const auto& v : e) {
            if (!v.is_number()) fail("scan.eps entries must be numbers");
            cfg.scan.eps.push_back(v.get<double>());
        }
    }
    if (j.contains("eps_pow2")) {
        const json& e = j.at("eps_pow2");
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            fail("scan.eps_pow2 must be [k_lo, k_hi] integers");
        cfg.scan.eps_pow2_lo = e[0].get<int>();
        cfg.scan.eps_pow2_hi = e[1].get<int>();
        if (cfg.scan.eps_pow2_lo < 1 || cfg.scan.eps_pow2_hi < cfg.scan.eps_pow2_lo)
            fail("scan.eps_pow2 must satisfy 1 <= k_lo <= k_hi");
    }
    cfg.scan.threshold_R = num_at(j, "scan", "threshold_R", 0.1);
    if (!(cfg.scan.threshold_R > 0.0)) fail("scan.threshold_R must be positive");
    cfg.scan.family = str_at(j, "scan", "family", std::string("blowup_reference"));
    if (cfg.scan.family != "blowup_reference" && cfg.scan.family != "profile")
        fail("scan.family must be blowup_reference|profile");
    if (j.contains("L_grid")) {
        const json& g = j.at("L_grid");
        if (!g.is_array() || g.empty()) fail("scan.L_grid must be a nonempty array");
        for (const auto& v : g) {
            if (!v.is_number_integer()) fail("scan.L_grid entries must be integers");
            cfg.scan.L_grid.push_back(v.get<int>());
        }
    }
    cfg.scan.trials = int(int_at(j, "scan", "trials", 100));
    if (cfg.scan.trials < 1) fail("scan.trials must be >= 1");
}

} // namespace

std::vector<double> RunConfig::eps_grid() const {
    if (!scan.eps.empty()) return scan.eps;
    std::vector<double> grid;
    for (int k = scan.eps_pow2_lo; k >= 1 && k <= scan.eps_pow2_hi; ++k)
        grid.push_back(std::ldexp(1.0, -k));
    return grid;
}

RunConfig parse_config_text(const std::string& text, std::optional<std::uint64_t> seed_override) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    expect_object(j, "config");
    expect_keys(j, "config",
                {"experiment", "box", "equation", "solver", "data", "velocity", "scan", "seed",
                 "out"});

    RunConfig cfg;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            fail("seed must be an integer");
        long long s = j.at("seed").get<long long>();
        if (s < 0) fail("seed must be >= 0");
        cfg.seed = std::uint64_t(s);
    }
    if (seed_override) {
        cfg.seed = *seed_override;
        j["seed"] = *seed_override;   // folded into the canonical document
    }
    cfg.hash = fnv1a(j.dump());

    cfg.experiment = str_at(j, "config", "experiment");
    const bool is_sim = cfg.experiment == "simulate";
    const bool is_lifespan = cfg.experiment == "lifespan";
    const bool is_dichotomy = cfg.experiment == "dichotomy";
    const bool is_iso = cfg.experiment == "isomorphism";
    const bool is_quad = cfg.experiment == "quadratic_demo";
    if (!is_sim && !is_lifespan && !is_dichotomy && !is_iso && !is_quad)
        fail("experiment must be simulate|lifespan|dichotomy|isomorphism|quadratic_demo");

    cfg.out_dir = str_at(j, "config", "out", std::string("."));

    if (j.contains("box")) cfg.box = parse_box(j.at("box"));
    if (is_sim || is_lifespan || is_iso || is_quad) {
        if (cfg.box.total == 0) fail("box is required for this experiment");
    }

    if (j.contains("equation")) {
        if (is_quad) fail("quadratic_demo implies its equation; remove the equation section");
        parse_equation(j.at("equation"), cfg.box.d == 0 ? 3 : cfg.box.d, cfg);
    } else if (is_sim || is_lifespan) {
        fail("equation is required for this experiment");
    }

    if (j.contains("solver"))
        parse_solver(j.at("solver"), cfg);
    else if (is_sim || is_lifespan || is_quad)
        fail("solver is required for this experiment");

    if (j.contains("data"))
        cfg.data = parse_data(j.at("data"), "data");
    else if (is_sim || is_quad)
        fail("data is required for this experiment");
    if (j.contains("velocity")) {
        cfg.velocity = parse_data(j.at("velocity"), "velocity");
        cfg.velocity_given = true;
        if (cfg.data.kind == "blowup_reference")
            fail("velocity conflicts with data.kind=blowup_reference (it fixes du/dt)");
    }

    if (j.contains("scan"))
        parse_scan(j.at("scan"), cfg);
    else if (is_lifespan || is_dichotomy)
        fail("scan is required for this experiment");

    if (is_lifespan) {
        if (cfg.eps_grid().empty()) fail("lifespan scan needs scan.eps or scan.eps_pow2");
        if (cfg.scan.family == "blowup_reference" &&
            cfg.equation.forcing.kind != ForcingKind::power)
            fail("scan.family=blowup_reference needs equation.forcing.kind=power");
        if (cfg.scan.family == "profile" && !j.contains("data"))
            fail("scan.family=profile needs a data section");
    }
    if (is_dichotomy && cfg.scan.L_grid.empty()) fail("dichotomy needs scan.L_grid");

    return cfg;
}

RunConfig parse_config_file(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail("cannot open config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), seed_override);
}

Field realize_field(const DataSpec& spec, const LatticeBox& box, Rng& rng) {
    Field out(box);
    if (spec.kind == "zero") {
        // fall through: normalizing a zero field must still fail below
    } else if (spec.kind == "constant") {
        out = constant_field(box, spec.amplitude * cplx(spec.re, spec.im));
    } else if (spec.kind == "delta") {
        out = scale(delta_field(box), cplx(spec.amplitude, 0.0));
    } else if (spec.kind == "gaussian") {
        for (std::int64_t i = 0; i < box.total; ++i) {
            Coord m = site_coords(box, i);
            double m2 = 0.0;
            for (int j = 0; j < box.d; ++j)
                m2 += double(m[std::size_t(j)]) * double(m[std::size_t(j)]);
            out[i] = spec.amplitude * std::exp(-m2 / spec.width);
        }
    } else if (spec.kind == "random") {
        for (std::int64_t i = 0; i < box.total; ++i) out[i] = spec.amplitude * rng.cnormal();
    } else if (spec.kind == "snapshot") {
        try {
            out = load_snapshot(spec.path);
        } catch (const std::exception& e) {
            fail("snapshot " + spec.path + ": " + e.what());
        }
        if (!(out.box == box)) fail("snapshot " + spec.path + " has a different box");
        if (spec.amplitude != 1.0) out = scale(out, cplx(spec.amplitude, 0.0));
    } else {
        fail("realize_field cannot build kind=" + spec.kind + " directly");
    }
    if (spec.l2_normalize_to > 0.0) {
        double n = lp_alpha_norm(out, NormSpec::l2());
        if (n == 0.0) fail("cannot normalize a zero field");
        out = scale(out, cplx(spec.l2_normalize_to / n, 0.0));
    }
    return out;
}

std::pair<Field, Field> realize_data(const RunConfig& cfg) {
    Rng rng(cfg.seed);
    if (cfg.data.kind == "blowup_reference") {
        BlowupReference ref = blowup_reference(cfg.data.p, cfg.data.t0);
        cplx a(cfg.data.amplitude, 0.0);
        return {constant_field(cfg.box, a * ref.u0), constant_field(cfg.box, a * ref.ut0)};
    }
    Field u = realize_field(cfg.data, cfg.box, rng);
    Field ut = cfg.velocity_given ? realize_field(cfg.velocity, cfg.box, rng)
                                  : zero_field(cfg.box);
    return {u, ut};
}

} // namespace lattwave
